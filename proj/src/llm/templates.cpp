#include "wildlong/llm/templates.hpp"

#include <algorithm>
#include <set>

#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"

namespace wildlong::llm {

namespace detail {
// Generated from assets/templates by CMake (templates_embedded.cpp).
extern const std::string_view kTemplateBodies[4];
}  // namespace detail

namespace {

constexpr std::string_view kNames[] = {"extract_meta", "path_to_instruction",
                                       "instruct_response", "single_to_multi"};

constexpr std::string_view kClusterLabelHeader =
    "You are naming one cluster of free-form document type descriptions.";

}  // namespace

std::string_view template_name(TemplateId id) { return kNames[static_cast<int>(id)]; }

std::optional<TemplateId> template_from_name(std::string_view name) {
  for (TemplateId id : kAllTemplates) {
    if (template_name(id) == name) return id;
  }
  return std::nullopt;
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while ((pos = body.find("${", pos)) != std::string::npos) {
    const auto end = body.find('}', pos + 2);
    if (end == std::string::npos) break;
    std::string name = body.substr(pos + 2, end - pos - 2);
    if (seen.insert(name).second) names.push_back(std::move(name));
    pos = end + 1;
  }
  return names;
}

std::string PromptTemplate::digest() const { return sha256_hex(body); }

const PromptTemplate& builtin_template(TemplateId id) {
  static const auto templates = [] {
    std::array<PromptTemplate, 4> t;
    for (TemplateId tid : kAllTemplates) {
      const auto i = static_cast<std::size_t>(tid);
      t[i] = PromptTemplate{tid, 1, std::string(detail::kTemplateBodies[i])};
    }
    return t;
  }();
  return templates[static_cast<std::size_t>(id)];
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  const auto names = tmpl.placeholders();
  for (const auto& name : names) {
    if (!bindings.contains(name)) {
      throw InputError("missing binding '" + name + "' for template " +
                       std::string(template_name(tmpl.id)));
    }
  }
  for (const auto& [name, value] : bindings) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw InputError("unexpected binding '" + name + "' for template " +
                       std::string(template_name(tmpl.id)));
    }
  }
  std::string out;
  out.reserve(tmpl.body.size());
  std::size_t pos = 0;
  while (true) {
    const auto start = tmpl.body.find("${", pos);
    if (start == std::string::npos) break;
    const auto end = tmpl.body.find('}', start + 2);
    if (end == std::string::npos) break;
    out.append(tmpl.body, pos, start - pos);
    out += bindings.find(std::string_view(tmpl.body).substr(start + 2, end - start - 2))->second;
    pos = end + 1;
  }
  out.append(tmpl.body, pos);
  return out;
}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
  return render(builtin_template(id), bindings);
}

void verify_template_assets(const std::filesystem::path& dir) {
  for (TemplateId id : kAllTemplates) {
    const auto& tmpl = builtin_template(id);
    const auto file =
        dir / (std::string(template_name(id)) + ".v" + std::to_string(tmpl.version) + ".txt");
    if (!std::filesystem::exists(file)) {
      throw FormatError("template asset missing: " + file.string());
    }
    if (sha256_hex(read_file(file)) != tmpl.digest()) {
      throw FormatError("template asset " + file.string() + " does not match embedded digest " +
                        tmpl.digest());
    }
  }
}

std::optional<TemplateId> detect_template(std::string_view prompt) {
  for (TemplateId id : kAllTemplates) {
    const auto& body = builtin_template(id).body;
    const auto first_line = std::string_view(body).substr(0, body.find('\n'));
    // Bodies may open with a placeholder-bearing line; compare the text before it.
    const auto fixed = first_line.substr(0, first_line.find("${"));
    if (!fixed.empty() && prompt.starts_with(fixed)) return id;
  }
  return std::nullopt;
}

std::string render_cluster_label_prompt(const std::vector<std::string>& exemplars) {
  std::string out(kClusterLabelHeader);
  out +=
      "\nThe descriptions below were grouped together. Reply with one short, general document "
      "type label that covers all of them. Output only the label.\n\nDescriptions\n";
  for (const auto& e : exemplars) out += "- " + e + "\n";
  return out;
}

bool is_cluster_label_prompt(std::string_view prompt) {
  return prompt.starts_with(kClusterLabelHeader);
}

}  // namespace wildlong::llm
