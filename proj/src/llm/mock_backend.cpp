#include "wildlong/llm/mock_backend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "wildlong/hash.hpp"
#include "wildlong/llm/templates.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/rng.hpp"
#include "wildlong/vocabulary.hpp"

namespace wildlong::llm {

namespace {

using meta::MetaField;

std::string_view between(std::string_view text, std::string_view start, std::string_view end) {
  auto b = text.find(start);
  if (b == std::string_view::npos) return {};
  b += start.size();
  auto e = end.empty() ? std::string_view::npos : text.find(end, b);
  if (e == std::string_view::npos) e = text.size();
  return text.substr(b, e - b);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string decapitalize(std::string s) {
  if (s.size() > 1 && std::islower(static_cast<unsigned char>(s[1]))) {
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  }
  return s;
}

std::vector<std::string> words(std::string_view text, std::size_t limit) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (out.size() < limit && in >> w) {
    if (w.starts_with("=====")) continue;
    out.push_back(w);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string malformed_reply() {
  return "I'm sorry, but I can't complete that request in the requested format.";
}

std::string respond_extract(std::string_view prompt, Rng& rng) {
  const std::string conversation = lower(between(prompt, "\nConversation\n", "\n\nYour Tasks\n"));
  std::size_t best_pos = std::string::npos;
  std::size_t group = 0;
  std::string_view doc_type;
  for (std::size_t g = 0; g < vocab::kDocTypes.size(); ++g) {
    for (auto s : vocab::kDocTypes[g]) {
      const auto pos = conversation.find(s);
      if (pos != std::string::npos && pos < best_pos) {
        best_pos = pos;
        group = g;
        doc_type = s;
      }
    }
  }
  if (doc_type.empty()) return std::string(meta::kNoLongDocument);

  const bool bold = uniform_index(rng, 3) == 0;
  std::string out;
  auto header = [&](std::string_view h) {
    if (!out.empty()) out += '\n';
    out += bold ? "**" + std::string(h) + ":**\n" : std::string(h) + ":\n";
  };
  auto items = [&](const std::vector<std::string>& values) {
    if (values.empty()) {
      out += "NA\n";
      return;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      out += std::to_string(i + 1) + ". " + capitalize(values[i]) + "\n";
    }
  };
  auto pick = [&](MetaField f, std::size_t lo, std::size_t hi) {
    const auto pool = vocab::field_values(f);
    const std::size_t n = lo + uniform_index(rng, hi - lo + 1);
    std::vector<std::string> chosen;
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = (group * 2 + uniform_index(rng, 4)) % pool.size();
      if (used.insert(idx).second) chosen.emplace_back(pool[idx]);
    }
    return chosen;
  };

  header("Document Type");
  std::vector<std::string> types{std::string(doc_type)};
  if (uniform_index(rng, 5) == 0) {
    auto other = vocab::kDocTypes[group][uniform_index(rng, vocab::kVariantsPerGroup)];
    if (other != doc_type) types.emplace_back(other);
  }
  items(types);

  static constexpr std::string_view kPurposes[] = {"educational purposes", "research",
                                                   "entertainment", "decision-making"};
  std::vector<std::string> tasks;
  for (MetaField f : meta::kAllFields) {
    if (!meta::graph_eligible(f)) continue;
    header(meta::field_header(f));
    auto values = pick(f, f == MetaField::kConstraint ? 0 : 1, 3);
    if (f == MetaField::kTasksOrRequests) tasks = values;
    items(values);
    if (f == MetaField::kTasksOrRequests) {
      header("Purpose of Query");
      items({std::string(kPurposes[uniform_index(rng, std::size(kPurposes))])});
    }
  }
  header(meta::field_header(MetaField::kSimplifiedInstruction));
  out += capitalize(tasks.front()) + " of this " + std::string(doc_type) + ".\n";
  return out;
}

std::string respond_path_to_instruction(std::string_view prompt, Rng& rng) {
  const std::string doc_type(between(prompt, "interacting with a long ", ", but you do not"));
  const auto criteria = between(
      prompt, "Generate a new query or instruction that aligns with the given meta information criteria:\n",
      "");
  std::map<std::string, std::string> by_header;
  std::istringstream in{std::string(criteria)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("- ")) continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    by_header.emplace(line.substr(2, colon - 2), line.substr(colon + 2));
  }
  auto get = [&](MetaField f, std::string_view fallback) {
    auto it = by_header.find(std::string(meta::field_header(f)));
    return it == by_header.end() ? std::string(fallback) : it->second;
  };
  const std::string task = get(MetaField::kTasksOrRequests, "go through the main points");
  const std::string profile = get(MetaField::kUserProfile, "reader");
  const std::string context = get(MetaField::kContext, "");
  const std::string format = get(MetaField::kOutputFormat, "a short answer");
  const std::string sentiment = get(MetaField::kSentiment, "");
  const std::string constraint = get(MetaField::kConstraint, "");
  const std::string intention = get(MetaField::kUserIntention, "");

  auto tail = [&](const std::string& s, std::string_view prefix) {
    return s.empty() ? std::string() : std::string(prefix) + s;
  };
  static constexpr std::string_view kOpeners[] = {"Could you", "Please", "I need you to",
                                                  "Would you"};
  std::vector<std::string> queries;
  queries.push_back(std::string(kOpeners[uniform_index(rng, 4)]) + " " + task + " for this " +
                    doc_type + tail(context, " since I'm ") + "? Present it as " + format +
                    tail(constraint, ", with this constraint: ") + ".");
  queries.push_back("As a " + profile + tail(intention, " who is ") + ", I'd like you to " + task +
                    " in the " + doc_type + ". Keep the tone " +
                    (sentiment.empty() ? std::string("neutral") : sentiment) + ".");
  queries.push_back("Using the " + doc_type + ", " + task + " and explain your reasoning in " +
                    format + tail(constraint, "; remember: ") + ".");
  std::string out = "Here are three queries:\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out += std::to_string(i + 1) + ". " + queries[i] + "\n";
  }
  return out;
}

std::string respond_instruct_response(std::string_view prompt) {
  const auto doc = between(prompt, "Long Document:\n", "\n\nExample Query/Instruction:\n");
  std::string example(between(prompt, "Example Query/Instruction:\n", "\n\nYour Task:\n"));
  while (!example.empty() && std::isspace(static_cast<unsigned char>(example.back()))) example.pop_back();
  const auto opening = words(doc, 6);
  const auto body = words(doc, 60);
  std::string instruction =
      "Focusing on the document that opens with \"" + join(opening, " ") + "\", " +
      decapitalize(example);
  std::string response = "Based on the document: " + join(body, " ") +
                         ". In short, the material addresses the request by drawing on the points above.";
  return "Query/Instruction: " + instruction + "\nResponse: " + response + "\n";
}

std::string respond_single_to_multi(std::string_view prompt) {
  std::string doc_type(between(prompt, "The document type is ", ". Avoid"));
  const auto block = between(prompt, "Original tasks or requests\n", "\n\nOutput format");
  static constexpr std::string_view kOps[] = {
      "{} for each document and compare the results",
      "{} by integrating information from all of the {}s into one account",
      "{} and collect the findings from every document in a single list",
      "{} and cross-check the claims between the documents",
      "{} and identify where the documents agree",
      "{} and highlight where the documents disagree",
      "{} and propose a solution that draws on every document",
      "{} and recommend a decision supported by all the documents",
      "{} while exploring connections between the {}s",
      "{} and identify trends that recur across the {}s",
      "{} and form a new hypothesis from the combined material",
      "{} and invent a new idea that combines the documents"};
  std::vector<std::string> tasks;
  std::istringstream in{std::string(block)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view s = line;
    while (!s.empty() && (s.front() == '-' || s.front() == ' ' || std::isdigit(static_cast<unsigned char>(s.front())) ||
                          s.front() == '.'))
      s.remove_prefix(1);
    if (!s.empty()) tasks.emplace_back(s);
  }
  std::string out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::string op(kOps[fnv1a64(tasks[i]) % std::size(kOps)]);
    std::string modified;
    bool first = true;
    for (std::size_t p = 0; p < op.size(); ++p) {
      if (op.compare(p, 2, "{}") == 0) {
        modified += first ? tasks[i] : doc_type;
        first = false;
        ++p;
      } else {
        modified += op[p];
      }
    }
    out += std::to_string(i + 1) + ". " + tasks[i] + ": " + capitalize(modified) + "\n";
  }
  return out;
}

std::string respond_cluster_label(std::string_view prompt) {
  const auto list = between(prompt, "\nDescriptions\n- ", "\n");
  return std::string(list);
}

}  // namespace

std::string MockBackend::respond(std::string_view prompt) const {
  const std::uint64_t h = fnv1a64(prompt);
  Rng rng = make_rng(h);
  if (is_cluster_label_prompt(prompt)) return respond_cluster_label(prompt);
  const auto family = detect_template(prompt);
  const bool malformed =
      options_.malformed_rate > 0.0 &&
      static_cast<double>(mix64(h) % 1'000'000) < options_.malformed_rate * 1'000'000.0;
  if (family && malformed) return malformed_reply();
  if (!family) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string tag;
    for (int i = 60; i >= 0; i -= 4) tag.push_back(kHex[(h >> i) & 0xf]);
    return "mock reply " + tag;
  }
  switch (*family) {
    case TemplateId::kExtractMeta: return respond_extract(prompt, rng);
    case TemplateId::kPathToInstruction: return respond_path_to_instruction(prompt, rng);
    case TemplateId::kInstructResponse: return respond_instruct_response(prompt);
    case TemplateId::kSingleToMulti: return respond_single_to_multi(prompt);
  }
  return {};
}

BackendReply MockBackend::send(const CompletionRequest& request) {
  return BackendReply::success(respond(request.prompt));
}

}  // namespace wildlong::llm
