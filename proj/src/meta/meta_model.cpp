#include "wildlong/meta/meta_model.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <unordered_map>

#include "wildlong/error.hpp"

namespace wildlong::meta {

namespace {

struct FieldNames {
  std::string_view key;
  std::string_view header;
};

constexpr std::array<FieldNames, kFieldCount> kNames = {{
    {"document_type", "Document Type"},
    {"tasks_or_requests", "Task or Request"},
    {"user_intention", "User Intention"},
    {"user_profile", "User Profile"},
    {"language_style", "User's Language Style"},
    {"context", "Context"},
    {"knowledge_for_user", "Knowledge/Commonsense Involved for User"},
    {"knowledge_for_chatbot", "Knowledge/Commonsense Involved for Chatbot"},
    {"long_context_capability", "Long Context Capability Involved"},
    {"output_format", "Output Format"},
    {"sentiment", "Sentiment"},
    {"constraint_of_request", "Constraint of the Request"},
    {"simplified_instruction", "Simplified Instruction by User"},
}};

constexpr std::string_view kPurposeKey = "purpose_of_query";
constexpr std::string_view kPurposeHeader = "Purpose of Query";

// Section identity while parsing: a MetaField or the auxiliary purpose field.
enum class Section { kField, kPurpose };

struct SectionId {
  Section kind;
  MetaField field;
};

// Header text reduced to lowercase alphanumerics, so bolding, apostrophes,
// slashes and spacing variants all collapse to one key.
std::string header_key(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const std::unordered_map<std::string, SectionId>& header_table() {
  static const auto table = [] {
    std::unordered_map<std::string, SectionId> t;
    auto add = [&](std::string_view alias, SectionId id) { t.emplace(header_key(alias), id); };
    auto field = [](MetaField f) { return SectionId{Section::kField, f}; };
    for (MetaField f : kAllFields) {
      add(field_header(f), field(f));
      add(field_key(f), field(f));
    }
    add("Document Types", field(MetaField::kDocumentType));
    add("Doc Type", field(MetaField::kDocumentType));
    add("Tasks or Requests", field(MetaField::kTasksOrRequests));
    add("Task or Requests", field(MetaField::kTasksOrRequests));
    add("Tasks", field(MetaField::kTasksOrRequests));
    add("User Intentions", field(MetaField::kUserIntention));
    add("Language Style", field(MetaField::kLanguageStyle));
    add("User Language Style", field(MetaField::kLanguageStyle));
    add("Knowledge/Commonsense for User", field(MetaField::kKnowledgeForUser));
    add("Knowledge/Commonsense for Chatbot", field(MetaField::kKnowledgeForChatbot));
    add("Long Context Capability", field(MetaField::kLongContextCapability));
    add("Long Context Capabilities Involved", field(MetaField::kLongContextCapability));
    add("Constraints of the Request", field(MetaField::kConstraint));
    add("Constraint of Request", field(MetaField::kConstraint));
    add("Constraints", field(MetaField::kConstraint));
    add("Simplified Instruction", field(MetaField::kSimplifiedInstruction));
    SectionId purpose{Section::kPurpose, MetaField::kDocumentType};
    add(kPurposeHeader, purpose);
    add(kPurposeKey, purpose);
    add("Purpose of the Query", purpose);
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Removes markdown emphasis/heading decoration around a line.
std::string strip_markup(std::string_view s) {
  s = trim(s);
  while (!s.empty() && s.front() == '#') s.remove_prefix(1);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '*' || (s[i] == '_' && i + 1 < s.size() && s[i + 1] == '_')) {
      if (s[i] == '_') ++i;
      continue;
    }
    out.push_back(s[i]);
  }
  return std::string(trim(out));
}

bool is_sentinel(std::string_view normalized) {
  return normalized == "na" || normalized == "n/a";
}

const std::regex& numbered_item_re() {
  static const std::regex re(R"(^\(?(\d{1,3})[.)]\s+(.*)$)");
  return re;
}

}  // namespace

std::string_view field_key(MetaField f) { return kNames[static_cast<std::size_t>(f)].key; }

std::string_view field_header(MetaField f) { return kNames[static_cast<std::size_t>(f)].header; }

std::optional<MetaField> field_from_key(std::string_view key) {
  for (MetaField f : kAllFields) {
    if (field_key(f) == key) return f;
  }
  return std::nullopt;
}

std::optional<MetaField> field_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kFieldCount)) return std::nullopt;
  return static_cast<MetaField>(index);
}

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::optional<MetaValue> try_normalize_value(std::string_view raw) {
  std::string n = normalize_text(raw);
  if (n.empty() || is_sentinel(n)) return std::nullopt;
  return MetaValue(std::string(raw), std::move(n));
}

MetaValue normalize_value(std::string_view raw) {
  auto v = try_normalize_value(raw);
  if (!v) throw InputError("meta value normalizes to empty or NA: '" + std::string(raw) + "'");
  return *std::move(v);
}

ExtractionResult parse_meta_extraction(std::string_view raw, std::string conversation_id) {
  if (normalize_text(raw).find(normalize_text(kNoLongDocument)) != std::string::npos) {
    return NoLongDocument{};
  }

  const auto& headers = header_table();
  std::optional<SectionId> current;
  std::string first_unrecognized;
  std::size_t sections_seen = 0;
  bool saw_doc_type_section = false;

  MetaRecord record;
  record.conversation_id = std::move(conversation_id);
  std::vector<std::string> instruction_parts;

  auto add_item = [&](std::string_view text) {
    std::string item = strip_markup(text);
    if (!current) return;
    if (current->kind == Section::kPurpose) {
      if (auto v = try_normalize_value(item)) record.purpose_of_query.push_back(*std::move(v));
      return;
    }
    switch (current->field) {
      case MetaField::kSimplifiedInstruction:
        if (!is_sentinel(normalize_text(item)) && !item.empty()) instruction_parts.push_back(item);
        break;
      case MetaField::kDocumentType:
        if (auto v = try_normalize_value(item)) {
          if (std::find(record.doc_types.begin(), record.doc_types.end(), *v) ==
              record.doc_types.end()) {
            record.doc_types.push_back(*std::move(v));
          }
        }
        break;
      default:
        if (auto v = try_normalize_value(item)) record.values[current->field].push_back(*std::move(v));
        break;
    }
  };

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;

    std::string cleaned = strip_markup(line);
    if (cleaned.empty()) continue;

    std::smatch m;
    if (std::regex_match(cleaned, m, numbered_item_re())) {
      if (current) {
        add_item(m[2].str());
      } else if (first_unrecognized.empty()) {
        first_unrecognized = std::string(line);
      }
      continue;
    }
    if (cleaned.size() > 1 && (cleaned[0] == '-' || cleaned[0] == '*') && cleaned[1] == ' ') {
      if (current) {
        add_item(std::string_view(cleaned).substr(2));
      } else if (first_unrecognized.empty()) {
        first_unrecognized = std::string(line);
      }
      continue;
    }

    const auto colon = cleaned.find(':');
    if (colon != std::string::npos) {
      const std::string key = header_key(std::string_view(cleaned).substr(0, colon));
      if (auto it = headers.find(key); it != headers.end()) {
        current = it->second;
        ++sections_seen;
        if (current->kind == Section::kField && current->field == MetaField::kDocumentType) {
          saw_doc_type_section = true;
        }
        std::string_view rest = trim(std::string_view(cleaned).substr(colon + 1));
        if (!rest.empty()) add_item(rest);
        continue;
      }
      if (trim(std::string_view(cleaned).substr(colon + 1)).empty()) {
        throw ParseError("unrecognized section header", std::string(line));
      }
    } else if (auto it = headers.find(header_key(cleaned)); it != headers.end()) {
      current = it->second;
      ++sections_seen;
      if (current->kind == Section::kField && current->field == MetaField::kDocumentType) {
        saw_doc_type_section = true;
      }
      continue;
    }
    if (current) {
      add_item(cleaned);
    } else if (first_unrecognized.empty()) {
      first_unrecognized = std::string(line);
    }
  }

  if (sections_seen == 0) {
    throw ParseError("no recognizable sections in extraction output", first_unrecognized);
  }
  if (!saw_doc_type_section || record.doc_types.empty()) {
    throw ParseError("extraction output has no document type", first_unrecognized);
  }
  if (record.doc_types.size() > 2) record.doc_types.erase(record.doc_types.begin() + 2, record.doc_types.end());
  if (!instruction_parts.empty()) {
    std::string joined;
    for (const auto& part : instruction_parts) {
      if (!joined.empty()) joined += ' ';
      joined += part;
    }
    record.simplified_instruction = std::move(joined);
  }
  return record;
}

std::string format_meta_extraction(const MetaRecord& record) {
  std::string out;
  auto section = [&](std::string_view header, const std::vector<MetaValue>& items) {
    if (!out.empty()) out += '\n';
    out += header;
    out += ":\n";
    if (items.empty()) {
      out += "NA\n";
      return;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += std::to_string(i + 1) + ". " + items[i].normalized() + "\n";
    }
  };
  static const std::vector<MetaValue> kEmpty;
  for (MetaField f : kAllFields) {
    if (f == MetaField::kDocumentType) {
      section(field_header(f), record.doc_types);
      continue;
    }
    if (f == MetaField::kSimplifiedInstruction) {
      out += '\n';
      out += field_header(f);
      out += ":\n";
      if (record.simplified_instruction && !record.simplified_instruction->empty()) {
        std::string text = *record.simplified_instruction;
        std::replace(text.begin(), text.end(), '\n', ' ');
        out += "1. " + text + "\n";
      } else {
        out += "NA\n";
      }
      continue;
    }
    auto it = record.values.find(f);
    section(field_header(f), it == record.values.end() ? kEmpty : it->second);
    if (f == MetaField::kTasksOrRequests) section(kPurposeHeader, record.purpose_of_query);
  }
  return out;
}

std::vector<GraphItem> graph_items(const MetaRecord& record) {
  std::vector<GraphItem> items;
  for (const auto& [field, values] : record.values) {
    if (!graph_eligible(field)) continue;
    std::set<std::string_view> seen;
    for (const auto& v : values) {
      if (seen.insert(v.normalized()).second) items.push_back({field, v});
    }
  }
  return items;
}

std::optional<SeedPath> make_seed_path(const MetaRecord& record) {
  if (!record.simplified_instruction || record.simplified_instruction->empty()) return std::nullopt;
  auto items = graph_items(record);
  if (items.empty()) return std::nullopt;
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return SeedPath{record.conversation_id, std::move(items), *record.simplified_instruction};
}

std::string describe_items(const std::vector<GraphItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += "- ";
    out += field_header(item.field);
    out += ": ";
    out += item.value.normalized();
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const MetaRecord& record) {
  nlohmann::json j;
  j["conversation_id"] = record.conversation_id;
  auto values_json = [](const std::vector<MetaValue>& vs) {
    auto arr = nlohmann::json::array();
    for (const auto& v : vs) arr.push_back(v.normalized());
    return arr;
  };
  j[std::string(field_key(MetaField::kDocumentType))] = values_json(record.doc_types);
  for (const auto& [field, values] : record.values) {
    if (!values.empty()) j[std::string(field_key(field))] = values_json(values);
  }
  if (!record.purpose_of_query.empty()) j[std::string(kPurposeKey)] = values_json(record.purpose_of_query);
  if (record.simplified_instruction) {
    j[std::string(field_key(MetaField::kSimplifiedInstruction))] = *record.simplified_instruction;
  }
  return j;
}

MetaRecord meta_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("meta record must be a JSON object");
  MetaRecord record;
  if (auto it = j.find("conversation_id"); it != j.end() && it->is_string()) {
    record.conversation_id = it->get<std::string>();
  }
  auto read_values = [&](std::string_view key) {
    std::vector<MetaValue> out;
    auto it = j.find(std::string(key));
    if (it == j.end()) return out;
    if (it->is_string()) {
      if (auto v = try_normalize_value(it->get<std::string>())) out.push_back(*std::move(v));
      return out;
    }
    if (!it->is_array()) throw InputError("field '" + std::string(key) + "' must be a list");
    for (const auto& e : *it) {
      if (!e.is_string()) throw InputError("field '" + std::string(key) + "' has a non-string item");
      if (auto v = try_normalize_value(e.get<std::string>())) out.push_back(*std::move(v));
    }
    return out;
  };

  for (auto& v : read_values(field_key(MetaField::kDocumentType))) {
    if (std::find(record.doc_types.begin(), record.doc_types.end(), v) == record.doc_types.end()) {
      record.doc_types.push_back(std::move(v));
    }
  }
  if (record.doc_types.empty() || record.doc_types.size() > 2) {
    throw InputError("meta record '" + record.conversation_id + "' must carry 1 or 2 document types");
  }
  for (MetaField f : kAllFields) {
    if (!graph_eligible(f)) continue;
    auto values = read_values(field_key(f));
    if (!values.empty()) record.values[f] = std::move(values);
  }
  record.purpose_of_query = read_values(kPurposeKey);
  if (auto it = j.find(std::string(field_key(MetaField::kSimplifiedInstruction)));
      it != j.end() && it->is_string()) {
    std::string text(trim(it->get<std::string>()));
    if (!text.empty() && !is_sentinel(normalize_text(text))) record.simplified_instruction = text;
  }
  return record;
}

}  // namespace wildlong::meta
