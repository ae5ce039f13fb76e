#include "wildlong/pipeline/corpus.hpp"

#include <cctype>
#include <set>

#include "wildlong/error.hpp"

namespace wildlong::pipeline {

std::string_view tokenizer_name(Tokenizer t) {
  return t == Tokenizer::kWhitespace ? "whitespace" : "approx";
}

std::optional<Tokenizer> tokenizer_from_name(std::string_view name) {
  if (name == "approx") return Tokenizer::kApprox;
  if (name == "whitespace") return Tokenizer::kWhitespace;
  return std::nullopt;
}

std::uint64_t count_tokens(std::string_view text, Tokenizer tokenizer) {
  std::uint64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return tokenizer == Tokenizer::kWhitespace ? words : words * 13 / 10;
}

std::size_t Conversation::user_turns() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.role == "user";
  return n;
}

std::uint64_t Conversation::token_count(Tokenizer tokenizer) const {
  std::uint64_t words = 0;
  for (const auto& t : turns) words += count_tokens(t.content, Tokenizer::kWhitespace);
  return tokenizer == Tokenizer::kWhitespace ? words : words * 13 / 10;
}

std::string Conversation::transcript() const {
  std::string out;
  for (const auto& t : turns) {
    if (!out.empty()) out += "\n\n";
    std::string role = t.role;
    if (!role.empty()) role[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(role[0])));
    out += role + ": " + t.content;
  }
  return out;
}

Conversation conversation_from_json(const nlohmann::json& j) {
  try {
    Conversation c;
    c.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    const auto& turns = j.contains("turns") ? j.at("turns") : j.at("conversation");
    if (!turns.is_array()) throw InputError("turns must be an array");
    for (const auto& t : turns) {
      c.turns.push_back({t.at("role").get<std::string>(), t.at("content").get<std::string>()});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed conversation: ") + e.what());
  }
}

nlohmann::json to_json(const Conversation& c) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : c.turns) turns.push_back({{"role", t.role}, {"content", t.content}});
  return {{"id", c.id}, {"turns", turns}};
}

DocRecord doc_record_from_json(const nlohmann::json& j, Tokenizer tokenizer) {
  try {
    DocRecord d;
    d.doc_id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    d.text = j.at("text").get<std::string>();
    d.token_count = count_tokens(d.text, tokenizer);
    if (j.contains("doc_type") && j["doc_type"].is_string()) d.doc_type = j["doc_type"].get<std::string>();
    if (j.contains("annotation") && j["annotation"].is_string()) {
      d.annotation = j["annotation"].get<std::string>();
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed document: ") + e.what());
  }
}

nlohmann::json to_json(const DocRecord& d) {
  nlohmann::json j = {{"id", d.doc_id}, {"text", d.text}, {"token_count", d.token_count}};
  if (d.doc_type) j["doc_type"] = *d.doc_type;
  if (d.annotation) j["annotation"] = *d.annotation;
  return j;
}

nlohmann::json to_json(const Reject& r) {
  nlohmann::json j = {{"stage", r.stage}, {"item", r.item}, {"reason", r.reason}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

Filtered<Conversation> filter_conversations(std::vector<Conversation> conversations,
                                            std::uint64_t min_tokens, Tokenizer tokenizer) {
  Filtered<Conversation> out;
  for (auto& c : conversations) {
    if (c.user_turns() != 1) {
      out.rejected.push_back({"filter", c.id, "not_single_turn",
                              std::to_string(c.user_turns()) + " user turns"});
      continue;
    }
    const auto tokens = c.token_count(tokenizer);
    if (tokens <= min_tokens) {
      out.rejected.push_back({"filter", c.id, "conversation_too_short", std::to_string(tokens)});
      continue;
    }
    out.kept.push_back(std::move(c));
  }
  return out;
}

Filtered<DocRecord> filter_documents(std::vector<DocRecord> docs, std::uint64_t min_tokens,
                                     std::uint64_t max_tokens, std::string_view stage) {
  if (min_tokens > max_tokens) throw InputError("document filter needs min <= max");
  Filtered<DocRecord> out;
  for (auto& d : docs) {
    if (d.token_count <= min_tokens) {
      out.rejected.push_back({std::string(stage), d.doc_id, "document_too_short",
                              std::to_string(d.token_count)});
    } else if (d.token_count > max_tokens) {
      out.rejected.push_back({std::string(stage), d.doc_id, "document_too_long",
                              std::to_string(d.token_count)});
    } else {
      out.kept.push_back(std::move(d));
    }
  }
  return out;
}

LoadedConversations load_conversations(const std::filesystem::path& path) {
  LoadedConversations out;
  std::size_t row = 0;
  out.stats = read_jsonl(path, [&](const nlohmann::json& j) {
    ++row;
    try {
      out.items.push_back(conversation_from_json(j));
    } catch (const InputError& e) {
      out.rejected.push_back({"load", "conversations#" + std::to_string(row), "malformed_record",
                              e.what()});
    }
  });
  return out;
}

LoadedDocuments load_documents(const std::filesystem::path& path, Tokenizer tokenizer) {
  LoadedDocuments out;
  std::set<std::string> seen;
  std::size_t row = 0;
  out.stats = read_jsonl(path, [&](const nlohmann::json& j) {
    ++row;
    try {
      auto d = doc_record_from_json(j, tokenizer);
      if (!seen.insert(d.doc_id).second) {
        out.rejected.push_back({"load", d.doc_id, "duplicate_id", {}});
        return;
      }
      out.items.push_back(std::move(d));
    } catch (const InputError& e) {
      out.rejected.push_back({"load", "documents#" + std::to_string(row), "malformed_record",
                              e.what()});
    }
  });
  return out;
}

}  // namespace wildlong::pipeline
