#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wildlong/jsonl.hpp"

namespace wildlong::pipeline {

enum class Tokenizer {
  kApprox,      // floor(words * 1.3)
  kWhitespace,  // words
};

std::string_view tokenizer_name(Tokenizer t);
std::optional<Tokenizer> tokenizer_from_name(std::string_view name);

/// Whitespace-delimited word count, optionally scaled by 1.3 (rounded down).
std::uint64_t count_tokens(std::string_view text, Tokenizer tokenizer = Tokenizer::kApprox);

struct Turn {
  std::string role;
  std::string content;
};

struct Conversation {
  std::string id;
  std::vector<Turn> turns;

  std::size_t user_turns() const;
  /// Tokens over the content of every turn.
  std::uint64_t token_count(Tokenizer tokenizer) const;
  /// "User: ...\n\nAssistant: ..." rendering used in extraction prompts.
  std::string transcript() const;
};

/// Accepts {id, turns|conversation: [{role, content}]}.
Conversation conversation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Conversation& c);

struct DocRecord {
  std::string doc_id;
  std::string text;
  std::uint64_t token_count = 0;
  /// Final type label once classified (or supplied by the corpus).
  std::optional<std::string> doc_type;
  /// Free-form human annotation used as classifier training signal.
  std::optional<std::string> annotation;
};

/// Accepts {id, text, doc_type?, annotation?}; token_count is recomputed.
DocRecord doc_record_from_json(const nlohmann::json& j, Tokenizer tokenizer);
nlohmann::json to_json(const DocRecord& d);

struct Reject {
  std::string stage;
  std::string item;
  std::string reason;
  std::string detail;
};
nlohmann::json to_json(const Reject& r);

template <typename T>
struct Filtered {
  std::vector<T> kept;
  std::vector<Reject> rejected;
};

/// Keeps single-turn conversations (exactly one user turn) with more than
/// `min_tokens` tokens.
Filtered<Conversation> filter_conversations(std::vector<Conversation> conversations,
                                            std::uint64_t min_tokens, Tokenizer tokenizer);

/// Keeps documents with min_tokens < token_count <= max_tokens.
Filtered<DocRecord> filter_documents(std::vector<DocRecord> docs, std::uint64_t min_tokens,
                                     std::uint64_t max_tokens, std::string_view stage = "filter");

struct LoadedConversations {
  std::vector<Conversation> items;
  JsonlReadStats stats;
  std::vector<Reject> rejected;
};
LoadedConversations load_conversations(const std::filesystem::path& path);

struct LoadedDocuments {
  std::vector<DocRecord> items;
  JsonlReadStats stats;
  std::vector<Reject> rejected;
};
/// Duplicate ids are rejected after the first occurrence.
LoadedDocuments load_documents(const std::filesystem::path& path, Tokenizer tokenizer);

}  // namespace wildlong::pipeline
