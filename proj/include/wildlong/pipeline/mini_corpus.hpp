#pragma once

#include <cstdint>
#include <filesystem>

namespace wildlong::pipeline {

struct MiniCorpusOptions {
  std::size_t conversations = 120;
  std::size_t documents = 50;
  std::size_t dim = 16;
  std::uint64_t seed = 7;
  std::uint64_t single_count = 20;
  std::uint64_t multi_count = 10;
};

struct MiniCorpusFiles {
  std::filesystem::path conversations;
  std::filesystem::path documents;
  std::filesystem::path embeddings;
  std::filesystem::path config;
};

/// Writes a small synthetic corpus drawn from the built-in document-type
/// vocabulary: conversations (mostly single-turn, some multi-turn or short,
/// some with no document), documents with a spread of lengths including a
/// few outside the filter bounds, embeddings for documents and type strings
/// clustered by type group, and a config.yaml using the mock backend and the
/// whitespace tokenizer. Output depends only on the options.
MiniCorpusFiles generate_mini_corpus(const std::filesystem::path& dir,
                                     const MiniCorpusOptions& options = {});

}  // namespace wildlong::pipeline
