#include "wildlong/pipeline/mini_corpus.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "wildlong/jsonl.hpp"
#include "wildlong/rng.hpp"
#include "wildlong/taxonomy/embedding.hpp"
#include "wildlong/vocabulary.hpp"

namespace wildlong::pipeline {

namespace fs = std::filesystem;

namespace {

std::string filler_text(Rng& rng, std::size_t words) {
  const auto vocab = vocab::filler_words();
  std::string out;
  out.reserve(words * 8);
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += (i % 14 == 0) ? ". " : " ";
    out += vocab[uniform_index(rng, vocab.size())];
  }
  out += '.';
  return out;
}

std::vector<double> jitter(const std::vector<double>& center, double sigma, Rng& rng) {
  std::vector<double> v(center);
  for (double& x : v) x += sigma * standard_normal(rng);
  return v;
}

nlohmann::json embedding_row(const std::string& id, const std::vector<double>& v) {
  return taxonomy::to_json(taxonomy::Embedding{id, v});
}

}  // namespace

MiniCorpusFiles generate_mini_corpus(const fs::path& dir, const MiniCorpusOptions& o) {
  Rng rng = make_rng(o.seed, 0x6d696e69);
  const std::size_t groups = vocab::kDocTypes.size();

  std::vector<std::vector<double>> centers(groups, std::vector<double>(o.dim));
  for (auto& c : centers) {
    for (double& x : c) x = standard_normal(rng);
  }

  std::vector<nlohmann::json> embeddings;
  for (std::size_t g = 0; g < groups; ++g) {
    for (auto variant : vocab::kDocTypes[g]) {
      embeddings.push_back(embedding_row(taxonomy::doc_type_embedding_id(std::string(variant)),
                                         jitter(centers[g], 0.15, rng)));
    }
  }

  static constexpr std::string_view kAsks[] = {
      "Could you summarize the main points for me?",
      "Please pull out every deadline it mentions.",
      "What are the strongest and weakest arguments here?",
      "Explain the key ideas in plain language.",
      "Draft a short review of it for my team."};

  std::vector<nlohmann::json> conversations;
  for (std::size_t i = 0; i < o.conversations; ++i) {
    const auto g = uniform_index(rng, groups);
    const auto variant = vocab::kDocTypes[g][uniform_index(rng, vocab::kVariantsPerGroup)];
    const auto kind = uniform_index(rng, 100);
    const bool no_doc = kind < 8;
    const bool short_conv = kind >= 8 && kind < 18;
    const bool two_turn = kind >= 18 && kind < 30;
    const std::size_t words = short_conv ? 900 + uniform_index(rng, 400) : 2100 + uniform_index(rng, 900);
    std::string user = no_doc ? "I have a general question about planning my week. "
                              : fmt::format("Here is a {} I am working with. ", variant);
    user += filler_text(rng, words);
    user += "\n\n";
    user += kAsks[uniform_index(rng, std::size(kAsks))];
    nlohmann::json turns = nlohmann::json::array();
    turns.push_back({{"role", "user"}, {"content", user}});
    turns.push_back({{"role", "assistant"}, {"content", "Sure. " + filler_text(rng, 80)}});
    if (two_turn) {
      turns.push_back({{"role", "user"}, {"content", "Thanks, can you go into more detail?"}});
      turns.push_back({{"role", "assistant"}, {"content", filler_text(rng, 60)}});
    }
    conversations.push_back({{"id", fmt::format("conv-{:04}", i)}, {"turns", turns}});
  }

  std::vector<nlohmann::json> documents;
  for (std::size_t i = 0; i < o.documents; ++i) {
    const auto g = i % groups;
    const auto variant = vocab::kDocTypes[g][uniform_index(rng, vocab::kVariantsPerGroup)];
    std::size_t words;
    if (i == 3 || i == 17) {
      words = 1200 + uniform_index(rng, 600);  // below every lower bound
    } else if (i == 29) {
      words = 30500 + uniform_index(rng, 500);  // above every upper bound
    } else if (i % 3 == 0) {
      words = 10000 + uniform_index(rng, 2000);  // single-mode only when paired
    } else {
      words = 2500 + uniform_index(rng, 5500);
    }
    const std::string id = fmt::format("doc-{:04}", i);
    nlohmann::json d = {{"id", id},
                        {"text", fmt::format("{} {}\n\n", variant, i) + filler_text(rng, words - 2)}};
    const auto label_kind = uniform_index(rng, 10);
    if (label_kind < 6) d["annotation"] = variant;
    documents.push_back(std::move(d));
    embeddings.push_back(embedding_row(id, jitter(centers[g], 0.25, rng)));
  }

  MiniCorpusFiles files{dir / "conversations.jsonl", dir / "documents.jsonl",
                        dir / "embeddings.jsonl", dir / "config.yaml"};
  write_jsonl(files.conversations, conversations);
  write_jsonl(files.documents, documents);
  write_jsonl(files.embeddings, embeddings);
  write_file_atomic(files.config,
                    fmt::format("# mini corpus, mock backend\n"
                                "conversations: conversations.jsonl\n"
                                "documents: documents.jsonl\n"
                                "embeddings: embeddings.jsonl\n"
                                "output_dir: out\n"
                                "seed: {}\n"
                                "tokenizer: whitespace\n"
                                "synthesis:\n"
                                "  single_count: {}\n"
                                "  multi_count: {}\n"
                                "  workers: 2\n"
                                "backend:\n"
                                "  kind: mock\n",
                                o.seed, o.single_count, o.multi_count));
  return files;
}

}  // namespace wildlong::pipeline
