#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "wildlong/error.hpp"
#include "wildlong/pipeline/corpus.hpp"

using namespace wildlong;
using namespace wildlong::pipeline;

namespace {

Conversation conv(const std::string& id, std::vector<std::pair<std::string, std::size_t>> turns) {
  Conversation c{id, {}};
  for (auto& [role, words] : turns) c.turns.push_back({role, testing::words_text(words)});
  return c;
}

DocRecord doc(const std::string& id, std::uint64_t tokens) {
  DocRecord d;
  d.doc_id = id;
  d.token_count = tokens;
  return d;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("token counting") {
    CHECK(count_tokens("", Tokenizer::kWhitespace) == 0);
    CHECK(count_tokens("", Tokenizer::kApprox) == 0);
    CHECK(count_tokens("a b c", Tokenizer::kWhitespace) == 3);
    CHECK(count_tokens("  a\tb\n\nc  ", Tokenizer::kWhitespace) == 3);
    CHECK(count_tokens(testing::words_text(10), Tokenizer::kApprox) == 13);
    CHECK(count_tokens(testing::words_text(3), Tokenizer::kApprox) == 3);
    CHECK(tokenizer_from_name(tokenizer_name(Tokenizer::kWhitespace)) == Tokenizer::kWhitespace);
    CHECK_FALSE(tokenizer_from_name("bpe").has_value());
  }

  TEST_CASE("approximate counter matches an independent word count") {
    Rng rng = make_rng(91);
    for (int i = 0; i < 10; ++i) {
      std::string s;
      std::size_t words = 0;
      const auto n = uniform_index(rng, 5000);
      for (std::uint64_t k = 0; k < n; ++k) {
        const auto ws = uniform_index(rng, 3);
        s += ws == 0 ? " " : ws == 1 ? "\n  " : "\t";
        s += "w" + std::to_string(k);
        ++words;
      }
      std::istringstream in(s);
      std::string w;
      std::size_t oracle_words = 0;
      while (in >> w) ++oracle_words;
      CHECK(oracle_words == words);
      const auto expected = static_cast<std::int64_t>(oracle_words * 13 / 10);
      CHECK(std::llabs(static_cast<std::int64_t>(count_tokens(s)) - expected) <= 1);
    }
  }

  TEST_CASE("conversation filter boundaries") {
    std::vector<Conversation> in;
    in.push_back(conv("kept", {{"user", 2001}}));
    in.push_back(conv("edge", {{"user", 2000}}));
    in.push_back(conv("two turns", {{"user", 2500}, {"assistant", 10}, {"user", 2500}}));
    in.push_back(conv("with reply", {{"user", 1000}, {"assistant", 1001}}));
    const auto out = filter_conversations(in, 2000, Tokenizer::kWhitespace);
    REQUIRE(out.kept.size() == 2);
    CHECK(out.kept[0].id == "kept");
    CHECK(out.kept[1].id == "with reply");
    REQUIRE(out.rejected.size() == 2);
    CHECK(out.rejected[0].item == "edge");
    CHECK(out.rejected[0].reason == "conversation_too_short");
    CHECK(out.rejected[1].reason == "not_single_turn");
  }

  TEST_CASE("document filter boundaries") {
    std::vector<DocRecord> in;
    for (std::uint64_t t : {1999, 2000, 2001, 30000, 30001}) in.push_back(doc(std::to_string(t), t));
    const auto out = filter_documents(in, 2000, 30000);
    std::vector<std::string> kept;
    for (const auto& d : out.kept) kept.push_back(d.doc_id);
    CHECK(kept == std::vector<std::string>{"2001", "30000"});
    CHECK(out.rejected.size() == 3);
    CHECK(out.rejected[2].reason == "document_too_long");
    CHECK_THROWS_AS(filter_documents({}, 10, 5), InputError);
  }

  TEST_CASE("loaders skip malformed rows and duplicate ids") {
    testing::TempDir dir;
    {
      std::ofstream c(dir / "c.jsonl");
      c << R"({"id":"c1","turns":[{"role":"user","content":"hi there"}]})" << "\n";
      c << R"({"id":"c2","conversation":[{"role":"user","content":"x"},{"role":"assistant","content":"y"}]})"
        << "\n";
      c << "{broken\n";
      c << R"({"id":"c3"})" << "\n";
    }
    const auto convs = load_conversations(dir / "c.jsonl");
    CHECK(convs.items.size() == 2);
    CHECK(convs.stats.malformed == 1);
    CHECK(convs.rejected.size() == 1);
    CHECK(convs.items[1].turns.size() == 2);
    CHECK(convs.items[0].transcript().find("User: hi there") != std::string::npos);

    {
      std::ofstream d(dir / "d.jsonl");
      d << R"({"id":"d1","text":"one two three","doc_type":"Research Paper"})" << "\n";
      d << R"({"id":"d1","text":"dup"})" << "\n";
      d << R"({"id":"d2","text":"a b","annotation":"memo"})" << "\n";
      d << R"({"text":"no id"})" << "\n";
    }
    const auto docs = load_documents(dir / "d.jsonl", Tokenizer::kWhitespace);
    REQUIRE(docs.items.size() == 2);
    CHECK(docs.items[0].token_count == 3);
    CHECK(docs.items[1].annotation == "memo");
    CHECK(docs.rejected.size() == 2);
    CHECK(docs.rejected[0].reason == "duplicate_id");
    CHECK_THROWS_AS(load_documents(dir / "missing.jsonl", Tokenizer::kWhitespace), InputError);
  }

  TEST_CASE("json round trips") {
    const auto c = conv("c", {{"user", 3}, {"assistant", 2}});
    const auto back = conversation_from_json(to_json(c));
    CHECK(back.id == "c");
    CHECK(back.turns.size() == 2);
    DocRecord d = doc("d", 0);
    d.text = "a b c d";
    d.doc_type = "memo";
    const auto dj = doc_record_from_json(to_json(d), Tokenizer::kWhitespace);
    CHECK(dj.token_count == 4);
    CHECK(dj.doc_type == "memo");
  }
}
