#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"
#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/pipeline/mini_corpus.hpp"

using namespace wildlong;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path snapshot_dir() { return testing::source_dir() / "tests" / "data" / "cli_help"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help output matches the stored snapshots") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
        {"main.txt", {"--help"}},
        {"run.txt", {"run", "--help"}},
        {"paths_sample.txt", {"paths", "sample", "--help"}},
        {"graph_build.txt", {"graph", "build", "--help"}},
        {"taxonomy_fit.txt", {"taxonomy", "fit", "--help"}},
        {"classifier_train.txt", {"classifier", "train", "--help"}},
        {"corpus_generate.txt", {"corpus", "generate", "--help"}},
    };
    for (const auto& [file, args] : cases) {
      INFO(file);
      const auto r = invoke(args);
      CHECK(r.code == cli::kOk);
      REQUIRE(fs::exists(snapshot_dir() / file));
      CHECK(r.out == read_file(snapshot_dir() / file));
    }
  }

  TEST_CASE("help shows defaults") {
    const auto r = invoke({"paths", "sample", "--help"});
    CHECK(r.out.find("--max-steps") != std::string::npos);
    CHECK(r.out.find("[6]") != std::string::npos);
    CHECK(r.out.find("[100]") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    CHECK(invoke({}).code == cli::kUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kUsage);
    CHECK(invoke({"run", "--no-such-flag"}).code == cli::kUsage);
    CHECK(invoke({"run", "--config", "/definitely/missing.yaml"}).code == cli::kUsage);
    CHECK(invoke({"run", "--stop-after", "nowhere"}).code == cli::kUsage);
    const auto bad_set = invoke({"run", "--set", "walk.max_steps=abc"});
    CHECK(bad_set.code == cli::kInput);
    CHECK(bad_set.err.find("walk.max_steps") != std::string::npos);
    CHECK(invoke({"run", "--set", "nokey"}).code == cli::kInput);

    testing::TempDir dir;
    {
      std::ofstream out(dir / "broken.bin");
      out << "not a graph";
    }
    CHECK(invoke({"paths", "sample", "--graph", (dir / "broken.bin").string()}).code == cli::kInput);

    auto corpus = pipeline::generate_mini_corpus(dir / "corpus");
    const auto unreachable = invoke({"run", "--config", corpus.config.string(), "--output-dir", (dir / "o").string(),
                                  "--backend", "http", "--set", "backend.base_url=http://127.0.0.1:1", "--set",
                                  "backend.max_attempts=1", "--set", "backend.timeout_ms=500"});
    CHECK(unreachable.code == cli::kBackend);
    CHECK(unreachable.err.find("backend error") != std::string::npos);
  }

  TEST_CASE("graph build and paths sample") {
    testing::TempDir dir;
    Rng rng = make_rng(121);
    std::vector<Json> rows;
    for (int i = 0; i < 40; ++i) rows.push_back(meta::to_json(testing::random_record(rng, "memo", 3)));
    rows.push_back(Json{{"garbage", true}});
    write_jsonl(dir / "records.jsonl", rows);
    const auto built = invoke({"graph", "build", "--in", (dir / "records.jsonl").string(), "--out",
                            (dir / "memo.bin").string(), "--doc-type", "Memo"});
    REQUIRE(built.code == cli::kOk);
    CHECK(built.out.find("1 malformed") != std::string::npos);
    const auto g = graph::load_graph_file(dir / "memo.bin");
    CHECK(g.doc_type() == "memo");
    CHECK(g.conversations_ingested() == 40);

    const auto sampled = invoke({"paths", "sample", "--graph", (dir / "memo.bin").string(), "--count", "30", "--seed",
                              "4", "--seeds", (dir / "records.jsonl").string()});
    REQUIRE(sampled.code == cli::kOk);
    std::istringstream lines(sampled.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
      const auto j = Json::parse(line);
      CHECK(j["nodes"].size() <= 6);
      CHECK(j["seed_record_id"].is_string());
      ++n;
    }
    CHECK(n > 0);
    CHECK(n <= 30);
    CHECK(invoke({"paths", "sample", "--graph", (dir / "memo.bin").string(), "--count", "30", "--seed", "4", "--seeds",
               (dir / "records.jsonl").string()})
              .out == sampled.out);
  }

  TEST_CASE("templates and config utilities") {
    const auto ok = invoke({"templates", "verify", "--dir", (testing::source_dir() / "assets" / "templates").string()});
    CHECK(ok.code == cli::kOk);
    const auto list = invoke({"templates", "list"});
    CHECK(list.out.find("path_to_instruction v1") != std::string::npos);
    const auto keys = invoke({"config", "keys"});
    CHECK(keys.out.find("walk.max_steps (integer) = 6") != std::string::npos);
  }

  TEST_CASE("stage-by-stage invocation matches a single run") {
    testing::TempDir dir;
    const auto corpus = pipeline::generate_mini_corpus(dir / "corpus");
    const auto cfg = corpus.config.string();
    const auto whole = invoke({"run", "--config", cfg, "--output-dir", (dir / "whole").string()});
    REQUIRE(whole.code == cli::kOk);
    for (const char* stage : {"filter", "taxonomy", "classify", "graph", "paths", "instructions", "synthesize"}) {
      INFO(stage);
      const auto r = invoke({stage, "--config", cfg, "--output-dir", (dir / "staged").string()});
      REQUIRE(r.code == cli::kOk);
      CHECK(r.out.find("complete; checkpoints in") != std::string::npos);
    }
    const auto last = invoke({"run", "--config", cfg, "--output-dir", (dir / "staged").string()});
    REQUIRE(last.code == cli::kOk);
    for (const char* f : {"report.json", "dataset.jsonl", "rejects.jsonl"}) {
      CHECK(testing::file_digest(dir / "whole" / f) == testing::file_digest(dir / "staged" / f));
    }
  }

  TEST_CASE("taxonomy and classifier commands") {
    testing::TempDir dir;
    const auto corpus = pipeline::generate_mini_corpus(dir / "corpus");
    const auto emb = corpus.embeddings.string();
    const auto fit = invoke({"taxonomy", "fit", "--embeddings", emb, "--k", "4", "--out", (dir / "km.json").string()});
    REQUIRE(fit.code == cli::kOk);
    const auto label = invoke({"taxonomy", "label", "--model", (dir / "km.json").string(), "--embeddings", emb,
                            "--out", (dir / "labeled.json").string()});
    REQUIRE(label.code == cli::kOk);
    const auto model = Json::parse(read_file(dir / "labeled.json"));
    CHECK(model["labels"].size() == 4);

    std::vector<Json> labels;
    for (const auto& j : read_jsonl_all(corpus.documents)) {
      if (j.contains("annotation")) labels.push_back({{"id", j["id"]}, {"label", j["annotation"]}});
    }
    REQUIRE(labels.size() > 10);
    write_jsonl(dir / "labels.jsonl", labels);
    const auto train = invoke({"classifier", "train", "--embeddings", emb, "--labels", (dir / "labels.jsonl").string(),
                            "--out", (dir / "clf.json").string()});
    CHECK(train.code == cli::kOk);
    const auto pred = invoke({"classifier", "predict", "--model", (dir / "clf.json").string(), "--embeddings", emb});
    CHECK(pred.code == cli::kOk);
    CHECK_FALSE(pred.out.empty());
  }
}
