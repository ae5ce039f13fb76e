#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/llm/templates.hpp"

using namespace wildlong;
using namespace wildlong::llm;

TEST_SUITE("templates") {
  TEST_CASE("render substitutes once and leaves other braces alone") {
    PromptTemplate t{TemplateId::kExtractMeta, 1, "a ${x} b {literal} ${y} ${x}"};
    CHECK(t.placeholders() == std::vector<std::string>{"x", "y"});
    CHECK(render(t, {{"x", "${y}"}, {"y", "2"}}) == "a ${y} b {literal} 2 ${y}");
  }

  TEST_CASE("missing or extra bindings are errors") {
    PromptTemplate t{TemplateId::kExtractMeta, 1, "${a} and ${b}"};
    CHECK_THROWS_AS(render(t, {{"a", "1"}}), InputError);
    CHECK_THROWS_AS(render(t, {{"a", "1"}, {"b", "2"}, {"c", "3"}}), InputError);
    try {
      render(t, {{"a", "1"}});
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
  }

  TEST_CASE("built-in placeholder sets") {
    CHECK(builtin_template(TemplateId::kExtractMeta).placeholders() == std::vector<std::string>{"conversation"});
    CHECK(builtin_template(TemplateId::kPathToInstruction).placeholders() ==
          std::vector<std::string>{"doc_type", "example_meta_info", "example_instruction", "path_meta_info"});
    CHECK(builtin_template(TemplateId::kInstructResponse).placeholders() ==
          std::vector<std::string>{"long_doc", "example_instruct"});
    CHECK(builtin_template(TemplateId::kSingleToMulti).placeholders() ==
          std::vector<std::string>{"doc_type", "original_tasks_or_requests"});
  }

  TEST_CASE("names round trip") {
    for (auto id : kAllTemplates) CHECK(template_from_name(template_name(id)) == id);
    CHECK_FALSE(template_from_name("nope").has_value());
  }

  TEST_CASE("bundled assets match the built-in bodies") {
    const auto dir = testing::source_dir() / "assets" / "templates";
    CHECK_NOTHROW(verify_template_assets(dir));
    for (auto id : kAllTemplates) {
      const auto& t = builtin_template(id);
      const auto file = dir / (std::string(template_name(id)) + ".v" + std::to_string(t.version) + ".txt");
      CHECK(sha256_hex(read_file(file)) == t.digest());
    }
  }

  TEST_CASE("a modified asset fails verification") {
    testing::TempDir dir;
    const auto src = testing::source_dir() / "assets" / "templates";
    for (const auto& e : std::filesystem::directory_iterator(src)) {
      std::filesystem::copy_file(e.path(), dir.path() / e.path().filename());
    }
    CHECK_NOTHROW(verify_template_assets(dir.path()));
    {
      std::ofstream out(dir / "instruct_response.v1.txt", std::ios::app);
      out << " ";
    }
    CHECK_THROWS_AS(verify_template_assets(dir.path()), FormatError);
    std::filesystem::remove(dir / "instruct_response.v1.txt");
    CHECK_THROWS_AS(verify_template_assets(dir.path()), FormatError);
  }

  TEST_CASE("rendered prompts are detected") {
    Bindings b;
    for (auto id : kAllTemplates) {
      b.clear();
      for (const auto& p : builtin_template(id).placeholders()) b[p] = "value of " + p;
      CHECK(detect_template(render_prompt(id, b)) == id);
    }
    CHECK_FALSE(detect_template("hello there").has_value());
    CHECK_FALSE(detect_template(render_cluster_label_prompt({"a", "b"})).has_value());
    CHECK(is_cluster_label_prompt(render_cluster_label_prompt({"a"})));
  }
}
