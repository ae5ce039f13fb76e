#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/graph/path_sampler.hpp"
#include "wildlong/llm/gateway.hpp"
#include "wildlong/pipeline/corpus.hpp"

namespace wildlong::pipeline {

enum class Mode { kSingle, kMulti };
std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

struct LlmCallOptions {
  double temperature = 0.7;
  int parse_retries = 2;
};

struct Provenance {
  std::string backend_id;
  std::map<std::string, std::string> template_digests;
  std::uint64_t seed = 0;
};

struct SynthesisRecord {
  std::string record_id;
  Mode mode = Mode::kSingle;
  std::vector<std::string> doc_ids;
  std::string doc_type;
  graph::MetaPath path;
  std::string template_instruction;
  std::string final_instruction;
  std::string response;
  Provenance provenance;
};

nlohmann::json to_json(const SynthesisRecord& r);
SynthesisRecord synthesis_record_from_json(const nlohmann::json& j);

/// Result of one LLM-backed work item that may fail softly.
template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;  // empty on success
  std::string raw;    // last raw completion when parsing failed
};

struct InstructionBatch {
  graph::MetaPath path;
  std::string seed_record_id;
  std::size_t similarity = 0;
  std::vector<std::string> instructions;
};

/// Renders the path-to-instruction prompt for `path` with the most similar
/// seed as demonstration.
std::string render_instruction_prompt(const graph::MetaPath& path,
                                      std::span<const meta::SeedPath> seeds,
                                      const std::string& doc_type,
                                      graph::Demonstration* chosen = nullptr);

/// Picks the demonstration, completes the prompt and parses the numbered list.
/// Backend errors propagate; parse failures come back in the outcome.
Outcome<InstructionBatch> generate_instruction(const graph::MetaPath& path,
                                               std::span<const meta::SeedPath> seeds,
                                               const std::string& doc_type, llm::Gateway& gateway,
                                               const LlmCallOptions& options = {});

/// Documents joined with "===== Document k =====" separator lines.
std::string concatenate_documents(std::span<const DocRecord> docs);

/// Renders the instruct-response prompt over the document (or the
/// concatenated pair), completes and parses it. Throws InputError on a
/// precondition violation (wrong document count for the mode, or a pair of
/// different types); backend errors propagate.
Outcome<SynthesisRecord> synthesize_record(std::span<const DocRecord> docs,
                                           const std::string& template_instruction,
                                           const graph::MetaPath& path, llm::Gateway& gateway,
                                           Mode mode, const std::string& record_id,
                                           std::uint64_t seed, const LlmCallOptions& options = {});

struct RewriteResult {
  graph::MetaGraph graph;
  /// original normalized task value -> rewritten normalized value
  std::map<std::string, std::string> mapping;
  /// original value -> reason it was kept
  std::map<std::string, std::string> flagged;
};

/// Replaces every task-or-request node value with its multi-document rewrite.
/// Tasks are sent `batch_size` at a time. A task the backend does not return,
/// a reply that never parses, or a rewrite that would collide with another
/// task value keeps its original value and is flagged. Counts, weights and
/// topology are preserved.
RewriteResult rewrite_task_nodes(const graph::MetaGraph& graph, llm::Gateway& gateway,
                                 const LlmCallOptions& options = {}, std::size_t batch_size = 10);

/// Applies a task-value mapping to a graph (values absent from the mapping
/// are kept). Throws InputError if the mapping would merge two nodes.
graph::MetaGraph apply_task_mapping(const graph::MetaGraph& graph,
                                    const std::map<std::string, std::string>& mapping);

/// Applies the mapping to the task nodes of each seed path.
std::vector<meta::SeedPath> apply_task_mapping(std::vector<meta::SeedPath> seeds,
                                               const std::map<std::string, std::string>& mapping);

}  // namespace wildlong::pipeline
