#include "wildlong/pipeline/synthesis.hpp"

#include <algorithm>
#include <set>

#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/llm/parsers.hpp"
#include "wildlong/llm/templates.hpp"

namespace wildlong::pipeline {

using llm::TemplateId;

std::string_view mode_name(Mode m) { return m == Mode::kMulti ? "multi" : "single"; }

std::optional<Mode> mode_from_name(std::string_view name) {
  if (name == "single") return Mode::kSingle;
  if (name == "multi") return Mode::kMulti;
  return std::nullopt;
}

nlohmann::json to_json(const SynthesisRecord& r) {
  return {{"record_id", r.record_id},
          {"mode", mode_name(r.mode)},
          {"doc_ids", r.doc_ids},
          {"doc_type", r.doc_type},
          {"path", graph::to_json(r.path)},
          {"template_instruction", r.template_instruction},
          {"final_instruction", r.final_instruction},
          {"response", r.response},
          {"provenance",
           {{"backend_id", r.provenance.backend_id},
            {"template_digests", r.provenance.template_digests},
            {"seed", r.provenance.seed}}}};
}

SynthesisRecord synthesis_record_from_json(const nlohmann::json& j) {
  try {
    SynthesisRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    const auto mode = mode_from_name(j.at("mode").get<std::string>());
    if (!mode) throw FormatError("unknown mode");
    r.mode = *mode;
    r.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    r.doc_type = j.at("doc_type").get<std::string>();
    r.path = graph::meta_path_from_json(j.at("path"));
    r.template_instruction = j.at("template_instruction").get<std::string>();
    r.final_instruction = j.at("final_instruction").get<std::string>();
    r.response = j.at("response").get<std::string>();
    const auto& p = j.at("provenance");
    r.provenance.backend_id = p.at("backend_id").get<std::string>();
    r.provenance.template_digests =
        p.at("template_digests").get<std::map<std::string, std::string>>();
    r.provenance.seed = p.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed synthesis record: ") + e.what());
  }
}

namespace {

std::string request_id(std::string_view prompt) {
  return sha256_hex(prompt).substr(0, 16);
}

std::string digest_of(TemplateId id) { return llm::builtin_template(id).digest(); }

}  // namespace

std::string render_instruction_prompt(const graph::MetaPath& path,
                                      std::span<const meta::SeedPath> seeds,
                                      const std::string& doc_type, graph::Demonstration* chosen) {
  const auto demo = graph::select_demonstration(path, seeds);
  if (chosen) *chosen = demo;
  std::string path_info = meta::describe_items(path.nodes);
  std::string example_info = meta::describe_items(demo.seed->nodes);
  return llm::render_prompt(TemplateId::kPathToInstruction,
                            {{"doc_type", doc_type},
                             {"example_meta_info", example_info},
                             {"example_instruction", demo.seed->instruction},
                             {"path_meta_info", path_info}});
}

Outcome<InstructionBatch> generate_instruction(const graph::MetaPath& path,
                                               std::span<const meta::SeedPath> seeds,
                                               const std::string& doc_type, llm::Gateway& gateway,
                                               const LlmCallOptions& options) {
  if (seeds.empty()) throw InputError("no seed paths for document type '" + doc_type + "'");
  graph::Demonstration demo;
  llm::CompletionRequest req;
  req.prompt = render_instruction_prompt(path, seeds, doc_type, &demo);
  req.temperature = options.temperature;
  req.request_id = request_id(req.prompt);
  auto parsed = llm::complete_and_parse<std::vector<std::string>>(
      gateway, req, [](const std::string& raw) { return llm::parse_numbered_list(raw); },
      options.parse_retries);

  Outcome<InstructionBatch> out;
  if (!parsed.value) {
    out.error = parsed.error;
    out.raw = parsed.raw;
    return out;
  }
  InstructionBatch batch{path, demo.seed->record_id, demo.similarity, std::move(*parsed.value)};
  if (batch.instructions.size() > 3) batch.instructions.resize(3);
  out.value = std::move(batch);
  return out;
}

std::string concatenate_documents(std::span<const DocRecord> docs) {
  std::string out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i) out += "\n\n";
    out += "===== Document " + std::to_string(i + 1) + " =====\n";
    out += docs[i].text;
  }
  return out;
}

Outcome<SynthesisRecord> synthesize_record(std::span<const DocRecord> docs,
                                           const std::string& template_instruction,
                                           const graph::MetaPath& path, llm::Gateway& gateway,
                                           Mode mode, const std::string& record_id,
                                           std::uint64_t seed, const LlmCallOptions& options) {
  const std::size_t expected = mode == Mode::kSingle ? 1 : 2;
  if (docs.size() != expected) {
    throw InputError(std::string(mode_name(mode)) + " mode needs " + std::to_string(expected) +
                     " document(s), got " + std::to_string(docs.size()));
  }
  if (template_instruction.empty()) throw InputError("template instruction is empty");
  for (const auto& d : docs) {
    if (!d.doc_type) throw InputError("document '" + d.doc_id + "' has no type");
  }
  if (mode == Mode::kMulti && *docs[0].doc_type != *docs[1].doc_type) {
    throw InputError("multi mode needs two documents of one type, got '" + *docs[0].doc_type +
                     "' and '" + *docs[1].doc_type + "'");
  }

  llm::CompletionRequest req;
  req.prompt = llm::render_prompt(
      TemplateId::kInstructResponse,
      {{"long_doc", mode == Mode::kSingle ? docs[0].text : concatenate_documents(docs)},
       {"example_instruct", template_instruction}});
  req.temperature = options.temperature;
  req.request_id = request_id(req.prompt);
  auto parsed = llm::complete_and_parse<llm::QueryResponse>(
      gateway, req, [](const std::string& raw) { return llm::parse_query_response(raw); },
      options.parse_retries);

  Outcome<SynthesisRecord> out;
  if (!parsed.value) {
    out.error = parsed.error;
    out.raw = parsed.raw;
    return out;
  }
  SynthesisRecord r;
  r.record_id = record_id;
  r.mode = mode;
  for (const auto& d : docs) r.doc_ids.push_back(d.doc_id);
  r.doc_type = *docs[0].doc_type;
  r.path = path;
  r.template_instruction = template_instruction;
  r.final_instruction = std::move(parsed.value->instruction);
  r.response = std::move(parsed.value->response);
  r.provenance.backend_id = gateway.backend_id();
  r.provenance.template_digests["path_to_instruction"] = digest_of(TemplateId::kPathToInstruction);
  r.provenance.template_digests["instruct_response"] = digest_of(TemplateId::kInstructResponse);
  if (mode == Mode::kMulti) {
    r.provenance.template_digests["single_to_multi"] = digest_of(TemplateId::kSingleToMulti);
  }
  r.provenance.seed = seed;
  out.value = std::move(r);
  return out;
}

graph::MetaGraph apply_task_mapping(const graph::MetaGraph& g,
                                    const std::map<std::string, std::string>& mapping) {
  auto remap = [&](const graph::NodeId& n) {
    if (n.field != meta::MetaField::kTasksOrRequests) return n;
    auto it = mapping.find(n.value.normalized());
    if (it == mapping.end()) return n;
    return graph::NodeId{n.field, meta::normalize_value(it->second)};
  };
  graph::MetaGraph out(g.doc_type(), g.epsilon());
  for (const auto& [node, adj] : g.adjacency()) out.add_node(remap(node));
  if (out.node_count() != g.node_count()) {
    throw InputError("task mapping merges distinct nodes");
  }
  for (const auto& [node, adj] : g.adjacency()) {
    for (const auto& [nbr, data] : adj) {
      if (node < nbr) out.add_cooccurrence(remap(node), remap(nbr), data.co_count);
    }
  }
  out.add_conversations(g.conversations_ingested());
  return out;
}

std::vector<meta::SeedPath> apply_task_mapping(std::vector<meta::SeedPath> seeds,
                                               const std::map<std::string, std::string>& mapping) {
  for (auto& s : seeds) {
    for (auto& n : s.nodes) {
      if (n.field != meta::MetaField::kTasksOrRequests) continue;
      auto it = mapping.find(n.value.normalized());
      if (it != mapping.end()) n.value = meta::normalize_value(it->second);
    }
    std::sort(s.nodes.begin(), s.nodes.end());
    s.nodes.erase(std::unique(s.nodes.begin(), s.nodes.end()), s.nodes.end());
  }
  return seeds;
}

RewriteResult rewrite_task_nodes(const graph::MetaGraph& g, llm::Gateway& gateway,
                                 const LlmCallOptions& options, std::size_t batch_size) {
  if (batch_size == 0) throw InputError("rewrite batch size must be >= 1");
  const auto tasks = g.nodes_in_field(meta::MetaField::kTasksOrRequests);
  RewriteResult out{g, {}, {}};
  if (tasks.empty()) return out;

  std::map<std::string, std::string> proposed;
  for (std::size_t start = 0; start < tasks.size(); start += batch_size) {
    const auto end = std::min(tasks.size(), start + batch_size);
    std::vector<std::string> originals;
    for (auto i = start; i < end; ++i) originals.push_back(tasks[i].value.normalized());
    llm::CompletionRequest req;
    req.prompt = llm::render_prompt(TemplateId::kSingleToMulti,
                                    {{"doc_type", g.doc_type()},
                                     {"original_tasks_or_requests", llm::format_numbered_list(originals)}});
    req.temperature = options.temperature;
    req.request_id = request_id(req.prompt);
    auto parsed = llm::complete_and_parse<std::map<std::string, std::string>>(
        gateway, req, [](const std::string& raw) { return llm::parse_rewrite_map(raw); },
        options.parse_retries);
    for (const auto& original : originals) {
      if (!parsed.value) {
        out.flagged[original] = "unparseable rewrite: " + parsed.error;
        continue;
      }
      auto it = parsed.value->find(original);
      auto rewritten = it == parsed.value->end() ? std::nullopt : meta::try_normalize_value(it->second);
      if (!rewritten) {
        out.flagged[original] = "no rewrite returned";
        continue;
      }
      proposed[original] = rewritten->normalized();
    }
  }

  std::set<std::string> taken;
  for (const auto& t : tasks) taken.insert(t.value.normalized());
  for (const auto& t : tasks) {
    const auto& original = t.value.normalized();
    auto it = proposed.find(original);
    if (it == proposed.end()) continue;
    if (it->second == original) {
      out.flagged[original] = "rewrite identical to original";
      continue;
    }
    if (!taken.insert(it->second).second) {
      out.flagged[original] = "rewrite collides with another task value";
      continue;
    }
    out.mapping[original] = it->second;
  }
  out.graph = apply_task_mapping(g, out.mapping);
  return out;
}

}  // namespace wildlong::pipeline
