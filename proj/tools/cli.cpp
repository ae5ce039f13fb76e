#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wildlong/error.hpp"
#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/graph/path_sampler.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/kernels/kernels.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/llm/templates.hpp"
#include "wildlong/pipeline/config.hpp"
#include "wildlong/pipeline/mini_corpus.hpp"
#include "wildlong/pipeline/pipeline.hpp"
#include "wildlong/rng.hpp"
#include "wildlong/taxonomy/classifier.hpp"
#include "wildlong/taxonomy/embedding.hpp"
#include "wildlong/taxonomy/kmeans.hpp"

namespace wildlong::cli {

namespace {

using pipeline::PipelineConfig;
using pipeline::Stage;

struct PipelineFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::string checkpoint_dir;
  std::string report;
  std::string backend;
  bool fresh = false;
  bool log_bodies = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--config", f.config, "Config file (YAML key-value)")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override a config key, KEY=VALUE (repeatable)");
  cmd->add_option("--seed", f.seed, "Base seed for every stage (overrides config)");
  cmd->add_option("--output-dir", f.output_dir, "Output directory (overrides config)");
  cmd->add_option("--checkpoint-dir", f.checkpoint_dir, "Checkpoint directory (overrides config)");
  cmd->add_option("--report", f.report, "Report path (default <output_dir>/report.json)");
  cmd->add_option("--backend", f.backend, "Backend kind (overrides config)")
      ->check(CLI::IsMember({"mock", "http"}));
  cmd->add_flag("--fresh", f.fresh, "Discard existing checkpoints before running");
  cmd->add_flag("--log-bodies", f.log_bodies, "Log prompt and reply bodies, not just hashes");
}

PipelineConfig build_config(const PipelineFlags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) pipeline::load_config_file(cfg, f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects KEY=VALUE, got '" + kv + "'");
    pipeline::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (!f.checkpoint_dir.empty()) cfg.checkpoint_dir = f.checkpoint_dir;
  if (!f.backend.empty()) cfg.backend.kind = f.backend;
  if (f.log_bodies) cfg.backend.log_bodies = true;
  cfg.validate();
  return cfg;
}

int run_through(const PipelineFlags& f, std::optional<Stage> stop, std::ostream& out) {
  const auto cfg = build_config(f);
  pipeline::RunOptions opts;
  opts.stop_after = stop;
  opts.fresh = f.fresh;
  if (!f.report.empty()) opts.report_path = f.report;
  const auto summary = pipeline::run_pipeline(cfg, opts);
  if (!summary.completed) {
    out << fmt::format("stage {} complete; checkpoints in {}\n", pipeline::stage_name(summary.last_stage),
                       cfg.resolved_checkpoint_dir().string());
    return kOk;
  }
  out << fmt::format("dataset: {} ({} records)\n", summary.dataset_path.string(),
                     summary.report["stages"]["emit"]["records"].get<std::uint64_t>());
  out << fmt::format("rejects: {}\n", summary.rejects_path.string());
  out << fmt::format("report: {}\n", summary.report_path.string());
  return kOk;
}

struct GraphBuildFlags {
  std::string in;
  std::string out;
  std::string doc_type;
  double epsilon = 1.0;
};

int graph_build(const GraphBuildFlags& f, std::ostream& out) {
  const auto doc_type = meta::normalize_text(f.doc_type);
  std::vector<meta::MetaRecord> records;
  std::size_t total = 0;
  std::size_t bad = 0;
  auto stats = read_jsonl(f.in, [&](const Json& j) {
    ++total;
    try {
      auto r = meta::meta_record_from_json(j);
      for (const auto& t : r.doc_types) {
        if (t.normalized() == doc_type) {
          records.push_back(std::move(r));
          break;
        }
      }
    } catch (const InputError&) {
      ++bad;
    }
  });
  const auto g = graph::build_graph(records, doc_type, f.epsilon);
  graph::save_graph(f.out, g);
  out << fmt::format("graph '{}': {} nodes, {} edges from {} of {} records ({} malformed)\n",
                     doc_type, g.node_count(), g.edge_count(), records.size(), total,
                     bad + stats.malformed);
  return kOk;
}

struct PathsSampleFlags {
  std::string graph;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  int max_steps = 6;
  int min_length = 4;
  int max_retries = 5;
  std::size_t partitions = 1;
  std::string seeds;
  std::string out;
};

int paths_sample(const PathsSampleFlags& f, std::ostream& out) {
  const auto g = graph::load_graph_file(f.graph);
  graph::WalkConfig wc{f.max_steps, f.min_length, f.max_retries, f.seed};
  const auto paths =
      graph::sample_paths_partitioned(g, wc, f.count, f.partitions, kernels::Exec::kOpenMP);
  std::vector<meta::SeedPath> seeds;
  if (!f.seeds.empty()) {
    read_jsonl(f.seeds, [&](const Json& j) {
      try {
        if (auto s = meta::make_seed_path(meta::meta_record_from_json(j))) seeds.push_back(std::move(*s));
      } catch (const InputError&) {
      }
    });
  }
  std::vector<Json> rows;
  for (const auto& p : paths) {
    auto j = graph::to_json(p);
    if (!seeds.empty()) {
      const auto demo = graph::select_demonstration(p, seeds);
      j["seed_record_id"] = demo.seed->record_id;
      j["similarity"] = demo.similarity;
    } else {
      j["seed_record_id"] = nullptr;
      j["similarity"] = nullptr;
    }
    rows.push_back(std::move(j));
  }
  if (f.out.empty()) {
    for (const auto& r : rows) out << r.dump() << '\n';
  } else {
    write_jsonl(f.out, rows);
    out << fmt::format("wrote {} paths to {}\n", rows.size(), f.out);
  }
  return kOk;
}

struct CorpusFlags {
  std::string out;
  pipeline::MiniCorpusOptions options;
};

int corpus_generate(const CorpusFlags& f, std::ostream& out) {
  const auto files = pipeline::generate_mini_corpus(f.out, f.options);
  out << fmt::format("wrote {}, {}, {} and {}\n", files.conversations.string(),
                     files.documents.string(), files.embeddings.string(), files.config.string());
  return kOk;
}

// Embeddings whose id starts with `prefix`, prefix stripped, in id order.
struct NamedPoints {
  std::vector<std::string> names;
  std::vector<std::vector<double>> points;
};

NamedPoints select_embeddings(const std::string& path, const std::string& prefix) {
  const auto table = taxonomy::load_embeddings(path);
  NamedPoints np;
  for (const auto& [id, v] : table.rows()) {
    if (!id.starts_with(prefix)) continue;
    np.names.push_back(id.substr(prefix.size()));
    np.points.push_back(taxonomy::l2_normalized(v));
  }
  if (np.points.empty()) throw InputError("no embeddings with prefix '" + prefix + "' in " + path);
  return np;
}

struct TaxonomyFitFlags {
  std::string embeddings;
  std::string prefix = "doctype:";
  std::size_t k = 10;
  std::uint64_t seed = 0;
  int max_iters = 300;
  int restarts = 10;
  std::string out;
};

int taxonomy_fit(const TaxonomyFitFlags& f, std::ostream& out) {
  const auto np = select_embeddings(f.embeddings, f.prefix);
  taxonomy::KMeansOptions ko;
  ko.k = f.k;
  ko.seed = f.seed;
  ko.max_iters = f.max_iters;
  ko.restarts = f.restarts;
  ko.exec = kernels::Exec::kOpenMP;
  const auto fit = taxonomy::kmeans_fit(np.points, ko);
  taxonomy::save_cluster_model(f.out, fit.model);
  out << fmt::format("k={} points={} iterations={} converged={} inertia={:.6f}\n", fit.model.k(),
                     np.points.size(), fit.iterations, fit.converged, fit.model.inertia);
  for (std::size_t c = 0; c < fit.model.k(); ++c) {
    std::string members;
    for (std::size_t i = 0; i < np.names.size(); ++i) {
      if (fit.assignment[i] == c) members += (members.empty() ? "" : ", ") + np.names[i];
    }
    out << fmt::format("  cluster {}: {}\n", c, members);
  }
  return kOk;
}

struct TaxonomyLabelFlags {
  std::string model;
  std::string embeddings;
  std::string prefix = "doctype:";
  std::size_t per_cluster = 5;
  std::string out;
};

int taxonomy_label(const TaxonomyLabelFlags& f, const PipelineFlags& pf, std::ostream& out) {
  const auto cfg = build_config(pf);
  const auto np = select_embeddings(f.embeddings, f.prefix);
  taxonomy::KMeansResult fit;
  fit.model = taxonomy::load_cluster_model(f.model);
  for (const auto& p : np.points) fit.assignment.push_back(static_cast<std::uint32_t>(fit.model.nearest(p)));
  const auto exemplars = taxonomy::cluster_exemplars(fit, np.points, np.names, f.per_cluster);
  for (std::size_t c = 0; c < exemplars.size(); ++c) {
    if (exemplars[c].empty()) throw InputError(fmt::format("cluster {} has no members", c));
  }
  llm::Gateway gateway(pipeline::make_backend(cfg.backend), pipeline::gateway_options(cfg.backend));
  const auto labeled = taxonomy::label_clusters(fit.model, exemplars, gateway);
  taxonomy::save_cluster_model(f.out, labeled);
  for (std::size_t c = 0; c < labeled.k(); ++c) {
    out << fmt::format("cluster {}: {}\n", c, labeled.labels[c]);
  }
  return kOk;
}

struct ClassifierTrainFlags {
  std::string embeddings;
  std::string labels;
  double l2 = 1e-4;
  double lr = 0.5;
  int epochs = 300;
  std::uint64_t seed = 0;
  double holdout = 0.2;
  std::string out;
};

int classifier_train(const ClassifierTrainFlags& f, std::ostream& out) {
  const auto table = taxonomy::load_embeddings(f.embeddings);
  std::vector<std::string> ids;
  std::vector<std::string> label_names;
  read_jsonl(f.labels, [&](const Json& j) {
    ids.push_back(j.at("id").get<std::string>());
    label_names.push_back(meta::normalize_text(j.at("label").get<std::string>()));
  });
  std::vector<std::string> types(label_names.begin(), label_names.end());
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());

  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = make_rng(f.seed, 1);
  shuffle(order, rng);
  const auto n_hold = static_cast<std::size_t>(f.holdout * static_cast<double>(order.size()));

  // the first row of every type (in shuffled order) always trains
  std::vector<bool> hold(order.size(), false);
  std::set<std::string> seen;
  std::size_t held = 0;
  for (const auto i : order) {
    if (seen.insert(label_names[i]).second) continue;
    if (held < n_hold) {
      hold[i] = true;
      ++held;
    }
  }

  std::vector<std::vector<double>> train_x, hold_x;
  std::vector<std::uint32_t> train_y, hold_y;
  for (const auto i : order) {
    const auto* e = table.find(ids[i]);
    if (!e) throw InputError("no embedding for '" + ids[i] + "'");
    const auto y = static_cast<std::uint32_t>(
        std::lower_bound(types.begin(), types.end(), label_names[i]) - types.begin());
    (hold[i] ? hold_x : train_x).push_back(taxonomy::l2_normalized(*e));
    (hold[i] ? hold_y : train_y).push_back(y);
  }
  taxonomy::TrainOptions to;
  to.l2 = f.l2;
  to.lr = f.lr;
  to.epochs = f.epochs;
  to.seed = f.seed;
  to.exec = kernels::Exec::kOpenMP;
  const auto clf = taxonomy::classifier_train(train_x, train_y, types, to);
  taxonomy::save_classifier(f.out, clf);
  out << fmt::format("types={} train={} holdout={}", types.size(), train_x.size(), hold_x.size());
  if (!hold_x.empty()) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < hold_x.size(); ++i) {
      correct += taxonomy::classifier_predict(clf, hold_x[i]).type == hold_y[i];
    }
    out << fmt::format(" accuracy={:.4f}", static_cast<double>(correct) / static_cast<double>(hold_x.size()));
  }
  out << '\n';
  return kOk;
}

struct ClassifierPredictFlags {
  std::string model;
  std::string embeddings;
  std::string prefix;
  std::string out;
};

int classifier_predict(const ClassifierPredictFlags& f, std::ostream& out) {
  const auto clf = taxonomy::load_classifier(f.model);
  const auto table = taxonomy::load_embeddings(f.embeddings);
  std::vector<Json> rows;
  for (const auto& [id, v] : table.rows()) {
    if (!id.starts_with(f.prefix)) continue;
    const auto p = taxonomy::classifier_predict(clf, taxonomy::l2_normalized(v));
    rows.push_back({{"id", id}, {"type", clf.type_names[p.type]}, {"probability", p.probabilities[p.type]}});
  }
  if (f.out.empty()) {
    for (const auto& r : rows) out << r.dump() << '\n';
  } else {
    write_jsonl(f.out, rows);
    out << fmt::format("wrote {} predictions to {}\n", rows.size(), f.out);
  }
  return kOk;
}

void setup_logging(const std::string& level) {
  static auto logger = [] {
    auto l = spdlog::stderr_color_mt("wildlong");
    spdlog::set_default_logger(l);
    return l;
  }();
  logger->set_level(spdlog::level::from_str(level));
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wildlong: long-context instruction data synthesis from meta-information graphs",
               "wildlong"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string log_level = "info";
  app.add_option("--log-level", log_level, "Log level on standard error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  PipelineFlags pf;
  std::string stop_after;
  auto* run = app.add_subcommand("run", "Run every stage (resuming from checkpoints)");
  add_pipeline_flags(run, pf);
  run->add_option("--stop-after", stop_after, "Stop once this stage is checkpointed")
      ->check(CLI::IsMember({"filter", "extract", "taxonomy", "classify", "select", "graphs",
                             "paths", "instructions", "synthesize"}));

  struct StageCommand {
    const char* name;
    const char* help;
    Stage stage;
    CLI::App* app = nullptr;
  };
  std::vector<StageCommand> stage_cmds = {
      {"filter", "Run through conversation and document filtering", Stage::kFilter},
      {"taxonomy", "Run through meta extraction and document-type clustering", Stage::kTaxonomy},
      {"classify", "Run through document classification and resampling", Stage::kSelect},
      {"graph", "Run through graph construction, or build one graph (graph build)", Stage::kGraphs},
      {"paths", "Run through path sampling, or sample from one graph (paths sample)", Stage::kPaths},
      {"instructions", "Run through instruction generation", Stage::kInstructions},
      {"synthesize", "Run through instruction-response synthesis", Stage::kSynthesize},
  };
  for (auto& sc : stage_cmds) {
    sc.app = app.add_subcommand(sc.name, sc.help);
    add_pipeline_flags(sc.app, pf);
  }
  auto* graph_cmd = stage_cmds[3].app;
  auto* paths_cmd = stage_cmds[4].app;
  graph_cmd->require_subcommand(0, 1);
  paths_cmd->require_subcommand(0, 1);

  auto* taxonomy_cmd = stage_cmds[1].app;
  taxonomy_cmd->require_subcommand(0, 1);
  TaxonomyFitFlags tff;
  auto* tfit = taxonomy_cmd->add_subcommand("fit", "Cluster embedded document-type strings with k-means");
  tfit->add_option("--embeddings", tff.embeddings, "Embeddings (jsonl)")->required()->check(CLI::ExistingFile);
  tfit->add_option("--prefix", tff.prefix, "Only ids with this prefix (stripped from names)");
  tfit->add_option("--k", tff.k, "Number of clusters")->check(CLI::PositiveNumber);
  tfit->add_option("--seed", tff.seed, "Seed");
  tfit->add_option("--max-iters", tff.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  tfit->add_option("--restarts", tff.restarts, "Independent seedings, lowest inertia kept")->check(CLI::PositiveNumber);
  tfit->add_option("--out", tff.out, "Cluster model to write (json)")->required();

  TaxonomyLabelFlags tlf;
  auto* tlabel = taxonomy_cmd->add_subcommand("label", "Name each cluster through the completion backend");
  tlabel->add_option("--model", tlf.model, "Cluster model (json)")->required()->check(CLI::ExistingFile);
  tlabel->add_option("--embeddings", tlf.embeddings, "Embeddings (jsonl)")->required()->check(CLI::ExistingFile);
  tlabel->add_option("--prefix", tlf.prefix, "Only ids with this prefix (stripped from names)");
  tlabel->add_option("--per-cluster", tlf.per_cluster, "Exemplars sent per cluster")->check(CLI::PositiveNumber);
  tlabel->add_option("--out", tlf.out, "Labeled cluster model to write (json)")->required();

  auto* classifier_cmd = app.add_subcommand("classifier", "Document-type classifier utilities");
  classifier_cmd->require_subcommand(1);
  ClassifierTrainFlags ctf;
  auto* ctrain = classifier_cmd->add_subcommand("train", "Train the classifier on labeled embeddings");
  ctrain->add_option("--embeddings", ctf.embeddings, "Embeddings (jsonl)")->required()->check(CLI::ExistingFile);
  ctrain->add_option("--labels", ctf.labels, "Labels (jsonl of {id, label})")->required()->check(CLI::ExistingFile);
  ctrain->add_option("--l2", ctf.l2, "L2 penalty")->check(CLI::NonNegativeNumber);
  ctrain->add_option("--lr", ctf.lr, "Step size")->check(CLI::PositiveNumber);
  ctrain->add_option("--epochs", ctf.epochs, "Full-batch epochs")->check(CLI::PositiveNumber);
  ctrain->add_option("--seed", ctf.seed, "Seed for initialization and the holdout split");
  ctrain->add_option("--holdout", ctf.holdout, "Share of rows held out for accuracy")->check(CLI::Range(0.0, 0.9));
  ctrain->add_option("--out", ctf.out, "Classifier to write (json)")->required();

  ClassifierPredictFlags cpf;
  auto* cpredict = classifier_cmd->add_subcommand("predict", "Predict a type for every embedding");
  cpredict->add_option("--model", cpf.model, "Classifier (json)")->required()->check(CLI::ExistingFile);
  cpredict->add_option("--embeddings", cpf.embeddings, "Embeddings (jsonl)")->required()->check(CLI::ExistingFile);
  cpredict->add_option("--prefix", cpf.prefix, "Only ids with this prefix");
  cpredict->add_option("--out", cpf.out, "Output file (jsonl); standard output when omitted");

  GraphBuildFlags gf;
  auto* gbuild = graph_cmd->add_subcommand("build", "Build one co-occurrence graph from meta records");
  gbuild->add_option("--in", gf.in, "Meta records (jsonl)")->required()->check(CLI::ExistingFile);
  gbuild->add_option("--out", gf.out, "Graph file to write")->required();
  gbuild->add_option("--doc-type", gf.doc_type, "Document type label")->required();
  gbuild->add_option("--epsilon", gf.epsilon, "Edge weight smoothing")->check(CLI::PositiveNumber);

  PathsSampleFlags sf;
  auto* psample = paths_cmd->add_subcommand("sample", "Sample meta paths from one graph file");
  psample->add_option("--graph", sf.graph, "Graph file")->required()->check(CLI::ExistingFile);
  psample->add_option("--count", sf.count, "Paths to draw")->check(CLI::PositiveNumber);
  psample->add_option("--seed", sf.seed, "Seed");
  psample->add_option("--max-steps", sf.max_steps, "Maximum path length")->check(CLI::PositiveNumber);
  psample->add_option("--min-length", sf.min_length, "Shorter walks are retried")
      ->check(CLI::PositiveNumber);
  psample->add_option("--max-retries", sf.max_retries, "Retries for short walks")
      ->check(CLI::NonNegativeNumber);
  psample->add_option("--partitions", sf.partitions, "Independent sampling streams")
      ->check(CLI::PositiveNumber);
  psample->add_option("--seeds", sf.seeds, "Meta records for demonstration selection (jsonl)")
      ->check(CLI::ExistingFile);
  psample->add_option("--out", sf.out, "Output file (jsonl); standard output when omitted");

  CorpusFlags cf;
  auto* corpus = app.add_subcommand("corpus", "Synthetic corpus utilities");
  corpus->require_subcommand(1);
  auto* cgen = corpus->add_subcommand("generate", "Write the synthetic mini corpus and a config");
  cgen->add_option("--out", cf.out, "Directory to write")->required();
  cgen->add_option("--seed", cf.options.seed, "Seed");
  cgen->add_option("--documents", cf.options.documents, "Documents")->check(CLI::PositiveNumber);
  cgen->add_option("--conversations", cf.options.conversations, "Conversations")
      ->check(CLI::PositiveNumber);
  cgen->add_option("--dim", cf.options.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  cgen->add_option("--single-count", cf.options.single_count, "synthesis.single_count in the config");
  cgen->add_option("--multi-count", cf.options.multi_count, "synthesis.multi_count in the config");

  std::string template_dir;
  auto* templates = app.add_subcommand("templates", "Prompt template utilities");
  templates->require_subcommand(1);
  auto* tverify = templates->add_subcommand("verify", "Check template files against the built-in bodies");
  tverify->add_option("--dir", template_dir, "Template directory")->required()->check(CLI::ExistingDirectory);
  auto* tlist = templates->add_subcommand("list", "Print template names, placeholders and digests");

  auto* config_cmd = app.add_subcommand("config", "Configuration utilities");
  config_cmd->require_subcommand(1);
  auto* ckeys = config_cmd->add_subcommand("keys", "List every config key with its default");

  std::vector<const char*> argv{"wildlong"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  }

  try {
    setup_logging(log_level);
    if (run->parsed()) {
      std::optional<Stage> stop;
      if (!stop_after.empty()) stop = pipeline::stage_from_name(stop_after);
      return run_through(pf, stop, out);
    }
    if (tfit->parsed()) return taxonomy_fit(tff, out);
    if (tlabel->parsed()) return taxonomy_label(tlf, pf, out);
    if (ctrain->parsed()) return classifier_train(ctf, out);
    if (cpredict->parsed()) return classifier_predict(cpf, out);
    if (gbuild->parsed()) return graph_build(gf, out);
    if (psample->parsed()) return paths_sample(sf, out);
    for (const auto& sc : stage_cmds) {
      if (sc.app->parsed()) return run_through(pf, sc.stage, out);
    }
    if (cgen->parsed()) return corpus_generate(cf, out);
    if (tverify->parsed()) {
      llm::verify_template_assets(template_dir);
      out << "templates match\n";
      return kOk;
    }
    if (tlist->parsed()) {
      for (auto id : llm::kAllTemplates) {
        const auto& t = llm::builtin_template(id);
        std::string ph;
        for (const auto& p : t.placeholders()) ph += (ph.empty() ? "" : ",") + p;
        out << fmt::format("{} v{} {} [{}]\n", llm::template_name(id), t.version, t.digest(), ph);
      }
      return kOk;
    }
    if (ckeys->parsed()) {
      const PipelineConfig defaults;
      for (const auto& k : pipeline::config_keys()) {
        out << fmt::format("{} ({}) = {}  # {}\n", k.name, k.type,
                           pipeline::get_config_value(defaults, k.name), k.help);
      }
      return kOk;
    }
    err << "error: no command\n";
    return kUsage;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace wildlong::cli
