#include "wildlong/pipeline/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wildlong/error.hpp"
#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/graph/path_sampler.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/llm/http_backend.hpp"
#include "wildlong/llm/mock_backend.hpp"
#include "wildlong/llm/templates.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/pipeline/resample.hpp"
#include "wildlong/pipeline/synthesis.hpp"
#include "wildlong/pipeline/worker_pool.hpp"
#include "wildlong/taxonomy/classifier.hpp"
#include "wildlong/taxonomy/embedding.hpp"
#include "wildlong/taxonomy/kmeans.hpp"

namespace wildlong::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr std::string_view kStageNames[] = {"filter", "extract",      "taxonomy",   "classify",
                                            "select", "graphs",       "paths",      "instructions",
                                            "synthesize", "emit"};
constexpr std::size_t kChunk = 16;

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<int>(s)]; }

std::optional<Stage> stage_from_name(std::string_view name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::shared_ptr<llm::Backend> make_backend(const BackendSettings& settings) {
  if (settings.kind == "mock") {
    return std::make_shared<llm::MockBackend>(llm::MockOptions{settings.mock_malformed_rate});
  }
  if (settings.kind == "http") {
    llm::HttpBackendConfig hc;
    hc.base_url = settings.base_url;
    hc.model = settings.model;
    if (const char* key = std::getenv(settings.api_key_env.c_str())) hc.api_key = key;
    hc.timeout = std::chrono::milliseconds(settings.timeout_ms);
    hc.log_bodies = settings.log_bodies;
    return std::make_shared<llm::HttpBackend>(hc);
  }
  throw InputError("unknown backend kind '" + settings.kind + "'");
}

llm::GatewayOptions gateway_options(const BackendSettings& s) {
  llm::GatewayOptions o;
  o.retry.max_attempts = static_cast<int>(s.max_attempts);
  o.retry.base_backoff = std::chrono::milliseconds(s.base_backoff_ms);
  o.retry.max_backoff = std::chrono::milliseconds(s.max_backoff_ms);
  o.max_concurrency = s.max_concurrency;
  o.requests_per_interval = s.requests_per_interval;
  o.interval = std::chrono::milliseconds(s.interval_ms);
  o.log_bodies = s.log_bodies;
  return o;
}

namespace {

// ---- checkpoint directory -------------------------------------------------

class Checkpoints {
 public:
  Checkpoints(fs::path dir, std::string run_digest, bool fresh)
      : dir_(std::move(dir)), digest_(std::move(run_digest)) {
    if (fresh) fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto path = dir_ / "manifest.json";
    if (fs::exists(path)) {
      manifest_ = Json::parse(read_file(path), nullptr, false);
      if (manifest_.is_discarded() || manifest_.value("format", "") != "wildlong.checkpoint") {
        throw FormatError(path.string() + " is not a checkpoint manifest");
      }
      if (manifest_.value("run_digest", "") != digest_) {
        throw InputError("checkpoint directory " + dir_.string() +
                         " holds a run with a different configuration or inputs; "
                         "use a fresh directory or --fresh");
      }
    } else {
      manifest_ = {{"format", "wildlong.checkpoint"},
                   {"version", 1},
                   {"run_digest", digest_},
                   {"completed", Json::array()},
                   {"partial", Json::object()}};
      save_manifest();
    }
  }

  const fs::path& dir() const { return dir_; }

  bool done(Stage s) const {
    for (const auto& c : manifest_["completed"]) {
      if (c == stage_name(s)) return true;
    }
    return false;
  }

  Json load(Stage s) const {
    auto j = Json::parse(read_file(stage_file(s)), nullptr, false);
    if (j.is_discarded()) throw FormatError("checkpoint for stage " + std::string(stage_name(s)) + " is corrupt");
    return j;
  }

  void commit(Stage s, const Json& payload) {
    write_file_atomic(stage_file(s), payload.dump() + "\n");
    if (!done(s)) manifest_["completed"].push_back(stage_name(s));
    manifest_["partial"].erase(std::string(stage_name(s)));
    save_manifest();
    fs::remove(partial_file(s));
  }

  std::vector<Json> partial(Stage s) const {
    const auto key = std::string(stage_name(s));
    const auto count = manifest_["partial"].contains(key)
                           ? manifest_["partial"][key].value("count", std::size_t{0})
                           : std::size_t{0};
    std::vector<Json> rows;
    if (count == 0 || !fs::exists(partial_file(s))) return rows;
    std::ifstream in(partial_file(s));
    std::string line;
    while (rows.size() < count && std::getline(in, line)) {
      auto j = Json::parse(line, nullptr, false);
      if (j.is_discarded()) break;
      rows.push_back(std::move(j));
    }
    if (rows.size() != count) throw FormatError("partial checkpoint for " + key + " is truncated");
    return rows;
  }

  void append_partial(Stage s, const std::vector<Json>& rows, const std::string& last_item) {
    const auto key = std::string(stage_name(s));
    if (!synced_.count(key)) {
      // drop any rows written after the last manifest update
      std::string keep;
      for (const auto& r : partial(s)) keep += r.dump() + "\n";
      write_file_atomic(partial_file(s), keep);
      synced_.insert(key);
    }
    {
      std::ofstream out(partial_file(s), std::ios::app | std::ios::binary);
      for (const auto& r : rows) out << r.dump() << '\n';
      out.flush();
      if (!out) throw InputError("cannot append to " + partial_file(s).string());
    }
    auto& entry = manifest_["partial"][key];
    if (!entry.is_object()) entry = Json::object();
    entry["count"] = entry.value("count", std::size_t{0}) + rows.size();
    entry["last_item"] = last_item;
    save_manifest();
  }

 private:
  fs::path stage_file(Stage s) const { return dir_ / (std::string(stage_name(s)) + ".json"); }
  fs::path partial_file(Stage s) const {
    return dir_ / (std::string(stage_name(s)) + ".partial.jsonl");
  }
  void save_manifest() { write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

  fs::path dir_;
  std::string digest_;
  Json manifest_;
  std::set<std::string> synced_;
};

std::string file_digest(const fs::path& p) {
  if (p.empty()) return "unset";
  if (!fs::exists(p)) throw InputError("input file " + p.string() + " does not exist");
  return sha256_hex(read_file(p));
}

Json rejects_json(const std::vector<Reject>& rejects) {
  Json arr = Json::array();
  for (const auto& r : rejects) arr.push_back(to_json(r));
  return arr;
}

std::vector<std::string> ids_of(const Json& arr) { return arr.get<std::vector<std::string>>(); }

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// ---- the run ----------------------------------------------------------------

class Runner {
 public:
  Runner(const PipelineConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {
    cfg_.validate();
    input_digests_ = {{"conversations", file_digest(cfg_.conversations)},
                      {"documents", file_digest(cfg_.documents)},
                      {"embeddings", file_digest(cfg_.embeddings)}};
    config_digest_ = config_digest(cfg_);
    const auto run_digest = sha256_hex(config_digest_ + input_digests_.dump());
    ckpt_ = std::make_unique<Checkpoints>(cfg_.resolved_checkpoint_dir(), run_digest, opts.fresh);

    auto backend = opts.backend ? opts.backend : make_backend(cfg_.backend);
    gateway_ = std::make_unique<llm::Gateway>(backend, gateway_options(cfg_.backend));
    llm_.temperature = cfg_.temperature;
    llm_.parse_retries = static_cast<int>(cfg_.parse_retries);

    if (!cfg_.documents.empty()) {
      auto loaded = load_documents(cfg_.documents, cfg_.tokenizer);
      docs_ = std::move(loaded.items);
      docs_malformed_ = loaded.stats.malformed;
      load_rejects_ = std::move(loaded.rejected);
    }
    for (std::size_t i = 0; i < docs_.size(); ++i) doc_index_[docs_[i].doc_id] = i;
    if (!cfg_.embeddings.empty()) embeddings_ = taxonomy::load_embeddings(cfg_.embeddings);
  }

  RunSummary run() {
    RunSummary summary;
    summary.dataset_path = cfg_.output_dir / "dataset.jsonl";
    summary.rejects_path = cfg_.output_dir / "rejects.jsonl";
    summary.report_path = opts_.report_path.value_or(cfg_.output_dir / "report.json");
    for (Stage s : kAllStages) {
      if (s != Stage::kEmit && ckpt_->done(s)) {
        spdlog::info("stage {}: restored from checkpoint", stage_name(s));
        payload_[s] = ckpt_->load(s);
      } else {
        spdlog::info("stage {}: running", stage_name(s));
        payload_[s] = run_stage(s, summary);
        ckpt_->commit(s, payload_[s]);
      }
      summary.last_stage = s;
      if (opts_.stop_after && *opts_.stop_after == s && s != Stage::kEmit) return summary;
    }
    summary.completed = true;
    summary.report = payload_[Stage::kEmit];
    return summary;
  }

 private:
  Json run_stage(Stage s, const RunSummary& summary) {
    switch (s) {
      case Stage::kFilter: return run_filter();
      case Stage::kExtract: return run_extract();
      case Stage::kTaxonomy: return run_taxonomy();
      case Stage::kClassify: return run_classify();
      case Stage::kSelect: return run_select();
      case Stage::kGraphs: return run_graphs();
      case Stage::kPaths: return run_paths();
      case Stage::kInstructions: return run_instructions();
      case Stage::kSynthesize: return run_synthesize();
      case Stage::kEmit: return run_emit(summary);
    }
    throw std::logic_error("unhandled stage");
  }

  std::uint64_t stage_seed(Stage s) const {
    return derive_seed(cfg_.seed, static_cast<std::uint64_t>(s) + 1);
  }

  const DocRecord& doc(const std::string& id) const { return docs_.at(doc_index_.at(id)); }

  // -- filter --
  Json run_filter() {
    std::vector<Conversation> convs;
    std::vector<Reject> rejects = load_rejects_;
    std::size_t conv_malformed = 0;
    if (!cfg_.conversations.empty()) {
      auto loaded = load_conversations(cfg_.conversations);
      convs = std::move(loaded.items);
      conv_malformed = loaded.stats.malformed;
      rejects.insert(rejects.end(), loaded.rejected.begin(), loaded.rejected.end());
    }
    const auto conv_in = convs.size();
    auto kept = filter_conversations(std::move(convs), cfg_.conversation_min_tokens, cfg_.tokenizer);
    rejects.insert(rejects.end(), kept.rejected.begin(), kept.rejected.end());

    auto single = filter_documents(docs_, cfg_.single_min_tokens, cfg_.single_max_tokens);
    auto multi = filter_documents(docs_, cfg_.multi_min_tokens, cfg_.multi_max_tokens);
    std::set<std::string> usable;
    Json single_ids = Json::array();
    Json multi_ids = Json::array();
    for (const auto& d : single.kept) {
      single_ids.push_back(d.doc_id);
      usable.insert(d.doc_id);
    }
    for (const auto& d : multi.kept) {
      multi_ids.push_back(d.doc_id);
      usable.insert(d.doc_id);
    }
    for (const auto& r : single.rejected) {
      if (!usable.count(r.item)) rejects.push_back(r);
    }
    Json kept_ids = Json::array();
    for (const auto& c : kept.kept) kept_ids.push_back(c.id);
    return {{"conversations_in", conv_in},
            {"conversations_malformed", conv_malformed},
            {"conversations_kept", kept_ids},
            {"documents_in", docs_.size()},
            {"documents_malformed", docs_malformed_},
            {"single_pool", single_ids},
            {"multi_pool", multi_ids},
            {"rejects", rejects_json(rejects)}};
  }

  // -- extract --
  Json extract_one(const Conversation& conv) {
    llm::CompletionRequest req;
    req.prompt = llm::render_prompt(llm::TemplateId::kExtractMeta, {{"conversation", conv.transcript()}});
    req.temperature = cfg_.extract_temperature;
    req.request_id = sha256_hex(req.prompt).substr(0, 16);
    const std::string id = conv.id;
    auto parsed = llm::complete_and_parse<meta::ExtractionResult>(
        *gateway_, req, [&](const std::string& raw) { return meta::parse_meta_extraction(raw, id); },
        llm_.parse_retries);
    Json row = {{"id", conv.id}};
    if (!parsed.value) {
      row["status"] = "unparseable";
      row["error"] = parsed.error;
      row["raw"] = parsed.raw;
    } else if (std::holds_alternative<meta::NoLongDocument>(*parsed.value)) {
      row["status"] = "no_long_document";
    } else {
      row["status"] = "record";
      row["record"] = meta::to_json(std::get<meta::MetaRecord>(*parsed.value));
    }
    return row;
  }

  Json run_extract() {
    const auto kept = ids_of(payload_[Stage::kFilter]["conversations_kept"]);
    std::map<std::string, Conversation> by_id;
    if (!kept.empty()) {
      auto loaded = load_conversations(cfg_.conversations);
      for (auto& c : loaded.items) by_id.try_emplace(c.id, std::move(c));
    }
    auto rows = ckpt_->partial(Stage::kExtract);
    if (!rows.empty()) spdlog::info("extract: resuming after {} items", rows.size());
    for (std::size_t start = rows.size(); start < kept.size(); start += kChunk) {
      const auto n = std::min(kChunk, kept.size() - start);
      auto chunk = parallel_map(n, cfg_.workers,
                                [&](std::size_t i) { return extract_one(by_id.at(kept[start + i])); });
      ckpt_->append_partial(Stage::kExtract, chunk, kept[start + n - 1]);
      rows.insert(rows.end(), chunk.begin(), chunk.end());
    }
    std::vector<Reject> rejects;
    for (const auto& r : rows) {
      if (r["status"] == "unparseable") {
        rejects.push_back({"extract", r["id"], "unparseable_extraction", r.value("error", "")});
      }
    }
    return {{"items", rows}, {"rejects", rejects_json(rejects)}};
  }

  // -- taxonomy --
  Json run_taxonomy() {
    std::vector<meta::MetaRecord> records;
    for (const auto& r : payload_[Stage::kExtract]["items"]) {
      if (r["status"] == "record") records.push_back(meta::meta_record_from_json(r["record"]));
    }
    std::map<std::string, double> freq;
    for (const auto& r : records) {
      for (const auto& t : r.doc_types) freq[t.normalized()] += 1.0;
    }
    std::vector<std::string> names;
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    std::vector<Reject> rejects;
    for (const auto& [name, w] : freq) {
      const auto* e = embeddings_.find(taxonomy::doc_type_embedding_id(name));
      if (!e) {
        rejects.push_back({"taxonomy", name, "no_type_embedding", {}});
        continue;
      }
      names.push_back(name);
      points.push_back(taxonomy::l2_normalized(*e));
      weights.push_back(w);
    }
    Json out = {{"labels", Json::array()}, {"type_map", Json::object()}, {"records", Json::array()}};
    if (names.empty()) {
      out["rejects"] = rejects_json(rejects);
      return out;
    }
    taxonomy::KMeansOptions ko;
    ko.k = std::min<std::size_t>(cfg_.num_types, names.size());
    ko.seed = stage_seed(Stage::kTaxonomy);
    ko.max_iters = static_cast<int>(cfg_.kmeans_max_iters);
    ko.restarts = static_cast<int>(cfg_.kmeans_restarts);
    ko.exec = kernels::Exec::kOpenMP;
    const auto fit = taxonomy::kmeans_fit(points, ko, weights);
    const auto exemplars = taxonomy::cluster_exemplars(fit, points, names, 5);
    const auto model = taxonomy::label_clusters(fit.model, exemplars, *gateway_);

    std::map<std::string, std::string> type_map;
    for (std::size_t i = 0; i < names.size(); ++i) type_map[names[i]] = model.labels[fit.assignment[i]];

    Json mapped = Json::array();
    for (auto& r : records) {
      std::vector<meta::MetaValue> labels;
      for (const auto& t : r.doc_types) {
        auto it = type_map.find(t.normalized());
        if (it == type_map.end()) continue;
        auto v = meta::normalize_value(it->second);
        if (std::find(labels.begin(), labels.end(), v) == labels.end()) labels.push_back(v);
      }
      if (labels.empty()) {
        rejects.push_back({"taxonomy", r.conversation_id, "record_type_unmapped", {}});
        continue;
      }
      r.doc_types = std::move(labels);
      mapped.push_back(meta::to_json(r));
    }
    out["model"] = taxonomy::to_json(model);
    out["labels"] = model.labels;
    out["type_map"] = type_map;
    out["records"] = mapped;
    out["iterations"] = fit.iterations;
    out["converged"] = fit.converged;
    out["rejects"] = rejects_json(rejects);
    return out;
  }

  std::vector<meta::MetaRecord> typed_records() const {
    std::vector<meta::MetaRecord> out;
    for (const auto& r : payload_.at(Stage::kTaxonomy)["records"]) {
      out.push_back(meta::meta_record_from_json(r));
    }
    return out;
  }

  // -- classify --
  Json run_classify() {
    const auto& tax = payload_[Stage::kTaxonomy];
    const auto labels = tax["labels"].get<std::vector<std::string>>();
    const auto type_map = tax["type_map"].get<std::map<std::string, std::string>>();
    std::optional<taxonomy::ClusterModel> model;
    if (tax.contains("model")) model = taxonomy::cluster_model_from_json(tax["model"]);

    auto map_type = [&](const std::string& raw) -> std::optional<std::string> {
      const auto norm = meta::normalize_text(raw);
      if (std::find(labels.begin(), labels.end(), norm) != labels.end()) return norm;
      if (auto it = type_map.find(norm); it != type_map.end()) return it->second;
      if (model) {
        if (const auto* e = embeddings_.find(taxonomy::doc_type_embedding_id(norm))) {
          return model->labels[model->nearest(taxonomy::l2_normalized(*e))];
        }
      }
      return std::nullopt;
    };
    auto features_of = [&](const std::string& id) -> std::optional<std::vector<double>> {
      const auto* e = embeddings_.find(id);
      if (!e) return std::nullopt;
      return taxonomy::l2_normalized(*e);
    };

    std::set<std::string> pool;
    for (const char* key : {"single_pool", "multi_pool"}) {
      for (const auto& id : payload_[Stage::kFilter][key]) pool.insert(id.get<std::string>());
    }

    std::vector<std::vector<double>> feats;
    std::vector<std::string> feat_labels;
    for (const auto& d : docs_) {
      if (!d.annotation) continue;
      auto label = map_type(*d.annotation);
      auto f = features_of(d.doc_id);
      if (label && f) {
        feats.push_back(std::move(*f));
        feat_labels.push_back(*label);
      }
    }
    std::vector<std::string> present(feat_labels.begin(), feat_labels.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    Json clf_info = {{"trained", false}, {"annotated", feats.size()}, {"classes", present.size()}};
    std::optional<taxonomy::TypeClassifier> clf;
    if (present.size() >= 2) {
      std::vector<std::uint32_t> y;
      for (const auto& l : feat_labels) {
        y.push_back(static_cast<std::uint32_t>(
            std::lower_bound(present.begin(), present.end(), l) - present.begin()));
      }
      std::vector<std::size_t> order(feats.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng = make_rng(stage_seed(Stage::kClassify));
      shuffle(order, rng);
      const auto n_hold = static_cast<std::size_t>(cfg_.holdout_fraction * static_cast<double>(order.size()));
      std::vector<std::vector<double>> train_x;
      std::vector<std::uint32_t> train_y;
      for (std::size_t i = n_hold; i < order.size(); ++i) {
        train_x.push_back(feats[order[i]]);
        train_y.push_back(y[order[i]]);
      }
      std::set<std::uint32_t> train_classes(train_y.begin(), train_y.end());
      const bool holdout_ok = n_hold > 0 && train_classes.size() == present.size();
      if (!holdout_ok) {
        train_x = feats;
        train_y = y;
      }
      taxonomy::TrainOptions to;
      to.l2 = cfg_.classifier_l2;
      to.lr = cfg_.classifier_lr;
      to.epochs = static_cast<int>(cfg_.classifier_epochs);
      to.seed = stage_seed(Stage::kClassify);
      to.exec = kernels::Exec::kOpenMP;
      clf = taxonomy::classifier_train(train_x, train_y, present, to);
      clf_info["trained"] = true;
      clf_info["train_size"] = train_x.size();
      if (holdout_ok) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n_hold; ++i) {
          correct += taxonomy::classifier_predict(*clf, feats[order[i]]).type == y[order[i]];
        }
        clf_info["holdout_size"] = n_hold;
        clf_info["holdout_accuracy"] = static_cast<double>(correct) / static_cast<double>(n_hold);
      } else {
        clf_info["holdout_size"] = 0;
        clf_info["holdout_accuracy"] = nullptr;
      }
      taxonomy::save_classifier(ckpt_->dir() / "classifier.json", *clf);
    }

    std::map<std::string, std::string> types;
    std::map<std::string, std::uint64_t> sources;
    std::vector<Reject> rejects;
    for (const auto& d : docs_) {
      if (!pool.count(d.doc_id)) continue;
      if (d.doc_type) {
        if (auto label = map_type(*d.doc_type)) {
          types[d.doc_id] = *label;
          ++sources["corpus"];
          continue;
        }
      }
      if (present.size() == 1) {
        types[d.doc_id] = present.front();
        ++sources["single_class"];
        continue;
      }
      auto f = features_of(d.doc_id);
      if (clf && f) {
        types[d.doc_id] = clf->type_names[taxonomy::classifier_predict(*clf, *f).type];
        ++sources["classifier"];
      } else {
        rejects.push_back({"classify", d.doc_id, f ? "no_classifier" : "no_embedding", {}});
      }
    }
    return {{"types", types}, {"sources", sources}, {"classifier", clf_info},
            {"rejects", rejects_json(rejects)}};
  }

  // -- select --
  Json run_select() {
    std::map<std::string, double> weights;
    for (const auto& r : typed_records()) {
      for (const auto& t : r.doc_types) weights[t.normalized()] += 1.0 / static_cast<double>(r.doc_types.size());
    }
    const auto types = payload_[Stage::kClassify]["types"].get<std::map<std::string, std::string>>();
    Json out = {{"target", Json::object()},     {"single", Json::array()},
                {"pairs", Json::array()},       {"single_quotas", Json::object()},
                {"multi_quotas", Json::object()}, {"single_supply", 0},
                {"pairs_formed", 0},            {"rejects", Json::array()}};
    if (weights.empty()) return out;
    const auto target = TargetDistribution::from_weights(weights);
    out["target"] = target.probs();

    auto candidates = [&](const char* pool, const std::set<std::string>& exclude) {
      std::vector<DocRecord> c;
      for (const auto& id : payload_[Stage::kFilter][pool]) {
        const auto sid = id.get<std::string>();
        auto it = types.find(sid);
        if (it == types.end() || target.at(it->second) <= 0.0 || exclude.count(sid)) continue;
        DocRecord d = doc(sid);
        d.doc_type = it->second;
        c.push_back(std::move(d));
      }
      return c;
    };

    Rng rng = make_rng(stage_seed(Stage::kSelect));
    std::set<std::string> chosen;
    const auto single_cands = candidates("single_pool", {});
    out["single_supply"] = single_cands.size();
    const auto n_single = std::min<std::uint64_t>(cfg_.single_count, single_cands.size());
    if (n_single > 0) {
      auto res = resample_to_distribution(single_cands, target, n_single, rng);
      for (const auto& d : res.docs) {
        out["single"].push_back(d.doc_id);
        chosen.insert(d.doc_id);
      }
      out["single_quotas"] = res.quotas;
    }

    const auto multi_cands = candidates("multi_pool", chosen);
    auto pairing = pair_documents(multi_cands, cfg_.multi_combined_max_tokens, rng);
    out["pairs_formed"] = pairing.pairs.size();
    out["over_cap_attempts"] = pairing.over_cap_attempts;
    const auto n_multi = std::min<std::uint64_t>(cfg_.multi_count, pairing.pairs.size());
    if (n_multi > 0) {
      std::map<std::string, std::uint64_t> supply;
      for (const auto& p : pairing.pairs) ++supply[p.doc_type()];
      const auto quotas = solve_quotas(n_multi, target, supply);
      std::map<std::string, std::uint64_t> taken;
      for (const auto& p : pairing.pairs) {
        const auto t = p.doc_type();
        if (taken[t] < quotas.at(t)) {
          ++taken[t];
          out["pairs"].push_back({p.first.doc_id, p.second.doc_id});
        }
      }
      out["multi_quotas"] = quotas;
    }
    out["rejects"] = rejects_json(pairing.rejected);
    return out;
  }

  std::map<std::string, std::string> selected_types() const {
    return payload_.at(Stage::kClassify)["types"].get<std::map<std::string, std::string>>();
  }

  // -- graphs --
  Json run_graphs() {
    const auto records = typed_records();
    const auto types = selected_types();
    std::set<std::string> multi_types;
    for (const auto& p : payload_[Stage::kSelect]["pairs"]) multi_types.insert(types.at(p[0]));
    std::vector<std::string> labels;
    for (const auto& [t, p] : payload_[Stage::kSelect]["target"].items()) labels.push_back(t);

    Json graphs = Json::array();
    std::vector<Reject> rejects;
    for (std::size_t li = 0; li < labels.size(); ++li) {
      const auto& label = labels[li];
      std::vector<meta::MetaRecord> mine;
      for (const auto& r : records) {
        for (const auto& t : r.doc_types) {
          if (t.normalized() == label) {
            mine.push_back(r);
            break;
          }
        }
      }
      const auto g = graph::build_graph(mine, label, cfg_.epsilon);
      const auto single_file = fmt::format("graphs/single-{:03}.bin", li);
      graph::save_graph(ckpt_->dir() / single_file, g);
      Json entry = {{"doc_type", label},
                    {"single", single_file},
                    {"nodes", g.node_count()},
                    {"edges", g.edge_count()},
                    {"conversations", g.conversations_ingested()}};
      if (multi_types.count(label)) {
        auto rw = rewrite_task_nodes(g, *gateway_, llm_, cfg_.rewrite_batch);
        const auto multi_file = fmt::format("graphs/multi-{:03}.bin", li);
        graph::save_graph(ckpt_->dir() / multi_file, rw.graph);
        entry["multi"] = multi_file;
        entry["task_mapping"] = rw.mapping;
        entry["flagged"] = rw.flagged;
        for (const auto& [task, why] : rw.flagged) {
          rejects.push_back({"graphs", label + "/" + task, "task_rewrite_kept_original", why});
        }
      }
      graphs.push_back(entry);
    }
    return {{"graphs", graphs}, {"rejects", rejects_json(rejects)}};
  }

  // -- paths --
  std::map<std::pair<std::string, Mode>, std::uint64_t> needed() const {
    const auto types = selected_types();
    std::map<std::pair<std::string, Mode>, std::uint64_t> need;
    for (const auto& id : payload_.at(Stage::kSelect)["single"]) ++need[{types.at(id), Mode::kSingle}];
    for (const auto& p : payload_.at(Stage::kSelect)["pairs"]) ++need[{types.at(p[0]), Mode::kMulti}];
    return need;
  }

  Json run_paths() {
    const auto need = needed();
    Json groups = Json::array();
    std::vector<Reject> rejects;
    const auto& graphs = payload_[Stage::kGraphs]["graphs"];
    for (std::size_t li = 0; li < graphs.size(); ++li) {
      const auto label = graphs[li]["doc_type"].get<std::string>();
      for (Mode mode : {Mode::kSingle, Mode::kMulti}) {
        auto it = need.find({label, mode});
        if (it == need.end()) continue;
        const char* key = mode == Mode::kSingle ? "single" : "multi";
        const auto g = graph::load_graph_file(ckpt_->dir() / graphs[li][key].get<std::string>());
        Json group = {{"doc_type", label}, {"mode", mode_name(mode)}, {"needed", it->second},
                      {"paths", Json::array()}};
        if (g.empty()) {
          rejects.push_back({"paths", label + "/" + std::string(mode_name(mode)), "empty_graph", {}});
        } else {
          graph::WalkConfig wc;
          wc.max_steps = static_cast<int>(cfg_.max_steps);
          wc.min_length = static_cast<int>(cfg_.min_length);
          wc.max_retries = static_cast<int>(cfg_.max_retries);
          wc.seed = derive_seed(stage_seed(Stage::kPaths), li * 2 + (mode == Mode::kMulti));
          const auto count = cfg_.instruction_rounds * ceil_div(it->second, 3);
          for (const auto& p : graph::sample_paths_partitioned(g, wc, count, cfg_.path_partitions,
                                                               kernels::Exec::kOpenMP)) {
            group["paths"].push_back(graph::to_json(p));
          }
        }
        groups.push_back(group);
      }
    }
    return {{"groups", groups}, {"rejects", rejects_json(rejects)}};
  }

  // -- instructions --
  std::vector<meta::SeedPath> seeds_for(const std::string& label, Mode mode) const {
    std::vector<meta::SeedPath> seeds;
    for (const auto& r : typed_records()) {
      bool mine = false;
      for (const auto& t : r.doc_types) mine = mine || t.normalized() == label;
      if (!mine) continue;
      if (auto s = meta::make_seed_path(r)) seeds.push_back(std::move(*s));
    }
    if (mode == Mode::kMulti) {
      for (const auto& g : payload_.at(Stage::kGraphs)["graphs"]) {
        if (g["doc_type"] == label && g.contains("task_mapping")) {
          seeds = apply_task_mapping(std::move(seeds),
                                     g["task_mapping"].get<std::map<std::string, std::string>>());
        }
      }
    }
    return seeds;
  }

  Json instructions_for_group(const Json& group) {
    const auto label = group["doc_type"].get<std::string>();
    const auto mode = *mode_from_name(group["mode"].get<std::string>());
    const auto need = group["needed"].get<std::uint64_t>();
    std::vector<graph::MetaPath> paths;
    for (const auto& p : group["paths"]) paths.push_back(graph::meta_path_from_json(p));
    const std::string tag = label + "/" + std::string(mode_name(mode));

    Json row = {{"doc_type", label}, {"mode", mode_name(mode)}, {"instructions", Json::array()}};
    std::vector<Reject> rejects;
    const auto seeds = seeds_for(label, mode);
    if (seeds.empty()) {
      rejects.push_back({"instructions", tag, "no_seed_paths", {}});
    } else {
      std::size_t next = 0;
      std::uint64_t have = 0;
      while (have < need && next < paths.size()) {
        const auto take = std::min<std::size_t>(ceil_div(need - have, 3), paths.size() - next);
        auto outcomes = parallel_map(take, cfg_.workers, [&](std::size_t i) {
          return generate_instruction(paths[next + i], seeds, label, *gateway_, llm_);
        });
        for (std::size_t i = 0; i < take; ++i) {
          auto& o = outcomes[i];
          if (!o.value) {
            rejects.push_back({"instructions", fmt::format("{}#path{}", tag, next + i),
                               "unparseable_instructions", o.error});
            continue;
          }
          for (const auto& text : o.value->instructions) {
            row["instructions"].push_back({{"text", text},
                                           {"path_index", next + i},
                                           {"seed_record_id", o.value->seed_record_id},
                                           {"similarity", o.value->similarity}});
            ++have;
          }
        }
        next += take;
      }
      if (have < need) {
        rejects.push_back({"instructions", tag, "instruction_shortfall",
                           fmt::format("{} of {}", have, need)});
      }
    }
    row["rejects"] = rejects_json(rejects);
    return row;
  }

  Json run_instructions() {
    const auto& groups = payload_[Stage::kPaths]["groups"];
    auto rows = ckpt_->partial(Stage::kInstructions);
    for (std::size_t gi = rows.size(); gi < groups.size(); ++gi) {
      auto row = instructions_for_group(groups[gi]);
      ckpt_->append_partial(Stage::kInstructions, {row},
                            fmt::format("{}/{}", row["doc_type"].get<std::string>(),
                                        row["mode"].get<std::string>()));
      rows.push_back(std::move(row));
    }
    Json rejects = Json::array();
    for (const auto& r : rows) {
      for (const auto& x : r["rejects"]) rejects.push_back(x);
    }
    return {{"groups", rows}, {"rejects", rejects}};
  }

  // -- synthesize --
  struct WorkItem {
    Mode mode;
    std::vector<std::string> doc_ids;
    std::string doc_type;
    std::optional<std::string> instruction;
    graph::MetaPath path;
    std::string record_id;
  };

  std::vector<WorkItem> work_items() const {
    const auto types = selected_types();
    std::map<std::pair<std::string, Mode>, std::vector<std::pair<std::string, graph::MetaPath>>> pool;
    const auto& path_groups = payload_.at(Stage::kPaths)["groups"];
    const auto& instr_groups = payload_.at(Stage::kInstructions)["groups"];
    for (std::size_t gi = 0; gi < instr_groups.size(); ++gi) {
      const auto& g = instr_groups[gi];
      const auto key = std::make_pair(g["doc_type"].get<std::string>(),
                                      *mode_from_name(g["mode"].get<std::string>()));
      for (const auto& ins : g["instructions"]) {
        const auto pi = ins["path_index"].get<std::size_t>();
        pool[key].emplace_back(ins["text"].get<std::string>(),
                               graph::meta_path_from_json(path_groups[gi]["paths"][pi]));
      }
    }
    std::vector<WorkItem> items;
    std::map<std::pair<std::string, Mode>, std::size_t> used;
    std::size_t n_single = 0, n_multi = 0;
    auto make = [&](Mode mode, std::vector<std::string> ids) {
      WorkItem w;
      w.mode = mode;
      w.doc_ids = std::move(ids);
      w.doc_type = types.at(w.doc_ids.front());
      const auto key = std::make_pair(w.doc_type, mode);
      auto& k = used[key];
      if (auto it = pool.find(key); it != pool.end() && k < it->second.size()) {
        w.instruction = it->second[k].first;
        w.path = it->second[k].second;
        ++k;
      }
      w.record_id = mode == Mode::kSingle ? fmt::format("single-{:06}", n_single++)
                                          : fmt::format("multi-{:06}", n_multi++);
      items.push_back(std::move(w));
    };
    for (const auto& id : payload_.at(Stage::kSelect)["single"]) make(Mode::kSingle, {id.get<std::string>()});
    for (const auto& p : payload_.at(Stage::kSelect)["pairs"]) {
      make(Mode::kMulti, {p[0].get<std::string>(), p[1].get<std::string>()});
    }
    return items;
  }

  Json synthesize_one(const WorkItem& w) {
    Json row = {{"record_id", w.record_id}};
    if (!w.instruction) {
      row["status"] = "no_instruction";
      return row;
    }
    std::vector<DocRecord> docs;
    for (const auto& id : w.doc_ids) {
      DocRecord d = doc(id);
      d.doc_type = w.doc_type;
      docs.push_back(std::move(d));
    }
    auto o = synthesize_record(docs, *w.instruction, w.path, *gateway_, w.mode, w.record_id,
                               cfg_.seed, llm_);
    if (!o.value) {
      row["status"] = "unparseable";
      row["error"] = o.error;
      row["raw"] = o.raw;
    } else {
      row["status"] = "ok";
      row["record"] = to_json(*o.value);
    }
    return row;
  }

  Json run_synthesize() {
    const auto items = work_items();
    auto rows = ckpt_->partial(Stage::kSynthesize);
    if (!rows.empty()) spdlog::info("synthesize: resuming after {} items", rows.size());
    for (std::size_t start = rows.size(); start < items.size(); start += kChunk) {
      const auto n = std::min(kChunk, items.size() - start);
      auto chunk = parallel_map(n, cfg_.workers,
                                [&](std::size_t i) { return synthesize_one(items[start + i]); });
      ckpt_->append_partial(Stage::kSynthesize, chunk, items[start + n - 1].record_id);
      rows.insert(rows.end(), chunk.begin(), chunk.end());
    }
    std::vector<Reject> rejects;
    for (const auto& r : rows) {
      if (r["status"] == "no_instruction") {
        rejects.push_back({"synthesize", r["record_id"], "no_instruction", {}});
      } else if (r["status"] == "unparseable") {
        rejects.push_back({"synthesize", r["record_id"], "unparseable_response", r.value("error", "")});
      }
    }
    return {{"items", rows}, {"rejects", rejects_json(rejects)}};
  }

  // -- emit --
  Json run_emit(const RunSummary& summary) {
    std::vector<Json> dataset;
    std::vector<Json> synthesis;
    std::vector<Reject> emit_rejects;
    std::set<std::string> seen;
    std::map<std::string, std::map<std::string, std::uint64_t>> emitted;
    for (const auto& row : payload_[Stage::kSynthesize]["items"]) {
      if (row["status"] != "ok") continue;
      const auto rec = synthesis_record_from_json(row["record"]);
      if (!seen.insert(rec.final_instruction).second) {
        emit_rejects.push_back({"emit", rec.record_id, "duplicate_instruction", {}});
        continue;
      }
      std::vector<DocRecord> docs;
      for (const auto& id : rec.doc_ids) docs.push_back(doc(id));
      const std::string context =
          rec.mode == Mode::kSingle ? docs.front().text : concatenate_documents(docs);
      dataset.push_back({{"id", rec.record_id},
                         {"mode", mode_name(rec.mode)},
                         {"doc_type", rec.doc_type},
                         {"doc_ids", rec.doc_ids},
                         {"messages",
                          {{{"role", "user"}, {"content", context + "\n\n" + rec.final_instruction}},
                           {{"role", "assistant"}, {"content", rec.response}}}}});
      synthesis.push_back(row["record"]);
      ++emitted[std::string(mode_name(rec.mode))][rec.doc_type];
    }

    std::vector<Json> all_rejects;
    Json reject_counts = Json::object();
    for (Stage s : kAllStages) {
      if (s == Stage::kEmit) break;
      for (const auto& r : payload_[s]["rejects"]) all_rejects.push_back(r);
    }
    for (const auto& r : emit_rejects) all_rejects.push_back(to_json(r));
    for (const auto& r : all_rejects) {
      auto& slot = reject_counts[r["stage"].get<std::string>()][r["reason"].get<std::string>()];
      slot = slot.is_null() ? 1 : slot.get<std::uint64_t>() + 1;
    }

    write_jsonl(summary.dataset_path, dataset);
    write_jsonl(cfg_.output_dir / "synthesis.jsonl", synthesis);
    write_jsonl(summary.rejects_path, all_rejects);
    const Json report = build_report(dataset.size(), emitted, emit_rejects.size(), reject_counts);
    write_file_atomic(summary.report_path, report.dump(2) + "\n");
    return report;
  }

  Json build_report(std::size_t emitted_total,
                    const std::map<std::string, std::map<std::string, std::uint64_t>>& emitted,
                    std::size_t duplicates, const Json& reject_counts) {
    const auto& f = payload_[Stage::kFilter];
    const auto& sel = payload_[Stage::kSelect];
    std::map<std::string, std::uint64_t> extract_status;
    for (const auto& r : payload_[Stage::kExtract]["items"]) ++extract_status[r["status"].get<std::string>()];
    std::map<std::string, std::uint64_t> synth_status;
    for (const auto& r : payload_[Stage::kSynthesize]["items"]) ++synth_status[r["status"].get<std::string>()];
    std::uint64_t instructions = 0;
    for (const auto& g : payload_[Stage::kInstructions]["groups"]) instructions += g["instructions"].size();
    std::uint64_t paths = 0;
    for (const auto& g : payload_[Stage::kPaths]["groups"]) paths += g["paths"].size();
    Json graph_stats = Json::array();
    for (const auto& g : payload_[Stage::kGraphs]["graphs"]) {
      graph_stats.push_back({{"doc_type", g["doc_type"]},
                             {"nodes", g["nodes"]},
                             {"edges", g["edges"]},
                             {"conversations", g["conversations"]},
                             {"tasks_rewritten", g.contains("task_mapping") ? g["task_mapping"].size() : 0},
                             {"tasks_flagged", g.contains("flagged") ? g["flagged"].size() : 0}});
    }
    const auto types = selected_types();
    std::map<std::string, std::uint64_t> single_hist, multi_hist;
    for (const auto& id : sel["single"]) ++single_hist[types.at(id)];
    for (const auto& p : sel["pairs"]) ++multi_hist[types.at(p[0])];

    Json template_digests = Json::object();
    for (auto id : llm::kAllTemplates) {
      template_digests[std::string(llm::template_name(id))] = llm::builtin_template(id).digest();
    }
    return {
        {"format", "wildlong.report"},
        {"version", 1},
        {"config_digest", config_digest_},
        {"input_digests", input_digests_},
        {"backend_id", gateway_->backend_id()},
        {"template_digests", template_digests},
        {"stages",
         {{"filter",
           {{"conversations_in", f["conversations_in"]},
            {"conversations_malformed", f["conversations_malformed"]},
            {"conversations_kept", f["conversations_kept"].size()},
            {"documents_in", f["documents_in"]},
            {"documents_malformed", f["documents_malformed"]},
            {"single_pool", f["single_pool"].size()},
            {"multi_pool", f["multi_pool"].size()}}},
          {"extract", extract_status},
          {"taxonomy",
           {{"labels", payload_[Stage::kTaxonomy]["labels"]},
            {"distinct_doc_types", payload_[Stage::kTaxonomy]["type_map"].size()},
            {"records_typed", payload_[Stage::kTaxonomy]["records"].size()}}},
          {"classify",
           {{"typed", payload_[Stage::kClassify]["types"].size()},
            {"sources", payload_[Stage::kClassify]["sources"]},
            {"classifier", payload_[Stage::kClassify]["classifier"]}}},
          {"select",
           {{"single_requested", cfg_.single_count},
            {"single_supply", sel["single_supply"]},
            {"single_selected", sel["single"].size()},
            {"multi_requested", cfg_.multi_count},
            {"pairs_formed", sel["pairs_formed"]},
            {"pairs_selected", sel["pairs"].size()}}},
          {"graphs", graph_stats},
          {"paths", {{"groups", payload_[Stage::kPaths]["groups"].size()}, {"paths", paths}}},
          {"instructions", {{"generated", instructions}}},
          {"synthesize", synth_status},
          {"emit", {{"records", emitted_total}, {"duplicates_dropped", duplicates}}}}},
        {"type_histograms",
         {{"target", sel["target"]},
          {"single_quotas", sel["single_quotas"]},
          {"multi_quotas", sel["multi_quotas"]},
          {"single_selected", single_hist},
          {"multi_selected", multi_hist},
          {"emitted", emitted}}},
        {"rejects", reject_counts}};
  }

  PipelineConfig cfg_;
  RunOptions opts_;
  Json input_digests_;
  std::string config_digest_;
  std::unique_ptr<Checkpoints> ckpt_;
  std::unique_ptr<llm::Gateway> gateway_;
  LlmCallOptions llm_;
  std::vector<DocRecord> docs_;
  std::size_t docs_malformed_ = 0;
  std::vector<Reject> load_rejects_;
  std::map<std::string, std::size_t> doc_index_;
  taxonomy::EmbeddingTable embeddings_;
  std::map<Stage, Json> payload_;
};

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  Runner runner(config, options);
  return runner.run();
}

}  // namespace wildlong::pipeline
