#include "wildlong/pipeline/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"

namespace wildlong::pipeline {

namespace fs = std::filesystem;

namespace {

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw InputError(fmt::format("{}: expected a nonnegative integer, got '{}'", key, v));
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw InputError(fmt::format("{}: expected a number, got '{}'", key, v));
  }
  return out;
}

struct Entry {
  ConfigKey key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

Entry path_entry(std::string name, fs::path PipelineConfig::*member, std::string help) {
  return {{name, "path", std::move(help)},
          [member](PipelineConfig& c, std::string_view v) { c.*member = fs::path(v); },
          [member](const PipelineConfig& c) { return (c.*member).string(); }};
}

template <typename Owner>
Entry uint_entry(std::string name, std::uint64_t Owner::*member, std::string help) {
  return {{name, "integer", std::move(help)},
          [name, member](PipelineConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<Owner, BackendSettings>) {
              c.backend.*member = parse_uint(name, v);
            } else {
              c.*member = parse_uint(name, v);
            }
          },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_same_v<Owner, BackendSettings>) {
              return std::to_string(c.backend.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <typename Owner>
Entry real_entry(std::string name, double Owner::*member, std::string help) {
  return {{name, "real", std::move(help)},
          [name, member](PipelineConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<Owner, BackendSettings>) {
              c.backend.*member = parse_real(name, v);
            } else {
              c.*member = parse_real(name, v);
            }
          },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_same_v<Owner, BackendSettings>) {
              return fmt::format("{}", c.backend.*member);
            } else {
              return fmt::format("{}", c.*member);
            }
          }};
}

Entry text_entry(std::string name, std::string BackendSettings::*member, std::string type,
                 std::string help) {
  return {{name, std::move(type), std::move(help)},
          [member](PipelineConfig& c, std::string_view v) { c.backend.*member = std::string(v); },
          [member](const PipelineConfig& c) { return c.backend.*member; }};
}

const std::vector<Entry>& entries() {
  using C = PipelineConfig;
  using B = BackendSettings;
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(path_entry("conversations", &C::conversations, "conversations file (jsonl)"));
    t.push_back(path_entry("documents", &C::documents, "documents file (jsonl)"));
    t.push_back(path_entry("embeddings", &C::embeddings, "embeddings file (jsonl)"));
    t.push_back(path_entry("output_dir", &C::output_dir, "directory for dataset, rejects and report"));
    t.push_back(path_entry("checkpoint_dir", &C::checkpoint_dir,
                           "checkpoint directory (default <output_dir>/checkpoints)"));
    t.push_back(uint_entry<C>("seed", &C::seed, "base seed for every stage"));
    t.push_back({{"tokenizer", "enum", "approx | whitespace"},
                 [](C& c, std::string_view v) {
                   auto tok = tokenizer_from_name(v);
                   if (!tok) throw InputError(fmt::format("tokenizer: unknown value '{}'", v));
                   c.tokenizer = *tok;
                 },
                 [](const C& c) { return std::string(tokenizer_name(c.tokenizer)); }});
    t.push_back(uint_entry<C>("filter.conversation_min_tokens", &C::conversation_min_tokens,
                              "conversations must exceed this many tokens"));
    t.push_back(uint_entry<C>("filter.single_min_tokens", &C::single_min_tokens,
                              "single-mode documents must exceed this"));
    t.push_back(uint_entry<C>("filter.single_max_tokens", &C::single_max_tokens,
                              "single-mode documents may not exceed this"));
    t.push_back(uint_entry<C>("filter.multi_min_tokens", &C::multi_min_tokens,
                              "multi-mode documents must exceed this"));
    t.push_back(uint_entry<C>("filter.multi_max_tokens", &C::multi_max_tokens,
                              "multi-mode documents may not exceed this"));
    t.push_back(uint_entry<C>("filter.multi_combined_max_tokens", &C::multi_combined_max_tokens,
                              "cap on a document pair's combined tokens"));
    t.push_back(uint_entry<C>("taxonomy.num_types", &C::num_types, "number of document-type clusters"));
    t.push_back(uint_entry<C>("taxonomy.max_iters", &C::kmeans_max_iters, "k-means iteration cap"));
    t.push_back(uint_entry<C>("taxonomy.restarts", &C::kmeans_restarts, "k-means seedings, best kept"));
    t.push_back(real_entry<C>("classifier.l2", &C::classifier_l2, "L2 penalty"));
    t.push_back(real_entry<C>("classifier.lr", &C::classifier_lr, "gradient step size"));
    t.push_back(uint_entry<C>("classifier.epochs", &C::classifier_epochs, "full-batch epochs"));
    t.push_back(real_entry<C>("classifier.holdout_fraction", &C::holdout_fraction,
                              "share of annotated documents held out for accuracy"));
    t.push_back(real_entry<C>("graph.epsilon", &C::epsilon, "edge weight smoothing"));
    t.push_back(uint_entry<C>("walk.max_steps", &C::max_steps, "maximum path length"));
    t.push_back(uint_entry<C>("walk.min_length", &C::min_length, "shorter walks are retried"));
    t.push_back(uint_entry<C>("walk.max_retries", &C::max_retries, "retries for short walks"));
    t.push_back(uint_entry<C>("walk.partitions", &C::path_partitions, "independent sampling streams"));
    t.push_back(uint_entry<C>("synthesis.single_count", &C::single_count,
                              "single-document records to synthesize"));
    t.push_back(uint_entry<C>("synthesis.multi_count", &C::multi_count,
                              "multi-document records to synthesize"));
    t.push_back(uint_entry<C>("synthesis.instruction_rounds", &C::instruction_rounds,
                              "path-sampling rounds per type"));
    t.push_back(real_entry<C>("synthesis.temperature", &C::temperature, "sampling temperature"));
    t.push_back(real_entry<C>("extract.temperature", &C::extract_temperature, "extraction sampling temperature"));
    t.push_back(uint_entry<C>("synthesis.parse_retries", &C::parse_retries,
                              "regenerations after an unparseable reply"));
    t.push_back(uint_entry<C>("synthesis.workers", &C::workers, "worker threads per stage"));
    t.push_back(uint_entry<C>("synthesis.rewrite_batch", &C::rewrite_batch,
                              "task values per rewrite prompt"));
    t.push_back(text_entry("backend.kind", &B::kind, "enum", "mock | http"));
    t.push_back(text_entry("backend.base_url", &B::base_url, "text", "chat-completions base URL"));
    t.push_back(text_entry("backend.model", &B::model, "text", "model name"));
    t.push_back(text_entry("backend.api_key_env", &B::api_key_env, "text",
                           "environment variable holding the API key"));
    t.push_back(real_entry<B>("backend.mock_malformed_rate", &B::mock_malformed_rate,
                              "mock only: share of unparseable replies"));
    t.push_back(uint_entry<B>("backend.max_concurrency", &B::max_concurrency, "in-flight request cap"));
    t.push_back(uint_entry<B>("backend.max_attempts", &B::max_attempts, "attempts per request"));
    t.push_back(uint_entry<B>("backend.base_backoff_ms", &B::base_backoff_ms, "first retry delay"));
    t.push_back(uint_entry<B>("backend.max_backoff_ms", &B::max_backoff_ms, "retry delay cap"));
    t.push_back(uint_entry<B>("backend.requests_per_interval", &B::requests_per_interval,
                              "rate limit, 0 disables"));
    t.push_back(uint_entry<B>("backend.interval_ms", &B::interval_ms, "rate limit window"));
    t.push_back(uint_entry<B>("backend.timeout_ms", &B::timeout_ms, "per-request timeout"));
    t.push_back({{"backend.log_bodies", "bool", "log prompt and reply bodies, not just hashes"},
                 [](C& c, std::string_view v) {
                   if (v == "true" || v == "1") {
                     c.backend.log_bodies = true;
                   } else if (v == "false" || v == "0") {
                     c.backend.log_bodies = false;
                   } else {
                     throw InputError(fmt::format("backend.log_bodies: expected true or false, got '{}'", v));
                   }
                 },
                 [](const C& c) { return std::string(c.backend.log_bodies ? "true" : "false"); }});
    return t;
  }();
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw InputError(fmt::format("unknown config key '{}'", key));
}

void flatten(const YAML::Node& node, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.as<std::string>()
                                           : prefix + "." + kv.first.as<std::string>();
    if (kv.second.IsMap()) {
      flatten(kv.second, key, out);
    } else if (kv.second.IsScalar()) {
      out.emplace_back(key, kv.second.as<std::string>());
    } else {
      throw InputError(fmt::format("config key '{}' must be a scalar", key));
    }
  }
}

}  // namespace

fs::path PipelineConfig::resolved_checkpoint_dir() const {
  return checkpoint_dir.empty() ? output_dir / "checkpoints" : checkpoint_dir;
}

void PipelineConfig::validate() const {
  if (single_min_tokens > single_max_tokens) throw InputError("single token bounds are inverted");
  if (multi_min_tokens > multi_max_tokens) throw InputError("multi token bounds are inverted");
  if (num_types == 0) throw InputError("taxonomy.num_types must be >= 1");
  if (kmeans_max_iters == 0) throw InputError("taxonomy.max_iters must be >= 1");
  if (kmeans_restarts == 0) throw InputError("taxonomy.restarts must be >= 1");
  if (!(temperature >= 0.0) || !(extract_temperature >= 0.0)) throw InputError("temperatures must be >= 0");
  if (max_steps == 0 || min_length == 0 || min_length > max_steps) {
    throw InputError("walk.min_length must be in [1, walk.max_steps]");
  }
  if (!(epsilon > 0.0)) throw InputError("graph.epsilon must be positive");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw InputError("classifier.holdout_fraction must be in [0, 1)");
  }
  if (workers == 0 || path_partitions == 0 || rewrite_batch == 0 || instruction_rounds == 0) {
    throw InputError("worker, partition, batch and round counts must be >= 1");
  }
  if (backend.kind != "mock" && backend.kind != "http") {
    throw InputError("backend.kind must be mock or http");
  }
  if (backend.kind == "http" && backend.base_url.empty()) {
    throw InputError("backend.base_url is required for the http backend");
  }
  if (backend.max_attempts == 0 || backend.max_concurrency == 0) {
    throw InputError("backend.max_attempts and backend.max_concurrency must be >= 1");
  }
  if (backend.mock_malformed_rate < 0.0 || backend.mock_malformed_rate > 1.0) {
    throw InputError("backend.mock_malformed_rate must be in [0, 1]");
  }
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, value);
}

std::string get_config_value(const PipelineConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

void load_config_file(PipelineConfig& cfg, const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw InputError(fmt::format("cannot read config {}: {}", path.string(), e.what()));
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) throw InputError("config file must be a mapping");
  std::vector<std::pair<std::string, std::string>> flat;
  flatten(root, "", flat);
  const fs::path base = path.parent_path();
  for (const auto& [key, value] : flat) {
    const auto& e = find_entry(key);
    if (e.key.type == "path" && !value.empty() && fs::path(value).is_relative()) {
      e.set(cfg, (base / value).lexically_normal().string());
    } else {
      e.set(cfg, value);
    }
  }
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : entries()) j[e.key.name] = e.get(cfg);
  return j;
}

std::string config_digest(const PipelineConfig& cfg) {
  auto j = to_json(cfg);
  for (const char* k : {"output_dir", "checkpoint_dir", "conversations", "documents", "embeddings"}) {
    j.erase(k);
  }
  j.erase("synthesis.workers");
  j.erase("backend.log_bodies");
  return sha256_hex(j.dump());
}

}  // namespace wildlong::pipeline
