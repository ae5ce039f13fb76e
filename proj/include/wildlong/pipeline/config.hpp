#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wildlong/pipeline/corpus.hpp"

namespace wildlong::pipeline {

struct BackendSettings {
  std::string kind = "mock";  // mock | http
  std::string base_url;
  std::string model = "gpt-4";
  /// Name of the environment variable holding the API key.
  std::string api_key_env = "WILDLONG_API_KEY";
  double mock_malformed_rate = 0.0;
  std::uint64_t max_concurrency = 8;
  std::uint64_t max_attempts = 4;
  std::uint64_t base_backoff_ms = 500;
  std::uint64_t max_backoff_ms = 30'000;
  std::uint64_t requests_per_interval = 0;
  std::uint64_t interval_ms = 1000;
  std::uint64_t timeout_ms = 120'000;
  /// Log prompt and reply bodies instead of prompt hashes.
  bool log_bodies = false;
};

struct PipelineConfig {
  std::filesystem::path conversations;
  std::filesystem::path documents;
  std::filesystem::path embeddings;
  std::filesystem::path output_dir = "wildlong-out";
  /// Defaults to <output_dir>/checkpoints when empty.
  std::filesystem::path checkpoint_dir;

  std::uint64_t seed = 0;
  Tokenizer tokenizer = Tokenizer::kApprox;

  std::uint64_t conversation_min_tokens = 2000;
  std::uint64_t single_min_tokens = 2000;
  std::uint64_t single_max_tokens = 30000;
  std::uint64_t multi_min_tokens = 2000;
  std::uint64_t multi_max_tokens = 20000;
  std::uint64_t multi_combined_max_tokens = 20000;

  std::uint64_t num_types = 10;
  std::uint64_t kmeans_max_iters = 300;
  std::uint64_t kmeans_restarts = 10;

  double classifier_l2 = 1e-4;
  double classifier_lr = 0.5;
  std::uint64_t classifier_epochs = 300;
  double holdout_fraction = 0.2;

  double epsilon = 1.0;
  std::uint64_t max_steps = 6;
  std::uint64_t min_length = 4;
  std::uint64_t max_retries = 5;
  std::uint64_t path_partitions = 4;

  std::uint64_t single_count = 100;
  std::uint64_t multi_count = 50;
  std::uint64_t instruction_rounds = 4;
  double temperature = 0.7;
  double extract_temperature = 0.0;
  std::uint64_t parse_retries = 2;
  std::uint64_t workers = 4;
  std::uint64_t rewrite_batch = 10;

  BackendSettings backend;

  std::filesystem::path resolved_checkpoint_dir() const;
  /// Throws InputError on inconsistent settings.
  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string type;  // path | integer | real | enum | bool | text
  std::string help;
};

/// Every settable key, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Sets one dotted key from its text form. Throws InputError for unknown keys
/// or values that do not parse.
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const PipelineConfig& cfg, std::string_view key);

/// Reads a YAML (or JSON) mapping; nested mappings flatten to dotted keys.
/// Relative paths resolve against the file's directory.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// All keys as a flat JSON object.
nlohmann::json to_json(const PipelineConfig& cfg);

/// SHA-256 over every key except output and checkpoint locations and input
/// file paths (inputs are represented by their content digests instead).
std::string config_digest(const PipelineConfig& cfg);

}  // namespace wildlong::pipeline
