#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "wildlong/llm/gateway.hpp"
#include "wildlong/pipeline/config.hpp"

namespace wildlong::pipeline {

enum class Stage {
  kFilter,
  kExtract,
  kTaxonomy,
  kClassify,
  kSelect,
  kGraphs,
  kPaths,
  kInstructions,
  kSynthesize,
  kEmit,
};

inline constexpr std::array<Stage, 10> kAllStages = {
    Stage::kFilter, Stage::kExtract, Stage::kTaxonomy,     Stage::kClassify,   Stage::kSelect,
    Stage::kGraphs, Stage::kPaths,   Stage::kInstructions, Stage::kSynthesize, Stage::kEmit};

std::string_view stage_name(Stage s);
std::optional<Stage> stage_from_name(std::string_view name);

struct RunOptions {
  /// Stop once this stage is checkpointed.
  std::optional<Stage> stop_after;
  /// Discard any existing checkpoints first.
  bool fresh = false;
  /// Report location; defaults to <output_dir>/report.json.
  std::optional<std::filesystem::path> report_path;
  /// Replaces the backend built from the config (tests, custom transports).
  std::shared_ptr<llm::Backend> backend;
};

struct RunSummary {
  Stage last_stage = Stage::kFilter;
  bool completed = false;
  /// Empty unless the emit stage ran.
  nlohmann::json report;
  std::filesystem::path dataset_path;
  std::filesystem::path rejects_path;
  std::filesystem::path report_path;
};

/// Runs stages in order, resuming from whatever the checkpoint directory
/// already holds for the same configuration and inputs. Throws InputError if
/// the checkpoint directory belongs to a different configuration (unless
/// `fresh`), and BackendError when the backend gives up; completed work stays
/// checkpointed in both cases.
RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// Backend described by the settings. The HTTP backend reads its key from the
/// environment variable named in the settings.
std::shared_ptr<llm::Backend> make_backend(const BackendSettings& settings);
llm::GatewayOptions gateway_options(const BackendSettings& settings);

}  // namespace wildlong::pipeline
