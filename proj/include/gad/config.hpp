#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gad/anomaly.hpp"
#include "gad/dataset.hpp"
#include "gad/training.hpp"

namespace gad {

struct SyntheticConfig {
  std::size_t n = 500;
  double avg_degree = 8.0;
  std::size_t feat_dim = 32;
  std::uint64_t seed = 0;
};

// Either files (edges + features, optional labels) or a synthetic generator.
struct DataConfig {
  std::optional<std::filesystem::path> edges;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
  bool l2_normalize = false;
  std::optional<SyntheticConfig> synthetic;
};

enum class ScoreModeSetting { automatic, dense, sampled };

struct AnomalyConfig {
  ThresholdPolicy threshold = ThresholdPolicy::contamination(0.05);
  ScoreModeSetting score_mode = ScoreModeSetting::automatic;
  std::uint64_t seed = 0;
};

struct RunConfig {
  DataConfig data;
  std::optional<InjectionConfig> inject;
  TrainConfig train;  // model and train sections
  AnomalyConfig anomaly;
  std::optional<std::filesystem::path> score_model;  // default <output>/model.bin
  std::optional<std::filesystem::path> eval_scores;  // default <output>/scores.csv
  std::optional<std::filesystem::path> eval_labels;  // default data.labels or <output>/labels.csv
  std::filesystem::path output_dir = "out";
};

// Parses a RunConfig document. Unknown keys and wrongly typed values throw
// ConfigError. Relative paths are resolved against base_dir. A run manifest
// (an object with "manifest_version") is accepted and its "config" used.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved document: every default materialized, paths absolute.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace gad
