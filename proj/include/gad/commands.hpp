#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "gad/config.hpp"
#include "gad/dataset.hpp"

namespace gad {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitData = 2,
  kExitDivergence = 3,
};

struct CommandOverrides {
  std::optional<std::uint64_t> seed;  // replaces train.seed
  std::optional<std::filesystem::path> out;  // replaces output.dir
};

// Artifact file names inside the output directory.
inline constexpr const char* kModelFile = "model.bin";
inline constexpr const char* kTrainLogFile = "train_log.csv";
inline constexpr const char* kTrainManifestFile = "manifest.json";
inline constexpr const char* kScoresFile = "scores.csv";
inline constexpr const char* kScoreManifestFile = "score_manifest.json";
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kEdgesFile = "edges.csv";
inline constexpr const char* kFeaturesFile = "features.json";
inline constexpr const char* kLabelsFile = "labels.csv";
inline constexpr const char* kInjectManifestFile = "inject_manifest.json";

// The dataset a RunConfig describes: files or synthetic, then injection.
// Synthetic and injected datasets are canonicalized so they equal what
// cmd_inject writes out.
Dataset materialize_dataset(const RunConfig& cfg);

// Each command loads `config_path`, runs, and writes its artifacts. Errors
// are reported as one line on `err`:
//   error: code=<exit code> kind=<config|data|divergence> reason="<text>"
int cmd_train(const std::filesystem::path& config_path, const CommandOverrides& ov,
              std::ostream& err);
int cmd_score(const std::filesystem::path& config_path, const CommandOverrides& ov,
              std::ostream& err);
int cmd_eval(const std::filesystem::path& config_path, const CommandOverrides& ov,
             std::ostream& err);
int cmd_inject(const std::filesystem::path& config_path, const CommandOverrides& ov,
               std::ostream& err);

}  // namespace gad
