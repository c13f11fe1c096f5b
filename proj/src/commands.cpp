#include "gad/commands.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gad/anomaly.hpp"
#include "gad/errors.hpp"
#include "gad/model.hpp"
#include "gad/model_io.hpp"
#include "gad/training.hpp"

namespace gad {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

RunConfig resolve_config(const std::filesystem::path& path, const CommandOverrides& ov) {
  RunConfig cfg = load_run_config(path);
  if (ov.seed) cfg.train.seed = *ov.seed;
  if (ov.out) cfg.output_dir = std::filesystem::absolute(*ov.out).lexically_normal();
  return cfg;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  body(out);
  if (!out) throw DataError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

ordered_json dataset_stats(const Dataset& d) {
  ordered_json s;
  s["nodes"] = d.num_nodes();
  s["edges"] = d.graph.edge_count();
  s["self_loops"] = d.graph.self_loop_count();
  s["feature_dim"] = d.features.cols();
  s["labeled"] = d.labels.has_value();
  if (d.labels) {
    std::size_t pos = 0;
    for (auto l : *d.labels) pos += l != 0;
    s["positives"] = pos;
  }
  return s;
}

ordered_json manifest_header(const char* command, const RunConfig& cfg) {
  ordered_json m;
  m["manifest_version"] = kManifestVersion;
  m["command"] = command;
  m["config"] = to_json(cfg);
  return m;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out;
}

int report(std::ostream& err, int code, const char* kind, const std::string& reason) {
  err << "error: code=" << code << " kind=" << kind << " reason=\"" << escape(reason) << "\"\n";
  return code;
}

// Maps the library's exception types onto exit codes.
int run_guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    return report(err, kExitConfig, "config", e.what());
  } catch (const TrainingError& e) {
    return report(err, kExitDivergence, "divergence",
                  std::string(e.what()) + "; last good epoch " + std::to_string(e.last_good_epoch()));
  } catch (const EvaluationError& e) {
    return report(err, kExitDivergence, "divergence", e.what());
  } catch (const UndefinedMetricError& e) {
    return report(err, kExitData, "data", e.what());
  } catch (const std::exception& e) {
    // DataError, ParseError, InputError, FormatError: bad inputs.
    return report(err, kExitData, "data", e.what());
  }
}

ScoreMode choose_score_mode(const RunConfig& cfg, std::size_t n) {
  switch (cfg.anomaly.score_mode) {
    case ScoreModeSetting::dense:
      return ScoreMode::dense;
    case ScoreModeSetting::sampled:
      return ScoreMode::sampled;
    case ScoreModeSetting::automatic:
      break;
  }
  return n <= cfg.train.dense_limit ? ScoreMode::dense : ScoreMode::sampled;
}

}  // namespace

Dataset materialize_dataset(const RunConfig& cfg) {
  Dataset d;
  const bool synthetic = cfg.data.synthetic.has_value();
  if (synthetic) {
    const auto& s = *cfg.data.synthetic;
    d = generate_synthetic(s.n, s.avg_degree, s.feat_dim, s.seed);
  } else {
    if (!cfg.data.edges) throw ConfigError("data: need edges and features, or a synthetic section");
    FeatureLoadOptions opts;
    opts.l2_normalize = cfg.data.l2_normalize;
    d = load_dataset(*cfg.data.edges, *cfg.data.features, cfg.data.labels, opts);
  }
  if (cfg.inject) d = inject_anomalies(d, *cfg.inject);
  if (synthetic || cfg.inject) d = canonicalize(d);
  return d;
}

int cmd_train(const std::filesystem::path& config_path, const CommandOverrides& ov,
              std::ostream& err) {
  return run_guarded(err, [&] {
    const RunConfig cfg = resolve_config(config_path, ov);
    const auto start = std::chrono::steady_clock::now();
    const Dataset data = materialize_dataset(cfg);
    const TrainResult result = train(data.graph, data.features, cfg.train);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ensure_dir(cfg.output_dir);
    save_model(cfg.output_dir / kModelFile, result.model);
    write_file(cfg.output_dir / kTrainLogFile,
               [&](std::ostream& out) { write_train_log_csv(out, result.log); });

    ordered_json m = manifest_header("train", cfg);
    m["dataset"] = dataset_stats(data);
    m["layer_dims"] = result.model.layer_dims;
    m["loss_mode"] = result.loss_mode == LossMode::dense ? "dense" : "sampled";
    const TrainRecord& last = result.log.back();
    m["final_loss"] = {{"epoch", last.epoch}, {"recon", last.recon}, {"reg", last.reg}, {"total", last.total}};
    m["artifacts"] = {{"model", kModelFile}, {"train_log", kTrainLogFile}};
    m["wall_time_seconds"] = seconds;
    write_json(cfg.output_dir / kTrainManifestFile, m);
  });
}

int cmd_score(const std::filesystem::path& config_path, const CommandOverrides& ov,
              std::ostream& err) {
  return run_guarded(err, [&] {
    const RunConfig cfg = resolve_config(config_path, ov);
    const auto model_path = cfg.score_model.value_or(cfg.output_dir / kModelFile);
    const GAEModel model = load_model(model_path);
    const Dataset data = materialize_dataset(cfg);
    if (data.features.cols() != model.input_dim()) {
      throw InputError("model expects " + std::to_string(model.input_dim()) +
                       " input features, dataset has " + std::to_string(data.features.cols()));
    }

    const DenseMatrix z = encode(model, data.graph, data.features);
    const ScoreMode mode = choose_score_mode(cfg, data.num_nodes());
    const AnomalyScores scores = node_scores(data.graph, z, mode, cfg.anomaly.seed);
    const double threshold = select_threshold(scores.values, cfg.anomaly.threshold);
    const std::vector<bool> flags = classify(scores.values, threshold);

    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir / kScoresFile, [&](std::ostream& out) {
      write_scores_csv(out, scores.values, flags, data.id_map.originals());
    });
    if (data.labels) {
      write_file(cfg.output_dir / kLabelsFile, [&](std::ostream& out) { write_labels_csv(out, data); });
    }

    std::size_t flagged = 0;
    for (bool f : flags) flagged += f;
    ordered_json m = manifest_header("score", cfg);
    m["model"] = model_path.string();
    m["dataset"] = dataset_stats(data);
    m["score_mode"] = to_string(mode);
    m["threshold"] = threshold;
    m["flagged"] = flagged;
    write_json(cfg.output_dir / kScoreManifestFile, m);
  });
}

int cmd_eval(const std::filesystem::path& config_path, const CommandOverrides& ov,
             std::ostream& err) {
  return run_guarded(err, [&] {
    const RunConfig cfg = resolve_config(config_path, ov);
    const auto scores_path = cfg.eval_scores.value_or(cfg.output_dir / kScoresFile);
    const auto labels_path =
        cfg.eval_labels ? *cfg.eval_labels
                        : (cfg.data.labels ? *cfg.data.labels : cfg.output_dir / kLabelsFile);

    std::ifstream sin(scores_path);
    if (!sin) throw DataError("cannot open " + scores_path.string());
    const ScoreTable table = read_scores_csv(sin);
    const IdMap ids = IdMap::from_originals(table.node_ids);
    const Labels labels = load_labels_csv(labels_path, ids);
    const MetricsReport metrics = evaluate_metrics(table.scores, table.flags, labels);

    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir / kMetricsFile, [&](std::ostream& out) { out << metrics_to_json(metrics); });
  });
}

int cmd_inject(const std::filesystem::path& config_path, const CommandOverrides& ov,
               std::ostream& err) {
  return run_guarded(err, [&] {
    const RunConfig cfg = resolve_config(config_path, ov);
    if (!cfg.inject) throw ConfigError("inject command needs an inject section");
    const Dataset data = materialize_dataset(cfg);

    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir / kEdgesFile, [&](std::ostream& out) { write_edges_csv(out, data); });
    write_file(cfg.output_dir / kFeaturesFile, [&](std::ostream& out) { write_features_json(out, data); });
    write_file(cfg.output_dir / kLabelsFile, [&](std::ostream& out) { write_labels_csv(out, data); });

    ordered_json m = manifest_header("inject", cfg);
    m["dataset"] = dataset_stats(data);
    m["artifacts"] = {{"edges", kEdgesFile}, {"features", kFeaturesFile}, {"labels", kLabelsFile}};
    write_json(cfg.output_dir / kInjectManifestFile, m);
  });
}

}  // namespace gad
