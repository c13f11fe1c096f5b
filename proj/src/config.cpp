#include "gad/config.hpp"

#include <fstream>
#include <set>

#include "gad/errors.hpp"

namespace gad {
namespace {

using nlohmann::json;

// Walks one JSON object, rejecting keys the caller never asks for.
class Section {
 public:
  Section(const json& obj, std::string name) : obj_(obj), name_(std::move(name)) {
    if (!obj_.is_object()) throw ConfigError(name_ + " must be an object");
  }
  // Throws on any key no accessor asked for.
  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!known_.contains(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

  const json* get(const std::string& key) {
    known_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = get(key)) out = convert<T>(*v, key);
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const json* v = get(key)) out = convert<T>(*v, key);
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path(key) + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path(key) + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) {
          throw ConfigError(path(key) + " must be nonnegative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
    }
    return v.get<T>();
  }

  const json& obj_;
  std::string name_;
  std::set<std::string> known_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path raw(p);
  return (raw.is_absolute() ? raw : base / raw).lexically_normal();
}

void read_path(Section& s, const std::string& key, const std::filesystem::path& base,
               std::optional<std::filesystem::path>& out) {
  std::optional<std::string> raw;
  s.read(key, raw);
  if (raw) out = resolve(base, *raw);
}

ScoreModeSetting parse_score_mode(const std::string& s) {
  if (s == "auto") return ScoreModeSetting::automatic;
  if (s == "dense") return ScoreModeSetting::dense;
  if (s == "sampled") return ScoreModeSetting::sampled;
  throw ConfigError("anomaly.score_mode must be auto, dense, or sampled");
}

std::string score_mode_name(ScoreModeSetting m) {
  switch (m) {
    case ScoreModeSetting::automatic:
      return "auto";
    case ScoreModeSetting::dense:
      return "dense";
    case ScoreModeSetting::sampled:
      return "sampled";
  }
  return "auto";
}

void parse_data(const json& j, const std::filesystem::path& base, DataConfig& d) {
  Section s(j, "data");
  read_path(s, "edges", base, d.edges);
  read_path(s, "features", base, d.features);
  read_path(s, "labels", base, d.labels);
  s.read("l2_normalize", d.l2_normalize);
  if (const json* syn = s.get("synthetic")) {
    SyntheticConfig c;
    Section ss(*syn, "data.synthetic");
    ss.read("n", c.n);
    ss.read("avg_degree", c.avg_degree);
    ss.read("feat_dim", c.feat_dim);
    ss.read("seed", c.seed);
    ss.finish();
    d.synthetic = c;
  }
  s.finish();
  const bool files = d.edges || d.features;
  if (files && d.synthetic) throw ConfigError("data: give either edges/features or synthetic, not both");
  if (files && !(d.edges && d.features)) throw ConfigError("data: need both edges and features");
  if (d.synthetic && d.labels) throw ConfigError("data.labels cannot accompany synthetic data");
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (doc.is_object() && doc.contains("manifest_version")) {
    if (!doc.contains("config")) throw ConfigError("manifest has no config section");
    return parse_run_config(doc.at("config"), base_dir);
  }

  RunConfig cfg;
  Section root(doc, "config");

  // Optional: eval works from score and label files alone.
  if (const json* data = root.get("data")) parse_data(*data, base_dir, cfg.data);

  if (const json* inj = root.get("inject")) {
    InjectionConfig c;
    Section s(*inj, "inject");
    s.read("num_cliques", c.num_cliques);
    s.read("clique_size", c.clique_size);
    s.read("feature_swap_fraction", c.feature_swap_fraction);
    s.read("seed", c.seed);
    s.finish();
    if (c.clique_size < 2) throw ConfigError("inject.clique_size must be >= 2");
    if (!(c.feature_swap_fraction >= 0.0 && c.feature_swap_fraction <= 1.0)) {
      throw ConfigError("inject.feature_swap_fraction must lie in [0,1]");
    }
    cfg.inject = c;
  }

  TrainConfig& t = cfg.train;
  if (const json* model = root.get("model")) {
    Section s(*model, "model");
    std::string encoder = to_string(t.encoder_kind);
    s.read("encoder", encoder);
    t.encoder_kind = parse_encoder_kind(encoder);
    if (const json* hidden = s.get("hidden")) {
      if (!hidden->is_array()) throw ConfigError("model.hidden must be an array of integers");
      t.hidden_dims.clear();
      for (const auto& h : *hidden) {
        if (!h.is_number_integer() || h.get<std::int64_t>() < 1) {
          throw ConfigError("model.hidden entries must be positive integers");
        }
        t.hidden_dims.push_back(h.get<std::size_t>());
      }
    }
    s.read("embed_dim", t.embed_dim);
    s.read("lambda", t.lambda);
    s.read("self_loops", t.self_loops);
    s.read("leaky_slope", t.leaky_slope);
    s.finish();
  }
  if (const json* train = root.get("train")) {
    Section s(*train, "train");
    s.read("lr", t.lr);
    s.read("epochs", t.epochs);
    s.read("seed", t.seed);
    s.read("neg_ratio", t.neg_ratio);
    s.read("dense_limit", t.dense_limit);
    s.read("log_every", t.log_every);
    s.finish();
  }
  t.validate();

  if (const json* anomaly = root.get("anomaly")) {
    Section s(*anomaly, "anomaly");
    if (const json* th = s.get("threshold")) {
      Section ts(*th, "anomaly.threshold");
      std::string kind = "contamination";
      ts.read("kind", kind);
      if (kind == "contamination") {
        double rate = 0.05;
        ts.read("rate", rate);
        if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("anomaly.threshold.rate must lie in (0,1)");
        cfg.anomaly.threshold = ThresholdPolicy::contamination(rate);
      } else if (kind == "fixed") {
        double value = 0.0;
        if (ts.get("value") == nullptr) throw ConfigError("anomaly.threshold.value is required for fixed");
        ts.read("value", value);
        if (!(value >= 0.0)) throw ConfigError("anomaly.threshold.value must be >= 0");
        cfg.anomaly.threshold = ThresholdPolicy::fixed(value);
      } else {
        throw ConfigError("anomaly.threshold.kind must be contamination or fixed");
      }
      ts.finish();
    }
    std::string mode = "auto";
    s.read("score_mode", mode);
    cfg.anomaly.score_mode = parse_score_mode(mode);
    s.read("seed", cfg.anomaly.seed);
    s.finish();
  }

  if (const json* score = root.get("score")) {
    Section s(*score, "score");
    read_path(s, "model", base_dir, cfg.score_model);
    s.finish();
  }
  if (const json* eval = root.get("eval")) {
    Section s(*eval, "eval");
    read_path(s, "scores", base_dir, cfg.eval_scores);
    read_path(s, "labels", base_dir, cfg.eval_labels);
    s.finish();
  }
  if (const json* output = root.get("output")) {
    Section s(*output, "output");
    std::string dir = "out";
    s.read("dir", dir);
    s.finish();
    cfg.output_dir = resolve(base_dir, dir);
  } else {
    cfg.output_dir = resolve(base_dir, "out");
  }
  root.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  try {
    return parse_run_config(doc, base);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  auto& data = j["data"];
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    data["synthetic"] = {{"n", s.n}, {"avg_degree", s.avg_degree}, {"feat_dim", s.feat_dim}, {"seed", s.seed}};
  } else if (cfg.data.edges) {
    data["edges"] = cfg.data.edges->string();
    data["features"] = cfg.data.features->string();
  }
  if (cfg.data.labels) data["labels"] = cfg.data.labels->string();
  data["l2_normalize"] = cfg.data.l2_normalize;
  if (cfg.inject) {
    const auto& c = *cfg.inject;
    j["inject"] = {{"num_cliques", c.num_cliques},
                   {"clique_size", c.clique_size},
                   {"feature_swap_fraction", c.feature_swap_fraction},
                   {"seed", c.seed}};
  }
  const TrainConfig& t = cfg.train;
  j["model"] = {{"encoder", to_string(t.encoder_kind)},
                {"hidden", t.hidden_dims},
                {"embed_dim", t.embed_dim},
                {"lambda", t.lambda},
                {"self_loops", t.self_loops},
                {"leaky_slope", t.leaky_slope}};
  j["train"] = {{"lr", t.lr},
                {"epochs", t.epochs},
                {"seed", t.seed},
                {"neg_ratio", t.neg_ratio},
                {"dense_limit", t.dense_limit},
                {"log_every", t.log_every}};
  nlohmann::ordered_json threshold;
  if (cfg.anomaly.threshold.kind == ThresholdPolicy::Kind::fixed) {
    threshold = {{"kind", "fixed"}, {"value", cfg.anomaly.threshold.value}};
  } else {
    threshold = {{"kind", "contamination"}, {"rate", cfg.anomaly.threshold.value}};
  }
  j["anomaly"] = {{"threshold", threshold},
                  {"score_mode", score_mode_name(cfg.anomaly.score_mode)},
                  {"seed", cfg.anomaly.seed}};
  if (cfg.score_model) j["score"] = {{"model", cfg.score_model->string()}};
  if (cfg.eval_scores || cfg.eval_labels) {
    auto& e = j["eval"];
    e = nlohmann::ordered_json::object();
    if (cfg.eval_scores) e["scores"] = cfg.eval_scores->string();
    if (cfg.eval_labels) e["labels"] = cfg.eval_labels->string();
  }
  j["output"] = {{"dir", cfg.output_dir.string()}};
  return j;
}

}  // namespace gad
