#include "gad/training.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "gad/errors.hpp"
#include "gad/rng.hpp"

namespace gad {
namespace {

void fill_glorot(std::span<double> out, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& w : out) w = rng.uniform(-limit, limit);
}

bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::vector<LayerParams> init_params(std::span<const std::size_t> dims, EncoderKind kind,
                                     std::uint64_t seed) {
  if (dims.size() < 2) throw InputError("init_params: need at least two layer dimensions");
  Rng rng(seed);
  std::vector<LayerParams> layers(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers[l].weight = DenseMatrix(dims[l], dims[l + 1]);
    fill_glorot(layers[l].weight.data(), dims[l], dims[l + 1], rng);
    if (kind == EncoderKind::gat) {
      layers[l].attention.resize(2 * dims[l + 1]);
      fill_glorot(layers[l].attention, 2 * dims[l + 1], 1, rng);
    }
  }
  return layers;
}

void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) {
    throw InputError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw InputError("adam_step: parameter count changed");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size() || state.m[k].size() != params[k].size()) {
      throw InputError("adam_step: shape mismatch for parameter " + std::to_string(k));
    }
    if (!all_finite(grads[k])) {
      throw TrainingError("non-finite gradient for parameter " + std::to_string(k),
                          static_cast<int>(state.t));
    }
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double g = grads[k][i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      params[k][i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

std::vector<std::span<double>> parameter_views(GAEModel& model) {
  std::vector<std::span<double>> views;
  for (auto& layer : model.layers) {
    views.emplace_back(layer.weight.data());
    if (!layer.attention.empty()) views.emplace_back(layer.attention);
  }
  return views;
}

std::vector<std::span<const double>> gradient_views(const ModelGradients& grads) {
  std::vector<std::span<const double>> views;
  for (const auto& layer : grads.layers) {
    views.emplace_back(layer.weight.data());
    if (!layer.attention.empty()) views.emplace_back(layer.attention);
  }
  return views;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("model.lambda must be >= 0");
  if (!(neg_ratio > 0.0)) throw ConfigError("train.neg_ratio must be > 0");
  if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
  if (embed_dim == 0) throw ConfigError("model.embed_dim must be >= 1");
  for (std::size_t d : hidden_dims)
    if (d == 0) throw ConfigError("model.hidden dimensions must be >= 1");
  if (!std::isfinite(leaky_slope)) throw ConfigError("model.leaky_slope must be finite");
}

TrainResult train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg) {
  cfg.validate();
  if (x.rows() != g.num_nodes()) {
    throw InputError("features " + x.shape_string() + " for a graph of " +
                     std::to_string(g.num_nodes()) + " nodes");
  }

  TrainResult result;
  GAEModel& model = result.model;
  model.encoder_kind = cfg.encoder_kind;
  model.layer_dims.push_back(x.cols());
  model.layer_dims.insert(model.layer_dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  model.layer_dims.push_back(cfg.embed_dim);
  model.lambda = cfg.lambda;
  model.self_loops = cfg.self_loops;
  model.leaky_slope = cfg.leaky_slope;
  model.layers = init_params(model.layer_dims, cfg.encoder_kind, cfg.seed);
  model.validate();

  const PropagationGraph prop = prepare_propagation(model, g);
  LossOptions opts;
  opts.dense_limit = cfg.dense_limit;
  opts.mode = g.num_nodes() <= cfg.dense_limit ? LossMode::dense : LossMode::sampled;
  opts.sampled.neg_ratio = cfg.neg_ratio;
  result.loss_mode = opts.mode;

  AdamState adam;
  adam.lr = cfg.lr;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opts.sampled.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch));
    ModelGradients grads;
    LossBreakdown loss;
    try {
      loss = evaluate_loss(model, prop, g, x, opts, &grads);
    } catch (const EvaluationError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch - 1);
    }
    if (!std::isfinite(loss.total)) {
      throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch), epoch - 1);
    }
    if ((epoch - 1) % cfg.log_every == 0 || epoch == cfg.epochs) {
      result.log.push_back({epoch, loss.recon, loss.reg, loss.total});
    }
    try {
      adam_step(adam, parameter_views(model), gradient_views(grads));
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch - 1);
    }
    for (const auto& view : parameter_views(model)) {
      if (!all_finite(view)) {
        throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch),
                            epoch - 1);
      }
    }
  }
  return result;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,recon,reg,total\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_double(r.recon) << ',' << format_double(r.reg) << ','
        << format_double(r.total) << '\n';
  }
}

}  // namespace gad
