#include "gad/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gad/errors.hpp"
#include "gad/log.hpp"
#include "gad/rng.hpp"

namespace gad {
namespace {

// Neumaier-compensated sum; the loss adds up to N^2 terms.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Activation layer_activation(const GAEModel& model, std::size_t layer) {
  return layer + 1 == model.num_layers() ? Activation::identity() : Activation::relu();
}

GATLayerParams gat_params(const GAEModel& model, std::size_t layer) {
  return {model.layers[layer].weight, model.layers[layer].attention, model.leaky_slope,
          layer_activation(model, layer)};
}

GCNLayerParams gcn_params(const GAEModel& model, std::size_t layer) {
  return {model.layers[layer].weight, layer_activation(model, layer)};
}

// Squared-error term and its derivative w.r.t. the logit s = z_i . z_j.
struct PairTerm {
  double err;
  double dlogit;
};

PairTerm pair_term(double logit, double target) {
  const double p = sigmoid(logit);
  const double diff = target - p;
  return {diff * diff, -2.0 * diff * p * (1.0 - p)};
}

void add_regularizer(const DenseMatrix& z, double lambda, LossBreakdown& loss,
                     DenseMatrix* grad_z) {
  loss.reg = squared_norm(z);
  loss.total = loss.recon + lambda * loss.reg;
  if (grad_z != nullptr) {
    for (std::size_t k = 0; k < z.size(); ++k) grad_z->data()[k] += 2.0 * lambda * z.data()[k];
  }
}

// Accumulates a weighted ordered-pair term into the loss and gradient.
void accumulate_pair(const DenseMatrix& z, NodeId i, NodeId j, double target, double weight,
                     Accumulator& sum, DenseMatrix* grad_z) {
  const PairTerm t = pair_term(dot(z.row(i), z.row(j)), target);
  sum.add(t.err);
  if (grad_z != nullptr) {
    const double coeff = weight * t.dlogit;
    auto gi = grad_z->row(i);
    auto gj = grad_z->row(j);
    const auto zi = z.row(i);
    const auto zj = z.row(j);
    for (std::size_t c = 0; c < z.cols(); ++c) {
      gi[c] += coeff * zj[c];
      gj[c] += coeff * zi[c];
    }
  }
}

std::size_t count_non_self_entries(const SparseGraph& g) { return g.nnz() - g.self_loop_count(); }

}  // namespace

std::string to_string(EncoderKind kind) { return kind == EncoderKind::gat ? "gat" : "gcn"; }

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "gat") return EncoderKind::gat;
  if (name == "gcn") return EncoderKind::gcn;
  throw ConfigError("unknown encoder kind '" + name + "' (expected gat or gcn)");
}

void GAEModel::validate() const {
  if (layer_dims.size() < 2) throw ConfigError("model needs at least one layer");
  for (std::size_t d : layer_dims)
    if (d == 0) throw ConfigError("layer dimensions must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!std::isfinite(leaky_slope)) throw ConfigError("leaky_slope must be finite");
  if (layers.size() != num_layers()) {
    throw ConfigError("model has " + std::to_string(layers.size()) + " parameter sets for " +
                      std::to_string(num_layers()) + " layers");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    if (p.weight.rows() != layer_dims[l] || p.weight.cols() != layer_dims[l + 1]) {
      throw ConfigError("layer " + std::to_string(l) + " weight " + p.weight.shape_string() +
                        " does not match dims " + std::to_string(layer_dims[l]) + "x" +
                        std::to_string(layer_dims[l + 1]));
    }
    const std::size_t want = encoder_kind == EncoderKind::gat ? 2 * layer_dims[l + 1] : 0;
    if (p.attention.size() != want) {
      throw ConfigError("layer " + std::to_string(l) + " attention length " +
                        std::to_string(p.attention.size()) + ", expected " + std::to_string(want));
    }
  }
}

PropagationGraph prepare_propagation(const GAEModel& model, const SparseGraph& g) {
  PropagationGraph prop;
  prop.kind = model.encoder_kind;
  if (model.encoder_kind == EncoderKind::gat) {
    prop.attention_graph = model.self_loops ? with_self_loops(g) : g;
  } else {
    prop.adjacency = symmetric_normalize(g, model.self_loops);
  }
  return prop;
}

EncodeResult encode(const GAEModel& model, const PropagationGraph& prop, const DenseMatrix& x) {
  if (prop.kind != model.encoder_kind) {
    throw InputError("propagation graph prepared for a different encoder kind");
  }
  const std::size_t n = model.encoder_kind == EncoderKind::gat ? prop.attention_graph.num_nodes()
                                                               : prop.adjacency.num_nodes();
  if (x.rows() != n) {
    throw InputError("features " + x.shape_string() + " for a graph of " + std::to_string(n) +
                     " nodes");
  }
  if (x.cols() != model.input_dim()) {
    throw InputError("features have " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(model.input_dim()));
  }

  EncodeResult result;
  DenseMatrix h = x;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    if (model.encoder_kind == EncoderKind::gat) {
      result.gat_caches.emplace_back();
      h = gat_forward(prop.attention_graph, h, gat_params(model, l), &result.gat_caches.back());
    } else {
      result.gcn_caches.emplace_back();
      h = gcn_forward(prop.adjacency, h, gcn_params(model, l), &result.gcn_caches.back());
    }
  }
  result.z = std::move(h);
  return result;
}

DenseMatrix encode(const GAEModel& model, const SparseGraph& g, const DenseMatrix& x) {
  const PropagationGraph prop = prepare_propagation(model, g);
  return encode(model, prop, x).z;
}

ReconstructedAdjacency decode_dense(const DenseMatrix& z, std::size_t dense_limit) {
  const std::size_t n = z.rows();
  if (n > dense_limit) {
    throw InputError("decode_dense: " + std::to_string(n) + " nodes exceeds the dense limit of " +
                     std::to_string(dense_limit) + "; use decode_entries");
  }
  ReconstructedAdjacency out{DenseMatrix(n, n)};
  DenseMatrix& p = out.probabilities;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    for (std::size_t j = static_cast<std::size_t>(i); j < n; ++j)
      p(i, j) = sigmoid(dot(z.row(i), z.row(j)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) p(i, j) = p(j, i);
  return out;
}

std::vector<double> decode_entries(const DenseMatrix& z, std::span<const Edge> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [i, j] = idx[k];
    if (i >= z.rows() || j >= z.rows()) {
      throw InputError("decode_entries: index (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range for " + std::to_string(z.rows()) + " nodes");
    }
    out[k] = sigmoid(dot(z.row(i), z.row(j)));
  }
  return out;
}

std::vector<double> reconstruction_row_errors(const SparseGraph& g, const DenseMatrix& z) {
  if (z.rows() != g.num_nodes()) {
    throw InputError("embeddings " + z.shape_string() + " for a graph of " +
                     std::to_string(g.num_nodes()) + " nodes");
  }
  const std::size_t n = z.rows();
  std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto nbrs = g.neighbors(static_cast<NodeId>(i));
    std::size_t next = 0;
    Accumulator s;
    for (std::size_t j = 0; j < n; ++j) {
      while (next < nbrs.size() && nbrs[next] < j) ++next;
      const bool edge = next < nbrs.size() && nbrs[next] == j && j != static_cast<std::size_t>(i);
      s.add(pair_term(dot(z.row(i), z.row(j)), edge ? 1.0 : 0.0).err);
    }
    rows[i] = s.value();
  }
  return rows;
}

LossBreakdown loss_dense(const SparseGraph& g, const DenseMatrix& z, double lambda,
                         DenseMatrix* grad_z, std::size_t dense_limit) {
  const std::size_t n = z.rows();
  if (n != g.num_nodes()) {
    throw InputError("embeddings " + z.shape_string() + " for a graph of " +
                     std::to_string(g.num_nodes()) + " nodes");
  }
  if (n > dense_limit) {
    throw InputError("loss_dense: " + std::to_string(n) + " nodes exceeds the dense limit of " +
                     std::to_string(dense_limit));
  }
  const std::size_t d = z.cols();
  std::vector<double> rows(n, 0.0);
  if (grad_z != nullptr) *grad_z = DenseMatrix(n, d);

  // dL/dz_i = 2 * sum_j M_ij z_j with M the (symmetric) logit derivative.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto nbrs = g.neighbors(static_cast<NodeId>(i));
    std::size_t next = 0;
    Accumulator s;
    double* gi = grad_z != nullptr ? grad_z->row(i).data() : nullptr;
    for (std::size_t j = 0; j < n; ++j) {
      while (next < nbrs.size() && nbrs[next] < j) ++next;
      const bool edge = next < nbrs.size() && nbrs[next] == j && j != static_cast<std::size_t>(i);
      const PairTerm t = pair_term(dot(z.row(i), z.row(j)), edge ? 1.0 : 0.0);
      s.add(t.err);
      if (gi != nullptr) {
        const auto zj = z.row(j);
        for (std::size_t c = 0; c < d; ++c) gi[c] += 2.0 * t.dlogit * zj[c];
      }
    }
    rows[i] = s.value();
  }

  Accumulator total;
  for (double r : rows) total.add(r);
  LossBreakdown loss;
  loss.recon = total.value();
  add_regularizer(z, lambda, loss, grad_z);
  return loss;
}

std::vector<Edge> sample_non_edges(const SparseGraph& g, std::size_t count, std::uint64_t seed) {
  const std::size_t n = g.num_nodes();
  const std::size_t universe = n * n - count_non_self_entries(g);
  auto is_edge = [&](NodeId i, NodeId j) { return i != j && g.has_edge(i, j); };

  std::vector<Edge> out;
  if (count >= universe || 2 * count > universe) {
    std::vector<Edge> all;
    all.reserve(universe);
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j)
        if (!is_edge(i, j)) all.emplace_back(i, j);
    if (count >= universe) return all;
    // Partial Fisher-Yates.
    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t pick = k + rng.below(all.size() - k);
      std::swap(all[k], all[pick]);
    }
    all.resize(count);
    return all;
  }

  Rng rng(seed);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(count * 2);
  out.reserve(count);
  while (out.size() < count) {
    const auto i = static_cast<NodeId>(rng.below(n));
    const auto j = static_cast<NodeId>(rng.below(n));
    if (is_edge(i, j)) continue;
    if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
    out.emplace_back(i, j);
  }
  return out;
}

LossBreakdown loss_sampled(const SparseGraph& g, const DenseMatrix& z, double lambda,
                           const SampledLossOptions& opts, DenseMatrix* grad_z) {
  if (!(opts.neg_ratio > 0.0)) throw InputError("loss_sampled: neg_ratio must be > 0");
  const std::size_t n = z.rows();
  if (n != g.num_nodes()) {
    throw InputError("embeddings " + z.shape_string() + " for a graph of " +
                     std::to_string(g.num_nodes()) + " nodes");
  }
  if (grad_z != nullptr) *grad_z = DenseMatrix(n, z.cols());

  Accumulator positive;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j : g.neighbors(i))
      if (i != j) accumulate_pair(z, i, j, 1.0, 1.0, positive, grad_z);

  const std::size_t positives = count_non_self_entries(g);
  const std::size_t universe = n * n - positives;
  Accumulator negative;
  double negative_total = 0.0;
  if (universe <= n) {
    warn("loss_sampled: graph is complete, no off-diagonal non-edges; negatives are the diagonal only");
  }
  if (universe > 0) {
    const std::size_t undirected = positives / 2;
    const auto want = static_cast<std::size_t>(std::ceil(opts.neg_ratio * undirected));
    const std::size_t count = std::clamp<std::size_t>(want, 1, universe);
    const double scale = static_cast<double>(universe) / static_cast<double>(count);
    for (const auto& [i, j] : sample_non_edges(g, count, opts.seed))
      accumulate_pair(z, i, j, 0.0, scale, negative, grad_z);
    negative_total = negative.value() * scale;
  }

  LossBreakdown loss;
  loss.recon = positive.value() + negative_total;
  add_regularizer(z, lambda, loss, grad_z);
  return loss;
}

ModelGradients loss_backward(const GAEModel& model, const EncodeResult& enc,
                             const DenseMatrix& grad_z) {
  ModelGradients grads;
  grads.layers.resize(model.num_layers());
  DenseMatrix upstream = grad_z;
  for (std::size_t l = model.num_layers(); l-- > 0;) {
    if (model.encoder_kind == EncoderKind::gat) {
      GATGradients g = gat_backward(enc.gat_caches[l], upstream);
      grads.layers[l] = {std::move(g.weight), std::move(g.attention)};
      upstream = std::move(g.input);
    } else {
      GCNGradients g = gcn_backward(enc.gcn_caches[l], upstream);
      grads.layers[l] = {std::move(g.weight), {}};
      upstream = std::move(g.input);
    }
  }
  return grads;
}

LossBreakdown evaluate_loss(const GAEModel& model, const PropagationGraph& prop,
                            const SparseGraph& target, const DenseMatrix& x,
                            const LossOptions& opts, ModelGradients* grads) {
  const EncodeResult enc = encode(model, prop, x);
  DenseMatrix grad_z;
  DenseMatrix* gz = grads != nullptr ? &grad_z : nullptr;
  const LossBreakdown loss =
      opts.mode == LossMode::dense
          ? loss_dense(target, enc.z, model.lambda, gz, opts.dense_limit)
          : loss_sampled(target, enc.z, model.lambda, opts.sampled, gz);
  if (grads != nullptr) *grads = loss_backward(model, enc, grad_z);
  return loss;
}

}  // namespace gad
