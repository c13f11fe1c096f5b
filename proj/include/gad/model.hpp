#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gad/graph.hpp"
#include "gad/layers.hpp"
#include "gad/matrix.hpp"

namespace gad {

enum class EncoderKind { gat, gcn };

std::string to_string(EncoderKind kind);
// Accepts "gat" / "gcn"; throws ConfigError otherwise.
EncoderKind parse_encoder_kind(const std::string& name);

// Trainable parameters of one encoder layer. `attention` is empty for GCN.
struct LayerParams {
  DenseMatrix weight;
  std::vector<double> attention;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

inline constexpr std::size_t kDefaultDenseLimit = 5000;

// Graph autoencoder: encoder stack producing Z, decoder sigmoid(Z Z^T).
// Hidden layers use relu; the embedding layer is linear.
struct GAEModel {
  EncoderKind encoder_kind = EncoderKind::gat;
  std::vector<std::size_t> layer_dims;  // d_in, hidden..., d_embed
  std::vector<LayerParams> layers;
  double lambda = 1e-4;
  bool self_loops = true;
  double leaky_slope = 0.2;

  std::size_t num_layers() const { return layer_dims.empty() ? 0 : layer_dims.size() - 1; }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t embed_dim() const { return layer_dims.back(); }

  // Throws ConfigError if dims, parameter shapes, or lambda are inconsistent.
  void validate() const;

  friend bool operator==(const GAEModel&, const GAEModel&) = default;
};

// Same structure as the model's parameters.
struct ModelGradients {
  std::vector<LayerParams> layers;
};

// The graph as each encoder kind consumes it, built once per dataset.
struct PropagationGraph {
  EncoderKind kind = EncoderKind::gat;
  SparseGraph attention_graph;  // GAT: neighbor lists after the self-loop policy
  NormalizedAdjacency adjacency;  // GCN: D^-1/2 A D^-1/2 after the self-loop policy
};

PropagationGraph prepare_propagation(const GAEModel& model, const SparseGraph& g);

// Z plus per-layer caches. Holds pointers into the PropagationGraph, which
// must outlive it.
struct EncodeResult {
  DenseMatrix z;
  std::vector<GATCache> gat_caches;
  std::vector<GCNCache> gcn_caches;
};

// Throws InputError when x does not match the graph or the model's input dim.
EncodeResult encode(const GAEModel& model, const PropagationGraph& prop, const DenseMatrix& x);
DenseMatrix encode(const GAEModel& model, const SparseGraph& g, const DenseMatrix& x);

struct ReconstructedAdjacency {
  DenseMatrix probabilities;  // exactly symmetric
};

// Throws InputError if z has more rows than dense_limit.
ReconstructedAdjacency decode_dense(const DenseMatrix& z,
                                    std::size_t dense_limit = kDefaultDenseLimit);

std::vector<double> decode_entries(const DenseMatrix& z, std::span<const Edge> idx);

struct LossBreakdown {
  double recon = 0.0;
  double reg = 0.0;  // ||Z||_F^2
  double total = 0.0;
};

// Target A_ij = 1 iff (i,j) is an edge with i != j; self-loops are never a
// reconstruction target. The sum runs over every ordered pair, diagonal
// included. Optionally writes dL_total/dZ (regularizer included).
LossBreakdown loss_dense(const SparseGraph& g, const DenseMatrix& z, double lambda,
                         DenseMatrix* grad_z = nullptr,
                         std::size_t dense_limit = kDefaultDenseLimit);

// Per-row squared reconstruction error sum_j (A_ij - sigmoid(z_i.z_j))^2.
std::vector<double> reconstruction_row_errors(const SparseGraph& g, const DenseMatrix& z);

struct SampledLossOptions {
  double neg_ratio = 1.0;
  std::uint64_t seed = 0;
};

// Squared error over every stored non-self-loop entry (target 1) plus
// ceil(neg_ratio * |E|) non-edge ordered pairs drawn uniformly without
// replacement (target 0), the latter rescaled by #non-edges / #sampled.
// Sampling every non-edge reproduces loss_dense.
LossBreakdown loss_sampled(const SparseGraph& g, const DenseMatrix& z, double lambda,
                           const SampledLossOptions& opts, DenseMatrix* grad_z = nullptr);

// Ordered (i,j) pairs with A_ij = 0 (diagonal included), uniformly without
// replacement. Returns all of them when count >= their number.
std::vector<Edge> sample_non_edges(const SparseGraph& g, std::size_t count, std::uint64_t seed);

// Chain rule from dL/dZ back through the encoder stack.
ModelGradients loss_backward(const GAEModel& model, const EncodeResult& enc,
                             const DenseMatrix& grad_z);

enum class LossMode { dense, sampled };

struct LossOptions {
  LossMode mode = LossMode::dense;
  SampledLossOptions sampled;
  std::size_t dense_limit = kDefaultDenseLimit;
};

// Forward + loss, and the full parameter gradient when grads is non-null.
LossBreakdown evaluate_loss(const GAEModel& model, const PropagationGraph& prop,
                            const SparseGraph& target, const DenseMatrix& x,
                            const LossOptions& opts, ModelGradients* grads = nullptr);

}  // namespace gad
