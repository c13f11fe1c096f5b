#pragma once

#include <vector>

#include "gad/graph.hpp"
#include "gad/kernels.hpp"
#include "gad/matrix.hpp"

namespace gad {

// Single-head graph attention layer. `attention` has length 2 * d_out and is
// read as [a_src | a_dst], matching the concatenation [W h_i | W h_j].
// The attention logit is leaky_relu(a_src . Wh_i + a_dst . Wh_j) with
// `leaky_slope`; slope 1 makes the nonlinearity the identity.
struct GATLayerParams {
  DenseMatrix weight;  // d_in x d_out
  std::vector<double> attention;
  double leaky_slope = 0.2;
  Activation out_activation = Activation::relu();

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

struct GCNLayerParams {
  DenseMatrix weight;  // d_in x d_out
  Activation out_activation = Activation::relu();

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

// Activations retained by gat_forward. The graph must outlive the cache.
struct GATCache {
  const SparseGraph* graph = nullptr;
  GATLayerParams params;
  DenseMatrix input;        // h
  DenseMatrix transformed;  // W h
  std::vector<double> src_score;  // a_src . Wh_i per node
  std::vector<double> dst_score;  // a_dst . Wh_j per node
  std::vector<double> raw_logit;  // pre-nonlinearity logit per stored edge
  std::vector<double> alpha;      // attention weight per stored edge
  DenseMatrix pre_activation;
};

struct GATGradients {
  DenseMatrix weight;
  std::vector<double> attention;
  DenseMatrix input;
};

// Attends over the stored neighbor list of each node (self-loops must already
// be present if wanted). Throws ConfigError for a node with no neighbors and
// InputError on a shape mismatch.
DenseMatrix gat_forward(const SparseGraph& g, const DenseMatrix& h, const GATLayerParams& p,
                        GATCache* cache = nullptr);

GATGradients gat_backward(const GATCache& cache, const DenseMatrix& upstream);

// The adjacency must outlive the cache.
struct GCNCache {
  const NormalizedAdjacency* adj = nullptr;
  GCNLayerParams params;
  DenseMatrix propagated;  // A' h
  DenseMatrix pre_activation;
};

struct GCNGradients {
  DenseMatrix weight;
  DenseMatrix input;
};

// act(A' h W)
DenseMatrix gcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h,
                        const GCNLayerParams& p, GCNCache* cache = nullptr);

GCNGradients gcn_backward(const GCNCache& cache, const DenseMatrix& upstream);

}  // namespace gad
