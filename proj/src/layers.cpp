#include "gad/layers.hpp"

#include <string>

#include "gad/errors.hpp"

namespace gad {
namespace {

void check_upstream(const DenseMatrix& pre, const DenseMatrix& upstream, const char* layer) {
  if (pre.rows() != upstream.rows() || pre.cols() != upstream.cols()) {
    throw InputError(std::string(layer) + " backward: upstream gradient " +
                     upstream.shape_string() + " does not match output " + pre.shape_string());
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

DenseMatrix gat_forward(const SparseGraph& g, const DenseMatrix& h, const GATLayerParams& p,
                        GATCache* cache) {
  if (h.rows() != g.num_nodes()) {
    throw InputError("gat_forward: features " + h.shape_string() + " for a graph of " +
                     std::to_string(g.num_nodes()) + " nodes");
  }
  if (h.cols() != p.in_dim()) {
    throw InputError("gat_forward: features " + h.shape_string() + " against weight " +
                     p.weight.shape_string());
  }
  if (p.attention.size() != 2 * p.out_dim()) {
    throw InputError("gat_forward: attention vector length " + std::to_string(p.attention.size()) +
                     ", expected " + std::to_string(2 * p.out_dim()));
  }
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) == 0) {
      throw ConfigError("gat_forward: node " + std::to_string(i) +
                        " has no neighbors; enable self-loops");
    }
  }

  const std::size_t n = g.num_nodes();
  const std::size_t d = p.out_dim();
  const auto& offsets = g.row_offsets();
  const auto& cols = g.col_indices();
  const double* a_src = p.attention.data();
  const double* a_dst = p.attention.data() + d;
  const Activation leaky = Activation::leaky_relu(p.leaky_slope);

  DenseMatrix wh = matmul(h, p.weight);
  std::vector<double> src(n), dst(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    src[i] = dot(a_src, wh.row(i).data(), d);
    dst[i] = dot(a_dst, wh.row(i).data(), d);
  }

  std::vector<double> raw(g.nnz()), logits(g.nnz());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    for (std::size_t q = offsets[i]; q < offsets[i + 1]; ++q) {
      raw[q] = src[i] + dst[cols[q]];
      logits[q] = apply_activation(raw[q], leaky);
    }
  }
  std::vector<double> alpha = segment_softmax(logits, offsets);

  DenseMatrix pre(n, d);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* out = pre.row(i).data();
    for (std::size_t q = offsets[i]; q < offsets[i + 1]; ++q) {
      const double* whj = wh.row(cols[q]).data();
      for (std::size_t c = 0; c < d; ++c) out[c] += alpha[q] * whj[c];
    }
  }
  DenseMatrix out = activate(pre, p.out_activation);

  if (cache != nullptr) {
    cache->graph = &g;
    cache->params = p;
    cache->input = h;
    cache->transformed = std::move(wh);
    cache->src_score = std::move(src);
    cache->dst_score = std::move(dst);
    cache->raw_logit = std::move(raw);
    cache->alpha = std::move(alpha);
    cache->pre_activation = std::move(pre);
  }
  return out;
}

GATGradients gat_backward(const GATCache& cache, const DenseMatrix& upstream) {
  check_upstream(cache.pre_activation, upstream, "gat");
  const SparseGraph& g = *cache.graph;
  const GATLayerParams& p = cache.params;
  const std::size_t n = g.num_nodes();
  const std::size_t d = p.out_dim();
  const auto& offsets = g.row_offsets();
  const auto& cols = g.col_indices();
  const auto& mirror = g.mirror();
  const DenseMatrix& wh = cache.transformed;
  const double* a_src = p.attention.data();
  const double* a_dst = p.attention.data() + d;
  const Activation leaky = Activation::leaky_relu(p.leaky_slope);

  const DenseMatrix gpre = activate_backward(cache.pre_activation, upstream, p.out_activation);

  // Gradient w.r.t. the raw (pre-leaky) logit of every stored edge.
  std::vector<double> graw(g.nnz());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* gi = gpre.row(i).data();
    double weighted = 0.0;
    for (std::size_t q = offsets[i]; q < offsets[i + 1]; ++q) {
      graw[q] = dot(gi, wh.row(cols[q]).data(), d);  // d alpha
      weighted += cache.alpha[q] * graw[q];
    }
    for (std::size_t q = offsets[i]; q < offsets[i + 1]; ++q) {
      const double de = cache.alpha[q] * (graw[q] - weighted);
      graw[q] = de * activation_derivative(cache.raw_logit[q], leaky);
    }
  }

  std::vector<double> gsrc(n, 0.0), gdst(n, 0.0);
  DenseMatrix gwh(n, d);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    double* out = gwh.row(j).data();
    double s_src = 0.0, s_dst = 0.0;
    for (std::size_t q = offsets[j]; q < offsets[j + 1]; ++q) {
      s_src += graw[q];
      // Entry (i,j) seen from row j: i = cols[q], stored at mirror[q].
      const std::size_t in = mirror[q];
      s_dst += graw[in];
      const double* gi = gpre.row(cols[q]).data();
      for (std::size_t c = 0; c < d; ++c) out[c] += cache.alpha[in] * gi[c];
    }
    gsrc[j] = s_src;
    gdst[j] = s_dst;
    for (std::size_t c = 0; c < d; ++c) out[c] += s_src * a_src[c] + s_dst * a_dst[c];
  }

  GATGradients grads;
  grads.attention.assign(2 * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* whi = wh.row(i).data();
    for (std::size_t c = 0; c < d; ++c) {
      grads.attention[c] += gsrc[i] * whi[c];
      grads.attention[d + c] += gdst[i] * whi[c];
    }
  }
  grads.weight = matmul_tn(cache.input, gwh);
  grads.input = matmul_nt(gwh, p.weight);
  return grads;
}

DenseMatrix gcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h,
                        const GCNLayerParams& p, GCNCache* cache) {
  if (h.cols() != p.in_dim()) {
    throw InputError("gcn_forward: features " + h.shape_string() + " against weight " +
                     p.weight.shape_string());
  }
  DenseMatrix propagated = spmm(adj, h);
  DenseMatrix pre = matmul(propagated, p.weight);
  DenseMatrix out = activate(pre, p.out_activation);
  if (cache != nullptr) {
    cache->adj = &adj;
    cache->params = p;
    cache->propagated = std::move(propagated);
    cache->pre_activation = std::move(pre);
  }
  return out;
}

GCNGradients gcn_backward(const GCNCache& cache, const DenseMatrix& upstream) {
  check_upstream(cache.pre_activation, upstream, "gcn");
  const DenseMatrix gpre =
      activate_backward(cache.pre_activation, upstream, cache.params.out_activation);
  GCNGradients grads;
  grads.weight = matmul_tn(cache.propagated, gpre);
  // A' is symmetric, so its transpose is itself.
  grads.input = spmm(*cache.adj, matmul_nt(gpre, cache.params.weight));
  return grads;
}

}  // namespace gad
