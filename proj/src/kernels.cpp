#include "gad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gad/errors.hpp"

namespace gad {
namespace {

void check_inner(const DenseMatrix& a, const DenseMatrix& b, std::size_t lhs, std::size_t rhs,
                 const char* op) {
  if (lhs != rhs) {
    throw InputError(std::string(op) + " shape mismatch: " + a.shape_string() + " and " +
                     b.shape_string());
  }
}

void check_spmm(const NormalizedAdjacency& adj, const DenseMatrix& h) {
  if (adj.num_nodes() != h.rows()) {
    throw InputError("spmm shape mismatch: adjacency over " + std::to_string(adj.num_nodes()) +
                     " nodes and features " + h.shape_string());
  }
  require_finite(h, "spmm");
}

void check_segments(std::span<const double> logits, std::span<const std::size_t> offsets) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != logits.size()) {
    throw InputError("segment offsets do not cover the logits");
  }
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s + 1] <= offsets[s]) {
      throw InputError("empty or decreasing softmax segment " + std::to_string(s));
    }
  }
}

inline void softmax_segment(const double* in, double* out, std::size_t n) {
  const double mx = *std::max_element(in, in + n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(in[k] - mx);
    sum += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= sum;
}

}  // namespace

void require_finite(const DenseMatrix& m, const char* where) {
  if (!m.all_finite()) throw EvaluationError(std::string("non-finite input to ") + where);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_activation(double x, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::identity:
      return x;
    case ActivationKind::relu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::leaky_relu:
      return x > 0.0 ? x : act.slope * x;
    case ActivationKind::sigmoid:
      return sigmoid(x);
  }
  return x;
}

double activation_derivative(double x, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::identity:
      return 1.0;
    case ActivationKind::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::leaky_relu:
      return x > 0.0 ? 1.0 : act.slope;
    case ActivationKind::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.cols(), b.rows(), "matmul");
  require_finite(a, "matmul");
  require_finite(b, "matmul");
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  DenseMatrix c(n, m);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* ci = C + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = A[i * inner + k];
      const double* bk = B + k * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.rows(), b.rows(), "matmul_tn");
  require_finite(a, "matmul_tn");
  require_finite(b, "matmul_tn");
  const std::size_t n = a.rows(), p = a.cols(), m = b.cols();
  DenseMatrix c(p, m);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p); ++k) {
    double* ck = C + k * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double aik = A[i * p + k];
      const double* bi = B + i * m;
      for (std::size_t j = 0; j < m; ++j) ck[j] += aik * bi[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.cols(), b.cols(), "matmul_nt");
  require_finite(a, "matmul_nt");
  require_finite(b, "matmul_nt");
  const std::size_t n = a.rows(), inner = a.cols(), m = b.rows();
  DenseMatrix c(n, m);
  const double* A = a.data().data();
  const double* B = b.data().data();
  double* C = c.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* ai = A + i * inner;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = B + j * inner;
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += ai[k] * bj[k];
      C[i * m + j] = s;
    }
  }
  return c;
}

DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h) {
  check_spmm(adj, h);
  const std::size_t n = h.rows(), m = h.cols();
  DenseMatrix out(n, m);
  const auto& offsets = adj.pattern.row_offsets();
  const auto& cols = adj.pattern.col_indices();
  const double* H = h.data().data();
  double* O = out.data().data();
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* oi = O + i * m;
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      const double v = adj.values[p];
      const double* hj = H + static_cast<std::size_t>(cols[p]) * m;
      for (std::size_t c = 0; c < m; ++c) oi[c] += v * hj[c];
    }
  }
  return out;
}

std::vector<double> segment_softmax(std::span<const double> logits,
                                    std::span<const std::size_t> offsets) {
  check_segments(logits, offsets);
  std::vector<double> out(logits.size());
  const std::ptrdiff_t segments = static_cast<std::ptrdiff_t>(offsets.size()) - 1;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t s = 0; s < segments; ++s) {
    softmax_segment(logits.data() + offsets[s], out.data() + offsets[s],
                    offsets[s + 1] - offsets[s]);
  }
  return out;
}

DenseMatrix activate(const DenseMatrix& m, const Activation& act) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.size(); ++k) out.data()[k] = apply_activation(m.data()[k], act);
  return out;
}

DenseMatrix activate_backward(const DenseMatrix& pre, const DenseMatrix& upstream,
                              const Activation& act) {
  if (pre.rows() != upstream.rows() || pre.cols() != upstream.cols()) {
    throw InputError("activate_backward shape mismatch: " + pre.shape_string() + " and " +
                     upstream.shape_string());
  }
  DenseMatrix out(pre.rows(), pre.cols());
  for (std::size_t k = 0; k < pre.size(); ++k)
    out.data()[k] = upstream.data()[k] * activation_derivative(pre.data()[k], act);
  return out;
}

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.cols(), b.rows(), "matmul");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.rows(), b.rows(), "matmul_tn");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.cols(); ++k)
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) c(k, j) += a(i, k) * b(i, j);
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a, b, a.cols(), b.cols(), "matmul_nt");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h) {
  check_spmm(adj, h);
  DenseMatrix out(h.rows(), h.cols());
  const auto& offsets = adj.pattern.row_offsets();
  const auto& cols = adj.pattern.col_indices();
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p)
      for (std::size_t c = 0; c < h.cols(); ++c) out(i, c) += adj.values[p] * h(cols[p], c);
  return out;
}

std::vector<double> segment_softmax(std::span<const double> logits,
                                    std::span<const std::size_t> offsets) {
  check_segments(logits, offsets);
  std::vector<double> out(logits.size());
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
    softmax_segment(logits.data() + offsets[s], out.data() + offsets[s],
                    offsets[s + 1] - offsets[s]);
  return out;
}

}  // namespace serial
}  // namespace gad
