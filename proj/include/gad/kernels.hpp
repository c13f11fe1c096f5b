#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gad/graph.hpp"
#include "gad/matrix.hpp"

namespace gad {

enum class ActivationKind { identity, relu, leaky_relu, sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double slope = 0.2;  // leaky_relu only

  static Activation identity() { return {ActivationKind::identity, 0.0}; }
  static Activation relu() { return {ActivationKind::relu, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::leaky_relu, slope}; }
  static Activation sigmoid() { return {ActivationKind::sigmoid, 0.0}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

double sigmoid(double x);

// Scalar forward and derivative. Derivatives take the pre-activation; the
// subgradient at 0 is 0 for relu and `slope` for leaky_relu.
double apply_activation(double x, const Activation& act);
double activation_derivative(double x, const Activation& act);

// The kernels below are row-parallel under OpenMP. Each output row is
// accumulated in a fixed order, so results are bit-identical to the serial
// reference versions in gad::serial regardless of thread count.
//
// Inputs with NaN/Inf are rejected with EvaluationError; shape mismatches
// throw InputError naming both shapes.

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

// Row i of the result is sum over stored j of value(i,j) * h[j].
DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h);

// Max-shifted softmax over each segment [offsets[s], offsets[s+1]).
// Throws InputError on an empty segment or offsets not covering logits.
std::vector<double> segment_softmax(std::span<const double> logits,
                                    std::span<const std::size_t> offsets);

DenseMatrix activate(const DenseMatrix& m, const Activation& act);
// Elementwise upstream * act'(pre).
DenseMatrix activate_backward(const DenseMatrix& pre, const DenseMatrix& upstream,
                              const Activation& act);

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h);
std::vector<double> segment_softmax(std::span<const double> logits,
                                    std::span<const std::size_t> offsets);

}  // namespace serial

// Throws EvaluationError if any entry is non-finite. `where` names the caller.
void require_finite(const DenseMatrix& m, const char* where);

}  // namespace gad
