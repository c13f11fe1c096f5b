#pragma once

#include <cstddef>
#include <functional>

#include "gad/matrix.hpp"

namespace gad {

// Scalar objective of a parameter matrix. When `grad` is non-null the
// function also writes its analytic gradient there (same shape as x).
using DifferentiableFn = std::function<double(const DenseMatrix& x, DenseMatrix* grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_row = 0;
  std::size_t worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Relative error used throughout: |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

// Compares the analytic gradient at `at` with central differences
// (f(x+h) - f(x-h)) / 2h, one coordinate at a time. Throws EvaluationError
// if f is non-finite anywhere it is evaluated.
GradCheckReport grad_check(const DifferentiableFn& f, const DenseMatrix& at, double h = 1e-5);

}  // namespace gad
