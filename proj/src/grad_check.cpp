#include "gad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gad/errors.hpp"

namespace gad {
namespace {

double evaluate(const DifferentiableFn& f, const DenseMatrix& x, DenseMatrix* grad) {
  const double v = f(x, grad);
  if (!std::isfinite(v)) throw EvaluationError("grad_check: objective is not finite");
  return v;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const DifferentiableFn& f, const DenseMatrix& at, double h) {
  DenseMatrix analytic(at.rows(), at.cols());
  evaluate(f, at, &analytic);
  if (analytic.rows() != at.rows() || analytic.cols() != at.cols()) {
    throw InputError("grad_check: gradient shape " + analytic.shape_string() +
                     " does not match parameter shape " + at.shape_string());
  }

  GradCheckReport report;
  DenseMatrix x = at;
  for (std::size_t r = 0; r < at.rows(); ++r) {
    for (std::size_t c = 0; c < at.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + h;
      const double plus = evaluate(f, x, nullptr);
      x(r, c) = saved - h;
      const double minus = evaluate(f, x, nullptr);
      x(r, c) = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double err = relative_error(analytic(r, c), numeric);
      if (err > report.max_rel_error || (r == 0 && c == 0)) {
        report = {err, r, c, analytic(r, c), numeric};
      }
    }
  }
  return report;
}

}  // namespace gad
