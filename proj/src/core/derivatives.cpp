#include "nfim/derivatives.hpp"

#include "nfim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nfim {

namespace {

double eval_finite(const ScalarFn& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw EvaluationError("non-finite function value in finite-difference stencil");
  return v;
}

}  // namespace

double scaled_step(double h, double x) { return h * std::max(1.0, std::abs(x)); }

Vector fd_gradient(const ScalarFn& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = scaled_step(h, x(i));
    xp(i) = x(i) + step;
    const double fp = eval_finite(f, xp);
    xp(i) = x(i) - step;
    const double fm = eval_finite(f, xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

Matrix fd_hessian(const ScalarFn& f, const Vector& x, double h) {
  const Eigen::Index n = x.size();
  Matrix hess(n, n);
  const double f0 = eval_finite(f, x);
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = scaled_step(h, x(i));
    xp(i) = x(i) + hi;
    const double fp = eval_finite(f, xp);
    xp(i) = x(i) - hi;
    const double fm = eval_finite(f, xp);
    xp(i) = x(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = scaled_step(h, x(j));
      auto at = [&](double si, double sj) {
        Vector y = x;
        y(i) += si * hi;
        y(j) += sj * hj;
        return eval_finite(f, y);
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

double check_gradient(const ScalarFn& f, const VectorFn& analytic_grad, const Vector& x, double h) {
  const Vector analytic = analytic_grad(x);
  if (!analytic.allFinite()) throw EvaluationError("analytic gradient is not finite");
  const Vector numeric = fd_gradient(f, x, h);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(analytic(i) - numeric(i)) / std::max(1.0, std::abs(analytic(i))));
  }
  return worst;
}

double check_hessian(const ScalarFn& f, const MatrixFn& analytic_hessian, const Vector& x, double h) {
  const Matrix analytic = analytic_hessian(x);
  if (!analytic.allFinite()) throw EvaluationError("analytic Hessian is not finite");
  const Matrix numeric = fd_hessian(f, x, h);
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), std::abs(f(x)), 1e-300});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace nfim
