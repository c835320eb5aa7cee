#pragma once

#include "nfim/types.hpp"

#include <functional>

namespace nfim {

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;
using MatrixFn = std::function<Matrix(const Vector&)>;

inline constexpr double kGradientStep = 1e-5;
inline constexpr double kHessianStep = 1e-4;

/// Per-coordinate step h * max(1, |x_i|).
double scaled_step(double h, double x);

/// Central-difference gradient. Throws EvaluationError on non-finite values.
Vector fd_gradient(const ScalarFn& f, const Vector& x, double h = kGradientStep);

/// Central-difference Hessian (symmetric by construction).
Matrix fd_hessian(const ScalarFn& f, const Vector& x, double h = kHessianStep);

/// max_i |analytic_i - numeric_i| / max(1, |analytic_i|)
double check_gradient(const ScalarFn& f, const VectorFn& analytic_grad, const Vector& x, double h = kGradientStep);

/// max |analytic - numeric| / max(max |analytic|, |f(x)|), numeric Hessian from fd_hessian.
double check_hessian(const ScalarFn& f, const MatrixFn& analytic_hessian, const Vector& x, double h = kHessianStep);

}  // namespace nfim
