#pragma once

#include <vector>

namespace nfim {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
Rule1D gauss_legendre(int n, double a, double b);

/// n-point Gauss-Hermite rule for expectations under Normal(mean, sd^2):
/// E[f(X)] ~= sum_i w_i f(x_i), weights summing to 1.
Rule1D gauss_hermite_normal(int n, double mean, double sd);

}  // namespace nfim
