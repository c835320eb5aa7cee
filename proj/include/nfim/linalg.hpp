#pragma once

#include "nfim/types.hpp"

namespace nfim {

/// Relative tolerance used for every symmetry check.
inline constexpr double kSymmetryTol = 1e-10;

/// Default PSD slack: 1e-8 * |trace(m)|.
double default_psd_tolerance(const Matrix& m);

/// max |m - m^T| <= kSymmetryTol * max(1, max |m|)
bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTol);

/// Smallest eigenvalue from a symmetric eigensolver.
double min_eigenvalue(const Matrix& m);

struct PsdResult {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

/// PSD test: min eigenvalue >= -tol. Throws SymmetryError on asymmetric input.
PsdResult psd_check(const Matrix& m, double tol);
PsdResult psd_check(const FisherMatrix& m, double tol);

/// lo <= hi in the Loewner order, i.e. psd_check(hi - lo, tol).
/// Throws DimensionError on shape or block-tag mismatch.
PsdResult loewner_leq(const FisherMatrix& lo, const FisherMatrix& hi, double tol);

}  // namespace nfim
