#include "nfim/linalg.hpp"

#include "nfim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nfim {

double default_psd_tolerance(const Matrix& m) { return 1e-8 * std::abs(m.trace()); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double min_eigenvalue(const Matrix& m) {
  // Symmetrize away rounding-level asymmetry before the self-adjoint solve.
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EvaluationError("symmetric eigensolver failed");
  return solver.eigenvalues().minCoeff();
}

PsdResult psd_check(const Matrix& m, double tol) {
  if (!is_symmetric(m)) throw SymmetryError("psd_check requires a symmetric matrix");
  if (!m.allFinite()) throw EvaluationError("psd_check on non-finite matrix");
  PsdResult r;
  r.min_eigenvalue = min_eigenvalue(m);
  r.is_psd = r.min_eigenvalue >= -tol;
  return r;
}

PsdResult psd_check(const FisherMatrix& m, double tol) { return psd_check(m.entries(), tol); }

PsdResult loewner_leq(const FisherMatrix& lo, const FisherMatrix& hi, double tol) {
  if (lo.dim() != hi.dim()) throw DimensionError("loewner_leq: dimension mismatch");
  if (lo.block_tag() != hi.block_tag()) throw DimensionError("loewner_leq: block tag mismatch");
  return psd_check(Matrix(hi.entries() - lo.entries()), tol);
}

}  // namespace nfim
