#pragma once

#include "nfim/errors.hpp"
#include "nfim/stats.hpp"
#include "nfim/types.hpp"

#include <string>
#include <vector>

namespace nfim::detail {

inline MatrixEstimate to_estimate(const MatrixMoments& m, BlockTag tag) {
  MatrixEstimate out;
  out.mean = FisherMatrix(m.mean(), tag);
  out.std_error = m.std_error();
  out.n_samples = m.count();
  return out;
}

inline void attach_score(MatrixEstimate& est, const MatrixMoments& score) {
  est.score_mean_diagnostic = score.mean().col(0);
  est.score_mean_stderr = score.std_error().col(0);
}

/// Reduce per-index samples in index order.
inline MatrixMoments reduce(const std::vector<Matrix>& samples, Eigen::Index rows, Eigen::Index cols) {
  MatrixMoments m(rows, cols);
  for (const Matrix& x : samples) m.add(x);
  return m;
}

inline void require_at_least(int n, int min, const std::string& what) {
  if (n < min) throw ConfigError(what + " must be >= " + std::to_string(min));
}

}  // namespace nfim::detail
