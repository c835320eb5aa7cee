#pragma once

#include "nfim/types.hpp"

#include <cstdint>

namespace nfim {

/// Running mean and standard error of equally weighted matrix samples
/// (Welford updates, applied in call order).
class MatrixMoments {
 public:
  MatrixMoments(Eigen::Index rows, Eigen::Index cols);

  void add(const Matrix& x);

  std::int64_t count() const { return n_; }
  const Matrix& mean() const { return mean_; }
  /// Sample standard deviation / sqrt(n); zero for n < 2.
  Matrix std_error() const;

 private:
  std::int64_t n_ = 0;
  Matrix mean_;
  Matrix m2_;
};

}  // namespace nfim
