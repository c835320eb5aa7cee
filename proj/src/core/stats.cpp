#include "nfim/stats.hpp"

#include "nfim/errors.hpp"

#include <cmath>

namespace nfim {

MatrixMoments::MatrixMoments(Eigen::Index rows, Eigen::Index cols)
    : mean_(Matrix::Zero(rows, cols)), m2_(Matrix::Zero(rows, cols)) {}

void MatrixMoments::add(const Matrix& x) {
  if (x.rows() != mean_.rows() || x.cols() != mean_.cols()) throw DimensionError("MatrixMoments: shape mismatch");
  ++n_;
  const Matrix delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_.array() += delta.array() * (x - mean_).array();
}

Matrix MatrixMoments::std_error() const {
  if (n_ < 2) return Matrix::Zero(mean_.rows(), mean_.cols());
  const double n = static_cast<double>(n_);
  return (m2_.array().max(0.0) / ((n - 1.0) * n)).sqrt().matrix();
}

}  // namespace nfim
