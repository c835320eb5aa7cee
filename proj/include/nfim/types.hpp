#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <variant>

namespace nfim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Counts = Eigen::VectorXi;

/// Real parameter vector with a tag so task parameters and nuisance
/// parameters cannot be swapped at call sites.
template <typename Tag>
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Vector values) : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) values_(i++) = v;
  }

  const Vector& vec() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

  /// Copy with entry i shifted by delta (finite-difference stencils).
  ParamVector shifted(Eigen::Index i, double delta) const {
    ParamVector out = *this;
    out.values_(i) += delta;
    return out;
  }

  bool operator==(const ParamVector& other) const { return values_ == other.values_; }

 private:
  Vector values_;
};

struct ThetaTag {};
struct PhiTag {};

/// Task parameters (theta).
using ThetaVector = ParamVector<ThetaTag>;
/// Nuisance parameters (phi).
using PhiVector = ParamVector<PhiTag>;

/// One realization of the data: either list-mode attributes (one column per
/// detected photon) or a vector of binned counts.
class DataSample {
 public:
  enum class Kind { attributes, counts };

  static DataSample from_attributes(Matrix attributes);
  static DataSample from_counts(Counts counts);

  Kind kind() const { return payload_.index() == 0 ? Kind::attributes : Kind::counts; }
  const Matrix& attributes() const;
  const Counts& counts() const;

  bool operator==(const DataSample& other) const;

 private:
  explicit DataSample(std::variant<Matrix, Counts> payload) : payload_(std::move(payload)) {}
  std::variant<Matrix, Counts> payload_;
};

enum class BlockTag { theta, phi, joint };

std::string to_string(BlockTag tag);

/// Symmetric matrix carrying which parameter block it describes.
///
/// Construction enforces symmetry (1e-10 relative). Positive
/// semidefiniteness is checked by check_invariants(), which exempts matrices
/// flagged as approximation outputs.
class FisherMatrix {
 public:
  FisherMatrix() = default;
  FisherMatrix(Matrix entries, BlockTag tag, bool approximation = false);

  const Matrix& entries() const { return entries_; }
  BlockTag block_tag() const { return tag_; }
  bool is_approximation() const { return approximation_; }
  Eigen::Index dim() const { return entries_.rows(); }

  /// Throws SymmetryError, or Error on a PSD violation beyond psd_tol.
  /// A negative psd_tol selects the default 1e-8 * |trace|.
  void check_invariants(double psd_tol = -1.0) const;

 private:
  Matrix entries_;
  BlockTag tag_ = BlockTag::theta;
  bool approximation_ = false;
};

/// Monte Carlo (or deterministic, with zero stderr) estimate of a matrix.
struct MatrixEstimate {
  FisherMatrix mean;
  Matrix std_error;  ///< per-entry standard errors, nonnegative
  std::int64_t n_samples = 0;
  Vector score_mean_diagnostic;  ///< empirical mean of the score used; empty if not applicable
  Vector score_mean_stderr;

  double max_stderr() const { return std_error.size() == 0 ? 0.0 : std_error.maxCoeff(); }
};

/// Elementwise sum/difference of independent estimates; stderrs add in quadrature.
MatrixEstimate add_independent(const MatrixEstimate& a, const MatrixEstimate& b);
MatrixEstimate subtract_independent(const MatrixEstimate& a, const MatrixEstimate& b);

}  // namespace nfim
