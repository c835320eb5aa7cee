#include "nfim/types.hpp"

#include "nfim/contracts.hpp"
#include "nfim/errors.hpp"
#include "nfim/linalg.hpp"

#include <cmath>

namespace nfim {

DataSample DataSample::from_attributes(Matrix attributes) {
  if (!attributes.allFinite()) throw EvaluationError("attribute matrix has non-finite entries");
  return DataSample(std::variant<Matrix, Counts>(std::in_place_index<0>, std::move(attributes)));
}

DataSample DataSample::from_counts(Counts counts) {
  if ((counts.array() < 0).any()) throw EvaluationError("count vector has negative entries");
  return DataSample(std::variant<Matrix, Counts>(std::in_place_index<1>, std::move(counts)));
}

const Matrix& DataSample::attributes() const {
  if (const auto* m = std::get_if<0>(&payload_)) return *m;
  throw DimensionError("data sample holds counts, not attributes");
}

const Counts& DataSample::counts() const {
  if (const auto* c = std::get_if<1>(&payload_)) return *c;
  throw DimensionError("data sample holds attributes, not counts");
}

bool DataSample::operator==(const DataSample& other) const {
  if (kind() != other.kind()) return false;
  if (kind() == Kind::attributes) {
    const Matrix& a = attributes();
    const Matrix& b = other.attributes();
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  }
  return counts().size() == other.counts().size() && counts() == other.counts();
}

std::string to_string(BlockTag tag) {
  switch (tag) {
    case BlockTag::theta:
      return "theta";
    case BlockTag::phi:
      return "phi";
    case BlockTag::joint:
      return "joint";
  }
  return "unknown";
}

FisherMatrix::FisherMatrix(Matrix entries, BlockTag tag, bool approximation)
    : entries_(std::move(entries)), tag_(tag), approximation_(approximation) {
  if (entries_.rows() != entries_.cols()) throw DimensionError("FisherMatrix must be square");
  if (!is_symmetric(entries_)) throw SymmetryError("FisherMatrix entries are not symmetric");
}

void FisherMatrix::check_invariants(double psd_tol) const {
  if (!is_symmetric(entries_)) throw SymmetryError("FisherMatrix entries are not symmetric");
  if (approximation_) return;
  const double tol = psd_tol < 0.0 ? default_psd_tolerance(entries_) : psd_tol;
  const PsdResult r = psd_check(entries_, tol);
  if (!r.is_psd) {
    throw Error("FisherMatrix is not positive semidefinite: min eigenvalue " + std::to_string(r.min_eigenvalue));
  }
}

namespace {

MatrixEstimate combine(const MatrixEstimate& a, const MatrixEstimate& b, double sign) {
  if (a.mean.dim() != b.mean.dim() || a.mean.block_tag() != b.mean.block_tag()) {
    throw DimensionError("cannot combine estimates of different shape or block");
  }
  MatrixEstimate out;
  out.mean = FisherMatrix(a.mean.entries() + sign * b.mean.entries(), a.mean.block_tag());
  out.std_error = (a.std_error.array().square() + b.std_error.array().square()).sqrt().matrix();
  out.n_samples = std::min(a.n_samples, b.n_samples);
  return out;
}

}  // namespace

MatrixEstimate add_independent(const MatrixEstimate& a, const MatrixEstimate& b) { return combine(a, b, 1.0); }

MatrixEstimate subtract_independent(const MatrixEstimate& a, const MatrixEstimate& b) {
  return combine(a, b, -1.0);
}

void check_dims(const ConditionalModel& model, const NuisancePrior& prior) {
  const ModelDims d = model.dims();
  if (d.theta != prior.theta_dim() || d.phi != prior.dim()) {
    throw DimensionError("model and nuisance prior disagree on parameter dimensions");
  }
}

void check_dims(const ConditionalModel& model, const NuisancePrior& prior, const ThetaPrior& theta_prior) {
  check_dims(model, prior);
  if (theta_prior.dim() != model.dims().theta) {
    throw DimensionError("theta prior dimension does not match the model");
  }
}

}  // namespace nfim
