#pragma once

#include "nfim/contracts.hpp"
#include "nfim/quadrature.hpp"
#include "nfim/random.hpp"

#include <cmath>
#include <memory>

namespace nfim::testing {

/// A ~ Normal(theta, 1), no dependence on phi (d_phi = 1).
class PhiFreeModel final : public ConditionalModel {
 public:
  ModelDims dims() const override { return {1, 1, DataSample::Kind::attributes, 1}; }
  double log_density(const DataSample& a, const PhiVector&, const ThetaVector& theta) const override {
    const double r = a.attributes()(0, 0) - theta[0];
    return -0.5 * r * r - 0.5 * std::log(2.0 * M_PI);
  }
  Vector score_theta(const DataSample& a, const PhiVector&, const ThetaVector& theta) const override {
    return Vector::Constant(1, a.attributes()(0, 0) - theta[0]);
  }
  Vector score_phi(const DataSample&, const PhiVector&, const ThetaVector&) const override { return Vector::Zero(1); }
  DataSample sample(const PhiVector&, const ThetaVector& theta, Rng& rng) const override {
    return DataSample::from_attributes(Matrix::Constant(1, 1, theta[0] + standard_normal(rng)));
  }
  std::optional<DataRule> data_rule(const PhiVector&, const ThetaVector& theta, std::size_t) const override {
    const Rule1D r = gauss_hermite_normal(32, theta[0], 1.0);
    DataRule out;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double z = r.nodes[i] - theta[0];
      out.nodes.push_back(DataSample::from_attributes(Matrix::Constant(1, 1, r.nodes[i])));
      out.weights.push_back(r.weights[i] * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z));
    }
    return out;
  }
};

/// Wraps a model and adds a constant to every log density.
class OffsetModel final : public ConditionalModel {
 public:
  OffsetModel(std::shared_ptr<const ConditionalModel> base, double log_offset)
      : base_(std::move(base)), offset_(log_offset) {}
  ModelDims dims() const override { return base_->dims(); }
  double log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override {
    return base_->log_density(a, phi, theta) + offset_;
  }
  Vector score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override {
    return base_->score_theta(a, phi, theta);
  }
  Vector score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override {
    return base_->score_phi(a, phi, theta);
  }
  DataSample sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const override {
    return base_->sample(phi, theta, rng);
  }

 private:
  std::shared_ptr<const ConditionalModel> base_;
  double offset_;
};

/// A density linear in phi near the evaluation point:
/// pr(A|phi,theta) = Normal(A; theta, 1) * (1 + c (phi - 1/2)) on phi in [0, 1], c small.
class LinearPhiModel final : public ConditionalModel {
 public:
  explicit LinearPhiModel(double c) : c_(c) {}
  ModelDims dims() const override { return {1, 1, DataSample::Kind::attributes, 1}; }
  double log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override {
    const double r = a.attributes()(0, 0) - theta[0];
    return -0.5 * r * r - 0.5 * std::log(2.0 * M_PI) + std::log(1.0 + c_ * (phi[0] - 0.5));
  }
  Vector score_theta(const DataSample& a, const PhiVector&, const ThetaVector& theta) const override {
    return Vector::Constant(1, a.attributes()(0, 0) - theta[0]);
  }
  Vector score_phi(const DataSample&, const PhiVector& phi, const ThetaVector&) const override {
    return Vector::Constant(1, c_ / (1.0 + c_ * (phi[0] - 0.5)));
  }
  DataSample sample(const PhiVector&, const ThetaVector& theta, Rng& rng) const override {
    return DataSample::from_attributes(Matrix::Constant(1, 1, theta[0] + standard_normal(rng)));
  }

 private:
  double c_;
};

inline DataSample scalar_sample(double a) { return DataSample::from_attributes(Matrix::Constant(1, 1, a)); }

}  // namespace nfim::testing
