#pragma once

#include "nfim/contracts.hpp"

#include <vector>

namespace nfim {

/// phi | theta ~ Normal(offset + coupling * theta, diag(sd^2)).
///
/// A zero coupling matrix makes the prior theta-independent and score_theta
/// returns exact zeros. Axes with sd == 0 are point masses at their mean.
class GaussianNuisancePrior final : public NuisancePrior {
 public:
  GaussianNuisancePrior(Vector offset, Matrix coupling, Vector sd);

  /// 1-D convenience: phi | theta ~ Normal(offset + coupling * theta_0, sd^2).
  static GaussianNuisancePrior scalar(double offset, double coupling, double sd);

  Eigen::Index dim() const override { return offset_.size(); }
  Eigen::Index theta_dim() const override { return coupling_.cols(); }
  double log_density(const PhiVector& phi, const ThetaVector& theta) const override;
  Vector score_theta(const PhiVector& phi, const ThetaVector& theta) const override;
  std::optional<Vector> score_phi(const PhiVector& phi, const ThetaVector& theta) const override;
  PhiVector sample(const ThetaVector& theta, Rng& rng) const override;
  Support support() const override;
  PhiVector mean(const ThetaVector& theta) const override;
  Matrix covariance(const ThetaVector& theta) const override;

  bool theta_independent() const { return theta_independent_; }
  const Vector& sd() const { return sd_; }
  /// Same prior with every sd multiplied by factor.
  GaussianNuisancePrior scaled(double factor) const;

 private:
  Vector offset_;
  Matrix coupling_;
  Vector sd_;
  bool theta_independent_;
};

/// theta ~ Normal(mean, diag(sd^2)), sd > 0.
class GaussianThetaPrior final : public ThetaPrior {
 public:
  GaussianThetaPrior(Vector mean, Vector sd);

  Eigen::Index dim() const override { return mean_.size(); }
  double log_density(const ThetaVector& theta) const override;
  Vector score(const ThetaVector& theta) const override;
  ThetaVector sample(Rng& rng) const override;

 private:
  Vector mean_;
  Vector sd_;
};

/// N list-mode photons with scalar attributes a_n = gain * theta + phi + eps_n,
/// eps_n ~ Normal(0, sigma^2). gain = 1 is the Gaussian location model,
/// gain = 0 a model whose data carry information about phi only.
class GaussianShiftModel final : public ConditionalModel {
 public:
  GaussianShiftModel(int n_obs, double sigma, double gain = 1.0);

  ModelDims dims() const override;
  double log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  Vector score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  Vector score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  std::optional<Matrix> hessian_phi_density(const DataSample& a, const PhiVector& phi,
                                            const ThetaVector& theta) const override;
  DataSample sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const override;
  /// Tensor Gauss-Hermite in each attribute, 32 nodes per axis when it fits.
  std::optional<DataRule> data_rule(const PhiVector& phi, const ThetaVector& theta,
                                    std::size_t max_nodes) const override;

  int n_obs() const { return n_obs_; }
  double sigma() const { return sigma_; }

 private:
  double residual_sum(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const;

  int n_obs_;
  double sigma_;
  double gain_;
};

/// Binned photon counts from a source at position theta seen through a door
/// at angle phi:
///   g_k ~ Poisson(I * t(phi) * b_k(theta)),
///   t(phi) = cos^2(phi), b_k(theta) = exp(-(x_k - theta)^2 / (2 w^2)).
/// The door is closed at phi = pi/2, where no photons arrive.
class PoissonDoorModel final : public ConditionalModel {
 public:
  PoissonDoorModel(double intensity, std::vector<double> positions, double width);

  ModelDims dims() const override;
  double log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  Vector score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  Vector score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const override;
  std::optional<Matrix> hessian_phi_density(const DataSample& a, const PhiVector& phi,
                                            const ThetaVector& theta) const override;
  DataSample sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const override;
  /// Enumerates every count vector with total <= ceil(M + 12 sqrt(M)) + 2,
  /// M the expected total, when that fits in max_nodes.
  std::optional<DataRule> data_rule(const PhiVector& phi, const ThetaVector& theta,
                                    std::size_t max_nodes) const override;

  static double transmission(double phi);
  double profile(std::size_t k, double theta) const;
  Vector means(const PhiVector& phi, const ThetaVector& theta) const;

  double intensity() const { return intensity_; }
  const std::vector<double>& positions() const { return positions_; }
  double width() const { return width_; }

 private:
  double intensity_;
  std::vector<double> positions_;
  double width_;
};

/// Evenly spaced detector positions on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace nfim
