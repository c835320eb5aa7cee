#include "nfim/models.hpp"

#include "nfim/errors.hpp"
#include "nfim/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nfim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

// ---------------------------------------------------------------------------
// GaussianNuisancePrior

GaussianNuisancePrior::GaussianNuisancePrior(Vector offset, Matrix coupling, Vector sd)
    : offset_(std::move(offset)), coupling_(std::move(coupling)), sd_(std::move(sd)) {
  if (offset_.size() < 1 || sd_.size() != offset_.size() || coupling_.rows() != offset_.size() ||
      coupling_.cols() < 1) {
    throw DimensionError("GaussianNuisancePrior: inconsistent dimensions");
  }
  if (!offset_.allFinite() || !coupling_.allFinite() || !sd_.allFinite() || (sd_.array() < 0.0).any()) {
    throw ConfigError("GaussianNuisancePrior: parameters must be finite with sd >= 0");
  }
  theta_independent_ = (coupling_.array() == 0.0).all();
  if (!theta_independent_) {
    for (Eigen::Index k = 0; k < sd_.size(); ++k) {
      if (sd_(k) == 0.0 && (coupling_.row(k).array() != 0.0).any()) {
        throw ConfigError("GaussianNuisancePrior: a point-mass axis cannot depend on theta");
      }
    }
  }
}

GaussianNuisancePrior GaussianNuisancePrior::scalar(double offset, double coupling, double sd) {
  return GaussianNuisancePrior(Vector::Constant(1, offset), Matrix::Constant(1, 1, coupling), Vector::Constant(1, sd));
}

PhiVector GaussianNuisancePrior::mean(const ThetaVector& theta) const {
  if (theta.size() != coupling_.cols()) throw DimensionError("GaussianNuisancePrior: theta dimension mismatch");
  return PhiVector(Vector(offset_ + coupling_ * theta.vec()));
}

Matrix GaussianNuisancePrior::covariance(const ThetaVector& theta) const {
  (void)theta;
  return sd_.array().square().matrix().asDiagonal();
}

double GaussianNuisancePrior::log_density(const PhiVector& phi, const ThetaVector& theta) const {
  if (phi.size() != dim()) throw DimensionError("GaussianNuisancePrior: phi dimension mismatch");
  const Vector mu = mean(theta).vec();
  double out = 0.0;
  for (Eigen::Index k = 0; k < dim(); ++k) {
    if (sd_(k) == 0.0) {
      if (phi[k] != mu(k)) return kNegInf;
      continue;
    }
    const double z = (phi[k] - mu(k)) / sd_(k);
    out += -0.5 * z * z - std::log(sd_(k)) - kLogSqrt2Pi;
  }
  return out;
}

Vector GaussianNuisancePrior::score_theta(const PhiVector& phi, const ThetaVector& theta) const {
  if (theta_independent_) return Vector::Zero(theta_dim());
  const Vector mu = mean(theta).vec();
  Vector r = Vector::Zero(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) {
    if (sd_(k) > 0.0) r(k) = (phi[k] - mu(k)) / (sd_(k) * sd_(k));
  }
  return coupling_.transpose() * r;
}

std::optional<Vector> GaussianNuisancePrior::score_phi(const PhiVector& phi, const ThetaVector& theta) const {
  const Vector mu = mean(theta).vec();
  Vector out = Vector::Zero(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) {
    if (sd_(k) > 0.0) out(k) = -(phi[k] - mu(k)) / (sd_(k) * sd_(k));
  }
  return out;
}

PhiVector GaussianNuisancePrior::sample(const ThetaVector& theta, Rng& rng) const {
  Vector phi = mean(theta).vec();
  for (Eigen::Index k = 0; k < dim(); ++k) phi(k) += sd_(k) * standard_normal(rng);
  return PhiVector(phi);
}

Support GaussianNuisancePrior::support() const {
  const double inf = std::numeric_limits<double>::infinity();
  return Support{Vector::Constant(dim(), -inf), Vector::Constant(dim(), inf)};
}

GaussianNuisancePrior GaussianNuisancePrior::scaled(double factor) const {
  if (!(factor >= 0.0)) throw ConfigError("prior scale factor must be nonnegative");
  return GaussianNuisancePrior(offset_, coupling_, sd_ * factor);
}

// ---------------------------------------------------------------------------
// GaussianThetaPrior

GaussianThetaPrior::GaussianThetaPrior(Vector mean, Vector sd) : mean_(std::move(mean)), sd_(std::move(sd)) {
  if (mean_.size() < 1 || sd_.size() != mean_.size()) throw DimensionError("GaussianThetaPrior: dimension mismatch");
  if (!mean_.allFinite() || !sd_.allFinite() || (sd_.array() <= 0.0).any()) {
    throw ConfigError("GaussianThetaPrior: theta priors must be proper (finite sd > 0)");
  }
}

double GaussianThetaPrior::log_density(const ThetaVector& theta) const {
  const Vector z = (theta.vec() - mean_).cwiseQuotient(sd_);
  return -0.5 * z.squaredNorm() - sd_.array().log().sum() - static_cast<double>(dim()) * kLogSqrt2Pi;
}

Vector GaussianThetaPrior::score(const ThetaVector& theta) const {
  return -(theta.vec() - mean_).cwiseQuotient(sd_.cwiseProduct(sd_));
}

ThetaVector GaussianThetaPrior::sample(Rng& rng) const {
  Vector theta = mean_;
  for (Eigen::Index k = 0; k < dim(); ++k) theta(k) += sd_(k) * standard_normal(rng);
  return ThetaVector(theta);
}

// ---------------------------------------------------------------------------
// GaussianShiftModel

GaussianShiftModel::GaussianShiftModel(int n_obs, double sigma, double gain)
    : n_obs_(n_obs), sigma_(sigma), gain_(gain) {
  if (n_obs_ < 1) throw ConfigError("GaussianShiftModel: n_obs must be >= 1");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ConfigError("GaussianShiftModel: sigma must be > 0");
  if (!std::isfinite(gain_)) throw ConfigError("GaussianShiftModel: gain must be finite");
}

ModelDims GaussianShiftModel::dims() const {
  return ModelDims{1, 1, DataSample::Kind::attributes, n_obs_};
}

double GaussianShiftModel::residual_sum(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  const Matrix& x = a.attributes();
  if (x.cols() != n_obs_ || x.rows() != 1) throw DimensionError("GaussianShiftModel: expected a 1 x N sample");
  return x.sum() - static_cast<double>(n_obs_) * (gain_ * theta[0] + phi[0]);
}

double GaussianShiftModel::log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  const Matrix& x = a.attributes();
  if (x.cols() != n_obs_ || x.rows() != 1) throw DimensionError("GaussianShiftModel: expected a 1 x N sample");
  const double center = gain_ * theta[0] + phi[0];
  const double ss = (x.array() - center).square().sum();
  return -0.5 * ss / (sigma_ * sigma_) - n_obs_ * (std::log(sigma_) + kLogSqrt2Pi);
}

Vector GaussianShiftModel::score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  return Vector::Constant(1, gain_ * residual_sum(a, phi, theta) / (sigma_ * sigma_));
}

Vector GaussianShiftModel::score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  return Vector::Constant(1, residual_sum(a, phi, theta) / (sigma_ * sigma_));
}

std::optional<Matrix> GaussianShiftModel::hessian_phi_density(const DataSample& a, const PhiVector& phi,
                                                              const ThetaVector& theta) const {
  const double s2 = sigma_ * sigma_;
  const double score = residual_sum(a, phi, theta) / s2;
  const double p = std::exp(log_density(a, phi, theta));
  return Matrix::Constant(1, 1, p * (score * score - n_obs_ / s2));
}

DataSample GaussianShiftModel::sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const {
  Matrix x(1, n_obs_);
  const double center = gain_ * theta[0] + phi[0];
  for (int n = 0; n < n_obs_; ++n) x(0, n) = center + sigma_ * standard_normal(rng);
  return DataSample::from_attributes(std::move(x));
}

std::optional<DataRule> GaussianShiftModel::data_rule(const PhiVector& phi, const ThetaVector& theta,
                                                      std::size_t max_nodes) const {
  int per_axis = 32;
  auto total_for = [&](int k) {
    double t = 1.0;
    for (int n = 0; n < n_obs_; ++n) t *= k;
    return t;
  };
  while (per_axis >= 8 && total_for(per_axis) > static_cast<double>(max_nodes)) per_axis /= 2;
  if (per_axis < 8) return std::nullopt;

  const double center = gain_ * theta[0] + phi[0];
  const Rule1D gh = gauss_hermite_normal(per_axis, center, sigma_);
  // Convert expectation weights under Normal(center, sigma^2) to Lebesgue weights.
  std::vector<double> measure(gh.nodes.size());
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double z = (gh.nodes[i] - center) / sigma_;
    measure[i] = gh.weights[i] * sigma_ * std::exp(0.5 * z * z + kLogSqrt2Pi);
  }

  DataRule rule;
  const std::size_t total = static_cast<std::size_t>(total_for(per_axis));
  rule.nodes.reserve(total);
  rule.weights.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    Matrix x(1, n_obs_);
    double w = 1.0;
    for (int n = n_obs_ - 1; n >= 0; --n) {
      const std::size_t j = rem % static_cast<std::size_t>(per_axis);
      rem /= static_cast<std::size_t>(per_axis);
      x(0, n) = gh.nodes[j];
      w *= measure[j];
    }
    rule.nodes.push_back(DataSample::from_attributes(std::move(x)));
    rule.weights.push_back(w);
  }
  return rule;
}

// ---------------------------------------------------------------------------
// PoissonDoorModel

PoissonDoorModel::PoissonDoorModel(double intensity, std::vector<double> positions, double width)
    : intensity_(intensity), positions_(std::move(positions)), width_(width) {
  if (!(intensity_ > 0.0) || !std::isfinite(intensity_)) throw ConfigError("PoissonDoorModel: intensity must be > 0");
  if (!(width_ > 0.0) || !std::isfinite(width_)) throw ConfigError("PoissonDoorModel: width must be > 0");
  if (positions_.empty()) throw ConfigError("PoissonDoorModel: need at least one detector");
}

ModelDims PoissonDoorModel::dims() const {
  return ModelDims{1, 1, DataSample::Kind::counts, static_cast<Eigen::Index>(positions_.size())};
}

double PoissonDoorModel::transmission(double phi) {
  // cos^2(phi) written around the closed angle so t(pi/2) is exactly zero.
  const double s = std::sin(phi - std::numbers::pi / 2);
  return s * s;
}

double PoissonDoorModel::profile(std::size_t k, double theta) const {
  const double u = (positions_[k] - theta) / width_;
  return std::exp(-0.5 * u * u);
}

Vector PoissonDoorModel::means(const PhiVector& phi, const ThetaVector& theta) const {
  const double t = transmission(phi[0]);
  Vector mu(static_cast<Eigen::Index>(positions_.size()));
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    mu(static_cast<Eigen::Index>(k)) = intensity_ * t * profile(k, theta[0]);
  }
  return mu;
}

namespace {

const Counts& checked_counts(const DataSample& a, std::size_t bins) {
  const Counts& g = a.counts();
  if (static_cast<std::size_t>(g.size()) != bins) throw DimensionError("PoissonDoorModel: wrong number of bins");
  return g;
}

}  // namespace

double PoissonDoorModel::log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  const Counts& g = checked_counts(a, positions_.size());
  const Vector mu = means(phi, theta);
  double out = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (mu(k) == 0.0) {
      if (g(k) > 0) return kNegInf;
      continue;
    }
    out += g(k) * std::log(mu(k)) - mu(k) - std::lgamma(g(k) + 1.0);
  }
  return out;
}

Vector PoissonDoorModel::score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  const Counts& g = checked_counts(a, positions_.size());
  const Vector mu = means(phi, theta);
  double s = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    s += (g(k) - mu(k)) * (positions_[static_cast<std::size_t>(k)] - theta[0]) / (width_ * width_);
  }
  return Vector::Constant(1, s);
}

Vector PoissonDoorModel::score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const {
  const Counts& g = checked_counts(a, positions_.size());
  double lambda = 0.0;
  for (std::size_t k = 0; k < positions_.size(); ++k) lambda += intensity_ * profile(k, theta[0]);
  const double total = static_cast<double>(g.sum());
  const double dt = std::sin(2.0 * (phi[0] - std::numbers::pi / 2));
  double s = -lambda * dt;
  if (total > 0.0) s += total * dt / transmission(phi[0]);
  return Vector::Constant(1, s);
}

std::optional<Matrix> PoissonDoorModel::hessian_phi_density(const DataSample& a, const PhiVector& phi,
                                                            const ThetaVector& theta) const {
  // pr = C t^G exp(-lambda t) with C = prod (I b_k)^g_k / g_k!, G = sum g_k.
  const Counts& g = checked_counts(a, positions_.size());
  double log_c = 0.0;
  double lambda = 0.0;
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    const double ib = intensity_ * profile(k, theta[0]);
    const int gk = g(static_cast<Eigen::Index>(k));
    lambda += ib;
    log_c += gk * std::log(ib) - std::lgamma(gk + 1.0);
  }
  const double big_g = static_cast<double>(g.sum());
  const double t = transmission(phi[0]);
  const double dt = std::sin(2.0 * (phi[0] - std::numbers::pi / 2));
  const double d2t = 2.0 * std::cos(2.0 * (phi[0] - std::numbers::pi / 2));

  // C * t^k, with t^0 = 1 even at t = 0.
  auto ct = [&](double k) {
    if (k == 0.0) return std::exp(log_c);
    if (t <= 0.0) return 0.0;
    return std::exp(log_c + k * std::log(t));
  };
  double first = lambda * lambda * ct(big_g);
  double second = -lambda * ct(big_g);
  if (big_g >= 1.0) {
    first -= 2.0 * lambda * big_g * ct(big_g - 1.0);
    second += big_g * ct(big_g - 1.0);
  }
  if (big_g >= 2.0) first += big_g * (big_g - 1.0) * ct(big_g - 2.0);
  const double value = std::exp(-lambda * t) * (first * dt * dt + second * d2t);
  return Matrix::Constant(1, 1, value);
}

DataSample PoissonDoorModel::sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const {
  const Vector mu = means(phi, theta);
  Counts g(mu.size());
  for (Eigen::Index k = 0; k < mu.size(); ++k) g(k) = poisson(rng, mu(k));
  return DataSample::from_counts(std::move(g));
}

std::optional<DataRule> PoissonDoorModel::data_rule(const PhiVector& phi, const ThetaVector& theta,
                                                    std::size_t max_nodes) const {
  const double total_mean = means(phi, theta).sum();
  const int max_total = static_cast<int>(std::ceil(total_mean + 12.0 * std::sqrt(total_mean))) + 2;
  const int bins = static_cast<int>(positions_.size());

  // Number of count vectors with sum <= max_total is C(max_total + bins, bins).
  double n_states = 1.0;
  for (int j = 1; j <= bins; ++j) {
    n_states = n_states * (max_total + j) / j;
    if (n_states > static_cast<double>(max_nodes)) return std::nullopt;
  }

  DataRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(n_states));
  Counts g = Counts::Zero(bins);
  // Odometer over count vectors in lexicographic order, pruned by total.
  while (true) {
    rule.nodes.push_back(DataSample::from_counts(g));
    rule.weights.push_back(1.0);
    int k = bins - 1;
    while (k >= 0) {
      g(k) += 1;
      if (g.sum() <= max_total) break;
      g(k) = 0;
      --k;
    }
    if (k < 0) break;
  }
  return rule;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("linspace: need at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace nfim
