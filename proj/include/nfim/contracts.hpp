#pragma once

#include "nfim/random.hpp"
#include "nfim/types.hpp"

#include <optional>
#include <vector>

namespace nfim {

/// Deterministic node-weight rule over the data space: for any integrable f,
/// the integral (or sum) of f over the data space is approximated by
/// sum_j weights[j] * f(nodes[j]). Weights are measure weights, not
/// probabilities.
struct DataRule {
  std::vector<DataSample> nodes;
  std::vector<double> weights;
};

struct ModelDims {
  Eigen::Index theta = 0;
  Eigen::Index phi = 0;
  DataSample::Kind data_kind = DataSample::Kind::attributes;
  Eigen::Index data_size = 0;  ///< N photons (attributes) or number of bins (counts)
};

/// Data model pr(A | phi, theta).
///
/// Implementations are immutable and evaluated concurrently.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual ModelDims dims() const = 0;

  /// Natural log of the density (or probability, for count data). May be -inf.
  virtual double log_density(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const = 0;
  virtual Vector score_theta(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const = 0;
  virtual Vector score_phi(const DataSample& a, const PhiVector& phi, const ThetaVector& theta) const = 0;

  /// Second partials of the density itself (not its log) with respect to phi.
  /// std::nullopt asks the caller to use finite differences.
  virtual std::optional<Matrix> hessian_phi_density(const DataSample& a, const PhiVector& phi,
                                                    const ThetaVector& theta) const {
    (void)a;
    (void)phi;
    (void)theta;
    return std::nullopt;
  }

  virtual DataSample sample(const PhiVector& phi, const ThetaVector& theta, Rng& rng) const = 0;

  /// Quadrature or enumeration over the data space adapted to pr(.|phi,theta),
  /// or nullopt if none exists with at most max_nodes nodes.
  virtual std::optional<DataRule> data_rule(const PhiVector& phi, const ThetaVector& theta,
                                            std::size_t max_nodes) const {
    (void)phi;
    (void)theta;
    (void)max_nodes;
    return std::nullopt;
  }
};

/// Axis-aligned support; infinite bounds mark unbounded axes.
struct Support {
  Vector lower;
  Vector upper;
};

/// Nuisance prior pr(phi | theta). theta-independent priors must return an
/// exactly-zero score_theta.
class NuisancePrior {
 public:
  virtual ~NuisancePrior() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Eigen::Index theta_dim() const = 0;

  /// ln pr(phi|theta). Axes with zero spread are point masses and contribute
  /// ln 1 = 0 at their atom.
  virtual double log_density(const PhiVector& phi, const ThetaVector& theta) const = 0;
  /// grad_theta ln pr(phi|theta)
  virtual Vector score_theta(const PhiVector& phi, const ThetaVector& theta) const = 0;
  /// grad_phi ln pr(phi|theta); nullopt means finite differences of log_density.
  virtual std::optional<Vector> score_phi(const PhiVector& phi, const ThetaVector& theta) const {
    (void)phi;
    (void)theta;
    return std::nullopt;
  }
  virtual PhiVector sample(const ThetaVector& theta, Rng& rng) const = 0;
  virtual Support support() const = 0;

  virtual PhiVector mean(const ThetaVector& theta) const = 0;
  virtual Matrix covariance(const ThetaVector& theta) const = 0;
};

/// Prior pr(theta) on the task parameters; must be proper and smooth.
class ThetaPrior {
 public:
  virtual ~ThetaPrior() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_density(const ThetaVector& theta) const = 0;
  virtual Vector score(const ThetaVector& theta) const = 0;
  virtual ThetaVector sample(Rng& rng) const = 0;
};

/// Throws DimensionError unless model and prior agree on d_theta and d_phi.
void check_dims(const ConditionalModel& model, const NuisancePrior& prior);
void check_dims(const ConditionalModel& model, const NuisancePrior& prior, const ThetaPrior& theta_prior);

}  // namespace nfim
