#pragma once

#include "nfim/contracts.hpp"
#include "nfim/types.hpp"

#include <cstdint>
#include <vector>

namespace nfim {

/// Concrete nodes over the nuisance space together with log-weights.
///
/// Grid rules fold the prior density into the weights,
///   log_weights[i] = ln(w_i) + ln pr(phi_i | theta) - ln Z,
/// with Z the total prior mass on the grid, so the weights sum to one.
/// Prior-draw rules carry log_weights[i] = -ln(n) since the prior is the
/// sampling proposal.
struct PhiRule {
  std::vector<PhiVector> nodes;
  std::vector<double> log_weights;
  bool is_grid = true;
  bool truncated = false;  ///< an unbounded axis was cut at mean +- 6 sd
};

/// How the nuisance integrals of the marginal density are evaluated.
class Integrator {
 public:
  enum class Kind { grid, monte_carlo };

  /// Tensor Gauss-Legendre on mean +- 6 sd of the prior, clipped to its support.
  static Integrator grid(int nodes_per_axis);
  /// Caller-supplied nodes and quadrature weights (prior density still applied).
  static Integrator fixed_grid(std::vector<PhiVector> nodes, std::vector<double> weights);
  /// Self-normalized importance sampling with the prior as proposal.
  static Integrator monte_carlo(int n_draws, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int nodes_per_axis() const { return nodes_per_axis_; }
  int n_draws() const { return n_draws_; }
  std::uint64_t seed() const { return seed_; }

  PhiRule rule(const NuisancePrior& prior, const ThetaVector& theta) const;

 private:
  Kind kind_ = Kind::grid;
  int nodes_per_axis_ = 64;
  int n_draws_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<PhiVector> fixed_nodes_;
  std::vector<double> fixed_weights_;
};

inline constexpr int kMaxGridDims = 3;
inline constexpr double kTruncationSds = 6.0;

/// pr(phi | A, theta) on grid nodes.
struct PosteriorWeights {
  std::vector<PhiVector> nodes;
  std::vector<double> weights;  ///< nonnegative, sum to 1
  double log_marginal = 0.0;    ///< ln pr(A | theta)
};

/// Posterior moments of v(phi) = s(A|phi,theta) + s(phi|theta).
struct PosteriorScoreMoments {
  Vector mean;           ///< the global score
  Matrix second_moment;  ///< E[v v^T | A, theta]
  Matrix covariance;     ///< second_moment - mean mean^T, accumulated around the mean
  double log_marginal = 0.0;
};

struct LogMarginalEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< delta-method MC error; zero for grid rules
};

// Integrator-level operations.

double log_marginal_density(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                            const ThetaVector& theta, const Integrator& integ);
LogMarginalEstimate log_marginal_estimate(const ConditionalModel& model, const NuisancePrior& prior,
                                          const DataSample& a, const ThetaVector& theta, const Integrator& integ);
/// Requires a grid integrator.
PosteriorWeights posterior_weights(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                                   const ThetaVector& theta, const Integrator& integ);
Vector global_score(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                    const ThetaVector& theta, const Integrator& integ);
/// Requires a grid integrator.
Matrix posterior_score_variance(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                                const ThetaVector& theta, const Integrator& integ);

// Rule-level operations, for callers that reuse one rule across many samples.

LogMarginalEstimate log_marginal_estimate(const ConditionalModel& model, const DataSample& a,
                                          const ThetaVector& theta, const PhiRule& rule);
PosteriorWeights posterior_weights(const ConditionalModel& model, const DataSample& a, const ThetaVector& theta,
                                   const PhiRule& rule);
PosteriorScoreMoments posterior_score_moments(const ConditionalModel& model, const NuisancePrior& prior,
                                              const DataSample& a, const ThetaVector& theta, const PhiRule& rule);

}  // namespace nfim
