#pragma once

#include "nfim/contracts.hpp"
#include "nfim/linalg.hpp"
#include "nfim/marginal.hpp"
#include "nfim/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace nfim {

/// Mean and per-entry stderr of a block that need not be square or symmetric.
struct BlockEstimate {
  Matrix mean;
  Matrix std_error;

  double max_abs_mean() const { return mean.size() == 0 ? 0.0 : mean.cwiseAbs().maxCoeff(); }
  double max_stderr() const { return std_error.size() == 0 ? 0.0 : std_error.maxCoeff(); }
};

/// Gradients of ln pr(theta, phi | A) with respect to theta and phi.
struct PosteriorScores {
  Vector theta;
  Vector phi;
};

/// grad_phi ln pr(phi|theta): from the prior when it supplies one, else central differences.
Vector prior_score_phi(const NuisancePrior& prior, const PhiVector& phi, const ThetaVector& theta);

PosteriorScores posterior_scores(const ConditionalModel& model, const NuisancePrior& prior,
                                 const ThetaPrior& theta_prior, const DataSample& a, const ThetaVector& theta,
                                 const PhiVector& phi);

struct BayesConfig {
  int n_theta = 200;  ///< outer draws theta ~ pr(theta)
  int n_phi = 200;    ///< draws phi ~ pr(phi|theta) per theta (joint FIM)
  int n_data = 200;   ///< draws of A per (phi, theta) for the joint FIM, per theta for F_M
  Integrator integrator = Integrator::grid(64);
  std::uint64_t seed = 1;
  double sigma_mult = 3.0;
  Vector delta_theta;  ///< displacement for the quadratic figure of merit; empty means all ones

  void validate() const;
};

/// Bayesian FIM for the pair (theta, phi) with every term of its block
/// decomposition estimated separately. Component keys:
///   f11_data      <<F11(theta,phi)>_{phi|theta}>_theta
///   f11_nuisance  <F11(theta)>_theta
///   f11_prior     F11 (theta-prior information)
///   f22_data, f22_nuisance, f12_data, f12_nuisance  (analogues)
/// Residual keys f_tt, f_pp, f_tp hold block minus the sum of its components.
struct JointBayesFim {
  FisherMatrix f_tt;
  Matrix f_tp;
  FisherMatrix f_pp;
  FisherMatrix assembled;  ///< [[f_tt, f_tp], [f_tp^T, f_pp]]
  Matrix assembled_std_error;
  std::map<std::string, BlockEstimate> components;
  std::map<std::string, BlockEstimate> residuals;
  std::int64_t n_theta = 0;
  std::int64_t n_leaves = 0;

  Matrix f_pt() const { return f_tp.transpose(); }
  MatrixEstimate f_tt_estimate() const;
};

/// Nested Monte Carlo theta ~ pr(theta), phi ~ pr(phi|theta), A ~ pr(A|phi,theta).
/// Standard errors come from the spread of per-theta averages.
JointBayesFim joint_bayes_fim(const ConditionalModel& model, const NuisancePrior& prior,
                              const ThetaPrior& theta_prior, const BayesConfig& config);

/// F_M together with the two terms of F_M = <F(theta)>_theta + F11, each
/// estimated from the same draws.
struct MarginalBayesFim {
  MatrixEstimate f_m;
  MatrixEstimate average_marginal_fim;  ///< <F(theta)>_theta
  MatrixEstimate prior_info;            ///< F11
  BlockEstimate identity_residual;      ///< f_m - (average_marginal_fim + prior_info)
};

MarginalBayesFim marginal_bayes_decomposition(const ConditionalModel& model, const NuisancePrior& prior,
                                              const ThetaPrior& theta_prior, const BayesConfig& config);

/// Mean over theta ~ pr(theta), A ~ pr(A|theta) of grad_theta ln pr(theta|A) outer products.
MatrixEstimate marginal_bayes_fim(const ConditionalModel& model, const NuisancePrior& prior,
                                  const ThetaPrior& theta_prior, const BayesConfig& config);

struct BayesRelationsReport {
  JointBayesFim joint;
  MarginalBayesFim marginal;

  double identity_residual = 0.0;  ///< max |F_M - <F(theta)> - F11|
  double identity_tolerance = 0.0;
  bool identity_holds = false;

  PsdResult ordering;  ///< F_M <= f_tt
  double ordering_tolerance = 0.0;

  double decomposition_residual = 0.0;  ///< worst block residual in units of its stderr
  bool decomposition_holds = false;

  Vector delta_theta;
  double quad_marginal = 0.0;  ///< dtheta^T F_M dtheta
  double quad_joint = 0.0;     ///< [dtheta; 0]^T F_J [dtheta; 0]
  double quad_tolerance = 0.0;
  bool quad_holds = false;

  bool all_hold() const { return identity_holds && ordering.is_psd && decomposition_holds && quad_holds; }
};

BayesRelationsReport verify_bayes_relations(const ConditionalModel& model, const NuisancePrior& prior,
                                            const ThetaPrior& theta_prior, const BayesConfig& config);

}  // namespace nfim
