#pragma once

#include "nfim/contracts.hpp"
#include "nfim/linalg.hpp"
#include "nfim/marginal.hpp"
#include "nfim/types.hpp"

#include <cstdint>

namespace nfim {

/// F(phi, theta): mean of raw score outer products s s^T over A ~ pr(.|phi,theta).
/// The empirical score mean is reported separately, never subtracted.
MatrixEstimate conditional_fim(const ConditionalModel& model, const PhiVector& phi, const ThetaVector& theta,
                               int n, std::uint64_t seed);

/// <F(phi, theta)>_{phi|theta}: n_phi prior draws, each with an n_data-sample
/// conditional FIM. The standard error is the spread of the per-draw
/// estimates, which carries both stages (law of total variance).
MatrixEstimate averaged_conditional_fim(const ConditionalModel& model, const NuisancePrior& prior,
                                        const ThetaVector& theta, int n_phi, int n_data, std::uint64_t seed);

/// F(theta) of the marginalized model: mean of g g^T with g the global score,
/// A drawn from the marginal (phi from the prior, then A | phi). Needs a grid
/// integrator for the inner posterior integrals.
MatrixEstimate marginal_fim(const ConditionalModel& model, const NuisancePrior& prior, const ThetaVector& theta,
                            int n, const Integrator& integ, std::uint64_t seed);

/// F_phi(theta): mean of s(phi|theta) s(phi|theta)^T over phi ~ pr(phi|theta).
/// Exactly zero for theta-independent priors.
MatrixEstimate nuisance_info_fim(const NuisancePrior& prior, const ThetaVector& theta, int n, std::uint64_t seed);

struct VerifyConfig {
  int n_data = 20000;      ///< draws of A | theta for the marginal FIM and the direct gap
  int n_phi = 2000;        ///< prior draws for the averaged conditional FIM
  int n_inner = 10;        ///< data draws per prior draw
  int n_nuisance = 20000;  ///< prior draws for the nuisance-information FIM
  Integrator integrator = Integrator::grid(64);
  std::uint64_t seed = 1;
  double sigma_mult = 3.0;  ///< slack in standard errors for every verdict

  void validate() const;
};

struct InequalityReport {
  MatrixEstimate lhs;            ///< F(theta)
  MatrixEstimate averaged;       ///< <F(phi,theta)>_{phi|theta}
  MatrixEstimate nuisance_info;  ///< F_phi(theta)
  MatrixEstimate rhs;            ///< averaged + nuisance_info
  MatrixEstimate gap;            ///< rhs - lhs
  MatrixEstimate direct_gap;     ///< < cov[s + s_prior | A, theta] >_{A|theta}
  bool holds = false;
  double min_gap_eigenvalue = 0.0;
  double gap_tolerance = 0.0;  ///< sigma_mult * max stderr of gap
  double identity_residual = 0.0;
  double identity_tolerance = 0.0;  ///< sigma_mult * max combined stderr of gap - direct_gap
  bool identity_holds = false;
  bool truncated = false;  ///< nuisance grid cut an unbounded prior at mean +- 6 sd
};

/// F(theta) <= <F(phi,theta)>_{phi|theta} + F_phi(theta) and the covariance-gap identity.
InequalityReport verify_inequality(const ConditionalModel& model, const NuisancePrior& prior,
                                   const ThetaVector& theta, const VerifyConfig& config);

/// Inverse of m.mean. Throws SingularFimError when the matrix is not
/// positive definite or its condition number reaches 1e12.
Matrix crb(const MatrixEstimate& m);

/// First-order propagated stderr of the entries of inverse(m.mean).
Matrix crb_std_error(const MatrixEstimate& m);

struct CrbComparison {
  Matrix crb_marginal;  ///< [F(theta)]^-1
  Matrix crb_bound;     ///< [<F(phi,theta)> + F_phi]^-1
  PsdResult ordering;   ///< crb_marginal - crb_bound
  double tolerance = 0.0;
  bool holds = false;
};

/// Loewner ordering [F(theta)]^-1 >= [rhs]^-1 at propagated MC tolerance.
CrbComparison compare_crb(const MatrixEstimate& marginal, const MatrixEstimate& rhs, double sigma_mult = 3.0);

}  // namespace nfim
