#pragma once

#include "nfim/models.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace nfim {

using ParamMap = std::map<std::string, double>;

/// A zoo entry resolved from an identifier and a (partial) parameter map.
///
/// Identifiers and parameters (defaults in brackets):
///   gaussian_location   n_obs [1], sigma [1], tau [1], theta_sd [1]
///   dependent_prior     a [1], sigma [1], tau [1], theta_sd [1]
///   poisson_door        intensity [100], n_detectors [5], x_min [-2], x_max [2],
///                       width [1], phi0 [pi/2], spread [0.1], theta_sd [1]
///   gaussian_conjugate  sigma [1], tau [1], s [1]
struct ZooModel {
  std::string id;
  ParamMap params;  ///< every parameter, defaults filled in
  std::shared_ptr<const ConditionalModel> model;
  std::shared_ptr<const GaussianNuisancePrior> prior;
  std::shared_ptr<const ThetaPrior> theta_prior;

  /// Same family with every nuisance-prior sd multiplied by scale, so the
  /// nuisance covariance scales as scale^2.
  std::shared_ptr<const GaussianNuisancePrior> prior_at_scale(double scale) const;
};

std::vector<std::string> zoo_ids();

/// Throws ConfigError on an unknown id, unknown parameter key or invalid value.
ZooModel make_zoo(const std::string& id, const ParamMap& params = {});

/// Closed-form matrices for the zoo entry at theta (1x1 unless stated):
///   gaussian_location:  conditional, averaged, marginal, nuisance_info
///   dependent_prior:    conditional, averaged, marginal, nuisance_info
///   poisson_door:       conditional (at phi0), averaged
///   gaussian_conjugate: conditional, averaged, marginal, nuisance_info,
///                       f_tt, f_tp, f_pp, f_m, f11, joint (2x2)
std::map<std::string, Matrix> oracle_fims(const std::string& id, const ParamMap& params = {},
                                          double theta = 0.0);

/// n reproducible draws from pr(A | phi, theta); stream i uses derive_seed(seed, i).
std::vector<DataSample> sample_dataset(const std::string& id, const ParamMap& params, const PhiVector& phi,
                                       const ThetaVector& theta, int n, std::uint64_t seed);

}  // namespace nfim
