#pragma once

#include "nfim/contracts.hpp"
#include "nfim/marginal.hpp"
#include "nfim/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nfim {

/// Covariance K_phi of the nuisance error around its nominal value.
class NuisanceCovariance {
 public:
  /// Throws SymmetryError if k is asymmetric, EvaluationError if it is not PSD.
  explicit NuisanceCovariance(Matrix k);

  const Matrix& k_phi() const { return k_; }
  Eigen::Index dim() const { return k_.rows(); }
  bool is_zero() const { return k_.isZero(0.0); }

 private:
  Matrix k_;
};

/// L_phi pr = 1/2 tr(K_phi H) with H the phi-Hessian of pr(A|phi,theta),
/// analytic when the model provides it, else central differences with step h_phi.
double l_phi_apply(const ConditionalModel& model, const NuisanceCovariance& k, const DataSample& a,
                   const PhiVector& phi, const ThetaVector& theta, double h_phi = 1e-4);

/// ln pr(A|phi,theta) + L_phi pr / pr. Throws ExpansionUndefinedError when pr < 1e-300.
double expanded_log_density(const ConditionalModel& model, const NuisanceCovariance& k, const DataSample& a,
                            const PhiVector& phi, const ThetaVector& theta, double h_phi = 1e-4);

struct ApproxConfig {
  enum class Mode { automatic, quadrature, monte_carlo };

  Mode mode = Mode::automatic;  ///< automatic: quadrature whenever the model has a data rule
  int n_samples = 20000;        ///< Monte Carlo draws of A for the corrections and base
  double h_theta = 1e-4;
  double h_phi = 1e-4;
  std::size_t max_data_nodes = 20000;  ///< largest data rule accepted for quadrature
  int exact_phi_nodes = 64;            ///< Gauss-Legendre nodes in phi for the exact reference
  int exact_n_data = 20000;            ///< marginal_fim draws when the exact reference falls back to MC
  std::uint64_t seed = 1;

  void validate() const;
};

std::string to_string(ApproxConfig::Mode mode);
ApproxConfig::Mode approx_mode_from_string(const std::string& s);

struct CorrectionTerms {
  Matrix f1;  ///< F_2 is f1^T
  Matrix f3;
  Matrix f1_std_error;  ///< zero for quadrature
  Matrix f3_std_error;
  bool quadrature = false;
};

/// f1 = integral of s (grad_theta L_phi pr)^T, f3 = integral of s s^T L_phi pr,
/// over the model's data rule or as expectations over A ~ pr(.|phi,theta).
/// Monte Carlo only sees data the nominal model can produce, so it misses
/// contributions from outcomes that are impossible at phi (the closed door).
CorrectionTerms correction_terms(const ConditionalModel& model, const NuisanceCovariance& k, const PhiVector& phi,
                                 const ThetaVector& theta, const ApproxConfig& config);

struct ApproxFimResult {
  FisherMatrix base;         ///< F(phi_nominal, theta)
  Matrix base_std_error;     ///< zero when base came from quadrature
  CorrectionTerms corrections;
  FisherMatrix approx;       ///< base + f1 + f1^T - f3, tagged as an approximation
  MatrixEstimate exact;      ///< marginal FIM reference
  bool exact_quadrature = false;
  double error_norm = 0.0;   ///< max |approx - exact.mean|
};

/// The second-order approximation to the marginal FIM at theta. The prior must
/// have mean phi_nominal and covariance k at theta.
ApproxFimResult approx_fim(const ConditionalModel& model, const NuisancePrior& prior, const NuisanceCovariance& k,
                           const PhiVector& phi_nominal, const ThetaVector& theta, const ApproxConfig& config);

/// Prior family indexed by a scale s with covariance s^2 K(1).
using PriorFamily = std::function<std::shared_ptr<const NuisancePrior>(double)>;

struct ScalingRow {
  double scale = 0.0;
  double error_norm = 0.0;
  double exact_max_stderr = 0.0;
  double approx = 0.0;  ///< approx(0, 0)
  double exact = 0.0;   ///< exact.mean(0, 0)
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  double slope = 0.0;       ///< least-squares slope of ln error against ln scale (NaN if < 2 usable rows)
  bool monotone = false;    ///< error never grows down the ladder beyond 3 stderr
};

/// Runs approx_fim at each scale (strictly descending, at least two, all >= 0).
ScalingStudy scaling_study(const ConditionalModel& model, const PriorFamily& family, const ThetaVector& theta,
                           const std::vector<double>& scales, const ApproxConfig& config);

}  // namespace nfim
