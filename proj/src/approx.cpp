#include "nfim/approx.hpp"

#include "estimate_util.hpp"
#include "nfim/derivatives.hpp"
#include "nfim/errors.hpp"
#include "nfim/fim.hpp"
#include "nfim/linalg.hpp"
#include "nfim/parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace nfim {

namespace {

constexpr double kMinDensity = 1e-300;

// grad_theta of L_phi pr by central differences in theta.
Vector grad_theta_l_phi(const ConditionalModel& model, const NuisanceCovariance& k, const DataSample& a,
                        const PhiVector& phi, const ThetaVector& theta, const ApproxConfig& config) {
  Vector g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = scaled_step(config.h_theta, theta[i]);
    const double up = l_phi_apply(model, k, a, phi, theta.shifted(i, h), config.h_phi);
    const double down = l_phi_apply(model, k, a, phi, theta.shifted(i, -h), config.h_phi);
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double density(const ConditionalModel& model, const DataSample& a, const PhiVector& phi, const ThetaVector& theta) {
  return std::exp(model.log_density(a, phi, theta));
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_preconditions(const NuisancePrior& prior, const NuisanceCovariance& k, const PhiVector& phi_nominal,
                         const ThetaVector& theta) {
  if (prior.dim() != k.dim() || phi_nominal.size() != k.dim()) {
    throw DimensionError("approx_fim: covariance, prior and nominal phi disagree on d_phi");
  }
  const Vector mean_gap = prior.mean(theta).vec() - phi_nominal.vec();
  if (mean_gap.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, phi_nominal.vec().cwiseAbs().maxCoeff())) {
    throw ConfigError("approx_fim: the prior mean must equal the nominal phi");
  }
  const Matrix cov_gap = prior.covariance(theta) - k.k_phi();
  if (cov_gap.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, k.k_phi().cwiseAbs().maxCoeff())) {
    throw ConfigError("approx_fim: k must equal the prior covariance");
  }
}

// sum_j w_j pr_j s_j s_j^T over a data rule; nodes of zero probability are skipped.
Matrix quadrature_conditional_fim(const ConditionalModel& model, const DataRule& rule, const PhiVector& phi,
                                  const ThetaVector& theta) {
  const Eigen::Index d = model.dims().theta;
  std::vector<Matrix> terms(rule.nodes.size());
  parallel_for(rule.nodes.size(), [&](std::size_t j) {
    const double p = rule.weights[j] * density(model, rule.nodes[j], phi, theta);
    if (p == 0.0) {
      terms[j] = Matrix::Zero(d, d);
      return;
    }
    const Vector s = model.score_theta(rule.nodes[j], phi, theta);
    terms[j] = p * (s * s.transpose());
  });
  Matrix sum = Matrix::Zero(d, d);
  for (const Matrix& t : terms) sum += t;
  return symmetrized(sum);
}

// Double quadrature: phi grid outside, a data rule adapted to each phi node inside.
std::optional<MatrixEstimate> quadrature_marginal_fim(const ConditionalModel& model, const NuisancePrior& prior,
                                                      const ThetaVector& theta, const ApproxConfig& config) {
  if (prior.dim() != 1) return std::nullopt;
  const PhiRule rule = Integrator::grid(config.exact_phi_nodes).rule(prior, theta);
  struct Term {
    std::size_t phi_index;
    double weight;  // outer weight times data-rule weight
  };
  std::vector<DataRule> inner(rule.nodes.size());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.log_weights[i] == -std::numeric_limits<double>::infinity()) continue;
    auto r = model.data_rule(rule.nodes[i], theta, config.max_data_nodes);
    if (!r) return std::nullopt;
    inner[i] = std::move(*r);
    for (std::size_t j = 0; j < inner[i].nodes.size(); ++j) pairs.emplace_back(i, j);
  }

  const Eigen::Index d = model.dims().theta;
  std::vector<Matrix> outer(pairs.size());
  std::vector<Vector> score(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const DataSample& a = inner[i].nodes[j];
    const double w = std::exp(rule.log_weights[i]) * inner[i].weights[j] * density(model, a, rule.nodes[i], theta);
    if (w == 0.0) {
      outer[p] = Matrix::Zero(d, d);
      score[p] = Vector::Zero(d);
      return;
    }
    const Vector g = posterior_score_moments(model, prior, a, theta, rule).mean;
    outer[p] = w * (g * g.transpose());
    score[p] = w * g;
  });
  Matrix sum = Matrix::Zero(d, d);
  Vector score_sum = Vector::Zero(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    sum += outer[p];
    score_sum += score[p];
  }
  MatrixEstimate est;
  est.mean = FisherMatrix(symmetrized(sum), BlockTag::theta);
  est.std_error = Matrix::Zero(d, d);
  est.n_samples = static_cast<std::int64_t>(pairs.size());
  est.score_mean_diagnostic = score_sum;
  est.score_mean_stderr = Vector::Zero(d);
  return est;
}

}  // namespace

NuisanceCovariance::NuisanceCovariance(Matrix k) : k_(std::move(k)) {
  if (k_.rows() != k_.cols()) throw DimensionError("nuisance covariance must be square");
  if (!is_symmetric(k_)) throw SymmetryError("nuisance covariance must be symmetric");
  if (k_.size() > 0 && !psd_check(k_, default_psd_tolerance(k_)).is_psd) {
    throw EvaluationError("nuisance covariance must be positive semidefinite");
  }
}

double l_phi_apply(const ConditionalModel& model, const NuisanceCovariance& k, const DataSample& a,
                   const PhiVector& phi, const ThetaVector& theta, double h_phi) {
  if (k.dim() != model.dims().phi || phi.size() != k.dim()) throw DimensionError("l_phi_apply: k must be d_phi x d_phi");
  if (k.is_zero()) return 0.0;
  Matrix h;
  if (auto analytic = model.hessian_phi_density(a, phi, theta)) {
    h = std::move(*analytic);
  } else {
    h = fd_hessian([&](const Vector& x) { return density(model, a, PhiVector(x), theta); }, phi.vec(), h_phi);
  }
  if (!h.allFinite()) throw EvaluationError("l_phi_apply: non-finite density Hessian");
  return 0.5 * k.k_phi().cwiseProduct(h.transpose()).sum();
}

double expanded_log_density(const ConditionalModel& model, const NuisanceCovariance& k, const DataSample& a,
                            const PhiVector& phi, const ThetaVector& theta, double h_phi) {
  const double lp = model.log_density(a, phi, theta);
  const double p = std::exp(lp);
  if (!(p >= kMinDensity)) throw ExpansionUndefinedError("expanded_log_density: density below 1e-300");
  return lp + l_phi_apply(model, k, a, phi, theta, h_phi) / p;
}

void ApproxConfig::validate() const {
  detail::require_at_least(n_samples, 2, "approx n_samples");
  detail::require_at_least(exact_phi_nodes, 1, "approx exact_phi_nodes");
  detail::require_at_least(exact_n_data, 2, "approx exact_n_data");
  if (!(h_theta > 0.0) || !(h_phi > 0.0)) throw ConfigError("finite-difference steps must be > 0");
  if (max_data_nodes == 0) throw ConfigError("max_data_nodes must be > 0");
}

std::string to_string(ApproxConfig::Mode mode) {
  switch (mode) {
    case ApproxConfig::Mode::automatic: return "auto";
    case ApproxConfig::Mode::quadrature: return "quadrature";
    case ApproxConfig::Mode::monte_carlo: return "monte_carlo";
  }
  return "auto";
}

ApproxConfig::Mode approx_mode_from_string(const std::string& s) {
  if (s == "auto") return ApproxConfig::Mode::automatic;
  if (s == "quadrature") return ApproxConfig::Mode::quadrature;
  if (s == "monte_carlo") return ApproxConfig::Mode::monte_carlo;
  throw ConfigError("unknown correction mode '" + s + "' (auto, quadrature, monte_carlo)");
}

CorrectionTerms correction_terms(const ConditionalModel& model, const NuisanceCovariance& k, const PhiVector& phi,
                                 const ThetaVector& theta, const ApproxConfig& config) {
  config.validate();
  const Eigen::Index d = model.dims().theta;
  CorrectionTerms out;
  out.f1_std_error = Matrix::Zero(d, d);
  out.f3_std_error = Matrix::Zero(d, d);

  std::optional<DataRule> rule;
  if (config.mode != ApproxConfig::Mode::monte_carlo) rule = model.data_rule(phi, theta, config.max_data_nodes);
  if (config.mode == ApproxConfig::Mode::quadrature && !rule) {
    throw ConfigError("correction_terms: the model has no data rule within max_data_nodes");
  }

  if (rule) {
    out.quadrature = true;
    std::vector<Matrix> f1(rule->nodes.size());
    std::vector<Matrix> f3(rule->nodes.size());
    parallel_for(rule->nodes.size(), [&](std::size_t j) {
      const DataSample& a = rule->nodes[j];
      const double w = rule->weights[j];
      const Vector s = model.score_theta(a, phi, theta);
      f1[j] = w * (s * grad_theta_l_phi(model, k, a, phi, theta, config).transpose());
      f3[j] = (w * l_phi_apply(model, k, a, phi, theta, config.h_phi)) * (s * s.transpose());
    });
    out.f1 = Matrix::Zero(d, d);
    out.f3 = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < f1.size(); ++j) {
      out.f1 += f1[j];
      out.f3 += f3[j];
    }
    out.f3 = symmetrized(out.f3);
    return out;
  }

  const auto n = static_cast<std::size_t>(config.n_samples);
  std::vector<Matrix> f1(n);
  std::vector<Matrix> f3(n);
  const std::uint64_t seed = derive_seed(config.seed, 22);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const DataSample a = model.sample(phi, theta, rng);
    const double p = density(model, a, phi, theta);
    if (!(p >= kMinDensity)) throw ExpansionUndefinedError("correction_terms: sampled density below 1e-300");
    const Vector s = model.score_theta(a, phi, theta);
    f1[i] = s * (grad_theta_l_phi(model, k, a, phi, theta, config) / p).transpose();
    f3[i] = (l_phi_apply(model, k, a, phi, theta, config.h_phi) / p) * (s * s.transpose());
  });
  const MatrixMoments m1 = detail::reduce(f1, d, d);
  const MatrixMoments m3 = detail::reduce(f3, d, d);
  out.f1 = m1.mean();
  out.f3 = symmetrized(m3.mean());
  out.f1_std_error = m1.std_error();
  out.f3_std_error = m3.std_error();
  return out;
}

ApproxFimResult approx_fim(const ConditionalModel& model, const NuisancePrior& prior, const NuisanceCovariance& k,
                           const PhiVector& phi_nominal, const ThetaVector& theta, const ApproxConfig& config) {
  config.validate();
  check_dims(model, prior);
  check_preconditions(prior, k, phi_nominal, theta);
  const Eigen::Index d = model.dims().theta;

  ApproxFimResult r;
  r.corrections = correction_terms(model, k, phi_nominal, theta, config);
  if (r.corrections.quadrature) {
    const auto rule = model.data_rule(phi_nominal, theta, config.max_data_nodes);
    r.base = FisherMatrix(quadrature_conditional_fim(model, *rule, phi_nominal, theta), BlockTag::theta);
    r.base_std_error = Matrix::Zero(d, d);
  } else {
    const MatrixEstimate base = conditional_fim(model, phi_nominal, theta, config.n_samples, derive_seed(config.seed, 21));
    r.base = base.mean;
    r.base_std_error = base.std_error;
  }

  const Matrix& f1 = r.corrections.f1;
  r.approx = FisherMatrix(symmetrized(r.base.entries() + f1 + f1.transpose() - r.corrections.f3), BlockTag::theta,
                          /*approximation=*/true);

  if (auto exact = quadrature_marginal_fim(model, prior, theta, config)) {
    r.exact = std::move(*exact);
    r.exact_quadrature = true;
  } else {
    r.exact = marginal_fim(model, prior, theta, config.exact_n_data, Integrator::grid(config.exact_phi_nodes),
                           derive_seed(config.seed, 23));
  }
  r.error_norm = (r.approx.entries() - r.exact.mean.entries()).cwiseAbs().maxCoeff();
  return r;
}

ScalingStudy scaling_study(const ConditionalModel& model, const PriorFamily& family, const ThetaVector& theta,
                           const std::vector<double>& scales, const ApproxConfig& config) {
  if (scales.size() < 2) throw ConfigError("scaling_study needs at least two scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] >= 0.0) || !std::isfinite(scales[i])) throw ConfigError("scales must be finite and >= 0");
    if (i > 0 && !(scales[i] < scales[i - 1])) throw ConfigError("scales must be strictly descending");
  }

  ScalingStudy study;
  std::vector<double> stderrs;
  for (double s : scales) {
    const std::shared_ptr<const NuisancePrior> prior = family(s);
    const NuisanceCovariance k(symmetrized(prior->covariance(theta)));
    const ApproxFimResult r = approx_fim(model, *prior, k, prior->mean(theta), theta, config);
    ScalingRow row;
    row.scale = s;
    row.error_norm = r.error_norm;
    row.exact_max_stderr = r.exact.max_stderr();
    row.approx = r.approx.entries()(0, 0);
    row.exact = r.exact.mean.entries()(0, 0);
    study.rows.push_back(row);
  }

  study.monotone = true;
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    const ScalingRow& prev = study.rows[i - 1];
    const ScalingRow& cur = study.rows[i];
    const double slack = 3.0 * std::hypot(prev.exact_max_stderr, cur.exact_max_stderr);
    if (cur.error_norm > prev.error_norm + slack) study.monotone = false;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  for (const ScalingRow& row : study.rows) {
    if (!(row.scale > 0.0) || !(row.error_norm > 0.0)) continue;
    const double x = std::log(row.scale);
    const double y = std::log(row.error_norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  const double denom = used * sxx - sx * sx;
  study.slope = used >= 2 && denom > 0.0 ? (used * sxy - sx * sy) / denom : std::numeric_limits<double>::quiet_NaN();
  return study;
}

}  // namespace nfim
