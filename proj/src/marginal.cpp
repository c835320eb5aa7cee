#include "nfim/marginal.hpp"

#include "nfim/errors.hpp"
#include "nfim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nfim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

PhiRule tensor_grid(const NuisancePrior& prior, const ThetaVector& theta, int nodes_per_axis) {
  const Eigen::Index d = prior.dim();
  if (d > kMaxGridDims) throw ConfigError("grid integration supports at most 3 nuisance dimensions");
  if (nodes_per_axis < 1) throw ConfigError("grid needs at least one node per axis");

  const Vector mean = prior.mean(theta).vec();
  const Vector sd = prior.covariance(theta).diagonal().cwiseMax(0.0).cwiseSqrt();
  const Support support = prior.support();

  PhiRule rule;
  rule.is_grid = true;
  std::vector<AxisRule> axes(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    AxisRule& axis = axes[static_cast<std::size_t>(k)];
    if (sd(k) == 0.0) {
      axis.nodes = {mean(k)};
      axis.weights = {1.0};
      continue;
    }
    double lo = mean(k) - kTruncationSds * sd(k);
    double hi = mean(k) + kTruncationSds * sd(k);
    if (std::isinf(support.lower(k)) || std::isinf(support.upper(k))) rule.truncated = true;
    lo = std::max(lo, support.lower(k));
    hi = std::min(hi, support.upper(k));
    if (!(hi > lo)) throw ConfigError("nuisance grid window is empty");
    const Rule1D r = gauss_legendre(nodes_per_axis, lo, hi);
    axis.nodes = r.nodes;
    axis.weights = r.weights;
  }

  std::size_t total = 1;
  for (const AxisRule& a : axes) total *= a.nodes.size();
  rule.nodes.reserve(total);
  rule.log_weights.reserve(total);
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (Eigen::Index k = d - 1; k >= 0; --k) {
      const std::size_t len = axes[static_cast<std::size_t>(k)].nodes.size();
      idx[static_cast<std::size_t>(k)] = rem % len;
      rem /= len;
    }
    Vector phi(d);
    double log_w = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const AxisRule& a = axes[static_cast<std::size_t>(k)];
      phi(k) = a.nodes[idx[static_cast<std::size_t>(k)]];
      log_w += std::log(a.weights[idx[static_cast<std::size_t>(k)]]);
    }
    PhiVector node(phi);
    rule.log_weights.push_back(log_w + prior.log_density(node, theta));
    rule.nodes.push_back(std::move(node));
  }
  return rule;
}

// Log terms ln w_i + ln pr(A|phi_i,theta) and their max.
struct LogTerms {
  std::vector<double> terms;
  double max = kNegInf;
};

LogTerms log_terms(const ConditionalModel& model, const DataSample& a, const ThetaVector& theta,
                   const PhiRule& rule) {
  LogTerms out;
  out.terms.resize(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.log_weights[i];
    if (t != kNegInf) t += model.log_density(a, rule.nodes[i], theta);
    if (std::isnan(t) || t == std::numeric_limits<double>::infinity()) {
      throw EvaluationError("marginal integrand evaluated to NaN or +inf");
    }
    out.terms[i] = t;
    out.max = std::max(out.max, t);
  }
  if (out.max == kNegInf) throw DegenerateMarginalError("every marginal integrand term underflowed");
  return out;
}

void require_grid(const Integrator& integ) {
  if (integ.kind() != Integrator::Kind::grid) throw ConfigError("operation requires a grid integrator");
}

}  // namespace

Integrator Integrator::grid(int nodes_per_axis) {
  if (nodes_per_axis < 1) throw ConfigError("grid needs at least one node per axis");
  Integrator out;
  out.kind_ = Kind::grid;
  out.nodes_per_axis_ = nodes_per_axis;
  return out;
}

Integrator Integrator::fixed_grid(std::vector<PhiVector> nodes, std::vector<double> weights) {
  if (nodes.empty() || nodes.size() != weights.size()) throw ConfigError("fixed grid needs matching nodes/weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("grid weights must be finite and positive");
    total += w;
  }
  if (!std::isfinite(total)) throw ConfigError("grid weights must have a finite sum");
  Integrator out;
  out.kind_ = Kind::grid;
  out.nodes_per_axis_ = 0;
  out.fixed_nodes_ = std::move(nodes);
  out.fixed_weights_ = std::move(weights);
  return out;
}

Integrator Integrator::monte_carlo(int n_draws, std::uint64_t seed) {
  if (n_draws < 100) throw ConfigError("Monte Carlo integrator needs n_draws >= 100");
  Integrator out;
  out.kind_ = Kind::monte_carlo;
  out.n_draws_ = n_draws;
  out.seed_ = seed;
  return out;
}

namespace {

// Grid weights are rescaled to total prior mass one, so the truncated prior is
// integrated as a proper distribution.
PhiRule normalized(PhiRule rule) {
  double max = kNegInf;
  for (double lw : rule.log_weights) max = std::max(max, lw);
  if (max == kNegInf) throw ConfigError("nuisance grid carries no prior mass");
  double sum = 0.0;
  for (double lw : rule.log_weights) sum += std::exp(lw - max);
  const double log_total = max + std::log(sum);
  for (double& lw : rule.log_weights) lw -= log_total;
  return rule;
}

}  // namespace

PhiRule Integrator::rule(const NuisancePrior& prior, const ThetaVector& theta) const {
  if (kind_ == Kind::monte_carlo) {
    PhiRule rule;
    rule.is_grid = false;
    rule.nodes.reserve(static_cast<std::size_t>(n_draws_));
    for (int j = 0; j < n_draws_; ++j) {
      Rng rng = make_rng(seed_, static_cast<std::uint64_t>(j));
      rule.nodes.push_back(prior.sample(theta, rng));
    }
    rule.log_weights.assign(static_cast<std::size_t>(n_draws_), -std::log(static_cast<double>(n_draws_)));
    return rule;
  }
  if (!fixed_nodes_.empty()) {
    PhiRule rule;
    rule.is_grid = true;
    rule.nodes = fixed_nodes_;
    rule.log_weights.resize(fixed_nodes_.size());
    for (std::size_t i = 0; i < fixed_nodes_.size(); ++i) {
      if (fixed_nodes_[i].size() != prior.dim()) throw DimensionError("grid node dimension mismatch");
      rule.log_weights[i] = std::log(fixed_weights_[i]) + prior.log_density(fixed_nodes_[i], theta);
    }
    return normalized(std::move(rule));
  }
  return normalized(tensor_grid(prior, theta, nodes_per_axis_));
}

LogMarginalEstimate log_marginal_estimate(const ConditionalModel& model, const DataSample& a,
                                          const ThetaVector& theta, const PhiRule& rule) {
  const LogTerms lt = log_terms(model, a, theta, rule);
  double sum = 0.0;
  for (double t : lt.terms) sum += std::exp(t - lt.max);
  LogMarginalEstimate out;
  out.value = lt.max + std::log(sum);
  if (!rule.is_grid && lt.terms.size() > 1) {
    // Delta method: r_i = n * exp(t_i - max) are scaled importance ratios with mean `sum`.
    const double n = static_cast<double>(lt.terms.size());
    double ss = 0.0;
    for (double t : lt.terms) {
      const double d = std::exp(t - lt.max) * n - sum;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    out.std_error = sd / std::sqrt(n) / sum;
  }
  return out;
}

PosteriorWeights posterior_weights(const ConditionalModel& model, const DataSample& a, const ThetaVector& theta,
                                   const PhiRule& rule) {
  const LogTerms lt = log_terms(model, a, theta, rule);
  PosteriorWeights out;
  out.nodes = rule.nodes;
  out.weights.resize(lt.terms.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < lt.terms.size(); ++i) {
    out.weights[i] = std::exp(lt.terms[i] - lt.max);
    sum += out.weights[i];
  }
  for (double& w : out.weights) w /= sum;
  out.log_marginal = lt.max + std::log(sum);
  return out;
}

PosteriorScoreMoments posterior_score_moments(const ConditionalModel& model, const NuisancePrior& prior,
                                              const DataSample& a, const ThetaVector& theta, const PhiRule& rule) {
  const PosteriorWeights pw = posterior_weights(model, a, theta, rule);
  const Eigen::Index d = model.dims().theta;

  std::vector<Vector> v(pw.nodes.size());
  PosteriorScoreMoments out;
  out.mean = Vector::Zero(d);
  out.second_moment = Matrix::Zero(d, d);
  out.covariance = Matrix::Zero(d, d);
  out.log_marginal = pw.log_marginal;
  for (std::size_t i = 0; i < pw.nodes.size(); ++i) {
    if (pw.weights[i] == 0.0) continue;
    v[i] = model.score_theta(a, pw.nodes[i], theta) + prior.score_theta(pw.nodes[i], theta);
    if (!v[i].allFinite()) throw EvaluationError("non-finite score at a posterior node with positive weight");
    out.mean += pw.weights[i] * v[i];
    out.second_moment += pw.weights[i] * (v[i] * v[i].transpose());
  }
  for (std::size_t i = 0; i < pw.nodes.size(); ++i) {
    if (pw.weights[i] == 0.0) continue;
    const Vector c = v[i] - out.mean;
    out.covariance += pw.weights[i] * (c * c.transpose());
  }
  return out;
}

LogMarginalEstimate log_marginal_estimate(const ConditionalModel& model, const NuisancePrior& prior,
                                          const DataSample& a, const ThetaVector& theta, const Integrator& integ) {
  check_dims(model, prior);
  return log_marginal_estimate(model, a, theta, integ.rule(prior, theta));
}

double log_marginal_density(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                            const ThetaVector& theta, const Integrator& integ) {
  return log_marginal_estimate(model, prior, a, theta, integ).value;
}

PosteriorWeights posterior_weights(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                                   const ThetaVector& theta, const Integrator& integ) {
  require_grid(integ);
  check_dims(model, prior);
  return posterior_weights(model, a, theta, integ.rule(prior, theta));
}

Vector global_score(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                    const ThetaVector& theta, const Integrator& integ) {
  check_dims(model, prior);
  return posterior_score_moments(model, prior, a, theta, integ.rule(prior, theta)).mean;
}

Matrix posterior_score_variance(const ConditionalModel& model, const NuisancePrior& prior, const DataSample& a,
                                const ThetaVector& theta, const Integrator& integ) {
  require_grid(integ);
  check_dims(model, prior);
  return posterior_score_moments(model, prior, a, theta, integ.rule(prior, theta)).covariance;
}

}  // namespace nfim
