#include "nfim/bayes.hpp"

#include "estimate_util.hpp"
#include "nfim/derivatives.hpp"
#include "nfim/errors.hpp"
#include "nfim/parallel.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace nfim {

namespace {

using detail::require_at_least;
using detail::to_estimate;

BlockEstimate to_block(const MatrixMoments& m) { return BlockEstimate{m.mean(), m.std_error()}; }

// Joint-FIM terms accumulated per theta draw; index order matches kJointTerms.
constexpr std::array<const char*, 7> kComponentNames = {"f11_data",     "f11_nuisance", "f11_prior",
                                                        "f22_data",     "f22_nuisance", "f12_data",
                                                        "f12_nuisance"};

struct ThetaGroup {
  Matrix joint;                    // sum of [s_t; s_p][s_t; s_p]^T
  std::array<Matrix, 7> component; // sums of the decomposition terms
};

double worst_ratio(const BlockEstimate& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < b.mean.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.mean.cols(); ++j) {
      const double r = std::abs(b.mean(i, j));
      const double se = b.std_error(i, j);
      if (r == 0.0) continue;
      worst = std::max(worst, se > 0.0 ? r / se : std::numeric_limits<double>::infinity());
    }
  }
  return worst;
}

}  // namespace

Vector prior_score_phi(const NuisancePrior& prior, const PhiVector& phi, const ThetaVector& theta) {
  if (auto s = prior.score_phi(phi, theta)) return *s;
  return fd_gradient([&](const Vector& x) { return prior.log_density(PhiVector(x), theta); }, phi.vec());
}

PosteriorScores posterior_scores(const ConditionalModel& model, const NuisancePrior& prior,
                                 const ThetaPrior& theta_prior, const DataSample& a, const ThetaVector& theta,
                                 const PhiVector& phi) {
  check_dims(model, prior, theta_prior);
  PosteriorScores s;
  s.theta = model.score_theta(a, phi, theta) + prior.score_theta(phi, theta) + theta_prior.score(theta);
  s.phi = model.score_phi(a, phi, theta) + prior_score_phi(prior, phi, theta);
  if (!s.theta.allFinite() || !s.phi.allFinite()) throw EvaluationError("posterior score is not finite");
  return s;
}

void BayesConfig::validate() const {
  require_at_least(n_theta, 2, "n_theta");
  require_at_least(n_phi, 2, "n_phi");
  require_at_least(n_data, 2, "n_data");
  if (integrator.kind() != Integrator::Kind::grid) throw ConfigError("Bayesian FIMs require a grid integrator");
  if (!(sigma_mult > 0.0)) throw ConfigError("sigma_mult must be > 0");
}

MatrixEstimate JointBayesFim::f_tt_estimate() const {
  const Eigen::Index dt = f_tt.dim();
  MatrixEstimate e;
  e.mean = f_tt;
  e.std_error = assembled_std_error.topLeftCorner(dt, dt);
  e.n_samples = n_leaves;
  return e;
}

JointBayesFim joint_bayes_fim(const ConditionalModel& model, const NuisancePrior& prior,
                              const ThetaPrior& theta_prior, const BayesConfig& config) {
  config.validate();
  check_dims(model, prior, theta_prior);
  const Eigen::Index dt = model.dims().theta;
  const Eigen::Index dp = model.dims().phi;
  const Eigen::Index dj = dt + dp;
  const auto n_theta = static_cast<std::size_t>(config.n_theta);
  const double leaves_per_group = static_cast<double>(config.n_phi) * config.n_data;

  std::vector<ThetaGroup> groups(n_theta);
  parallel_for(n_theta, [&](std::size_t i) {
    Rng theta_rng = make_rng(config.seed, i);
    const ThetaVector theta = theta_prior.sample(theta_rng);
    const Vector prior_t = theta_prior.score(theta);

    ThetaGroup g;
    g.joint = Matrix::Zero(dj, dj);
    const std::array<std::pair<Eigen::Index, Eigen::Index>, 7> shapes = {
        {{dt, dt}, {dt, dt}, {dt, dt}, {dp, dp}, {dp, dp}, {dt, dp}, {dt, dp}}};
    for (std::size_t c = 0; c < shapes.size(); ++c) g.component[c] = Matrix::Zero(shapes[c].first, shapes[c].second);

    const std::uint64_t phi_seed = derive_seed(~config.seed, i);
    Vector s(dj);
    for (int j = 0; j < config.n_phi; ++j) {
      Rng phi_rng = make_rng(phi_seed, static_cast<std::uint64_t>(j));
      const PhiVector phi = prior.sample(theta, phi_rng);
      const Vector nuis_t = prior.score_theta(phi, theta);
      const Vector nuis_p = prior_score_phi(prior, phi, theta);
      const std::uint64_t data_seed = derive_seed(phi_seed, static_cast<std::uint64_t>(j) + (1ULL << 40));
      for (int k = 0; k < config.n_data; ++k) {
        Rng data_rng = make_rng(data_seed, static_cast<std::uint64_t>(k));
        const DataSample a = model.sample(phi, theta, data_rng);
        const Vector data_t = model.score_theta(a, phi, theta);
        const Vector data_p = model.score_phi(a, phi, theta);
        s.head(dt) = data_t + nuis_t + prior_t;
        s.tail(dp) = data_p + nuis_p;
        g.joint.noalias() += s * s.transpose();
        g.component[0].noalias() += data_t * data_t.transpose();
        g.component[1].noalias() += nuis_t * nuis_t.transpose();
        g.component[2].noalias() += prior_t * prior_t.transpose();
        g.component[3].noalias() += data_p * data_p.transpose();
        g.component[4].noalias() += nuis_p * nuis_p.transpose();
        g.component[5].noalias() += data_t * data_p.transpose();
        g.component[6].noalias() += nuis_t * nuis_p.transpose();
      }
    }
    g.joint /= leaves_per_group;
    for (Matrix& m : g.component) m /= leaves_per_group;
    groups[i] = std::move(g);
  });

  MatrixMoments joint(dj, dj);
  std::array<MatrixMoments, 7> comps = {MatrixMoments(dt, dt), MatrixMoments(dt, dt), MatrixMoments(dt, dt),
                                        MatrixMoments(dp, dp), MatrixMoments(dp, dp), MatrixMoments(dt, dp),
                                        MatrixMoments(dt, dp)};
  MatrixMoments res_tt(dt, dt);
  MatrixMoments res_pp(dp, dp);
  MatrixMoments res_tp(dt, dp);
  for (const ThetaGroup& g : groups) {
    joint.add(g.joint);
    for (std::size_t c = 0; c < comps.size(); ++c) comps[c].add(g.component[c]);
    res_tt.add(g.joint.topLeftCorner(dt, dt) - g.component[0] - g.component[1] - g.component[2]);
    res_pp.add(g.joint.bottomRightCorner(dp, dp) - g.component[3] - g.component[4]);
    res_tp.add(g.joint.topRightCorner(dt, dp) - g.component[5] - g.component[6]);
  }

  JointBayesFim out;
  const Matrix& jm = joint.mean();
  out.f_tt = FisherMatrix(jm.topLeftCorner(dt, dt), BlockTag::theta);
  out.f_pp = FisherMatrix(jm.bottomRightCorner(dp, dp), BlockTag::phi);
  out.f_tp = jm.topRightCorner(dt, dp);
  Matrix assembled(dj, dj);
  assembled.topLeftCorner(dt, dt) = out.f_tt.entries();
  assembled.topRightCorner(dt, dp) = out.f_tp;
  assembled.bottomLeftCorner(dp, dt) = out.f_tp.transpose();
  assembled.bottomRightCorner(dp, dp) = out.f_pp.entries();
  out.assembled = FisherMatrix(assembled, BlockTag::joint);
  out.assembled_std_error = joint.std_error();
  for (std::size_t c = 0; c < comps.size(); ++c) out.components[kComponentNames[c]] = to_block(comps[c]);
  out.residuals["f_tt"] = to_block(res_tt);
  out.residuals["f_pp"] = to_block(res_pp);
  out.residuals["f_tp"] = to_block(res_tp);
  out.n_theta = config.n_theta;
  out.n_leaves = static_cast<std::int64_t>(config.n_theta) * config.n_phi * config.n_data;
  return out;
}

MarginalBayesFim marginal_bayes_decomposition(const ConditionalModel& model, const NuisancePrior& prior,
                                              const ThetaPrior& theta_prior, const BayesConfig& config) {
  config.validate();
  check_dims(model, prior, theta_prior);
  const Eigen::Index dt = model.dims().theta;
  const auto n_theta = static_cast<std::size_t>(config.n_theta);

  struct Group {
    Matrix total, marginal, prior_info;
  };
  std::vector<Group> groups(n_theta);
  parallel_for(n_theta, [&](std::size_t i) {
    Rng theta_rng = make_rng(config.seed, i);
    const ThetaVector theta = theta_prior.sample(theta_rng);
    const Vector t = theta_prior.score(theta);
    const PhiRule rule = config.integrator.rule(prior, theta);
    const std::uint64_t data_seed = derive_seed(~config.seed, i);

    Group g{Matrix::Zero(dt, dt), Matrix::Zero(dt, dt), Matrix::Zero(dt, dt)};
    for (int k = 0; k < config.n_data; ++k) {
      Rng rng = make_rng(data_seed, static_cast<std::uint64_t>(k));
      const PhiVector phi = prior.sample(theta, rng);
      const DataSample a = model.sample(phi, theta, rng);
      const Vector score = posterior_score_moments(model, prior, a, theta, rule).mean;
      const Vector total = score + t;
      g.total.noalias() += total * total.transpose();
      g.marginal.noalias() += score * score.transpose();
      g.prior_info.noalias() += t * t.transpose();
    }
    g.total /= config.n_data;
    g.marginal /= config.n_data;
    g.prior_info /= config.n_data;
    groups[i] = std::move(g);
  });

  MatrixMoments total(dt, dt);
  MatrixMoments marginal(dt, dt);
  MatrixMoments prior_info(dt, dt);
  MatrixMoments residual(dt, dt);
  for (const Group& g : groups) {
    total.add(g.total);
    marginal.add(g.marginal);
    prior_info.add(g.prior_info);
    residual.add(g.total - g.marginal - g.prior_info);
  }
  MarginalBayesFim out;
  out.f_m = to_estimate(total, BlockTag::theta);
  out.average_marginal_fim = to_estimate(marginal, BlockTag::theta);
  out.prior_info = to_estimate(prior_info, BlockTag::theta);
  const std::int64_t n_leaves = static_cast<std::int64_t>(config.n_theta) * config.n_data;
  out.f_m.n_samples = out.average_marginal_fim.n_samples = out.prior_info.n_samples = n_leaves;
  out.identity_residual = to_block(residual);
  return out;
}

MatrixEstimate marginal_bayes_fim(const ConditionalModel& model, const NuisancePrior& prior,
                                  const ThetaPrior& theta_prior, const BayesConfig& config) {
  return marginal_bayes_decomposition(model, prior, theta_prior, config).f_m;
}

BayesRelationsReport verify_bayes_relations(const ConditionalModel& model, const NuisancePrior& prior,
                                            const ThetaPrior& theta_prior, const BayesConfig& config) {
  config.validate();
  const Eigen::Index dt = model.dims().theta;
  const Eigen::Index dp = model.dims().phi;

  BayesConfig joint_cfg = config;
  joint_cfg.seed = derive_seed(config.seed, 11);
  BayesConfig marginal_cfg = config;
  marginal_cfg.seed = derive_seed(config.seed, 12);

  BayesRelationsReport r;
  r.joint = joint_bayes_fim(model, prior, theta_prior, joint_cfg);
  r.marginal = marginal_bayes_decomposition(model, prior, theta_prior, marginal_cfg);

  r.identity_residual = r.marginal.identity_residual.max_abs_mean();
  r.identity_tolerance = config.sigma_mult * r.marginal.identity_residual.max_stderr();
  r.identity_holds = r.identity_residual <= r.identity_tolerance;

  const MatrixEstimate f_tt = r.joint.f_tt_estimate();
  r.ordering_tolerance =
      config.sigma_mult *
      (r.marginal.f_m.std_error.array().square() + f_tt.std_error.array().square()).sqrt().maxCoeff();
  r.ordering = loewner_leq(r.marginal.f_m.mean, r.joint.f_tt, r.ordering_tolerance);

  r.decomposition_residual = 0.0;
  for (const auto& [name, block] : r.joint.residuals) {
    r.decomposition_residual = std::max(r.decomposition_residual, worst_ratio(block));
  }
  r.decomposition_holds = r.decomposition_residual <= config.sigma_mult;

  r.delta_theta = config.delta_theta.size() == 0 ? Vector::Ones(dt) : config.delta_theta;
  if (r.delta_theta.size() != dt) throw DimensionError("delta_theta must have length d_theta");
  Vector embedded = Vector::Zero(dt + dp);
  embedded.head(dt) = r.delta_theta;
  r.quad_marginal = r.delta_theta.dot(r.marginal.f_m.mean.entries() * r.delta_theta);
  r.quad_joint = embedded.dot(r.joint.assembled.entries() * embedded);
  const Matrix outer = r.delta_theta * r.delta_theta.transpose();
  const double quad_var = (outer.array().square() * (r.marginal.f_m.std_error.array().square() +
                                                     f_tt.std_error.array().square()))
                              .sum();
  r.quad_tolerance = config.sigma_mult * std::sqrt(quad_var);
  r.quad_holds = r.quad_marginal <= r.quad_joint + r.quad_tolerance;
  return r;
}

}  // namespace nfim
