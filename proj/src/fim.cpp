#include "nfim/fim.hpp"

#include "estimate_util.hpp"
#include "nfim/errors.hpp"
#include "nfim/parallel.hpp"

#include <cmath>

namespace nfim {

namespace {

using detail::reduce;
using detail::require_at_least;
using detail::to_estimate;

// Per-draw conditional FIM and score mean for a block of n samples.
struct ConditionalBlock {
  Matrix outer_mean;
  Vector score_mean;
};

ConditionalBlock conditional_block(const ConditionalModel& model, const PhiVector& phi, const ThetaVector& theta,
                                   int n, std::uint64_t seed) {
  const Eigen::Index d = model.dims().theta;
  MatrixMoments outer(d, d);
  MatrixMoments score(d, 1);
  for (int k = 0; k < n; ++k) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(k));
    const DataSample a = model.sample(phi, theta, rng);
    const Vector s = model.score_theta(a, phi, theta);
    outer.add(s * s.transpose());
    score.add(s);
  }
  return {outer.mean(), score.mean().col(0)};
}

// One pass over A ~ pr(A|theta) collecting the global score and posterior moments.
struct MarginalPass {
  std::vector<Matrix> outer;          // g g^T
  std::vector<Matrix> covariance;     // cov[v | A, theta]
  std::vector<Matrix> second_moment;  // E[v v^T | A, theta]
  std::vector<Matrix> score;          // g
  bool truncated = false;
};

MarginalPass marginal_pass(const ConditionalModel& model, const NuisancePrior& prior, const ThetaVector& theta,
                           int n, const Integrator& integ, std::uint64_t seed) {
  if (integ.kind() != Integrator::Kind::grid) throw ConfigError("marginal FIM requires a grid integrator");
  const PhiRule rule = integ.rule(prior, theta);
  MarginalPass pass;
  pass.truncated = rule.truncated;
  const auto count = static_cast<std::size_t>(n);
  pass.outer.resize(count);
  pass.covariance.resize(count);
  pass.second_moment.resize(count);
  pass.score.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const PhiVector phi = prior.sample(theta, rng);
    const DataSample a = model.sample(phi, theta, rng);
    const PosteriorScoreMoments m = posterior_score_moments(model, prior, a, theta, rule);
    pass.outer[i] = m.mean * m.mean.transpose();
    pass.covariance[i] = m.covariance;
    pass.second_moment[i] = m.second_moment;
    pass.score[i] = m.mean;
  });
  return pass;
}

Matrix combined_stderr(const Matrix& a, const Matrix& b) {
  return (a.array().square() + b.array().square()).sqrt().matrix();
}

}  // namespace

MatrixEstimate conditional_fim(const ConditionalModel& model, const PhiVector& phi, const ThetaVector& theta, int n,
                               std::uint64_t seed) {
  require_at_least(n, 2, "conditional_fim: n");
  const Eigen::Index d = model.dims().theta;
  const auto count = static_cast<std::size_t>(n);
  std::vector<Matrix> outer(count);
  std::vector<Matrix> score(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const DataSample a = model.sample(phi, theta, rng);
    const Vector s = model.score_theta(a, phi, theta);
    if (!s.allFinite()) throw EvaluationError("conditional_fim: non-finite score");
    outer[i] = s * s.transpose();
    score[i] = s;
  });
  MatrixEstimate est = to_estimate(reduce(outer, d, d), BlockTag::theta);
  detail::attach_score(est, reduce(score, d, 1));
  return est;
}

MatrixEstimate averaged_conditional_fim(const ConditionalModel& model, const NuisancePrior& prior,
                                        const ThetaVector& theta, int n_phi, int n_data, std::uint64_t seed) {
  require_at_least(n_phi, 2, "averaged_conditional_fim: n_phi");
  require_at_least(n_data, 2, "averaged_conditional_fim: n_data");
  check_dims(model, prior);
  const Eigen::Index d = model.dims().theta;
  const auto count = static_cast<std::size_t>(n_phi);
  std::vector<Matrix> block_fim(count);
  std::vector<Matrix> block_score(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const PhiVector phi = prior.sample(theta, rng);
    const ConditionalBlock b = conditional_block(model, phi, theta, n_data, derive_seed(~seed, i));
    block_fim[i] = b.outer_mean;
    block_score[i] = b.score_mean;
  });
  MatrixEstimate est = to_estimate(reduce(block_fim, d, d), BlockTag::theta);
  est.n_samples = static_cast<std::int64_t>(n_phi) * n_data;
  detail::attach_score(est, reduce(block_score, d, 1));
  return est;
}

MatrixEstimate marginal_fim(const ConditionalModel& model, const NuisancePrior& prior, const ThetaVector& theta,
                            int n, const Integrator& integ, std::uint64_t seed) {
  require_at_least(n, 2, "marginal_fim: n");
  check_dims(model, prior);
  const Eigen::Index d = model.dims().theta;
  const MarginalPass pass = marginal_pass(model, prior, theta, n, integ, seed);
  MatrixEstimate est = to_estimate(reduce(pass.outer, d, d), BlockTag::theta);
  detail::attach_score(est, reduce(pass.score, d, 1));
  return est;
}

MatrixEstimate nuisance_info_fim(const NuisancePrior& prior, const ThetaVector& theta, int n, std::uint64_t seed) {
  require_at_least(n, 2, "nuisance_info_fim: n");
  const Eigen::Index d = prior.theta_dim();
  const auto count = static_cast<std::size_t>(n);
  std::vector<Matrix> outer(count);
  std::vector<Matrix> score(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const PhiVector phi = prior.sample(theta, rng);
    const Vector s = prior.score_theta(phi, theta);
    outer[i] = s * s.transpose();
    score[i] = s;
  });
  MatrixEstimate est = to_estimate(reduce(outer, d, d), BlockTag::theta);
  detail::attach_score(est, reduce(score, d, 1));
  return est;
}

void VerifyConfig::validate() const {
  require_at_least(n_data, 2, "n_data");
  require_at_least(n_phi, 2, "n_phi");
  require_at_least(n_inner, 2, "n_inner");
  require_at_least(n_nuisance, 2, "n_nuisance");
  if (integrator.kind() != Integrator::Kind::grid) throw ConfigError("verify_inequality requires a grid integrator");
  if (!(sigma_mult > 0.0)) throw ConfigError("sigma_mult must be > 0");
}

InequalityReport verify_inequality(const ConditionalModel& model, const NuisancePrior& prior,
                                   const ThetaVector& theta, const VerifyConfig& config) {
  config.validate();
  check_dims(model, prior);
  const Eigen::Index d = model.dims().theta;

  InequalityReport r;
  const MarginalPass pass =
      marginal_pass(model, prior, theta, config.n_data, config.integrator, derive_seed(config.seed, 1));
  r.truncated = pass.truncated;
  r.lhs = to_estimate(reduce(pass.outer, d, d), BlockTag::theta);
  detail::attach_score(r.lhs, reduce(pass.score, d, 1));
  r.direct_gap = to_estimate(reduce(pass.covariance, d, d), BlockTag::theta);
  // lhs + direct_gap per sample, so its stderr accounts for their correlation.
  const MatrixMoments posterior_total = reduce(pass.second_moment, d, d);

  r.averaged = averaged_conditional_fim(model, prior, theta, config.n_phi, config.n_inner, derive_seed(config.seed, 2));
  r.nuisance_info = nuisance_info_fim(prior, theta, config.n_nuisance, derive_seed(config.seed, 3));
  r.rhs = add_independent(r.averaged, r.nuisance_info);
  r.gap = subtract_independent(r.rhs, r.lhs);

  r.min_gap_eigenvalue = min_eigenvalue(r.gap.mean.entries());
  r.gap_tolerance = config.sigma_mult * r.gap.max_stderr();
  r.holds = r.min_gap_eigenvalue >= -r.gap_tolerance;

  r.identity_residual = (r.gap.mean.entries() - r.direct_gap.mean.entries()).cwiseAbs().maxCoeff();
  r.identity_tolerance = config.sigma_mult * combined_stderr(r.rhs.std_error, posterior_total.std_error()).maxCoeff();
  r.identity_holds = r.identity_residual <= r.identity_tolerance;
  return r;
}

Matrix crb(const MatrixEstimate& m) {
  const Matrix& f = m.mean.entries();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (f + f.transpose()));
  if (solver.info() != Eigen::Success) throw EvaluationError("crb: eigensolver failed");
  const Vector ev = solver.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) throw SingularFimError("FIM is singular or too ill-conditioned to invert");
  const Matrix& v = solver.eigenvectors();
  Matrix inv = v * ev.cwiseInverse().asDiagonal() * v.transpose();
  return 0.5 * (inv + inv.transpose());
}

Matrix crb_std_error(const MatrixEstimate& m) {
  // d(F^-1) = -F^-1 dF F^-1, entries of dF treated as independent.
  const Matrix p = crb(m);
  const Eigen::Index n = p.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double var = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
          const double c = p(i, k) * p(l, j) * m.std_error(k, l);
          var += c * c;
        }
      }
      out(i, j) = std::sqrt(var);
    }
  }
  return out;
}

CrbComparison compare_crb(const MatrixEstimate& marginal, const MatrixEstimate& rhs, double sigma_mult) {
  CrbComparison c;
  c.crb_marginal = crb(marginal);
  c.crb_bound = crb(rhs);
  c.tolerance = sigma_mult * combined_stderr(crb_std_error(marginal), crb_std_error(rhs)).maxCoeff();
  c.ordering = psd_check(Matrix(c.crb_marginal - c.crb_bound), c.tolerance);
  c.holds = c.ordering.is_psd;
  return c;
}

}  // namespace nfim
