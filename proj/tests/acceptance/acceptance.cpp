// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "nfim/approx.hpp"
#include "nfim/bayes.hpp"
#include "nfim/cli/app.hpp"
#include "nfim/derivatives.hpp"
#include "nfim/fim.hpp"
#include "nfim/linalg.hpp"
#include "nfim/parallel.hpp"
#include "nfim/random.hpp"
#include "nfim/zoo.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace nfim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(5) << v;
  return s.str();
}

/// Collects sub-check outcomes of one criterion.
class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)), start_(Clock::now()) {}

  void check(bool ok, const std::string& what) {
    ++n_checks_;
    if (!ok) failures_.push_back(what);
  }

  void time_limit(double limit_s, const std::string& what) {
    const double t = seconds_since(start_);
    check(t < limit_s, what + " runtime " + fmt(t) + " s < " + fmt(limit_s) + " s");
  }

  bool report() const {
    const bool ok = failures_.empty();
    std::cout << (ok ? "PASS " : "FAIL ") << name_ << " (" << n_checks_ << " checks, " << fmt(seconds_since(start_))
              << " s)\n";
    for (const std::string& f : failures_) std::cout << "    failed: " << f << '\n';
    std::cout.flush();
    return ok;
  }

 private:
  std::string name_;
  Clock::time_point start_;
  int n_checks_ = 0;
  std::vector<std::string> failures_;
};

// Score-mean diagnostics of every estimate produced along the way (criterion 6).
struct ScoreMeans {
  int n = 0;
  std::vector<std::string> failures;

  void add(const MatrixEstimate& e, const std::string& label) {
    for (Eigen::Index i = 0; i < e.score_mean_diagnostic.size(); ++i) {
      ++n;
      const double m = e.score_mean_diagnostic(i);
      const double se = e.score_mean_stderr(i);
      if (!(std::abs(m) <= 3.0 * se || (se == 0.0 && m == 0.0))) {
        failures.push_back(label + " score mean " + fmt(m) + " vs 3 stderr " + fmt(3.0 * se));
      }
    }
  }
};

bool within(const MatrixEstimate& e, double oracle) {
  const double err = std::abs(e.mean.entries()(0, 0) - oracle);
  return err <= 3.0 * e.std_error(0, 0) || err <= 1e-12 * std::max(1.0, std::abs(oracle));
}

std::string against(const MatrixEstimate& e, double oracle) {
  return fmt(e.mean.entries()(0, 0)) + " +- " + fmt(e.std_error(0, 0)) + " vs " + fmt(oracle);
}

const std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

void inequality_runs(Criterion& c, ScoreMeans& sm, const std::string& id, const ParamMap& params,
                     const std::vector<std::pair<std::string, double>>& oracles) {
  const ZooModel z = make_zoo(id, params);
  for (std::uint64_t seed : kSeeds) {
    VerifyConfig cfg;
    cfg.seed = seed;
    const InequalityReport r = verify_inequality(*z.model, *z.prior, ThetaVector{0.0}, cfg);
    const std::string tag = id + " seed " + std::to_string(seed) + ": ";
    for (const auto& [name, value] : oracles) {
      const MatrixEstimate& e = name == "lhs"             ? r.lhs
                                : name == "rhs"           ? r.rhs
                                : name == "averaged"      ? r.averaged
                                                          : r.nuisance_info;
      c.check(within(e, value), tag + name + " " + against(e, value));
    }
    c.check(r.holds, tag + "inequality min gap eigenvalue " + fmt(r.min_gap_eigenvalue));
    c.check(r.identity_holds && r.identity_residual < r.identity_tolerance,
            tag + "identity residual " + fmt(r.identity_residual) + " vs " + fmt(r.identity_tolerance));
    for (const auto* e : {&r.lhs, &r.averaged, &r.nuisance_info, &r.direct_gap}) sm.add(*e, tag);
  }
}

bool criterion_inequality(ScoreMeans& sm) {
  Criterion c("1 inequality and gap identity, gaussian_location");
  for (const auto& [params, lhs, rhs] :
       std::vector<std::tuple<ParamMap, double, double>>{{{{"n_obs", 1}, {"sigma", 1}, {"tau", 1}}, 0.5, 1.0},
                                                         {{{"n_obs", 4}, {"sigma", 1}, {"tau", 0.5}}, 2.0, 4.0}}) {
    const auto t0 = Clock::now();
    inequality_runs(c, sm, "gaussian_location", params, {{"lhs", lhs}, {"rhs", rhs}});
    const double t = seconds_since(t0);
    c.check(t < 60.0, "N=" + fmt(params.at("n_obs")) + " runtime " + fmt(t) + " s < 60 s");
  }
  return c.report();
}

bool criterion_dependent_prior(ScoreMeans& sm) {
  Criterion c("2 dependent-prior inequality");
  inequality_runs(c, sm, "dependent_prior", {{"a", 1}, {"sigma", 1}, {"tau", 1}},
                  {{"lhs", 0.5}, {"nuisance_info", 1.0}, {"averaged", 0.0}});
  inequality_runs(c, sm, "dependent_prior", {{"a", 2}, {"sigma", 1}, {"tau", 0.5}},
                  {{"lhs", 3.2}, {"nuisance_info", 16.0}});
  return c.report();
}

bool criterion_bayes() {
  Criterion c("3 Bayesian identities, gaussian_conjugate");
  const ZooModel z = make_zoo("gaussian_conjugate", {{"sigma", 1}, {"tau", 1}, {"s", 1}});
  BayesConfig cfg;
  cfg.n_theta = 200;
  cfg.n_phi = 200;
  cfg.n_data = 200;
  cfg.seed = 1;
  const BayesRelationsReport r = verify_bayes_relations(*z.model, *z.prior, *z.theta_prior, cfg);

  const Matrix expected{{2.0, 1.0}, {1.0, 2.0}};
  const Matrix& got = r.joint.assembled.entries();
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double se = r.joint.assembled_std_error(i, j);
      c.check(std::abs(got(i, j) - expected(i, j)) <= 3.0 * se,
              "assembled(" + std::to_string(i) + "," + std::to_string(j) + ") " + fmt(got(i, j)) + " +- " + fmt(se));
    }
  }
  for (const auto& [name, res] : r.joint.residuals) {
    for (Eigen::Index k = 0; k < res.mean.size(); ++k) {
      const double m = res.mean.reshaped()(k);
      const double se = res.std_error.reshaped()(k);
      c.check(std::abs(m) < 3.0 * se, "residual " + name + " " + fmt(m) + " vs 3 stderr " + fmt(3.0 * se));
    }
  }
  c.check(within(r.marginal.f_m, 1.5), "F_M " + against(r.marginal.f_m, 1.5));

  const MatrixEstimate ftt = r.joint.f_tt_estimate();
  const double tol = 3.0 * std::hypot(r.marginal.f_m.max_stderr(), ftt.max_stderr());
  const PsdResult ord = loewner_leq(r.marginal.f_m.mean, ftt.mean, tol);
  c.check(ord.is_psd, "loewner_leq(F_M, f_tt) min eigenvalue " + fmt(ord.min_eigenvalue));
  c.time_limit(120.0, "bayes");
  return c.report();
}

bool criterion_approx() {
  Criterion c("4 second-order approximation, gaussian_location tau=0.1");
  const ZooModel z = make_zoo("gaussian_location", {{"sigma", 1}, {"tau", 0.1}});
  const ThetaVector theta{0.0};
  ApproxConfig cfg;
  cfg.seed = 1;
  const NuisanceCovariance k(Matrix::Constant(1, 1, 0.01));
  const ApproxFimResult r = approx_fim(*z.model, *z.prior, k, PhiVector{0.0}, theta, cfg);
  c.check(r.exact_quadrature, "exact reference by quadrature");
  c.check(r.error_norm < 5e-4, "error_norm " + fmt(r.error_norm) + " < 5e-4");

  const PriorFamily family = [&z](double s) -> std::shared_ptr<const NuisancePrior> { return z.prior_at_scale(s); };
  const ScalingStudy s = scaling_study(*z.model, family, theta, {1.0, 0.5}, cfg);
  const double ratio = s.rows[0].error_norm / s.rows[1].error_norm;
  c.check(ratio >= 8.0 && ratio <= 24.0, "scaling error ratio " + fmt(ratio) + " in [8, 24]");
  c.time_limit(30.0, "approx");
  return c.report();
}

bool criterion_door(ScoreMeans& sm) {
  Criterion c("5 door phenomenon, poisson_door");
  const ZooModel z = make_zoo("poisson_door", {{"phi0", std::numbers::pi / 2}, {"spread", 0.1}});
  const ThetaVector theta{0.0};
  const PhiVector closed{std::numbers::pi / 2};

  const MatrixEstimate cond = conditional_fim(*z.model, closed, theta, 20000, 1);
  c.check((cond.mean.entries().array() == 0.0).all() && (cond.std_error.array() == 0.0).all(),
          "conditional FIM at the closed door " + fmt(cond.mean.entries()(0, 0)));

  const MatrixEstimate marg = marginal_fim(*z.model, *z.prior, theta, 20000, Integrator::grid(64), 2);
  const double lower = marg.mean.entries()(0, 0) - 3.0 * marg.std_error(0, 0);
  c.check(marg.mean.entries()(0, 0) > 0.0 && lower > 0.0,
          "marginal FIM " + fmt(marg.mean.entries()(0, 0)) + ", lower 3-sigma bound " + fmt(lower));

  const MatrixEstimate avg = averaged_conditional_fim(*z.model, *z.prior, theta, 2000, 10, 3);
  const double tol = 3.0 * std::hypot(marg.max_stderr(), avg.max_stderr());
  const PsdResult ord = loewner_leq(marg.mean, avg.mean, tol);
  c.check(ord.is_psd, "loewner_leq(marginal " + fmt(marg.mean.entries()(0, 0)) + ", averaged " +
                          fmt(avg.mean.entries()(0, 0)) + ") min eigenvalue " + fmt(ord.min_eigenvalue));
  sm.add(cond, "door conditional");
  sm.add(marg, "door marginal");
  sm.add(avg, "door averaged");
  return c.report();
}

bool criterion_hygiene(ScoreMeans& sm) {
  Criterion c("6 score and gradient hygiene");
  for (const std::string& id : zoo_ids()) {
    const ZooModel z = make_zoo(id);
    const ConditionalModel& m = *z.model;
    const NuisancePrior& pr = *z.prior;
    const ThetaPrior& tp = *z.theta_prior;
    for (std::uint64_t i = 0; i < 10; ++i) {
      Rng rng = make_rng(606, i);
      const ThetaVector th = tp.sample(rng);
      const PhiVector ph = pr.sample(th, rng);
      const DataSample a = m.sample(ph, th, rng);
      const std::string at = id + " point " + std::to_string(i) + ": ";
      const double errs[] = {
          check_gradient([&](const Vector& t) { return m.log_density(a, ph, ThetaVector(t)); },
                         [&](const Vector& t) { return m.score_theta(a, ph, ThetaVector(t)); }, th.vec()),
          check_gradient([&](const Vector& f) { return m.log_density(a, PhiVector(f), th); },
                         [&](const Vector& f) { return m.score_phi(a, PhiVector(f), th); }, ph.vec()),
          check_gradient([&](const Vector& t) { return pr.log_density(ph, ThetaVector(t)); },
                         [&](const Vector& t) { return pr.score_theta(ph, ThetaVector(t)); }, th.vec()),
          check_gradient([&](const Vector& f) { return pr.log_density(PhiVector(f), th); },
                         [&](const Vector& f) { return *pr.score_phi(PhiVector(f), th); }, ph.vec()),
          check_gradient([&](const Vector& t) { return tp.log_density(ThetaVector(t)); },
                         [&](const Vector& t) { return tp.score(ThetaVector(t)); }, th.vec())};
      const char* names[] = {"model theta", "model phi", "prior theta", "prior phi", "theta prior"};
      for (int k = 0; k < 5; ++k) c.check(errs[k] < 1e-6, at + names[k] + " gradient error " + fmt(errs[k]));
    }

    const PhiVector phi = pr.mean(ThetaVector{0.0});
    const MatrixEstimate e1 = conditional_fim(m, phi, ThetaVector{0.0}, 10000, 7);
    const MatrixEstimate e2 = conditional_fim(m, phi, ThetaVector{0.0}, 20000, 7);
    sm.add(e1, id + " conditional n=1e4");
    sm.add(e2, id + " conditional n=2e4");
    if (e1.max_stderr() > 0.0) {
      const double f = e1.max_stderr() / e2.max_stderr();
      c.check(f >= 1.25 && f <= 1.75, id + " stderr ratio on doubling n " + fmt(f));
    }
  }
  c.check(sm.n > 0, "score-mean diagnostics collected");
  for (const std::string& f : sm.failures) c.check(false, f);
  std::cout << "    (" << sm.n << " score-mean diagnostics checked)\n";
  return c.report();
}

bool criterion_determinism() {
  Criterion c("7 payload determinism across --threads");
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nfim_acceptance";
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"verify", "model.id = gaussian_location\nseed = 1\n"},
      {"verify", "model.id = dependent_prior\nmodel.a = 2\nmodel.tau = 0.5\nseed = 2\n"},
      {"bayes", "model.id = gaussian_conjugate\nseed = 1\n"},
      {"approx", "model.id = poisson_door\nseed = 3\n"},
      {"scaling", "model.id = gaussian_location\nmodel.tau = 0.1\nseed = 1\nscaling.scales = 1, 0.5\n"},
  };
  int index = 0;
  for (const auto& [study, text] : runs) {
    std::string payload[2];
    std::string csv[2];
    const char* threads[] = {"1", "4"};
    for (int t = 0; t < 2; ++t) {
      const fs::path out = dir / ("out" + std::to_string(t) + ".json");
      const fs::path csv_path = dir / ("out" + std::to_string(t) + ".csv");
      const fs::path cfg_t = dir / ("run" + std::to_string(index) + "_t" + std::to_string(t) + ".cfg");
      std::ofstream(cfg_t) << text << "output.csv = " << csv_path.string() << "\n";
      const std::string out_s = out.string(), cfg_s = cfg_t.string();
      const char* argv[] = {"nfim", study.c_str(), "--config", cfg_s.c_str(), "--out", out_s.c_str(), "--threads",
                            threads[t], "--quiet"};
      std::ostringstream sink;
      const int code = cli::run_cli(9, argv, sink, sink);
      c.check(code == cli::kExitOk || code == cli::kExitCheckFailed, study + " run exit code " + std::to_string(code));
      std::ifstream in(out);
      payload[t] = nlohmann::ordered_json::parse(in, nullptr, false)["payload"].dump();
      std::ifstream csv_in(csv_path);
      std::stringstream ss;
      ss << csv_in.rdbuf();
      csv[t] = ss.str();
    }
    ++index;
    c.check(payload[0] == payload[1] && payload[0].size() > 2, study + " payload identical across 1 and 4 threads");
    c.check(csv[0] == csv[1], study + " CSV identical across 1 and 4 threads");
  }
  set_num_threads(1);
  return c.report();
}

}  // namespace

int main() {
  ScoreMeans sm;
  bool ok = true;
  ok &= criterion_inequality(sm);
  ok &= criterion_dependent_prior(sm);
  ok &= criterion_bayes();
  ok &= criterion_approx();
  ok &= criterion_door(sm);
  ok &= criterion_hygiene(sm);
  ok &= criterion_determinism();
  std::cout << (ok ? "all acceptance criteria pass" : "some acceptance criteria fail") << '\n';
  return ok ? 0 : 1;
}
