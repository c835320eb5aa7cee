#include <doctest.h>

#include "nfim/derivatives.hpp"
#include "nfim/errors.hpp"
#include "nfim/models.hpp"
#include "nfim/quadrature.hpp"
#include "nfim/zoo.hpp"

#include <cmath>
#include <numbers>

using namespace nfim;

namespace {

double oracle(const std::string& id, const ParamMap& p, const std::string& key) { return oracle_fims(id, p).at(key)(0, 0); }

struct Point {
  ThetaVector theta;
  PhiVector phi;
  DataSample a;
};

// Well-conditioned random evaluation points: theta near the prior mean, phi and
// A drawn from the model itself.
std::vector<Point> random_points(const ZooModel& z, std::uint64_t seed, int n = 10) {
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    const ThetaVector theta = z.theta_prior->sample(rng);
    const PhiVector phi = z.prior->sample(theta, rng);
    out.push_back({theta, phi, z.model->sample(phi, theta, rng)});
  }
  return out;
}

}  // namespace

TEST_CASE("every zoo score matches finite differences at 10 random points") {
  for (const std::string& id : zoo_ids()) {
    CAPTURE(id);
    const ZooModel z = make_zoo(id);
    for (const Point& p : random_points(z, 101)) {
      const ConditionalModel& m = *z.model;
      CHECK(check_gradient([&](const Vector& t) { return m.log_density(p.a, p.phi, ThetaVector(t)); },
                           [&](const Vector& t) { return m.score_theta(p.a, p.phi, ThetaVector(t)); },
                           p.theta.vec()) < 1e-6);
      CHECK(check_gradient([&](const Vector& f) { return m.log_density(p.a, PhiVector(f), p.theta); },
                           [&](const Vector& f) { return m.score_phi(p.a, PhiVector(f), p.theta); },
                           p.phi.vec()) < 1e-6);
      const NuisancePrior& pr = *z.prior;
      CHECK(check_gradient([&](const Vector& t) { return pr.log_density(p.phi, ThetaVector(t)); },
                           [&](const Vector& t) { return pr.score_theta(p.phi, ThetaVector(t)); },
                           p.theta.vec()) < 1e-6);
      CHECK(check_gradient([&](const Vector& f) { return pr.log_density(PhiVector(f), p.theta); },
                           [&](const Vector& f) { return *pr.score_phi(PhiVector(f), p.theta); },
                           p.phi.vec()) < 1e-6);
      const ThetaPrior& tp = *z.theta_prior;
      CHECK(check_gradient([&](const Vector& t) { return tp.log_density(ThetaVector(t)); },
                           [&](const Vector& t) { return tp.score(ThetaVector(t)); }, p.theta.vec()) < 1e-6);
    }
  }
}

TEST_CASE("analytic density Hessians in phi match finite differences") {
  for (const std::string& id : zoo_ids()) {
    CAPTURE(id);
    const ZooModel z = make_zoo(id);
    for (const Point& p : random_points(z, 202)) {
      const ConditionalModel& m = *z.model;
      REQUIRE(m.hessian_phi_density(p.a, p.phi, p.theta).has_value());
      CHECK(check_hessian([&](const Vector& f) { return std::exp(m.log_density(p.a, PhiVector(f), p.theta)); },
                          [&](const Vector& f) { return *m.hessian_phi_density(p.a, PhiVector(f), p.theta); },
                          p.phi.vec(), 2e-5) < 1e-5);
    }
  }
}

TEST_CASE("closed-door density Hessian matches its closed form") {
  const ZooModel z = make_zoo("poisson_door");
  const auto& door = static_cast<const PoissonDoorModel&>(*z.model);
  const ThetaVector theta{0.2};
  const PhiVector closed{std::numbers::pi / 2};
  double lambda = 0.0;
  for (std::size_t k = 0; k < door.positions().size(); ++k) lambda += door.intensity() * door.profile(k, 0.2);
  // With t(pi/2) = t'(pi/2) = 0 and t'' = 2: zero counts give -2 lambda,
  // a single count in bin k gives 2 I b_k, two or more counts give 0.
  CHECK((*door.hessian_phi_density(DataSample::from_counts(Counts::Zero(5)), closed, theta))(0, 0) ==
        doctest::Approx(-2.0 * lambda));
  Counts one = Counts::Zero(5);
  one(1) = 1;
  CHECK((*door.hessian_phi_density(DataSample::from_counts(one), closed, theta))(0, 0) ==
        doctest::Approx(2.0 * door.intensity() * door.profile(1, 0.2)));
  one(3) = 1;
  CHECK((*door.hessian_phi_density(DataSample::from_counts(one), closed, theta))(0, 0) == 0.0);
}

TEST_CASE("Poisson door probabilities normalize per bin") {
  const ZooModel z = make_zoo("poisson_door");
  const ThetaVector theta{0.3};
  for (double phi : {0.0, 0.7, 1.3}) {
    const auto& door = static_cast<const PoissonDoorModel&>(*z.model);
    const Vector mu = door.means(PhiVector{phi}, theta);
    const DataSample zero = DataSample::from_counts(Counts::Zero(5));
    const double log_zero = door.log_density(zero, PhiVector{phi}, theta);
    for (Eigen::Index k = 0; k < 5; ++k) {
      const int top = static_cast<int>(std::ceil(mu(k) + 12.0 * std::sqrt(mu(k))));
      double sum = 0.0;
      for (int n = 0; n <= top; ++n) {
        Counts g = Counts::Zero(5);
        g(k) = n;
        // Divide out the other bins' zero-count probabilities.
        sum += std::exp(door.log_density(DataSample::from_counts(g), PhiVector{phi}, theta) - log_zero - mu(k));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("data rules carry probability one") {
  const ZooModel door = make_zoo("poisson_door", {{"intensity", 2.0}});
  for (double phi : {std::numbers::pi / 2, 1.2, 0.3}) {
    const auto rule = door.model->data_rule(PhiVector{phi}, ThetaVector{0.0}, 2000000);
    REQUIRE(rule.has_value());
    double total = 0.0;
    for (std::size_t j = 0; j < rule->nodes.size(); ++j) {
      total += rule->weights[j] * std::exp(door.model->log_density(rule->nodes[j], PhiVector{phi}, ThetaVector{0.0}));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
  const ZooModel loc = make_zoo("gaussian_location", {{"n_obs", 2}});
  const auto rule = loc.model->data_rule(PhiVector{0.4}, ThetaVector{-0.2}, 20000);
  REQUIRE(rule.has_value());
  double total = 0.0;
  for (std::size_t j = 0; j < rule->nodes.size(); ++j) {
    total += rule->weights[j] * std::exp(loc.model->log_density(rule->nodes[j], PhiVector{0.4}, ThetaVector{-0.2}));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(make_zoo("poisson_door").model->data_rule(PhiVector{0.0}, ThetaVector{0.0}, 20000).has_value());
}

TEST_CASE("Gaussian densities integrate to one by 64-node quadrature") {
  const ZooModel z = make_zoo("gaussian_location", {{"sigma", 0.7}});
  const Rule1D r = gauss_legendre(64, 0.4 - 0.2 - 12 * 0.7, 0.4 - 0.2 + 12 * 0.7);
  double total = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    total += r.weights[i] * std::exp(z.model->log_density(DataSample::from_attributes(Matrix::Constant(1, 1, r.nodes[i])),
                                                           PhiVector{-0.2}, ThetaVector{0.4}));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

  const Rule1D p = gauss_legendre(64, -12.0, 12.0);
  double prior_total = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    prior_total += p.weights[i] * std::exp(z.prior->log_density(PhiVector{p.nodes[i]}, ThetaVector{0.0}));
  }
  CHECK(prior_total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("oracle values") {
  const ParamMap loc{{"n_obs", 4}, {"sigma", 1}, {"tau", 0.5}};
  CHECK(oracle("gaussian_location", loc, "conditional") == doctest::Approx(4.0));
  CHECK(oracle("gaussian_location", loc, "marginal") == doctest::Approx(2.0));
  CHECK(oracle("gaussian_location", loc, "averaged") == doctest::Approx(4.0));

  const ParamMap dep{{"a", 2}, {"sigma", 1}, {"tau", 0.5}};
  CHECK(oracle("dependent_prior", dep, "marginal") == doctest::Approx(3.2));
  CHECK(oracle("dependent_prior", dep, "nuisance_info") == doctest::Approx(16.0));
  CHECK(oracle("dependent_prior", dep, "averaged") == 0.0);

  CHECK(oracle("gaussian_conjugate", {}, "f_tt") == doctest::Approx(2.0));
  CHECK(oracle("gaussian_conjugate", {}, "f_tp") == doctest::Approx(1.0));
  CHECK(oracle("gaussian_conjugate", {}, "f_pp") == doctest::Approx(2.0));
  CHECK(oracle("gaussian_conjugate", {}, "f_m") == doctest::Approx(1.5));

  CHECK(oracle("poisson_door", {}, "conditional") == 0.0);
  CHECK(oracle("poisson_door", {}, "averaged") > 0.0);
}

TEST_CASE("zoo rejects unknown ids and parameters") {
  CHECK_THROWS_AS(make_zoo("nope"), ConfigError);
  CHECK_THROWS_AS(make_zoo("gaussian_location", {{"bogus", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_zoo("gaussian_location", {{"sigma", -1.0}}), ConfigError);
  CHECK_THROWS_AS(make_zoo("gaussian_location", {{"n_obs", 1.5}}), ConfigError);
  CHECK_THROWS_AS(oracle_fims("nope"), ConfigError);
}

TEST_CASE("theta-independent priors report an exactly zero theta score") {
  const ZooModel z = make_zoo("gaussian_location");
  CHECK(z.prior->theta_independent());
  CHECK(z.prior->score_theta(PhiVector{0.3}, ThetaVector{1.7}).isZero(0.0));
  CHECK_FALSE(make_zoo("dependent_prior").prior->theta_independent());
}

TEST_CASE("sample_dataset examples") {
  const auto closed = sample_dataset("poisson_door", {}, PhiVector{std::numbers::pi / 2}, ThetaVector{0.0}, 50, 3);
  for (const DataSample& a : closed) {
    REQUIRE(a.kind() == DataSample::Kind::counts);
    CHECK(a.counts().isZero());
  }
  const auto sharp = sample_dataset("gaussian_location", {{"sigma", 1e-8}}, PhiVector{0.25}, ThetaVector{0.5}, 50, 3);
  for (const DataSample& a : sharp) CHECK(std::abs(a.attributes()(0, 0) - 0.75) < 1e-6);

  const auto first = sample_dataset("gaussian_location", {{"n_obs", 3}}, PhiVector{0.0}, ThetaVector{0.0}, 20, 9);
  const auto second = sample_dataset("gaussian_location", {{"n_obs", 3}}, PhiVector{0.0}, ThetaVector{0.0}, 20, 9);
  CHECK(first == second);
  const auto open = sample_dataset("poisson_door", {}, PhiVector{0.0}, ThetaVector{0.0}, 5, 3);
  CHECK(open[0].counts().sum() > 0);
}

TEST_CASE("prior scaling multiplies the covariance by the squared factor") {
  const ZooModel z = make_zoo("poisson_door");
  const auto half = z.prior_at_scale(0.5);
  CHECK(half->covariance(ThetaVector{0.0})(0, 0) == doctest::Approx(0.25 * 0.01));
  CHECK(half->mean(ThetaVector{0.0})[0] == doctest::Approx(std::numbers::pi / 2));
  const auto zero = z.prior_at_scale(0.0);
  CHECK(zero->covariance(ThetaVector{0.0})(0, 0) == 0.0);
}
