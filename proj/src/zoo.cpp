#include "nfim/zoo.hpp"

#include "nfim/errors.hpp"

#include <cmath>
#include <numbers>

namespace nfim {

namespace {

ParamMap defaults_for(const std::string& id) {
  if (id == "gaussian_location") return {{"n_obs", 1}, {"sigma", 1}, {"tau", 1}, {"theta_sd", 1}};
  if (id == "dependent_prior") return {{"a", 1}, {"sigma", 1}, {"tau", 1}, {"theta_sd", 1}};
  if (id == "poisson_door") {
    return {{"intensity", 100}, {"n_detectors", 5}, {"x_min", -2},           {"x_max", 2},
            {"width", 1},       {"phi0", std::numbers::pi / 2}, {"spread", 0.1}, {"theta_sd", 1}};
  }
  if (id == "gaussian_conjugate") return {{"sigma", 1}, {"tau", 1}, {"s", 1}};
  throw ConfigError("unknown model id '" + id + "'");
}

ParamMap resolve(const std::string& id, const ParamMap& params) {
  ParamMap out = defaults_for(id);
  for (const auto& [key, value] : params) {
    auto it = out.find(key);
    if (it == out.end()) throw ConfigError("model '" + id + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw ConfigError("parameter '" + key + "' must be finite");
    it->second = value;
  }
  return out;
}

void require_positive(const ParamMap& p, const std::string& key) {
  if (!(p.at(key) > 0.0)) throw ConfigError("parameter '" + key + "' must be > 0");
}

void require_nonnegative(const ParamMap& p, const std::string& key) {
  if (!(p.at(key) >= 0.0)) throw ConfigError("parameter '" + key + "' must be >= 0");
}

int require_count(const ParamMap& p, const std::string& key) {
  const double v = p.at(key);
  if (v < 1.0 || v != std::floor(v)) throw ConfigError("parameter '" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

std::shared_ptr<const ThetaPrior> theta_prior_with_sd(double sd) {
  return std::make_shared<GaussianThetaPrior>(Vector::Zero(1), Vector::Constant(1, sd));
}

}  // namespace

std::shared_ptr<const GaussianNuisancePrior> ZooModel::prior_at_scale(double scale) const {
  return std::make_shared<GaussianNuisancePrior>(prior->scaled(scale));
}

std::vector<std::string> zoo_ids() { return {"gaussian_location", "dependent_prior", "poisson_door", "gaussian_conjugate"}; }

ZooModel make_zoo(const std::string& id, const ParamMap& params) {
  ZooModel z;
  z.id = id;
  z.params = resolve(id, params);
  const ParamMap& p = z.params;

  if (id == "gaussian_location") {
    require_positive(p, "sigma");
    require_nonnegative(p, "tau");
    require_positive(p, "theta_sd");
    z.model = std::make_shared<GaussianShiftModel>(require_count(p, "n_obs"), p.at("sigma"), 1.0);
    z.prior = std::make_shared<GaussianNuisancePrior>(GaussianNuisancePrior::scalar(0.0, 0.0, p.at("tau")));
    z.theta_prior = theta_prior_with_sd(p.at("theta_sd"));
  } else if (id == "dependent_prior") {
    require_positive(p, "sigma");
    require_positive(p, "tau");
    require_positive(p, "theta_sd");
    z.model = std::make_shared<GaussianShiftModel>(1, p.at("sigma"), 0.0);
    z.prior = std::make_shared<GaussianNuisancePrior>(GaussianNuisancePrior::scalar(0.0, p.at("a"), p.at("tau")));
    z.theta_prior = theta_prior_with_sd(p.at("theta_sd"));
  } else if (id == "poisson_door") {
    require_positive(p, "intensity");
    require_positive(p, "width");
    require_nonnegative(p, "spread");
    require_positive(p, "theta_sd");
    if (!(p.at("x_max") >= p.at("x_min"))) throw ConfigError("poisson_door: x_max must be >= x_min");
    z.model = std::make_shared<PoissonDoorModel>(
        p.at("intensity"), linspace(p.at("x_min"), p.at("x_max"), require_count(p, "n_detectors")), p.at("width"));
    z.prior =
        std::make_shared<GaussianNuisancePrior>(GaussianNuisancePrior::scalar(p.at("phi0"), 0.0, p.at("spread")));
    z.theta_prior = theta_prior_with_sd(p.at("theta_sd"));
  } else if (id == "gaussian_conjugate") {
    require_positive(p, "sigma");
    require_positive(p, "tau");
    require_positive(p, "s");
    z.model = std::make_shared<GaussianShiftModel>(1, p.at("sigma"), 1.0);
    z.prior = std::make_shared<GaussianNuisancePrior>(GaussianNuisancePrior::scalar(0.0, 0.0, p.at("tau")));
    z.theta_prior = theta_prior_with_sd(p.at("s"));
  }
  return z;
}

std::map<std::string, Matrix> oracle_fims(const std::string& id, const ParamMap& params, double theta) {
  const ZooModel z = make_zoo(id, params);
  const ParamMap& p = z.params;
  std::map<std::string, Matrix> out;

  if (id == "gaussian_location" || id == "gaussian_conjugate") {
    const double n = id == "gaussian_location" ? p.at("n_obs") : 1.0;
    const double s2 = p.at("sigma") * p.at("sigma");
    const double t2 = p.at("tau") * p.at("tau");
    out["conditional"] = scalar(n / s2);
    out["averaged"] = scalar(n / s2);
    out["marginal"] = scalar(n / (s2 + n * t2));
    out["nuisance_info"] = scalar(0.0);
    if (id == "gaussian_conjugate") {
      const double prior_info = 1.0 / (p.at("s") * p.at("s"));
      out["f11"] = scalar(prior_info);
      out["f_tt"] = scalar(1.0 / s2 + prior_info);
      out["f_tp"] = scalar(1.0 / s2);
      out["f_pp"] = scalar(1.0 / s2 + 1.0 / t2);
      out["f_m"] = scalar(1.0 / (s2 + t2) + prior_info);
      Matrix joint(2, 2);
      joint << 1.0 / s2 + prior_info, 1.0 / s2, 1.0 / s2, 1.0 / s2 + 1.0 / t2;
      out["joint"] = joint;
    }
  } else if (id == "dependent_prior") {
    const double a2 = p.at("a") * p.at("a");
    const double s2 = p.at("sigma") * p.at("sigma");
    const double t2 = p.at("tau") * p.at("tau");
    out["conditional"] = scalar(0.0);
    out["averaged"] = scalar(0.0);
    out["marginal"] = scalar(a2 / (s2 + t2));
    out["nuisance_info"] = scalar(a2 / t2);
  } else if (id == "poisson_door") {
    // F(phi, theta) = I t(phi) sum_k b_k(theta) (x_k - theta)^2 / w^4
    const auto& door = static_cast<const PoissonDoorModel&>(*z.model);
    double shape = 0.0;
    for (std::size_t k = 0; k < door.positions().size(); ++k) {
      const double dx = door.positions()[k] - theta;
      shape += door.profile(k, theta) * dx * dx;
    }
    shape *= door.intensity() / std::pow(door.width(), 4);
    const double phi0 = p.at("phi0");
    const double spread = p.at("spread");
    // E[cos^2 phi] for phi ~ Normal(phi0, spread^2)
    const double mean_t = 0.5 * (1.0 + std::cos(2.0 * phi0) * std::exp(-2.0 * spread * spread));
    out["conditional"] = scalar(PoissonDoorModel::transmission(phi0) * shape);
    out["averaged"] = scalar(mean_t * shape);
  }
  return out;
}

std::vector<DataSample> sample_dataset(const std::string& id, const ParamMap& params, const PhiVector& phi,
                                       const ThetaVector& theta, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_dataset: n must be >= 1");
  const ZooModel z = make_zoo(id, params);
  const ModelDims d = z.model->dims();
  if (phi.size() != d.phi || theta.size() != d.theta) throw DimensionError("sample_dataset: parameter dimensions");
  std::vector<DataSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(z.model->sample(phi, theta, rng));
  }
  return out;
}

}  // namespace nfim
