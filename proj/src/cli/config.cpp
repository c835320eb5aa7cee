#include "nfim/cli/config.hpp"

#include "nfim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace nfim::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': expected a finite number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  return v;
}

Vector parse_vector(const std::string& key, const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.empty()) throw ConfigError("'" + key + "': empty vector");
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(key, parts[i]);
  return v;
}

std::string vector_text(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

struct StudyDefaults {
  int n_data, n_phi, n_inner, n_nuisance, n_theta;
};

StudyDefaults defaults_for(Study s) {
  if (s == Study::bayes) {
    const BayesConfig b;
    return {b.n_data, b.n_phi, 10, 20000, b.n_theta};
  }
  const VerifyConfig v;
  return {v.n_data, v.n_phi, v.n_inner, v.n_nuisance, BayesConfig{}.n_theta};
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "study",          "model.id",          "theta",           "seed",
      "samples.n_data", "samples.n_phi",     "samples.n_inner", "samples.n_nuisance",
      "samples.n_theta", "integrator.kind",  "integrator.nodes", "integrator.n_draws",
      "tolerance.sigma_mult", "bayes.delta_theta", "approx.corrections", "approx.n_samples",
      "approx.exact_phi_nodes", "approx.exact_n_data", "approx.h_theta", "approx.h_phi",
      "approx.max_data_nodes", "approx.scale", "scaling.scales", "output.path",
      "output.csv"};
  return keys;
}

}  // namespace

std::string to_string(Study s) {
  switch (s) {
    case Study::verify: return "verify";
    case Study::bayes: return "bayes";
    case Study::approx: return "approx";
    case Study::scaling: return "scaling";
  }
  return "verify";
}

Study study_from_string(const std::string& s) {
  if (s == "verify") return Study::verify;
  if (s == "bayes") return Study::bayes;
  if (s == "approx") return Study::approx;
  if (s == "scaling") return Study::scaling;
  throw ConfigError("unknown study '" + s + "' (verify, bayes, approx, scaling)");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

RunConfig parse_config(const std::string& text, std::optional<Study> study, std::optional<std::uint64_t> seed_override) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!known_keys().count(key) && key.rfind("model.", 0) != 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  RunConfig c;
  const auto study_text = take("study");
  if (study_text) {
    c.study = study_from_string(*study_text);
    if (study && *study != c.study) {
      throw ConfigError("config is for study '" + *study_text + "' but '" + to_string(*study) + "' was requested");
    }
  } else if (study) {
    c.study = *study;
  } else {
    throw ConfigError("no study given");
  }

  const auto id = take("model.id");
  if (!id) throw ConfigError("missing key 'model.id'");
  c.model_id = *id;

  const auto seed_text = take("seed");
  if (seed_override) {
    c.seed = *seed_override;
  } else if (seed_text) {
    c.seed = parse_int<std::uint64_t>("seed", *seed_text);
  } else {
    throw ConfigError("missing key 'seed' (runs are never seeded from the clock)");
  }
  if (seed_text && seed_override) parse_int<std::uint64_t>("seed", *seed_text);

  const StudyDefaults d = defaults_for(c.study);
  auto int_or = [&](const std::string& key, int fallback) {
    const auto v = take(key);
    return v ? parse_int<int>(key, *v) : fallback;
  };
  auto double_or = [&](const std::string& key, double fallback) {
    const auto v = take(key);
    return v ? parse_double(key, *v) : fallback;
  };
  auto string_or = [&](const std::string& key, const std::string& fallback) {
    const auto v = take(key);
    return v ? *v : fallback;
  };

  c.n_data = int_or("samples.n_data", d.n_data);
  c.n_phi = int_or("samples.n_phi", d.n_phi);
  c.n_inner = int_or("samples.n_inner", d.n_inner);
  c.n_nuisance = int_or("samples.n_nuisance", d.n_nuisance);
  c.n_theta = int_or("samples.n_theta", d.n_theta);
  c.integrator_kind = string_or("integrator.kind", "grid");
  c.integrator_nodes = int_or("integrator.nodes", 64);
  c.integrator_draws = int_or("integrator.n_draws", 1000);
  c.sigma_mult = double_or("tolerance.sigma_mult", 3.0);

  const ApproxConfig ad;
  const auto mode = take("approx.corrections");
  c.corrections = mode ? approx_mode_from_string(*mode) : ad.mode;
  c.approx_n_samples = int_or("approx.n_samples", ad.n_samples);
  c.exact_phi_nodes = int_or("approx.exact_phi_nodes", ad.exact_phi_nodes);
  c.exact_n_data = int_or("approx.exact_n_data", ad.exact_n_data);
  c.h_theta = double_or("approx.h_theta", ad.h_theta);
  c.h_phi = double_or("approx.h_phi", ad.h_phi);
  const auto max_nodes = take("approx.max_data_nodes");
  c.max_data_nodes = max_nodes ? parse_int<std::uint64_t>("approx.max_data_nodes", *max_nodes) : ad.max_data_nodes;
  c.approx_scale = double_or("approx.scale", 1.0);

  const auto scales = take("scaling.scales");
  if (scales) {
    for (const std::string& s : split(*scales, ',')) c.scales.push_back(parse_double("scaling.scales", s));
  } else {
    c.scales = {1.0, 0.5, 0.25};
  }
  c.output_path = string_or("output.path", "");
  c.output_csv = string_or("output.csv", "");

  const auto theta = take("theta");
  const auto delta = take("bayes.delta_theta");

  // Remaining keys are model parameters.
  ParamMap params;
  for (const auto& [key, value] : kv) params[key.substr(6)] = parse_double(key, value);
  const ZooModel z = make_zoo(c.model_id, params);
  c.params = z.params;
  const Eigen::Index dt = z.model->dims().theta;

  if (theta) {
    for (const std::string& point : split(*theta, ';')) c.theta.push_back(parse_vector("theta", point));
  } else {
    c.theta.push_back(Vector::Zero(dt));
  }
  c.delta_theta = delta ? parse_vector("bayes.delta_theta", *delta) : Vector::Ones(dt);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, std::optional<Study> study, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), study, seed_override);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "study = " << to_string(c.study) << "\n";
  out << "model.id = " << c.model_id << "\n";
  for (const auto& [key, value] : c.params) out << "model." << key << " = " << format_double(value) << "\n";
  out << "theta = ";
  for (std::size_t i = 0; i < c.theta.size(); ++i) out << (i > 0 ? "; " : "") << vector_text(c.theta[i]);
  out << "\n";
  out << "seed = " << c.seed << "\n";
  out << "samples.n_data = " << c.n_data << "\n";
  out << "samples.n_phi = " << c.n_phi << "\n";
  out << "samples.n_inner = " << c.n_inner << "\n";
  out << "samples.n_nuisance = " << c.n_nuisance << "\n";
  out << "samples.n_theta = " << c.n_theta << "\n";
  out << "integrator.kind = " << c.integrator_kind << "\n";
  out << "integrator.nodes = " << c.integrator_nodes << "\n";
  out << "integrator.n_draws = " << c.integrator_draws << "\n";
  out << "tolerance.sigma_mult = " << format_double(c.sigma_mult) << "\n";
  out << "bayes.delta_theta = " << vector_text(c.delta_theta) << "\n";
  out << "approx.corrections = " << to_string(c.corrections) << "\n";
  out << "approx.n_samples = " << c.approx_n_samples << "\n";
  out << "approx.exact_phi_nodes = " << c.exact_phi_nodes << "\n";
  out << "approx.exact_n_data = " << c.exact_n_data << "\n";
  out << "approx.h_theta = " << format_double(c.h_theta) << "\n";
  out << "approx.h_phi = " << format_double(c.h_phi) << "\n";
  out << "approx.max_data_nodes = " << c.max_data_nodes << "\n";
  out << "approx.scale = " << format_double(c.approx_scale) << "\n";
  out << "scaling.scales = " << vector_text(Eigen::Map<const Vector>(c.scales.data(), static_cast<Eigen::Index>(c.scales.size()))) << "\n";
  if (!c.output_path.empty()) out << "output.path = " << c.output_path << "\n";
  if (!c.output_csv.empty()) out << "output.csv = " << c.output_csv << "\n";
  return out.str();
}

Integrator RunConfig::integrator() const {
  if (integrator_kind == "grid") return Integrator::grid(integrator_nodes);
  return Integrator::monte_carlo(integrator_draws, derive_seed(seed, 99));
}

VerifyConfig RunConfig::verify_config() const {
  VerifyConfig v;
  v.n_data = n_data;
  v.n_phi = n_phi;
  v.n_inner = n_inner;
  v.n_nuisance = n_nuisance;
  v.integrator = integrator();
  v.seed = seed;
  v.sigma_mult = sigma_mult;
  return v;
}

BayesConfig RunConfig::bayes_config() const {
  BayesConfig b;
  b.n_theta = n_theta;
  b.n_phi = n_phi;
  b.n_data = n_data;
  b.integrator = integrator();
  b.seed = seed;
  b.sigma_mult = sigma_mult;
  b.delta_theta = delta_theta;
  return b;
}

ApproxConfig RunConfig::approx_config() const {
  ApproxConfig a;
  a.mode = corrections;
  a.n_samples = approx_n_samples;
  a.h_theta = h_theta;
  a.h_phi = h_phi;
  a.max_data_nodes = static_cast<std::size_t>(max_data_nodes);
  a.exact_phi_nodes = exact_phi_nodes;
  a.exact_n_data = exact_n_data;
  a.seed = seed;
  return a;
}

void RunConfig::validate() const {
  const ZooModel z = make_zoo(model_id, params);
  const Eigen::Index dt = z.model->dims().theta;
  if (theta.empty()) throw ConfigError("theta: at least one evaluation point is required");
  for (const Vector& t : theta) {
    if (t.size() != dt) throw ConfigError("theta: each point needs " + std::to_string(dt) + " component(s)");
  }
  if (delta_theta.size() != dt) throw ConfigError("bayes.delta_theta needs " + std::to_string(dt) + " component(s)");
  const std::pair<const char*, int> sizes[] = {{"samples.n_data", n_data},         {"samples.n_phi", n_phi},
                                               {"samples.n_inner", n_inner},       {"samples.n_nuisance", n_nuisance},
                                               {"samples.n_theta", n_theta},       {"approx.n_samples", approx_n_samples},
                                               {"approx.exact_n_data", exact_n_data}};
  for (const auto& [name, value] : sizes) {
    if (value < 2) throw ConfigError(std::string(name) + " must be >= 2");
  }
  if (integrator_kind != "grid" && integrator_kind != "monte_carlo") {
    throw ConfigError("integrator.kind must be grid or monte_carlo");
  }
  if (integrator_nodes < 1) throw ConfigError("integrator.nodes must be >= 1");
  if (integrator_draws < 100) throw ConfigError("integrator.n_draws must be >= 100");
  if (integrator_kind != "grid") {
    throw ConfigError("every study needs grid posterior integrals; integrator.kind = monte_carlo is not supported here");
  }
  if (!(sigma_mult > 0.0)) throw ConfigError("tolerance.sigma_mult must be > 0");
  if (exact_phi_nodes < 1) throw ConfigError("approx.exact_phi_nodes must be >= 1");
  if (!(h_theta > 0.0) || !(h_phi > 0.0)) throw ConfigError("approx.h_theta and approx.h_phi must be > 0");
  if (max_data_nodes == 0) throw ConfigError("approx.max_data_nodes must be > 0");
  if (!(approx_scale >= 0.0)) throw ConfigError("approx.scale must be >= 0");
  if (scales.size() < 2) throw ConfigError("scaling.scales needs at least two entries");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] >= 0.0)) throw ConfigError("scaling.scales must be >= 0");
    if (i > 0 && !(scales[i] < scales[i - 1])) throw ConfigError("scaling.scales must be strictly descending");
  }
}

}  // namespace nfim::cli
