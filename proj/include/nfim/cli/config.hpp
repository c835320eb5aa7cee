#pragma once

#include "nfim/approx.hpp"
#include "nfim/bayes.hpp"
#include "nfim/fim.hpp"
#include "nfim/zoo.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nfim::cli {

enum class Study { verify, bayes, approx, scaling };

std::string to_string(Study s);
/// Throws ConfigError on an unknown name.
Study study_from_string(const std::string& s);

/// Fully resolved run configuration. Every field has a value after parsing,
/// so to_text() followed by parse_config() reproduces an equal object.
/// The key=value schema is documented in docs/config.md.
struct RunConfig {
  Study study = Study::verify;
  std::string model_id;
  ParamMap params;                  ///< complete map, zoo defaults filled in
  std::vector<Vector> theta;        ///< evaluation points (verify, approx, scaling)
  std::uint64_t seed = 0;

  int n_data = 0;
  int n_phi = 0;
  int n_inner = 0;
  int n_nuisance = 0;
  int n_theta = 0;

  std::string integrator_kind = "grid";  ///< grid or monte_carlo
  int integrator_nodes = 64;
  int integrator_draws = 1000;

  double sigma_mult = 3.0;
  Vector delta_theta;  ///< bayes quadratic form displacement

  ApproxConfig::Mode corrections = ApproxConfig::Mode::automatic;
  int approx_n_samples = 20000;
  int exact_phi_nodes = 64;
  int exact_n_data = 20000;
  double h_theta = 1e-4;
  double h_phi = 1e-4;
  std::uint64_t max_data_nodes = 20000;
  double approx_scale = 1.0;          ///< prior scale used by the approx study
  std::vector<double> scales;         ///< scaling study ladder

  std::string output_path;  ///< empty: report goes to stdout
  std::string output_csv;   ///< empty: no CSV

  bool operator==(const RunConfig&) const = default;

  Integrator integrator() const;
  VerifyConfig verify_config() const;
  BayesConfig bayes_config() const;
  ApproxConfig approx_config() const;
  /// Throws ConfigError when any value is out of range.
  void validate() const;
};

/// Parses flat "key = value" text. '#' starts a comment. When `study` is given
/// it must agree with a `study` key in the text, if present.
/// Throws ConfigError on syntax errors, unknown or duplicate keys, bad values
/// and on a missing seed.
RunConfig parse_config(const std::string& text, std::optional<Study> study = std::nullopt,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads a file and parses it; ConfigError if it cannot be read.
RunConfig load_config(const std::string& path, std::optional<Study> study = std::nullopt,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

/// Canonical text form, keys in the documented order.
std::string to_text(const RunConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace nfim::cli
