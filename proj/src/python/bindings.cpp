#include "nfim/approx.hpp"
#include "nfim/cli/config.hpp"
#include "nfim/cli/report.hpp"
#include "nfim/errors.hpp"
#include "nfim/fim.hpp"
#include "nfim/linalg.hpp"
#include "nfim/parallel.hpp"
#include "nfim/zoo.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nfim;

namespace {

py::dict estimate_dict(const MatrixEstimate& e) {
  py::dict d;
  d["mean"] = e.mean.entries();
  d["stderr"] = e.std_error;
  d["n_samples"] = e.n_samples;
  d["score_mean"] = e.score_mean_diagnostic;
  d["score_mean_stderr"] = e.score_mean_stderr;
  return d;
}

ThetaVector theta_of(const Vector& v) { return ThetaVector(v); }

std::string run_study_json(const std::string& study, const std::string& text, std::optional<std::uint64_t> seed) {
  const cli::RunConfig config = cli::parse_config(text, cli::study_from_string(study), seed);
  const cli::StudyResult result = cli::run_study(config);
  return cli::make_report(config, result, num_threads(), 0.0).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fisher information with nuisance parameters";

  py::register_exception<Error>(m, "NfimError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("__version__") = cli::kArtifactVersion;

  m.def("zoo_ids", &zoo_ids, "Identifiers of the built-in models.");
  m.def("oracle_fims", &oracle_fims, py::arg("model"), py::arg("params") = ParamMap{}, py::arg("theta") = 0.0,
        "Closed-form FIMs of a zoo model.");

  m.def(
      "conditional_fim",
      [](const std::string& id, const Vector& phi, const Vector& theta, int n, std::uint64_t seed,
         const ParamMap& params) {
        const ZooModel z = make_zoo(id, params);
        return estimate_dict(conditional_fim(*z.model, PhiVector(phi), theta_of(theta), n, seed));
      },
      py::arg("model"), py::arg("phi"), py::arg("theta"), py::arg("n") = 20000, py::arg("seed") = 1,
      py::arg("params") = ParamMap{}, "Monte Carlo F(phi, theta).");

  m.def(
      "marginal_fim",
      [](const std::string& id, const Vector& theta, int n, int nodes, std::uint64_t seed, const ParamMap& params) {
        const ZooModel z = make_zoo(id, params);
        return estimate_dict(marginal_fim(*z.model, *z.prior, theta_of(theta), n, Integrator::grid(nodes), seed));
      },
      py::arg("model"), py::arg("theta"), py::arg("n") = 20000, py::arg("nodes") = 64, py::arg("seed") = 1,
      py::arg("params") = ParamMap{}, "Monte Carlo F(theta) of the marginalized model.");

  m.def(
      "verify_inequality",
      [](const std::string& id, const Vector& theta, const ParamMap& params, int n_data, int n_phi, int n_inner,
         int n_nuisance, int nodes, std::uint64_t seed) {
        const ZooModel z = make_zoo(id, params);
        VerifyConfig c;
        c.n_data = n_data;
        c.n_phi = n_phi;
        c.n_inner = n_inner;
        c.n_nuisance = n_nuisance;
        c.integrator = Integrator::grid(nodes);
        c.seed = seed;
        const InequalityReport r = verify_inequality(*z.model, *z.prior, theta_of(theta), c);
        py::dict d;
        d["lhs"] = estimate_dict(r.lhs);
        d["averaged"] = estimate_dict(r.averaged);
        d["nuisance_info"] = estimate_dict(r.nuisance_info);
        d["rhs"] = estimate_dict(r.rhs);
        d["gap"] = estimate_dict(r.gap);
        d["direct_gap"] = estimate_dict(r.direct_gap);
        d["holds"] = r.holds;
        d["identity_residual"] = r.identity_residual;
        d["identity_tolerance"] = r.identity_tolerance;
        d["identity_holds"] = r.identity_holds;
        return d;
      },
      py::arg("model"), py::arg("theta"), py::arg("params") = ParamMap{}, py::arg("n_data") = 20000,
      py::arg("n_phi") = 2000, py::arg("n_inner") = 10, py::arg("n_nuisance") = 20000, py::arg("nodes") = 64,
      py::arg("seed") = 1, "Checks F(theta) <= <F(phi,theta)> + F_phi(theta) and the gap identity.");

  m.def(
      "approx_fim",
      [](const std::string& id, const Vector& theta, const ParamMap& params, double scale, std::uint64_t seed) {
        const ZooModel z = make_zoo(id, params);
        const ThetaVector t = theta_of(theta);
        const auto prior = z.prior_at_scale(scale);
        ApproxConfig c;
        c.seed = seed;
        const ApproxFimResult r =
            approx_fim(*z.model, *prior, NuisanceCovariance(prior->covariance(t)), prior->mean(t), t, c);
        py::dict d;
        d["base"] = r.base.entries();
        d["f1"] = r.corrections.f1;
        d["f3"] = r.corrections.f3;
        d["approx"] = r.approx.entries();
        d["exact"] = estimate_dict(r.exact);
        d["exact_quadrature"] = r.exact_quadrature;
        d["error_norm"] = r.error_norm;
        return d;
      },
      py::arg("model"), py::arg("theta"), py::arg("params") = ParamMap{}, py::arg("scale") = 1.0,
      py::arg("seed") = 1, "Second-order approximation to the marginal FIM against its exact reference.");

  m.def(
      "psd_check",
      [](const Matrix& a, double tol) {
        const PsdResult r = psd_check(a, tol);
        return py::make_tuple(r.is_psd, r.min_eigenvalue);
      },
      py::arg("matrix"), py::arg("tol"), "(is_psd, min_eigenvalue) of a symmetric matrix.");
  m.def(
      "loewner_leq",
      [](const Matrix& lo, const Matrix& hi, double tol) {
        const PsdResult r = loewner_leq(FisherMatrix(lo, BlockTag::theta), FisherMatrix(hi, BlockTag::theta), tol);
        return py::make_tuple(r.is_psd, r.min_eigenvalue);
      },
      py::arg("lo"), py::arg("hi"), py::arg("tol"), "(lo <= hi, min eigenvalue of hi - lo).");

  m.def("run_study", &run_study_json, py::arg("study"), py::arg("config_text"), py::arg("seed") = py::none(),
        "Runs a study from key=value config text and returns the JSON report.");
  m.def(
      "normalize_config",
      [](const std::string& text) { return cli::to_text(cli::parse_config(text)); }, py::arg("config_text"),
      "Canonical text form of a config with every default filled in.");

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);
}
