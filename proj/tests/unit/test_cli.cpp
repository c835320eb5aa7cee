#include "nfim/cli/app.hpp"
#include "nfim/cli/config.hpp"
#include "nfim/cli/report.hpp"
#include "nfim/errors.hpp"
#include "nfim/parallel.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace nfim;
using namespace nfim::cli;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("nfim_test_cli_" + name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "nfim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallVerify =
    "model.id = gaussian_location\n"
    "seed = 5\n"
    "samples.n_data = 2000\n"
    "samples.n_phi = 200\n"
    "samples.n_inner = 10\n"
    "samples.n_nuisance = 2000\n"
    "integrator.nodes = 32\n";

}  // namespace

TEST_CASE("config parses with defaults filled in") {
  const RunConfig c = parse_config("study = verify\nmodel.id = dependent_prior\nmodel.a = 2\nseed = 9\n");
  CHECK(c.study == Study::verify);
  CHECK(c.model_id == "dependent_prior");
  CHECK(c.params.at("a") == 2.0);
  CHECK(c.params.at("sigma") == 1.0);
  CHECK(c.n_data == 20000);
  REQUIRE(c.theta.size() == 1);
  CHECK(c.theta[0].size() == 1);
  CHECK(c.scales == std::vector<double>{1.0, 0.5, 0.25});
}

TEST_CASE("echoed config re-parses to an equal RunConfig") {
  for (const char* text : {
           "study = verify\nmodel.id = gaussian_location\nmodel.tau = 0.5\nmodel.n_obs = 4\nseed = 3\ntheta = 0.1; -0.3\n",
           "study = bayes\nmodel.id = gaussian_conjugate\nseed = 18446744073709551615\nbayes.delta_theta = 0.7\n",
           "study = approx\nmodel.id = poisson_door\nseed = 1\napprox.corrections = monte_carlo\n"
           "approx.h_phi = 3e-5\napprox.scale = 0.1\noutput.path = /tmp/x.json\n",
           "study = scaling\nmodel.id = gaussian_location\nseed = 2\nscaling.scales = 1, 0.3, 0.1\n"
           "output.csv = t.csv\n"}) {
    const RunConfig c = parse_config(text);
    const RunConfig back = parse_config(to_text(c));
    CHECK(back == c);
    CHECK(to_text(back) == to_text(c));
  }
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("config errors") {
  const std::string base = "model.id = gaussian_location\nseed = 1\n";
  CHECK_THROWS_AS(parse_config(base + "samples.n_data = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "samples.bogus = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "model.bogus = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "seed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.id = gaussian_location\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "study = bayes\n", Study::verify), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "scaling.scales = 0.5, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "integrator.kind = monte_carlo\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "samples.n_data = 2.5\n"), ConfigError);
  CHECK_NOTHROW(parse_config("model.id = gaussian_location\n", Study::verify, 4));
  CHECK(parse_config(base, Study::verify, 77).seed == 77);
  CHECK_THROWS_AS(parse_config(base), ConfigError);  // no study key and no subcommand
}

TEST_CASE("exit codes") {
  const fs::path ok = temp_file("ok.cfg", kSmallVerify);
  const fs::path bad = temp_file("bad.cfg", std::string(kSmallVerify) + "samples.n_phi = 1\n");

  CHECK(run({}).code == kExitUsage);
  CHECK(run({"verify"}).code == kExitUsage);
  CHECK(run({"verify", "--config", ok.string(), "--threads", "0"}).code == kExitUsage);
  CHECK(run({"verify", "--config", bad.string()}).code == kExitUsage);
  CHECK(run({"verify", "--config", "/nonexistent/path.cfg"}).code == kExitUsage);
  const fs::path other = temp_file("other.cfg", std::string(kSmallVerify) + "study = verify\n");
  CHECK(run({"bayes", "--config", other.string()}).code == kExitUsage);

  const CliRun good = run({"verify", "--config", ok.string(), "--quiet"});
  CHECK(good.code == kExitOk);
  CHECK(good.err.empty());
  const auto j = nlohmann::json::parse(good.out);
  CHECK(j["format"] == "nfim-report");
  CHECK(j["payload"]["all_hold"] == true);

  // A vanishing tolerance multiplier turns Monte Carlo noise into failed checks.
  const fs::path strict = temp_file("strict.cfg", std::string(kSmallVerify) + "tolerance.sigma_mult = 1e-6\n");
  const CliRun failed = run({"verify", "--config", strict.string()});
  CHECK(failed.code == kExitCheckFailed);
  CHECK(failed.err.find("FAIL") != std::string::npos);

  const fs::path out = fs::temp_directory_path() / "nfim_test_cli_report.json";
  CHECK(run({"verify", "--config", ok.string(), "--out", out.string(), "--quiet"}).code == kExitOk);
  CHECK(nlohmann::json::parse(slurp(out))["payload"]["study"] == "verify");

  CHECK(run({"verify", "--config", ok.string(), "--out", "/nonexistent/dir/r.json", "--quiet"}).code == kExitFailure);
}

TEST_CASE("report config echo re-parses") {
  const fs::path ok = temp_file("echo.cfg", kSmallVerify);
  const CliRun r = run({"verify", "--config", ok.string(), "--seed", "11", "--quiet"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::ordered_json::parse(r.out);
  const RunConfig echoed = parse_config(j["config"].get<std::string>());
  RunConfig expected = load_config(ok.string(), Study::verify, 11);
  CHECK(echoed == expected);
}

TEST_CASE("payload is identical across thread counts") {
  const std::string configs[] = {
      std::string(kSmallVerify) + "study = verify\ntheta = 0; 0.5\n",
      "study = bayes\nmodel.id = gaussian_conjugate\nseed = 4\nsamples.n_theta = 20\nsamples.n_phi = 20\n"
      "samples.n_data = 20\nintegrator.nodes = 24\n",
      "study = approx\nmodel.id = gaussian_location\nmodel.tau = 0.1\nseed = 4\napprox.corrections = monte_carlo\n"
      "approx.n_samples = 2000\napprox.exact_phi_nodes = 24\nsamples.n_data = 2000\n",
      "study = scaling\nmodel.id = gaussian_location\nseed = 4\nscaling.scales = 0.2, 0.1\n"};
  for (const std::string& text : configs) {
    const RunConfig c = parse_config(text);
    std::string first, first_csv;
    for (int threads : {1, 3, 4}) {
      set_num_threads(threads);
      const StudyResult r = run_study(c);
      if (threads == 1) {
        first = r.payload.dump();
        first_csv = r.csv;
      } else {
        CHECK(r.payload.dump() == first);
        CHECK(r.csv == first_csv);
      }
    }
  }
  set_num_threads(1);
}

TEST_CASE("scaling writes a CSV table") {
  const fs::path cfg = temp_file("scaling.cfg", "model.id = gaussian_location\nseed = 2\nscaling.scales = 0.2, 0.1\n");
  const fs::path csv = fs::temp_directory_path() / "nfim_test_cli_scaling.csv";
  fs::remove(csv);
  const fs::path csv_cfg =
      temp_file("scaling_csv.cfg", slurp(cfg) + "output.csv = " + csv.string() + "\n");
  const CliRun r = run({"scaling", "--config", csv_cfg.string(), "--quiet"});
  CHECK(r.code == kExitOk);
  const std::string table = slurp(csv);
  CHECK(table.rfind("theta_index,theta,scale,error_norm,exact_max_stderr,approx,exact\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

TEST_CASE("approx report marks the approximation") {
  const RunConfig c = parse_config(
      "study = approx\nmodel.id = gaussian_location\nmodel.tau = 0.1\nseed = 1\napprox.exact_phi_nodes = 32\n");
  const StudyResult r = run_study(c);
  const auto& res = r.payload["results"][0];
  CHECK(res["approx"]["approximation"] == true);
  CHECK(res["base"]["approximation"] == false);
  CHECK(res["exact_method"] == "quadrature");
  CHECK(res["error_norm"].get<double>() < 5e-4);
  CHECK(r.all_hold());
}
