#include "nfim/cli/app.hpp"

#include "nfim/cli/config.hpp"
#include "nfim/cli/report.hpp"
#include "nfim/errors.hpp"
#include "nfim/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <ostream>

namespace nfim::cli {

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;
};

void add_study_options(CLI::App& sub, Options& o) {
  sub.add_option("--config", o.config_path, "key=value configuration file")->required();
  sub.add_option("--out", o.out_path, "write the JSON report here instead of stdout");
  sub.add_option("--seed", o.seed, "override the configured seed");
  sub.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sub.add_flag("--quiet", o.quiet, "suppress the verdict summary on stderr");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher information with nuisance parameters", "nfim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);
  Options o;
  for (Study s : {Study::verify, Study::bayes, Study::approx, Study::scaling}) {
    add_study_options(*app.add_subcommand(to_string(s), "run the " + to_string(s) + " study"), o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kArtifactVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "nfim: " << e.what() << '\n';
    return kExitUsage;
  }

  const Study study = study_from_string(app.get_subcommands().front()->get_name());
  const CLI::App* sub = app.get_subcommands().front();

  RunConfig config;
  try {
    std::optional<std::uint64_t> seed;
    if (sub->count("--seed") > 0) seed = o.seed;
    config = load_config(o.config_path, study, seed);
    if (!o.out_path.empty()) config.output_path = o.out_path;
    config.validate();
  } catch (const ConfigError& e) {
    err << "nfim: config error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (o.threads > 0) set_num_threads(o.threads);

  try {
    const auto start = std::chrono::steady_clock::now();
    const StudyResult result = run_study(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string report = make_report(config, result, num_threads(), seconds).dump(2) + "\n";

    if (config.output_path.empty()) {
      out << report;
    } else {
      write_file(config.output_path, report);
    }
    if (!config.output_csv.empty()) write_file(config.output_csv, result.csv);

    if (!o.quiet) {
      for (const Verdict& v : result.verdicts) {
        err << (v.holds ? "PASS " : "FAIL ") << v.name << " (" << v.detail << ")\n";
      }
      err << to_string(study) << ": " << (result.all_hold() ? "all verdicts hold" : "a check failed") << " in "
          << seconds << " s\n";
    }
    return result.all_hold() ? kExitOk : kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "nfim: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "nfim: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace nfim::cli
