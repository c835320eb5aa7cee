#pragma once

#include "nfim/cli/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nfim::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

/// One named pass/fail verdict of a study.
struct Verdict {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct StudyResult {
  Json payload;  ///< deterministic given the config; see docs/report.md
  std::vector<Verdict> verdicts;
  std::string csv;  ///< scaling table, empty for other studies

  bool all_hold() const;
};

/// Runs the configured study. Throws nfim::Error subclasses on failure.
StudyResult run_study(const RunConfig& config);

/// The complete report document: format header, config echo, payload, run info.
Json make_report(const RunConfig& config, const StudyResult& result, int threads, double runtime_seconds);

// JSON encodings shared with the Python bindings and tests.
Json matrix_json(const Matrix& m);
Json fisher_json(const FisherMatrix& m);
Json estimate_json(const MatrixEstimate& e);
Json vector_json(const Vector& v);

}  // namespace nfim::cli
