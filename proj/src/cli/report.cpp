#include "nfim/cli/report.hpp"

#include "nfim/errors.hpp"
#include "nfim/linalg.hpp"

#include <sstream>

namespace nfim::cli {

namespace {

Json values_row_major(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Json block_json(const BlockEstimate& b) {
  Json j;
  j["mean"] = matrix_json(b.mean);
  j["stderr"] = matrix_json(b.std_error);
  return j;
}

std::string index_name(std::size_t i) { return "theta[" + std::to_string(i) + "]"; }

std::string ratio_detail(double value, double tolerance) {
  std::ostringstream s;
  s.precision(4);
  s << value << " vs tolerance " << tolerance;
  return s.str();
}

Json verify_point(const RunConfig& c, const ZooModel& z, const Vector& theta, std::size_t index,
                  std::vector<Verdict>& verdicts) {
  const InequalityReport r = verify_inequality(*z.model, *z.prior, ThetaVector(theta), c.verify_config());
  Json j;
  j["theta"] = vector_json(theta);
  j["lhs"] = estimate_json(r.lhs);
  j["averaged"] = estimate_json(r.averaged);
  j["nuisance_info"] = estimate_json(r.nuisance_info);
  j["rhs"] = estimate_json(r.rhs);
  j["gap"] = estimate_json(r.gap);
  j["direct_gap"] = estimate_json(r.direct_gap);
  j["min_gap_eigenvalue"] = r.min_gap_eigenvalue;
  j["gap_tolerance"] = r.gap_tolerance;
  j["holds"] = r.holds;
  j["identity_residual"] = r.identity_residual;
  j["identity_tolerance"] = r.identity_tolerance;
  j["identity_holds"] = r.identity_holds;
  j["truncated"] = r.truncated;

  Json crb_j;
  try {
    const CrbComparison cmp = compare_crb(r.lhs, r.rhs, c.sigma_mult);
    crb_j["available"] = true;
    crb_j["crb_marginal"] = matrix_json(cmp.crb_marginal);
    crb_j["crb_bound"] = matrix_json(cmp.crb_bound);
    crb_j["min_eigenvalue"] = cmp.ordering.min_eigenvalue;
    crb_j["tolerance"] = cmp.tolerance;
    crb_j["holds"] = cmp.holds;
    verdicts.push_back({index_name(index) + ".crb_ordering", cmp.holds,
                        ratio_detail(cmp.ordering.min_eigenvalue, -cmp.tolerance)});
  } catch (const SingularFimError& e) {
    crb_j["available"] = false;
    crb_j["reason"] = e.what();
  }
  j["crb"] = crb_j;

  verdicts.push_back({index_name(index) + ".inequality", r.holds, ratio_detail(r.min_gap_eigenvalue, -r.gap_tolerance)});
  verdicts.push_back(
      {index_name(index) + ".gap_identity", r.identity_holds, ratio_detail(r.identity_residual, r.identity_tolerance)});
  return j;
}

Json bayes_result(const RunConfig& c, const ZooModel& z, std::vector<Verdict>& verdicts) {
  const BayesRelationsReport r = verify_bayes_relations(*z.model, *z.prior, *z.theta_prior, c.bayes_config());
  Json joint;
  joint["f_tt"] = fisher_json(r.joint.f_tt);
  joint["f_tp"] = matrix_json(r.joint.f_tp);
  joint["f_pp"] = fisher_json(r.joint.f_pp);
  joint["assembled"] = fisher_json(r.joint.assembled);
  joint["assembled_stderr"] = matrix_json(r.joint.assembled_std_error);
  joint["n_theta"] = r.joint.n_theta;
  joint["n_leaves"] = r.joint.n_leaves;
  Json components = Json::object();
  for (const auto& [name, b] : r.joint.components) components[name] = block_json(b);
  joint["components"] = components;
  Json residuals = Json::object();
  for (const auto& [name, b] : r.joint.residuals) residuals[name] = block_json(b);
  joint["residuals"] = residuals;

  Json marginal;
  marginal["f_m"] = estimate_json(r.marginal.f_m);
  marginal["average_marginal_fim"] = estimate_json(r.marginal.average_marginal_fim);
  marginal["prior_info"] = estimate_json(r.marginal.prior_info);
  marginal["identity_residual"] = block_json(r.marginal.identity_residual);

  Json j;
  j["joint"] = joint;
  j["marginal"] = marginal;
  j["identity_residual"] = r.identity_residual;
  j["identity_tolerance"] = r.identity_tolerance;
  j["identity_holds"] = r.identity_holds;
  j["ordering"] = {{"min_eigenvalue", r.ordering.min_eigenvalue},
                   {"tolerance", r.ordering_tolerance},
                   {"holds", r.ordering.is_psd}};
  j["decomposition_residual_sigmas"] = r.decomposition_residual;
  j["decomposition_holds"] = r.decomposition_holds;
  j["delta_theta"] = vector_json(r.delta_theta);
  j["quad_marginal"] = r.quad_marginal;
  j["quad_joint"] = r.quad_joint;
  j["quad_tolerance"] = r.quad_tolerance;
  j["quad_holds"] = r.quad_holds;

  verdicts.push_back({"marginal_identity", r.identity_holds, ratio_detail(r.identity_residual, r.identity_tolerance)});
  verdicts.push_back({"f_m_leq_f_tt", r.ordering.is_psd, ratio_detail(r.ordering.min_eigenvalue, -r.ordering_tolerance)});
  verdicts.push_back({"block_decomposition", r.decomposition_holds,
                      ratio_detail(r.decomposition_residual, c.sigma_mult) + " (stderr units)"});
  verdicts.push_back({"quadratic_form", r.quad_holds, ratio_detail(r.quad_marginal - r.quad_joint, r.quad_tolerance)});
  return j;
}

Json approx_point(const RunConfig& c, const ZooModel& z, const Vector& theta, std::size_t index,
                  std::vector<Verdict>& verdicts) {
  const ThetaVector t(theta);
  const auto prior = z.prior_at_scale(c.approx_scale);
  const NuisanceCovariance k(prior->covariance(t));
  const PhiVector nominal = prior->mean(t);
  const ApproxFimResult r = approx_fim(*z.model, *prior, k, nominal, t, c.approx_config());

  Json corr;
  corr["method"] = r.corrections.quadrature ? "quadrature" : "monte_carlo";
  corr["f1"] = matrix_json(r.corrections.f1);
  corr["f1_stderr"] = matrix_json(r.corrections.f1_std_error);
  corr["f3"] = matrix_json(r.corrections.f3);
  corr["f3_stderr"] = matrix_json(r.corrections.f3_std_error);

  Json j;
  j["theta"] = vector_json(theta);
  j["scale"] = c.approx_scale;
  j["phi_nominal"] = vector_json(nominal.vec());
  j["k_phi"] = matrix_json(k.k_phi());
  j["base"] = fisher_json(r.base);
  j["base_stderr"] = matrix_json(r.base_std_error);
  j["corrections"] = corr;
  j["approx"] = fisher_json(r.approx);
  j["approx_min_eigenvalue"] = min_eigenvalue(r.approx.entries());
  j["exact"] = estimate_json(r.exact);
  j["exact_method"] = r.exact_quadrature ? "quadrature" : "monte_carlo";
  j["error_norm"] = r.error_norm;

  const double tol = r.exact.max_stderr() > 0.0 ? c.sigma_mult * r.exact.max_stderr()
                                                 : default_psd_tolerance(r.exact.mean.entries());
  const PsdResult psd = psd_check(r.exact.mean, tol);
  j["exact_psd"] = psd.is_psd;
  verdicts.push_back({index_name(index) + ".exact_psd", psd.is_psd, ratio_detail(psd.min_eigenvalue, -tol)});
  return j;
}

Json scaling_point(const RunConfig& c, const ZooModel& z, const Vector& theta, std::size_t index,
                   std::vector<Verdict>& verdicts, std::ostringstream& csv) {
  const PriorFamily family = [&z](double s) -> std::shared_ptr<const NuisancePrior> { return z.prior_at_scale(s); };
  const ScalingStudy s = scaling_study(*z.model, family, ThetaVector(theta), c.scales, c.approx_config());
  Json rows = Json::array();
  std::string theta_text;
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta_text += (i > 0 ? " " : "") + format_double(theta(i));
  for (const ScalingRow& row : s.rows) {
    rows.push_back({{"scale", row.scale},
                    {"error_norm", row.error_norm},
                    {"exact_max_stderr", row.exact_max_stderr},
                    {"approx", row.approx},
                    {"exact", row.exact}});
    csv << index << ',' << theta_text << ',' << format_double(row.scale) << ',' << format_double(row.error_norm) << ','
        << format_double(row.exact_max_stderr) << ',' << format_double(row.approx) << ',' << format_double(row.exact)
        << '\n';
  }
  Json j;
  j["theta"] = vector_json(theta);
  j["rows"] = rows;
  j["slope"] = s.slope;
  j["monotone"] = s.monotone;
  verdicts.push_back({index_name(index) + ".monotone", s.monotone, s.monotone ? "nonincreasing" : "error grew"});
  return j;
}

}  // namespace

bool StudyResult::all_hold() const {
  for (const Verdict& v : verdicts) {
    if (!v.holds) return false;
  }
  return true;
}

Json matrix_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["values"] = values_row_major(m);
  return j;
}

Json fisher_json(const FisherMatrix& m) {
  Json j;
  j["block_tag"] = to_string(m.block_tag());
  j["approximation"] = m.is_approximation();
  j["rows"] = m.dim();
  j["cols"] = m.dim();
  j["values"] = values_row_major(m.entries());
  return j;
}

Json estimate_json(const MatrixEstimate& e) {
  Json j = fisher_json(e.mean);
  j["stderr"] = values_row_major(e.std_error);
  j["n_samples"] = e.n_samples;
  j["score_mean"] = vector_json(e.score_mean_diagnostic);
  j["score_mean_stderr"] = vector_json(e.score_mean_stderr);
  return j;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

StudyResult run_study(const RunConfig& c) {
  c.validate();
  const ZooModel z = make_zoo(c.model_id, c.params);
  StudyResult out;
  Json results = Json::array();
  std::ostringstream csv;
  if (c.study == Study::scaling) csv << "theta_index,theta,scale,error_norm,exact_max_stderr,approx,exact\n";

  switch (c.study) {
    case Study::verify:
      for (std::size_t i = 0; i < c.theta.size(); ++i) results.push_back(verify_point(c, z, c.theta[i], i, out.verdicts));
      break;
    case Study::bayes:
      results.push_back(bayes_result(c, z, out.verdicts));
      break;
    case Study::approx:
      for (std::size_t i = 0; i < c.theta.size(); ++i) results.push_back(approx_point(c, z, c.theta[i], i, out.verdicts));
      break;
    case Study::scaling:
      for (std::size_t i = 0; i < c.theta.size(); ++i) {
        results.push_back(scaling_point(c, z, c.theta[i], i, out.verdicts, csv));
      }
      out.csv = csv.str();
      break;
  }

  Json model;
  model["id"] = c.model_id;
  Json params = Json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  model["params"] = params;

  Json verdicts = Json::array();
  for (const Verdict& v : out.verdicts) verdicts.push_back({{"name", v.name}, {"holds", v.holds}, {"detail", v.detail}});

  out.payload["study"] = to_string(c.study);
  out.payload["model"] = model;
  out.payload["seed"] = c.seed;
  out.payload["results"] = results;
  out.payload["verdicts"] = verdicts;
  out.payload["all_hold"] = out.all_hold();
  return out;
}

Json make_report(const RunConfig& config, const StudyResult& result, int threads, double runtime_seconds) {
  Json j;
  j["format"] = "nfim-report";
  j["format_version"] = kReportFormatVersion;
  j["artifact_version"] = kArtifactVersion;
  j["config"] = to_text(config);
  j["payload"] = result.payload;
  j["run"] = {{"threads", threads}, {"runtime_seconds", runtime_seconds}};
  return j;
}

}  // namespace nfim::cli
