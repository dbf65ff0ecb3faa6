#include "cpm/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "cpm/errors.hpp"
#include "cpm/format.hpp"
#include "cpm/inference.hpp"
#include "cpm/tridiag.hpp"

namespace cpm {
namespace {

using nlohmann::json;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// JSON has no NaN; the writer emits null for undefined values.
double num(const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); }

std::vector<double> num_vec(const json& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(num(x));
  return out;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows, Eigen::Index n_rows, Eigen::Index n_cols) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows)
    throw InvalidArgument("information block has the wrong number of rows");
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != n_cols)
      throw InvalidArgument("information block has the wrong number of columns");
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = num(row[static_cast<size_t>(c)]);
  }
  return m;
}

}  // namespace

std::string format_roundtrip(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_fixed(std::optional<double> x, int decimals) {
  if (!x) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *x);
  return buf;
}

FitReport make_fit_report(const CpmFit& fit, const std::vector<std::string>& covariate_names,
                          bool include_alpha_table, bool include_residuals) {
  const Eigen::Index p = fit.params.beta.size();
  if (static_cast<Eigen::Index>(covariate_names.size()) != p)
    throw InvalidArgument("one covariate name per coefficient is required");
  FitReport r;
  r.link = std::string(fit.link.name());
  r.bounds = fit.enc.bounds;
  r.n = static_cast<long>(fit.enc.size());
  r.n_categories = fit.enc.n_categories();
  r.p = static_cast<int>(p);
  const auto counts = fit.enc.category_counts();
  r.n_left = fit.enc.left_cat ? static_cast<long>(counts.front()) : 0;
  r.n_right = fit.enc.right_cat ? static_cast<long>(counts.back()) : 0;
  r.converged = fit.converged;
  r.diverged = fit.diverged;
  r.iterations = fit.iterations;
  r.loglik = fit.loglik;
  r.max_abs_gradient = fit.max_abs_gradient;
  r.clamp_events = fit.clamp_events;
  r.covariate_names = covariate_names;

  const auto solver = SchurSolver::factor(fit.info);
  const Eigen::MatrixXd cov = solver ? solver->beta_covariance() : Eigen::MatrixXd();
  for (Eigen::Index j = 0; j < p; ++j) {
    CoefficientRow row;
    row.name = covariate_names[static_cast<size_t>(j)];
    row.estimate = fit.params.beta(j);
    row.se = solver ? std::sqrt(cov(j, j)) : std::numeric_limits<double>::quiet_NaN();
    row.ci_low = row.estimate - kWaldZ95 * row.se;
    row.ci_high = row.estimate + kWaldZ95 * row.se;
    row.z = row.estimate / row.se;
    row.p_value = std::erfc(std::abs(row.z) / std::numbers::sqrt2);
    r.coefficients.push_back(row);
  }

  if (include_alpha_table) {
    AlphaTable t;
    t.cuts = fit.enc.cuts;
    t.alpha = to_vec(fit.params.alpha);
    if (solver) {
      t.alpha_se = to_vec(solver->link_scale_variances(Eigen::VectorXd::Zero(p)).cwiseSqrt());
    } else {
      t.alpha_se.assign(t.alpha.size(), std::numeric_limits<double>::quiet_NaN());
    }
    t.information = fit.info;
    r.alpha_table = std::move(t);
  }
  if (include_residuals && fit.converged) r.residuals = to_vec(probability_scale_residuals(fit));
  return r;
}

json to_json(const FitReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  json model;
  model["link"] = r.link;
  model["bounds"] = r.bounds ? json{{"lower", r.bounds->lower}, {"upper", r.bounds->upper}} : json(nullptr);
  model["n"] = r.n;
  model["n_categories"] = r.n_categories;
  model["p"] = r.p;
  model["n_left_censored"] = r.n_left;
  model["n_right_censored"] = r.n_right;
  model["converged"] = r.converged;
  model["diverged"] = r.diverged;
  model["iterations"] = r.iterations;
  model["loglik"] = r.loglik;
  model["max_abs_gradient"] = r.max_abs_gradient;
  model["clamp_events"] = r.clamp_events;
  model["covariates"] = r.covariate_names;
  j["model"] = std::move(model);

  json coefs = json::array();
  for (const auto& c : r.coefficients)
    coefs.push_back({{"name", c.name},
                     {"estimate", c.estimate},
                     {"se", c.se},
                     {"ci_low", c.ci_low},
                     {"ci_high", c.ci_high},
                     {"z", c.z},
                     {"p_value", c.p_value}});
  j["coefficients"] = std::move(coefs);

  if (r.alpha_table) {
    const auto& t = *r.alpha_table;
    json info;
    info["diag"] = to_vec(t.information.diag);
    info["offdiag"] = to_vec(t.information.off);
    info["alpha_beta"] = matrix_rows(t.information.ab);
    info["beta_beta"] = matrix_rows(t.information.bb);
    j["alpha_table"] = {{"cuts", t.cuts}, {"alpha", t.alpha}, {"alpha_se", t.alpha_se}, {"information", info}};
  }
  if (r.residuals) j["residuals"] = *r.residuals;
  return j;
}

FitReport fit_report_from_json(const json& j) {
  try {
    FitReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw InvalidArgument("unsupported report schema_version " + std::to_string(r.schema_version));
    const auto& m = j.at("model");
    r.link = m.at("link").get<std::string>();
    if (!m.at("bounds").is_null())
      r.bounds = Bounds{num(m["bounds"].at("lower")), num(m["bounds"].at("upper"))};
    r.n = m.at("n").get<long>();
    r.n_categories = m.at("n_categories").get<int>();
    r.p = m.at("p").get<int>();
    r.n_left = m.at("n_left_censored").get<long>();
    r.n_right = m.at("n_right_censored").get<long>();
    r.converged = m.at("converged").get<bool>();
    r.diverged = m.at("diverged").get<bool>();
    r.iterations = m.at("iterations").get<int>();
    r.loglik = num(m.at("loglik"));
    r.max_abs_gradient = num(m.at("max_abs_gradient"));
    r.clamp_events = m.at("clamp_events").get<long>();
    r.covariate_names = m.at("covariates").get<std::vector<std::string>>();
    for (const auto& c : j.at("coefficients"))
      r.coefficients.push_back({c.at("name").get<std::string>(), num(c.at("estimate")), num(c.at("se")),
                                num(c.at("ci_low")), num(c.at("ci_high")), num(c.at("z")), num(c.at("p_value"))});
    if (j.contains("alpha_table")) {
      const auto& t = j["alpha_table"];
      AlphaTable a;
      a.cuts = num_vec(t.at("cuts"));
      a.alpha = num_vec(t.at("alpha"));
      a.alpha_se = num_vec(t.at("alpha_se"));
      const auto& info = t.at("information");
      a.information.diag = to_eigen(num_vec(info.at("diag")));
      a.information.off = to_eigen(num_vec(info.at("offdiag")));
      const auto mA = static_cast<Eigen::Index>(a.alpha.size());
      a.information.ab = matrix_from_rows(info.at("alpha_beta"), mA, r.p);
      a.information.bb = matrix_from_rows(info.at("beta_beta"), r.p, r.p);
      r.alpha_table = std::move(a);
    }
    if (j.contains("residuals")) r.residuals = num_vec(j["residuals"]);
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed fit report: ") + e.what());
  }
}

std::string to_csv(const FitReport& r) {
  std::ostringstream os;
  os << "# schema_version=" << r.schema_version << '\n';
  os << "section,name,value,se,ci_low,ci_high,z,p_value\n";
  auto meta = [&](const std::string& name, const std::string& value) { os << "meta," << name << ',' << value << ",,,,,\n"; };
  meta("link", r.link);
  meta("lower", r.bounds ? format_roundtrip(r.bounds->lower) : "NA");
  meta("upper", r.bounds ? format_roundtrip(r.bounds->upper) : "NA");
  meta("n", std::to_string(r.n));
  meta("n_categories", std::to_string(r.n_categories));
  meta("p", std::to_string(r.p));
  meta("n_left_censored", std::to_string(r.n_left));
  meta("n_right_censored", std::to_string(r.n_right));
  meta("converged", r.converged ? "true" : "false");
  meta("diverged", r.diverged ? "true" : "false");
  meta("iterations", std::to_string(r.iterations));
  meta("loglik", format_roundtrip(r.loglik));
  meta("max_abs_gradient", format_roundtrip(r.max_abs_gradient));
  meta("clamp_events", std::to_string(r.clamp_events));
  for (const auto& c : r.coefficients)
    os << "coef," << c.name << ',' << format_roundtrip(c.estimate) << ',' << format_roundtrip(c.se) << ','
       << format_roundtrip(c.ci_low) << ',' << format_roundtrip(c.ci_high) << ',' << format_roundtrip(c.z) << ','
       << format_roundtrip(c.p_value) << '\n';
  if (r.alpha_table) {
    const auto& t = *r.alpha_table;
    for (size_t k = 0; k < t.alpha.size(); ++k)
      os << "alpha," << format_roundtrip(t.cuts[k]) << ',' << format_roundtrip(t.alpha[k]) << ','
         << format_roundtrip(t.alpha_se[k]) << ",,,,\n";
  }
  if (r.residuals)
    for (size_t i = 0; i < r.residuals->size(); ++i)
      os << "residual," << i + 1 << ',' << format_roundtrip((*r.residuals)[i]) << ",,,,,\n";
  return os.str();
}

CpmFit fit_from_report(const FitReport& r) {
  if (!r.alpha_table) throw InvalidArgument("the model report has no alpha table; refit with --alpha-table");
  const auto& t = *r.alpha_table;
  if (t.cuts.size() != t.alpha.size() + 1) throw InvalidArgument("alpha table: expected one more cut than alpha");
  if (static_cast<int>(r.coefficients.size()) != r.p) throw InvalidArgument("coefficient table does not match p");
  CpmFit f;
  f.link = LinkFamily::parse(r.link);
  f.enc.cuts = t.cuts;
  f.enc.bounds = r.bounds;
  f.enc.covariates.resize(0, r.p);
  if (r.bounds && r.n_left > 0) f.enc.left_cat = 0;
  if (r.bounds && r.n_right > 0) f.enc.right_cat = static_cast<int>(t.cuts.size()) - 1;
  f.params.alpha = to_eigen(t.alpha);
  f.params.beta.resize(r.p);
  for (int j = 0; j < r.p; ++j) f.params.beta(j) = r.coefficients[static_cast<size_t>(j)].estimate;
  f.info = t.information;
  f.converged = r.converged;
  f.diverged = r.diverged;
  f.iterations = r.iterations;
  f.loglik = r.loglik;
  f.max_abs_gradient = r.max_abs_gradient;
  f.clamp_events = r.clamp_events;
  return f;
}

}  // namespace cpm
