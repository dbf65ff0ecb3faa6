#include "cpm/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cpm/errors.hpp"
#include "cpm/format.hpp"
#include "cpm/inference.hpp"
#include "cpm/report.hpp"
#include "cpm/simulate.hpp"

namespace cpm::cli {
namespace {

struct FitArgs {
  std::string data;
  std::string outcome;
  std::vector<std::string> covariates;
  std::string link = "logit";
  std::optional<double> lower;
  std::optional<double> upper;
  bool alpha_table = false;
  bool residuals = false;
  std::string out;
  std::string format = "json";
};

struct PredictArgs {
  std::string model;
  std::string at;
  std::vector<double> cdf;
  std::vector<double> quantile;
  std::vector<double> exceed;
  bool mean = false;
  std::string out;
};

struct SimulateArgs {
  int n = 100;
  int replicates = 1000;
  std::uint64_t seed = 1;
  std::vector<std::string> bounds;
  std::string link = "probit";
  std::string grid;
  std::string out_dir = ".";
  int threads = 0;
  double beta1 = 1.0;
  double beta2 = -0.5;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IngestionError("cannot write '" + path + "'");
  f << text;
}

// Accepts plain decimals and "e^x" shorthand for exp(x).
double parse_scalar(const std::string& token) {
  std::string s = token;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  bool power = false;
  if (s.rfind("e^", 0) == 0) {
    power = true;
    s = s.substr(2);
  }
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("malformed number '" + token + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw UsageError("malformed number '" + token + "'");
  return power ? std::exp(v) : v;
}

std::optional<Bounds> parse_bounds(const std::string& text) {
  if (text == "none") return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--bounds expects 'L,U' or 'none', got '" + text + "'");
  const double lo = parse_scalar(text.substr(0, comma));
  const double hi = parse_scalar(text.substr(comma + 1));
  if (!(lo < hi)) throw UsageError("--bounds '" + text + "' needs L < U");
  return Bounds{lo, hi};
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  if (a.lower.has_value() != a.upper.has_value())
    throw UsageError("--lower and --upper must be given together");
  if (a.format != "json" && a.format != "csv") throw UsageError("--format must be json or csv");
  const LinkFamily link = LinkFamily::parse(a.link);
  const auto samples = read_csv(a.data, a.outcome, a.covariates);

  CensoredDataset data = a.lower ? censor_transform(samples, *a.lower, *a.upper) : make_uncensored(samples);
  if (a.lower && data.num_left() + data.num_right() == 0)
    err << "warning: bounds [" << *a.lower << ", " << *a.upper
        << "] censor no observations; the fit equals the uncensored fit\n";
  const OrdinalEncoding enc = encode_ordinal(data);

  CpmFit f;
  try {
    f = fit(enc, link);
  } catch (const CollinearityError& e) {
    std::ostringstream msg;
    msg << "collinear covariates:";
    for (int j : e.columns()) msg << ' ' << a.covariates.at(static_cast<size_t>(j));
    if (e.columns().empty()) msg << ' ' << e.what();
    throw InvalidArgument(msg.str());
  }
  if (f.diverged) err << "warning: |beta| exceeded the divergence threshold (possible separation)\n";
  if (!f.converged) err << "warning: fit did not converge after " << f.iterations << " iterations\n";

  const FitReport report = make_fit_report(f, a.covariates, a.alpha_table, a.residuals);
  write_output(a.out, a.format == "json" ? to_json(report).dump(2) + "\n" : to_csv(report), out);
  return f.converged ? kExitOk : kExitNotConverged;
}

std::string flag_name(EstimateFlag f) {
  switch (f) {
    case EstimateFlag::none: return "";
    case EstimateFlag::below_support: return "below-support";
    case EstimateFlag::above_support: return "above-support";
    case EstimateFlag::at_boundary: return "at-boundary";
  }
  return "";
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  std::ifstream in(a.model);
  if (!in) throw IngestionError("cannot open model '" + a.model + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("model '" + a.model + "' is not valid JSON: " + e.what());
  }
  const FitReport report = fit_report_from_json(j);
  const CpmFit f = fit_from_report(report);

  Eigen::MatrixXd rows;
  if (!a.at.empty()) {
    rows = read_csv_columns(a.at, report.covariate_names);
  } else if (report.p == 0) {
    rows.resize(1, 0);
  } else {
    throw UsageError("--at is required for a model with covariates");
  }
  if (a.cdf.empty() && a.quantile.empty() && a.exceed.empty() && !a.mean)
    throw UsageError("request at least one of --cdf, --quantile, --exceed, --mean");

  std::ostringstream os;
  os << "# schema_version=1\n";
  os << "row,estimand,argument,estimate,se,ci_low,ci_high,flag,note\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_roundtrip(*v) : std::string("NA"); };
  auto emit = [&](Eigen::Index row, const char* what, const std::string& arg, const EstimateWithSE& e) {
    os << row + 1 << ',' << what << ',' << arg << ',' << format_roundtrip(e.estimate) << ',' << opt(e.se) << ','
       << opt(e.ci_low) << ',' << opt(e.ci_high) << ',' << flag_name(e.flag) << ',' << e.scale_note << '\n';
  };
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Eigen::VectorXd z = rows.row(r).transpose();
    for (double y : a.cdf) emit(r, "cdf", format_roundtrip(y), conditional_cdf(f, y, z));
    for (double c : a.exceed) emit(r, "exceed", format_roundtrip(c), exceedance_probability(f, c, z));
    for (double q : a.quantile) emit(r, "quantile", format_roundtrip(q), conditional_quantile(f, q, z));
    if (a.mean) {
      try {
        emit(r, "mean", "", conditional_mean(f, z));
      } catch (const InferenceUnavailable& e) {
        os << r + 1 << ",mean,,NA,NA,NA,NA,refused,\"" << e.what() << "\"\n";
      }
    }
  }
  write_output(a.out, os.str(), out);
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimDesign d;
  d.n = a.n;
  d.replicates = a.replicates;
  d.seed = a.seed;
  d.beta1 = a.beta1;
  d.beta2 = a.beta2;
  d.link = LinkFamily::parse(a.link);
  if (!a.bounds.empty()) {
    d.bound_pairs.clear();
    for (const auto& b : a.bounds) d.bound_pairs.push_back(parse_bounds(b));
  }
  if (!a.grid.empty()) {
    d.grid.clear();
    std::stringstream ss(a.grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) d.grid.push_back(parse_scalar(tok));
    for (double y : d.grid)
      if (!(y > 0)) throw UsageError("--grid values must be positive outcomes");
  }
  const StudyResults res = simulate_study(d, a.threads);

  namespace fs = std::filesystem;
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_output((dir / "metrics.csv").string(), format_metrics_csv(res.metrics), out);
  const std::string text = format_metrics_text(res.metrics);
  write_output((dir / "table1.txt").string(), text, out);
  for (size_t b = 0; b < res.curves.size(); ++b)
    write_output((dir / ("bias_curve_" + std::to_string(b) + ".csv")).string(), format_bias_curve_csv(res.curves[b]),
                 out);
  out << text;
  for (const auto& w : res.metrics.warnings) err << w << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cumulative probability models for continuous outcomes"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a CPM to a CSV dataset");
  fit_cmd->add_option("--data", fa.data, "Input CSV with a header row")->required();
  fit_cmd->add_option("--outcome", fa.outcome, "Outcome column")->required();
  fit_cmd->add_option("--covariates", fa.covariates, "Comma-separated covariate columns")->delimiter(',');
  fit_cmd->add_option("--link", fa.link, "probit | logit | extreme-value")->capture_default_str();
  fit_cmd->add_option("--lower", fa.lower, "Lower censoring bound L");
  fit_cmd->add_option("--upper", fa.upper, "Upper censoring bound U");
  fit_cmd->add_flag("--alpha-table", fa.alpha_table, "Include cuts, intercepts and information blocks");
  fit_cmd->add_flag("--residuals", fa.residuals, "Include probability-scale residuals");
  fit_cmd->add_option("--out", fa.out, "Output path (default stdout)");
  fit_cmd->add_option("--format", fa.format, "json | csv")->capture_default_str();

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Query a saved fit report");
  predict_cmd->add_option("--model", pa.model, "Fit report JSON written with --alpha-table")->required();
  predict_cmd->add_option("--at", pa.at, "CSV of covariate rows (header names as in the model)");
  predict_cmd->add_option("--cdf", pa.cdf, "P(Y <= y | z)")->delimiter(',');
  predict_cmd->add_option("--quantile", pa.quantile, "Conditional quantile level q")->delimiter(',');
  predict_cmd->add_option("--exceed", pa.exceed, "P(Y > c | z)")->delimiter(',');
  predict_cmd->add_flag("--mean", pa.mean, "E(Y | z); refused for censored models");
  predict_cmd->add_option("--out", pa.out, "Output path (default stdout)");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the log-normal simulation study");
  sim_cmd->add_option("--n", sa.n, "Sample size")->capture_default_str();
  sim_cmd->add_option("--replicates", sa.replicates, "Number of replicates")->capture_default_str();
  sim_cmd->add_option("--seed", sa.seed, "64-bit seed")->capture_default_str();
  sim_cmd->add_option("--bounds", sa.bounds, "'L,U' or 'none'; repeatable (e^x accepted)")->take_all();
  sim_cmd->add_option("--link", sa.link, "probit | logit | extreme-value")->capture_default_str();
  sim_cmd->add_option("--grid", sa.grid, "Comma-separated y values for A-bias curves");
  sim_cmd->add_option("--out-dir", sa.out_dir, "Directory for metrics and curves")->capture_default_str();
  sim_cmd->add_option("--threads", sa.threads, "Worker threads (0 = default)")->capture_default_str();
  sim_cmd->add_option("--beta1", sa.beta1)->capture_default_str();
  sim_cmd->add_option("--beta2", sa.beta2)->capture_default_str();

  std::vector<std::string> storage{"cpm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fa, out, err);
    if (predict_cmd->parsed()) return cmd_predict(pa, out);
    if (sim_cmd->parsed()) return cmd_simulate(sa, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace cpm::cli
