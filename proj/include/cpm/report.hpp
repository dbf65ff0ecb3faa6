#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cpm/solver.hpp"

namespace cpm {

inline constexpr int kReportSchemaVersion = 1;

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

// Everything predict needs: cuts, intercepts and the observed information.
struct AlphaTable {
  std::vector<double> cuts;
  std::vector<double> alpha;
  std::vector<double> alpha_se;
  SparseBlocks information;
};

struct FitReport {
  int schema_version = kReportSchemaVersion;
  std::string link = "logit";
  std::optional<Bounds> bounds;
  long n = 0;
  int n_categories = 0;
  int p = 0;
  long n_left = 0;
  long n_right = 0;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double loglik = 0.0;
  double max_abs_gradient = 0.0;
  long clamp_events = 0;
  std::vector<std::string> covariate_names;
  std::vector<CoefficientRow> coefficients;
  std::optional<AlphaTable> alpha_table;
  std::optional<std::vector<double>> residuals;
};

FitReport make_fit_report(const CpmFit& fit, const std::vector<std::string>& covariate_names,
                          bool include_alpha_table, bool include_residuals);

nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& j);
std::string to_csv(const FitReport& report);

// Rebuilds a fit sufficient for inference queries (no observations).
// Throws InvalidArgument when the report lacks an alpha table.
CpmFit fit_from_report(const FitReport& report);

}  // namespace cpm
