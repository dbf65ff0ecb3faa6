#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpm/data.hpp"
#include "cpm/links.hpp"
#include "cpm/solver.hpp"

namespace cpm {

// Y = exp(beta1 X1 + beta2 X2 + eps), X1 ~ Bernoulli(1/2), X2 ~ N(0,1),
// eps ~ G. The true transformation is A(y) = log y.
struct SimDesign {
  int n = 100;
  int replicates = 1000;
  double beta1 = 1.0;
  double beta2 = -0.5;
  LinkFamily link{LinkKind::probit};
  std::vector<std::optional<Bounds>> bound_pairs = default_bound_pairs();
  std::uint64_t seed = 1;
  std::vector<double> grid = default_grid();  // y values for A-bias curves
  FitOptions fit_options;

  void validate() const;
  // none, [e^-4,e^4], [e^-2,e^2], [e^-1/2,e^1/2]
  static std::vector<std::optional<Bounds>> default_bound_pairs();
  // exp(t), t = -4, -3.75, ..., 4
  static std::vector<double> default_grid();
};

enum class Estimand { beta1, beta2, ahat_mid, median, mean };
inline constexpr Estimand kAllEstimands[] = {Estimand::beta1, Estimand::beta2, Estimand::ahat_mid,
                                             Estimand::median, Estimand::mean};
std::string estimand_name(Estimand e);

// Fixed estimand point used for A: y = e^{1/2}, truth 1/2.
inline constexpr double kAhatProbePoint = 1.6487212707001282;

struct MetricsCell {
  Estimand estimand;
  size_t bound_index;
  std::optional<double> bias;
  std::optional<double> sd;
  std::optional<double> mean_se;
  std::optional<double> mse;
  int used = 0;      // replicates entering the aggregates
  int failures = 0;  // non-converged or failed-inference replicates
  bool refused = false;  // estimand not reported for this bound pair
};

struct MetricsTable {
  int n = 0;
  int replicates = 0;
  LinkFamily link{LinkKind::probit};
  std::vector<std::optional<Bounds>> bound_pairs;
  std::vector<MetricsCell> cells;      // estimand-major, then bound pair
  std::vector<double> censor_fraction;  // per bound pair, pooled over replicates
  std::vector<int> fit_failures;        // per bound pair
  std::vector<std::string> warnings;

  const MetricsCell& at(Estimand e, size_t bound_index) const;
};

struct BiasCurve {
  std::optional<Bounds> bounds;
  std::vector<double> y;
  std::vector<double> mean_bias;  // NaN where no replicate contributed
  std::vector<int> n_contributing;
};

// Per-replicate results for one bound pair.
struct ReplicateFit {
  bool converged = false;
  double stationarity = 0.0;
  double censored_fraction = 0.0;
  std::optional<double> beta1, beta1_se, beta2, beta2_se;
  std::optional<double> ahat_mid, ahat_mid_se;
  std::optional<double> median;
  std::optional<double> mean, mean_se;
  std::vector<double> ahat_grid;  // NaN where A-hat is not finite or y is outside [L,U]
};

struct ReplicateRecord {
  std::vector<ReplicateFit> fits;  // one per bound pair
};

struct StudyResults {
  MetricsTable metrics;
  std::vector<BiasCurve> curves;  // one per bound pair
  std::vector<ReplicateRecord> replicates;
};

// Deterministic in (seed, replicate_index); each replicate owns its stream.
std::vector<RawSample> generate_replicate(const SimDesign& design, std::uint64_t replicate_index);

ReplicateRecord run_replicate(const SimDesign& design, std::uint64_t replicate_index);

// Runs every replicate (in parallel; threads <= 0 uses the OpenMP default)
// and aggregates in replicate order, so results do not depend on threads.
StudyResults simulate_study(const SimDesign& design, int threads = 0);
MetricsTable run_study(const SimDesign& design, int threads = 0);
BiasCurve ahat_bias_curve(const SimDesign& design, const std::optional<Bounds>& bounds, int threads = 0);

// Aggregation of already computed replicates.
MetricsTable aggregate_metrics(const SimDesign& design, const std::vector<ReplicateRecord>& records);
BiasCurve aggregate_bias_curve(const SimDesign& design, const std::vector<ReplicateRecord>& records,
                               size_t bound_index);

std::string bound_label(const std::optional<Bounds>& b);  // "none" or "L:U", 17 digits
std::string format_metrics_csv(const MetricsTable& table);
std::string format_metrics_text(const MetricsTable& table);
std::string format_bias_curve_csv(const BiasCurve& curve);

}  // namespace cpm
