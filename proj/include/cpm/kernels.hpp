#pragma once

#include <Eigen/Dense>

#include <span>

#include "cpm/links.hpp"

namespace cpm {

struct OrdinalEncoding;

enum class Execution { serial, parallel };

// Linear predictors are clamped to this magnitude before link evaluation.
inline constexpr double kPredictorClamp = 40.0;
// Below this many observations the parallel kernel runs serially.
inline constexpr Eigen::Index kParallelThreshold = 4096;

// Per-observation likelihood cell at cut arguments u = alpha_k - eta (upper)
// and l = alpha_{k-1} - eta (lower). Weights are g(.)/pi, zero when the
// corresponding cut does not exist (first/last category).
struct CellTerms {
  double log_prob;
  double w_upper;
  double w_lower;
  double slope_upper;  // g'(u)/g(u)
  double slope_lower;  // g'(l)/g(l)
};

struct CellSweep {
  bool ok;  // false when some cell probability is not positive
  long clamp_events;
};

// Fills out[i] for every observation. Each entry depends only on observation
// i, so the result is bitwise identical for any thread count.
CellSweep evaluate_cells(const OrdinalEncoding& enc, const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta,
                         LinkFamily link, std::span<CellTerms> out, Execution exec = Execution::parallel);

}  // namespace cpm
