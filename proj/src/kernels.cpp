#include "cpm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cpm/data.hpp"

namespace cpm {
namespace {

// log(1 - exp(d)) for d < 0.
inline double log1mexp(double d) {
  return d > -std::numbers::ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
}

inline double clamp_arg(double x, long& events) {
  if (x > kPredictorClamp) {
    ++events;
    return kPredictorClamp;
  }
  if (x < -kPredictorClamp) {
    ++events;
    return -kPredictorClamp;
  }
  return x;
}

}  // namespace

CellSweep evaluate_cells(const OrdinalEncoding& enc, const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta,
                         LinkFamily link, std::span<CellTerms> out, Execution exec) {
  const Eigen::Index n = enc.size();
  const int m = enc.n_alpha();
  const int* category = enc.category.data();
  const double* a = alpha.data();
  const double* e = eta.data();
  CellTerms* cells = out.data();

  long clamp_events = 0;
  int failures = 0;
  const bool parallel = exec == Execution::parallel && n >= kParallelThreshold;

#pragma omp parallel for schedule(static) reduction(+ : clamp_events, failures) if (parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = category[i];
    const bool has_upper = k < m;
    const bool has_lower = k > 0;
    const double u = has_upper ? clamp_arg(a[k] - e[i], clamp_events) : 0.0;
    const double l = has_lower ? clamp_arg(a[k - 1] - e[i], clamp_events) : 0.0;

    double log_prob;
    if (!has_lower) {
      log_prob = link.log_cdf(u);
    } else if (!has_upper) {
      log_prob = link.log_ccdf(l);
    } else if (!(u > l)) {
      log_prob = -std::numeric_limits<double>::infinity();
    } else if (l >= 0.0) {
      const double hi = link.log_ccdf(l);
      log_prob = hi + log1mexp(link.log_ccdf(u) - hi);
    } else {
      const double hi = link.log_cdf(u);
      log_prob = hi + log1mexp(link.log_cdf(l) - hi);
    }

    CellTerms& c = cells[i];
    if (!std::isfinite(log_prob)) {
      ++failures;
      c = {log_prob, 0.0, 0.0, 0.0, 0.0};
      continue;
    }
    c.log_prob = log_prob;
    c.w_upper = has_upper ? std::exp(link.log_pdf(u) - log_prob) : 0.0;
    c.w_lower = has_lower ? std::exp(link.log_pdf(l) - log_prob) : 0.0;
    c.slope_upper = has_upper ? link.pdf_log_slope(u) : 0.0;
    c.slope_lower = has_lower ? link.pdf_log_slope(l) : 0.0;
  }
  return {failures == 0, clamp_events};
}

}  // namespace cpm
