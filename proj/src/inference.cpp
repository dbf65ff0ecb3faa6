#include "cpm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpm/errors.hpp"
#include "cpm/tridiag.hpp"

namespace cpm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_converged(const CpmFit& fit) {
  if (!fit.converged) throw InferenceUnavailable("inference requires a converged fit");
}

void require_covariates(const CpmFit& fit, const Eigen::VectorXd& z) {
  if (z.size() != fit.params.beta.size())
    throw InvalidArgument("covariate vector has length " + std::to_string(z.size()) + ", model has " +
                          std::to_string(fit.params.beta.size()));
}

void check_query(const CpmFit& fit, double y) {
  if (!std::isfinite(y)) throw DomainError("query value must be finite");
  if (const auto& b = fit.enc.bounds; b && (y < b->lower || y > b->upper))
    throw DomainError("query " + std::to_string(y) + " lies outside the censoring interval [" +
                      std::to_string(b->lower) + ", " + std::to_string(b->upper) + "]");
}

enum class Support { below, inside, above };

struct CutLookup {
  Support where;
  int alpha_index;  // valid when inside
};

CutLookup locate(const CpmFit& fit, double y) {
  const auto& cuts = fit.enc.cuts;
  const int m = fit.enc.n_alpha();
  auto it = std::upper_bound(cuts.begin(), cuts.end(), y);
  if (it == cuts.begin()) return {Support::below, -1};
  int k = static_cast<int>(it - cuts.begin()) - 1;
  if (k >= m) {
    // Only a right-censored top category has finite A there: A(U) = A(U-).
    if (!fit.enc.right_cat) return {Support::above, -1};
    k = m - 1;
  }
  return {Support::inside, k};
}

const SchurSolver& solver_for(const CpmFit& fit, std::optional<SchurSolver>& slot) {
  slot = SchurSolver::factor(fit.info);
  if (!slot) throw InferenceUnavailable("observed information is not positive definite");
  return *slot;
}

double quadratic_form(const SchurSolver& solver, const Eigen::VectorXd& da, const Eigen::VectorXd& db) {
  const NewtonStep w = solver.solve(da, db);
  return std::max(0.0, da.dot(w.delta_alpha) + db.dot(w.delta_beta));
}

// Linear interpolation of a nondecreasing CDF sampled at cuts (last value 1).
// Returns the index k of the first cut with F_k >= q and the interpolated y.
std::pair<int, double> invert_cdf(const std::vector<double>& cuts, const std::vector<double>& cdf, double q) {
  const int J = static_cast<int>(cuts.size());
  int k = 0;
  while (k < J - 1 && cdf[static_cast<size_t>(k)] < q) ++k;
  if (k == 0) return {0, cuts.front()};
  const double f0 = cdf[static_cast<size_t>(k - 1)];
  const double f1 = cdf[static_cast<size_t>(k)];
  const double a0 = cuts[static_cast<size_t>(k - 1)];
  const double a1 = cuts[static_cast<size_t>(k)];
  const double t = f1 > f0 ? std::clamp((q - f0) / (f1 - f0), 0.0, 1.0) : 1.0;
  return {k, a0 + t * (a1 - a0)};
}

}  // namespace

double FunctionalContrast::total_variation() const {
  double tv = 0.0;
  for (Eigen::Index j = 1; j < weights.size(); ++j) tv += std::abs(weights(j) - weights(j - 1));
  return tv;
}

FunctionalContrast FunctionalContrast::indicator_upto(const OrdinalEncoding& enc, double y) {
  FunctionalContrast h;
  h.weights.resize(enc.n_categories());
  for (int j = 0; j < enc.n_categories(); ++j) h.weights(j) = enc.cuts[static_cast<size_t>(j)] <= y ? 1.0 : 0.0;
  h.description = "I(a <= " + std::to_string(y) + ")";
  return h;
}

double ahat(const CpmFit& fit, double y) {
  require_converged(fit);
  check_query(fit, y);
  const CutLookup at = locate(fit, y);
  if (at.where == Support::below) return -kInf;
  if (at.where == Support::above) return kInf;
  return fit.params.alpha(at.alpha_index);
}

Eigen::VectorXd contrast_alpha_weights(const CpmFit& fit, const FunctionalContrast& h) {
  const int m = fit.enc.n_alpha();
  if (h.weights.size() != fit.enc.n_categories())
    throw InvalidArgument("contrast has " + std::to_string(h.weights.size()) + " weights, expected one per cut (" +
                          std::to_string(fit.enc.n_categories()) + ")");
  if (h.total_variation() > h.variation_bound + 1e-12)
    throw InvalidArgument("contrast '" + h.description + "' exceeds its declared total-variation bound");
  // The jump at the last cut is infinite unless that cut is the right-censored U.
  if (!fit.enc.right_cat && h.weights(m) != 0.0)
    throw DomainError("contrast '" + h.description + "' weights the last cut, where A is unbounded without right censoring");
  Eigen::VectorXd c(m);
  for (int k = 0; k + 1 < m; ++k) c(k) = h.weights(k) - h.weights(k + 1);
  c(m - 1) = h.weights(m - 1);
  return c;
}

Eigen::MatrixXd functional_variance(const CpmFit& fit, std::span<const FunctionalContrast> contrasts,
                                    bool include_beta) {
  require_converged(fit);
  std::optional<SchurSolver> slot;
  const SchurSolver& solver = solver_for(fit, slot);
  const Eigen::Index m = fit.enc.n_alpha();
  const Eigen::Index p = fit.params.beta.size();
  const Eigen::Index nb = include_beta ? p : 0;
  const Eigen::Index cols = nb + static_cast<Eigen::Index>(contrasts.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m + p, cols);
  for (Eigen::Index j = 0; j < nb; ++j) v(m + j, j) = 1.0;
  for (size_t c = 0; c < contrasts.size(); ++c)
    v.col(nb + static_cast<Eigen::Index>(c)).head(m) = contrast_alpha_weights(fit, contrasts[c]);
  const Eigen::MatrixXd w = solver.solve(v);
  Eigen::MatrixXd cov = v.transpose() * w;
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd beta_covariance(const CpmFit& fit) {
  require_converged(fit);
  std::optional<SchurSolver> slot;
  return solver_for(fit, slot).beta_covariance();
}

EstimateWithSE conditional_cdf(const CpmFit& fit, double y, const Eigen::VectorXd& z) {
  require_converged(fit);
  require_covariates(fit, z);
  check_query(fit, y);
  EstimateWithSE out;
  out.scale_note = "link scale";
  const CutLookup at = locate(fit, y);
  if (at.where != Support::inside) {
    out.estimate = at.where == Support::below ? 0.0 : 1.0;
    out.flag = at.where == Support::below ? EstimateFlag::below_support : EstimateFlag::above_support;
    return out;
  }
  std::optional<SchurSolver> slot;
  const SchurSolver& solver = solver_for(fit, slot);
  const Eigen::Index m = fit.enc.n_alpha();
  const double lambda = fit.params.alpha(at.alpha_index) - fit.params.beta.dot(z);
  Eigen::VectorXd da = Eigen::VectorXd::Zero(m);
  da(at.alpha_index) = 1.0;
  const double se_link = std::sqrt(quadratic_form(solver, da, -z));
  out.estimate = fit.link.cdf(lambda);
  out.se = fit.link.pdf(lambda) * se_link;
  out.ci_low = fit.link.cdf(lambda - kWaldZ95 * se_link);
  out.ci_high = fit.link.cdf(lambda + kWaldZ95 * se_link);
  return out;
}

EstimateWithSE exceedance_probability(const CpmFit& fit, double c, const Eigen::VectorXd& z) {
  EstimateWithSE cdf = conditional_cdf(fit, c, z);
  EstimateWithSE out = cdf;
  out.estimate = 1.0 - cdf.estimate;
  if (cdf.ci_low && cdf.ci_high) {
    out.ci_low = 1.0 - *cdf.ci_high;
    out.ci_high = 1.0 - *cdf.ci_low;
  }
  return out;
}

EstimateWithSE conditional_quantile(const CpmFit& fit, double q, const Eigen::VectorXd& z) {
  require_converged(fit);
  require_covariates(fit, z);
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  const auto& cuts = fit.enc.cuts;
  const int m = fit.enc.n_alpha();
  const double eta = fit.params.beta.dot(z);

  std::vector<double> cdf(cuts.size(), 1.0);
  for (int k = 0; k < m; ++k) cdf[static_cast<size_t>(k)] = fit.link.cdf(fit.params.alpha(k) - eta);

  EstimateWithSE out;
  out.scale_note = "inverted CDF band";
  const auto [k, y] = invert_cdf(cuts, cdf, q);
  out.estimate = y;
  const bool right_censored = fit.enc.right_cat.has_value();
  if (k == 0 || (k == m && right_censored)) {
    out.flag = EstimateFlag::at_boundary;
    out.estimate = cuts[static_cast<size_t>(k)];
  }

  std::optional<SchurSolver> slot;
  const SchurSolver& solver = solver_for(fit, slot);
  const Eigen::VectorXd var = solver.link_scale_variances(z);
  std::vector<double> lower(cuts.size(), 1.0), upper(cuts.size(), 1.0);
  double run_lo = 0.0, run_hi = 0.0;
  for (int j = 0; j < m; ++j) {
    const double lambda = fit.params.alpha(j) - eta;
    const double se = std::sqrt(std::max(0.0, var(j)));
    run_lo = std::max(run_lo, fit.link.cdf(lambda - kWaldZ95 * se));
    run_hi = std::max(run_hi, fit.link.cdf(lambda + kWaldZ95 * se));
    lower[static_cast<size_t>(j)] = run_lo;
    upper[static_cast<size_t>(j)] = run_hi;
  }
  out.ci_low = invert_cdf(cuts, upper, q).second;
  out.ci_high = invert_cdf(cuts, lower, q).second;
  return out;
}

EstimateWithSE conditional_mean(const CpmFit& fit, const Eigen::VectorXd& z) {
  require_converged(fit);
  require_covariates(fit, z);
  if (fit.censored())
    throw InferenceUnavailable(
        "the conditional mean is not reported after censoring: censored outcomes were assigned L and U arbitrarily");
  const auto& cuts = fit.enc.cuts;
  const int m = fit.enc.n_alpha();
  const double eta = fit.params.beta.dot(z);

  // Summation by parts: E(Y) = a_J - sum_k F_k (a_{k+1} - a_k).
  double mean = cuts.back();
  double slope_eta = 0.0;
  Eigen::VectorXd da(m);
  for (int k = 0; k < m; ++k) {
    const double gap = cuts[static_cast<size_t>(k + 1)] - cuts[static_cast<size_t>(k)];
    const double lambda = fit.params.alpha(k) - eta;
    mean -= fit.link.cdf(lambda) * gap;
    const double g = fit.link.pdf(lambda);
    da(k) = -g * gap;
    slope_eta += g * gap;
  }
  const Eigen::VectorXd db = slope_eta * z;
  std::optional<SchurSolver> slot;
  const SchurSolver& solver = solver_for(fit, slot);
  const double se = std::sqrt(quadratic_form(solver, da, db));

  EstimateWithSE out;
  out.estimate = mean;
  out.se = se;
  out.ci_low = mean - kWaldZ95 * se;
  out.ci_high = mean + kWaldZ95 * se;
  out.scale_note = "identity scale";
  return out;
}

Eigen::VectorXd probability_scale_residuals(const CpmFit& fit) {
  require_converged(fit);
  const auto& enc = fit.enc;
  const int m = enc.n_alpha();
  const Eigen::Index n = enc.size();
  Eigen::VectorXd r(n);
  const bool left = enc.left_cat.has_value();
  const bool right = enc.right_cat.has_value();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = enc.category[static_cast<size_t>(i)];
    const double eta = enc.covariates.row(i).dot(fit.params.beta);
    const double f_below = k > 0 ? fit.link.cdf(fit.params.alpha(k - 1) - eta) : 0.0;
    const double f_at = k < m ? fit.link.cdf(fit.params.alpha(k) - eta) : 1.0;
    if (left && k == 0) {
      r(i) = f_at - 1.0;  // F(L|z) - 1
    } else if (right && k == m) {
      r(i) = f_below;  // F(U-|z)
    } else {
      r(i) = f_below + f_at - 1.0;
    }
  }
  return r;
}

}  // namespace cpm
