#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

#include "cpm/solver.hpp"

namespace cpm {

enum class EstimateFlag { none, below_support, above_support, at_boundary };

struct EstimateWithSE {
  double estimate = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::string scale_note;
  EstimateFlag flag = EstimateFlag::none;
};

// Weight function h sampled at the cuts, h(a_j) for j = 1..J. Defines the
// functional A[h] = sum_j h(a_j) s_j over the jumps s_j of A.
struct FunctionalContrast {
  Eigen::VectorXd weights;
  std::string description;
  double variation_bound = 1.0;

  double total_variation() const;
  // h(a) = I(a <= y): A[h] is A(y) under the anchoring used by ahat.
  static FunctionalContrast indicator_upto(const OrdinalEncoding& enc, double y);
};

inline constexpr double kWaldZ95 = 1.959963984540054;

// Step-function estimate of A(y): alpha at the largest cut <= y. Returns
// -inf below the first cut and +inf at or above the last cut unless that cut
// is a right-censored U, where A(U) is taken as A(U-). On a censored fit
// queries outside [L,U] throw DomainError.
double ahat(const CpmFit& fit, double y);

// Coefficients of the linear map from alpha to A[h]: A[h] = c^T alpha.
Eigen::VectorXd contrast_alpha_weights(const CpmFit& fit, const FunctionalContrast& h);

// Covariance of (beta, A[h_1], ..., A[h_m]) (beta rows only when requested),
// V^T info^{-1} V with one Schur solve per column of V.
Eigen::MatrixXd functional_variance(const CpmFit& fit, std::span<const FunctionalContrast> contrasts,
                                    bool include_beta);

// Covariance of beta-hat (inverse Schur complement).
Eigen::MatrixXd beta_covariance(const CpmFit& fit);

// P(Y <= y | z) with a delta-method SE; the CI is built on the link scale.
EstimateWithSE conditional_cdf(const CpmFit& fit, double y, const Eigen::VectorXd& z);
// P(Y > c | z), the complement of conditional_cdf.
EstimateWithSE exceedance_probability(const CpmFit& fit, double c, const Eigen::VectorXd& z);
// Inverts the fitted CDF with linear interpolation between bracketing cuts.
// No SE; the interval comes from inverting the pointwise CDF band.
EstimateWithSE conditional_quantile(const CpmFit& fit, double q, const Eigen::VectorXd& z);
// E(Y | z). Throws InferenceUnavailable on censored fits.
EstimateWithSE conditional_mean(const CpmFit& fit, const Eigen::VectorXd& z);

// P(Y* < y) - P(Y* > y) under the fitted conditional law, per observation.
Eigen::VectorXd probability_scale_residuals(const CpmFit& fit);

}  // namespace cpm
