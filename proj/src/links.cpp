#include "cpm/links.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <string>

#include "cpm/errors.hpp"

namespace cpm {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Below this argument Phi(x) underflows double range; switch to the Mills ratio.
constexpr double kProbitTailSwitch = -37.5;

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// log Phi(-t) for large t via the continued fraction of the Mills ratio.
double probit_log_lower_tail(double t) {
  double f = t;
  for (int k = 60; k >= 1; --k) f = t + k / f;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(f);
}

double probit_log_cdf(double x) {
  if (x >= 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > kProbitTailSwitch) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return probit_log_lower_tail(-x);
}

}  // namespace

std::string_view LinkFamily::name() const noexcept {
  switch (kind_) {
    case LinkKind::probit: return "probit";
    case LinkKind::logit: return "logit";
    case LinkKind::extreme_value: return "extreme-value";
  }
  return "unknown";
}

LinkFamily LinkFamily::parse(std::string_view name) {
  if (name == "probit") return LinkFamily(LinkKind::probit);
  if (name == "logit") return LinkFamily(LinkKind::logit);
  if (name == "extreme-value" || name == "extreme_value" || name == "cloglog")
    return LinkFamily(LinkKind::extreme_value);
  throw InvalidArgument("unknown link family '" + std::string(name) +
                        "' (expected probit, logit or extreme-value)");
}

double LinkFamily::cdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return 0.5 * std::erfc(-x * kInvSqrt2);
    case LinkKind::logit: return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    case LinkKind::extreme_value: return -std::expm1(-std::exp(x));
  }
  return 0.0;
}

double LinkFamily::ccdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return 0.5 * std::erfc(x * kInvSqrt2);
    case LinkKind::logit: return cdf(-x);
    case LinkKind::extreme_value: return std::exp(-std::exp(x));
  }
  return 0.0;
}

double LinkFamily::pdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return std::exp(-0.5 * x * x - kLogSqrt2Pi);
    case LinkKind::logit: {
      const double e = std::exp(-std::abs(x));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::extreme_value: return std::exp(x - std::exp(x));
  }
  return 0.0;
}

double LinkFamily::pdf_log_slope(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return -x;
    case LinkKind::logit: return -std::tanh(0.5 * x);
    case LinkKind::extreme_value: return 1.0 - std::exp(x);
  }
  return 0.0;
}

double LinkFamily::dpdf(double x) const noexcept { return pdf(x) * pdf_log_slope(x); }

double LinkFamily::log_cdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return probit_log_cdf(x);
    case LinkKind::logit: return -softplus(-x);
    case LinkKind::extreme_value: return std::log(-std::expm1(-std::exp(x)));
  }
  return 0.0;
}

double LinkFamily::log_ccdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return probit_log_cdf(-x);
    case LinkKind::logit: return -softplus(x);
    case LinkKind::extreme_value: return -std::exp(x);
  }
  return 0.0;
}

double LinkFamily::log_pdf(double x) const noexcept {
  switch (kind_) {
    case LinkKind::probit: return -0.5 * x * x - kLogSqrt2Pi;
    case LinkKind::logit: return -softplus(-x) - softplus(x);
    case LinkKind::extreme_value: return x - std::exp(x);
  }
  return 0.0;
}

double LinkFamily::quantile_unchecked(double p) const {
  switch (kind_) {
    case LinkKind::probit: return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    case LinkKind::logit: return std::log(p) - std::log1p(-p);
    case LinkKind::extreme_value: return std::log(-std::log1p(-p));
  }
  return 0.0;
}

double LinkFamily::quantile_from_log_ccdf(double log_q) const {
  switch (kind_) {
    case LinkKind::probit: {
      const double q = std::exp(log_q);
      double x = q > 1e-300 ? std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q)
                            : std::sqrt(-2.0 * log_q);
      // Newton polish on log(1-G(x)) - log_q; slope is -g/(1-G).
      for (int it = 0; it < 4; ++it) {
        const double r = log_ccdf(x) - log_q;
        const double slope = -std::exp(log_pdf(x) - log_ccdf(x));
        x -= r / slope;
      }
      return x;
    }
    case LinkKind::logit: return std::log(std::expm1(-log_q));
    case LinkKind::extreme_value: return std::log(-log_q);
  }
  return 0.0;
}

LinkValues link_eval(LinkFamily link, double x) {
  if (!std::isfinite(x)) throw InvalidArgument("link_eval: argument must be finite");
  return {link.cdf(x), link.pdf(x), link.dpdf(x)};
}

LogTails link_log_tails(LinkFamily link, double x) {
  if (!std::isfinite(x)) throw InvalidArgument("link_log_tails: argument must be finite");
  return {link.log_cdf(x), link.log_ccdf(x)};
}

double link_quantile(LinkFamily link, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("link_quantile: probability must lie in (0,1)");
  return link.quantile_unchecked(p);
}

}  // namespace cpm
