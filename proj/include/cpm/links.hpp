#pragma once

#include <string_view>

namespace cpm {

enum class LinkKind { probit, logit, extreme_value };

struct LinkValues {
  double cdf;   // G(x)
  double pdf;   // G'(x)
  double dpdf;  // G''(x)
};

struct LogTails {
  double log_cdf;   // log G(x)
  double log_ccdf;  // log(1 - G(x))
};

// Residual distribution G of the latent error. Member evaluators do not
// validate their argument; the free functions below do.
class LinkFamily {
 public:
  constexpr explicit LinkFamily(LinkKind kind = LinkKind::logit) : kind_(kind) {}

  constexpr LinkKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  // Accepts "probit", "logit", "extreme-value" (also "extreme_value", "cloglog").
  static LinkFamily parse(std::string_view name);

  double cdf(double x) const noexcept;
  double ccdf(double x) const noexcept;
  double pdf(double x) const noexcept;
  double dpdf(double x) const noexcept;
  double log_cdf(double x) const noexcept;
  double log_ccdf(double x) const noexcept;
  double log_pdf(double x) const noexcept;
  // d/dx log g(x) = g'(x)/g(x); finite everywhere, unlike g' / g evaluated separately.
  double pdf_log_slope(double x) const noexcept;

  // Unchecked inverse of cdf; p must lie in (0,1).
  double quantile_unchecked(double p) const;
  // x such that log(1 - G(x)) == log_q; log_q < 0. Keeps precision in the upper
  // tail where 1 - G(x) is not representable next to 1.
  double quantile_from_log_ccdf(double log_q) const;

  friend constexpr bool operator==(LinkFamily a, LinkFamily b) { return a.kind_ == b.kind_; }

 private:
  LinkKind kind_;
};

// (G(x), G'(x), G''(x)). Throws InvalidArgument for non-finite x.
LinkValues link_eval(LinkFamily link, double x);

// (log G(x), log(1-G(x))). Throws InvalidArgument for non-finite x.
LogTails link_log_tails(LinkFamily link, double x);

// G^{-1}(p). Throws DomainError unless 0 < p < 1.
double link_quantile(LinkFamily link, double p);

}  // namespace cpm
