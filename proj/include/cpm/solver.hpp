#pragma once

#include "cpm/data.hpp"
#include "cpm/likelihood.hpp"
#include "cpm/links.hpp"

namespace cpm {

struct FitOptions {
  int max_iterations = 100;
  double grad_tol = 1e-6;     // on the max-abs gradient
  double loglik_tol = 1e-10;  // relative change between accepted iterates
  double step_tol = 1e-6;     // Newton step, relative to 1 + max |parameter|
  int max_step_halvings = 30;
  double divergence_norm = 1e3;  // ||beta|| beyond this flags quasi-separation
  // Take every step in (alpha_1, log gaps) coordinates instead of only after halving stalls.
  bool start_in_log_gap = false;

  void validate() const;
};

struct CpmFit {
  Parameters params;
  double loglik = 0.0;
  SparseBlocks info;  // observed information at params
  OrdinalEncoding enc;
  LinkFamily link;
  bool converged = false;
  bool diverged = false;
  bool used_log_gap = false;
  int iterations = 0;
  double max_abs_gradient = 0.0;
  long clamp_events = 0;

  bool censored() const { return enc.bounds.has_value(); }
};

// beta = 0; alpha_k = G^{-1}(cumulative proportion through category k),
// proportions clipped to [1/(2n), 1 - 1/(2n)].
Parameters starting_values(const OrdinalEncoding& enc, LinkFamily link);

// Damped Newton maximization of the log-likelihood. Non-convergence is
// reported through CpmFit::converged, not thrown.
// Throws CollinearityError when the centred design is rank deficient.
CpmFit fit(const OrdinalEncoding& enc, LinkFamily link, const FitOptions& options = {});

}  // namespace cpm
