#include "cpm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpm/errors.hpp"
#include "cpm/tridiag.hpp"

namespace cpm {
namespace {

constexpr double kMinGap = 1e-12;

void check_rank(const Eigen::MatrixXd& z) {
  const Eigen::Index p = z.cols();
  if (p == 0) return;
  if (z.rows() <= p)
    throw CollinearityError("design has " + std::to_string(z.rows()) + " rows for " + std::to_string(p) +
                                " covariates plus the intercept",
                            {});
  // Intercepts are absorbed by alpha, so constant columns are redundant too.
  const Eigen::MatrixXd centred = z.rowwise() - z.colwise().mean();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centred);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == p) return;
  std::vector<int> bad;
  for (Eigen::Index j = rank; j < p; ++j) bad.push_back(static_cast<int>(qr.colsPermutation().indices()(j)));
  std::sort(bad.begin(), bad.end());
  std::ostringstream msg;
  msg << "covariate matrix is rank deficient (rank " << rank << " of " << p
      << " after centring); redundant column index(es):";
  for (int j : bad) msg << ' ' << j;
  throw CollinearityError(msg.str(), bad);
}

bool strictly_increasing(const Eigen::VectorXd& a) {
  for (Eigen::Index k = 1; k < a.size(); ++k)
    if (!(a(k) - a(k - 1) > kMinGap)) return false;
  return true;
}

double relative_change(double before, double after) {
  return std::abs(after - before) / std::max(std::abs(before), 1.0);
}

}  // namespace

void FitOptions::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(grad_tol > 0) || !(loglik_tol > 0) || !(step_tol > 0)) throw InvalidArgument("tolerances must be positive");
  if (max_step_halvings < 0) throw InvalidArgument("max_step_halvings must be >= 0");
}

Parameters starting_values(const OrdinalEncoding& enc, LinkFamily link) {
  const auto counts = enc.category_counts();
  const double n = static_cast<double>(enc.size());
  const double lo = 1.0 / (2.0 * n);
  const double hi = 1.0 - lo;
  Parameters start;
  start.alpha.resize(enc.n_alpha());
  start.beta.setZero(enc.num_covariates());
  Eigen::Index cumulative = 0;
  for (int k = 0; k < enc.n_alpha(); ++k) {
    cumulative += counts[static_cast<size_t>(k)];
    const double prop = std::clamp(static_cast<double>(cumulative) / n, lo, hi);
    start.alpha(k) = link.quantile_unchecked(prop);
  }
  return start;
}

CpmFit fit(const OrdinalEncoding& enc, LinkFamily link, const FitOptions& options) {
  options.validate();
  if (enc.n_categories() < 2) throw DegenerateData("fit requires at least two outcome categories");
  check_rank(enc.covariates);

  CpmFit result;
  result.enc = enc;
  result.link = link;
  Parameters current = starting_values(enc, link);
  LikelihoodWorkspace ws;

  auto ev = try_evaluate(enc, current, link, EvalLevel::hessian, &ws);
  if (!ev) throw NonMonotoneParameters("starting values produced a zero-probability cell");
  double last_change = std::numeric_limits<double>::infinity();
  bool log_gap = options.start_in_log_gap;
  result.used_log_gap = log_gap;

  for (int iter = 0;; ++iter) {
    const double grad_max = ev->grad.max_abs();

    // Full Newton direction; gradient ascent if the information is not PD.
    NewtonStep dir;
    bool newton = false;
    if (auto step = newton_step(ev->info, ev->grad)) {
      dir = std::move(*step);
      newton = true;
    } else {
      const double scale = 1.0 / std::max(1.0, grad_max);
      dir.delta_alpha = ev->grad.alpha * scale;
      dir.delta_beta = ev->grad.beta * scale;
    }

    // A vanishing gradient alone is not enough: along a separating direction
    // the loglik flattens towards its supremum while Newton steps stay O(1).
    const double theta_max = std::max(current.alpha.cwiseAbs().maxCoeff(),
                                      current.beta.size() > 0 ? current.beta.cwiseAbs().maxCoeff() : 0.0);
    const double step_max = std::max(dir.delta_alpha.cwiseAbs().maxCoeff(),
                                     dir.delta_beta.size() > 0 ? dir.delta_beta.cwiseAbs().maxCoeff() : 0.0);
    const bool step_small = newton && step_max <= options.step_tol * (1.0 + theta_max);
    if (grad_max < options.grad_tol && last_change < options.loglik_tol && step_small) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;
    if (current.beta.size() > 0 && current.beta.norm() > options.divergence_norm) {
      result.diverged = true;
      break;
    }

    // In log-gap mode the same direction is mapped to
    // theta = (alpha_1, log(alpha_2 - alpha_1), ...), which keeps every
    // candidate ordered regardless of step length.
    Eigen::VectorXd gap_dir;
    if (log_gap) {
      gap_dir.resize(current.alpha.size());
      for (Eigen::Index k = 1; k < current.alpha.size(); ++k)
        gap_dir(k) = (dir.delta_alpha(k) - dir.delta_alpha(k - 1)) / (current.alpha(k) - current.alpha(k - 1));
    }

    auto candidate_at = [&](double t) {
      Parameters cand;
      cand.beta = current.beta + t * dir.delta_beta;
      if (!log_gap) {
        cand.alpha = current.alpha + t * dir.delta_alpha;
      } else {
        cand.alpha.resize(current.alpha.size());
        if (cand.alpha.size() > 0) cand.alpha(0) = current.alpha(0) + t * dir.delta_alpha(0);
        for (Eigen::Index k = 1; k < cand.alpha.size(); ++k)
          cand.alpha(k) = cand.alpha(k - 1) + (current.alpha(k) - current.alpha(k - 1)) * std::exp(t * gap_dir(k));
      }
      return cand;
    };

    // Near the optimum the loglik change is at rounding level; allow it.
    const double slack = 1e-12 * std::max(1.0, std::abs(ev->loglik));
    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= options.max_step_halvings; ++h, t *= 0.5) {
      Parameters cand = candidate_at(t);
      if (!strictly_increasing(cand.alpha)) continue;
      auto cand_ev = try_evaluate(enc, cand, link, EvalLevel::hessian, &ws);
      if (!cand_ev || !std::isfinite(cand_ev->loglik) || cand_ev->loglik < ev->loglik - slack) continue;
      last_change = relative_change(ev->loglik, cand_ev->loglik);
      current = std::move(cand);
      ev = std::move(cand_ev);
      accepted = true;
      break;
    }
    result.iterations = iter + 1;
    if (!accepted) {
      if (grad_max < options.grad_tol && step_small) {
        result.converged = true;  // no representable improvement left
        break;
      }
      if (!log_gap) {
        log_gap = true;
        result.used_log_gap = true;
        continue;
      }
      break;
    }
  }

  result.params = std::move(current);
  result.loglik = ev->loglik;
  result.info = std::move(ev->info);
  result.max_abs_gradient = ev->grad.max_abs();
  result.clamp_events = ev->clamp_events;
  if (result.converged && !SchurSolver::factor(result.info)) result.converged = false;
  return result;
}

}  // namespace cpm
