#include "cpm/likelihood.hpp"

#include <cmath>

#include "cpm/errors.hpp"

namespace cpm {
namespace {

void check_dimensions(const OrdinalEncoding& enc, const Parameters& params) {
  if (params.alpha.size() != enc.n_alpha())
    throw InvalidArgument("alpha has length " + std::to_string(params.alpha.size()) + ", expected " +
                          std::to_string(enc.n_alpha()));
  if (params.beta.size() != enc.num_covariates())
    throw InvalidArgument("beta has length " + std::to_string(params.beta.size()) + ", expected " +
                          std::to_string(enc.num_covariates()));
}

}  // namespace

double Gradient::max_abs() const {
  double m = 0.0;
  if (alpha.size() > 0) m = std::max(m, alpha.cwiseAbs().maxCoeff());
  if (beta.size() > 0) m = std::max(m, beta.cwiseAbs().maxCoeff());
  return m;
}

Eigen::MatrixXd SparseBlocks::dense() const {
  const Eigen::Index m = n_alpha();
  const Eigen::Index p = n_beta();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(m + p, m + p);
  for (Eigen::Index k = 0; k < m; ++k) full(k, k) = diag(k);
  for (Eigen::Index k = 0; k + 1 < m; ++k) full(k, k + 1) = full(k + 1, k) = off(k);
  full.topRightCorner(m, p) = ab;
  full.bottomLeftCorner(p, m) = ab.transpose();
  full.bottomRightCorner(p, p) = bb;
  return full;
}

std::optional<Evaluation> try_evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link,
                                       EvalLevel level, LikelihoodWorkspace* workspace, Execution exec) {
  check_dimensions(enc, params);
  LikelihoodWorkspace local;
  LikelihoodWorkspace& ws = workspace ? *workspace : local;

  const Eigen::Index n = enc.size();
  const Eigen::Index m = enc.n_alpha();
  const Eigen::Index p = enc.num_covariates();
  const Eigen::MatrixXd& z = enc.covariates;

  if (p > 0) {
    ws.eta.noalias() = z * params.beta;
  } else {
    ws.eta.setZero(n);
  }
  ws.cells.resize(static_cast<size_t>(n));
  const CellSweep sweep = evaluate_cells(enc, params.alpha, ws.eta, link, ws.cells, exec);
  if (!sweep.ok) return std::nullopt;

  Evaluation ev;
  ev.clamp_events = sweep.clamp_events;
  // Reductions run serially in observation order so the result does not
  // depend on how the cell sweep was scheduled.
  double total = 0.0;
  for (const auto& c : ws.cells) total += c.log_prob;
  ev.loglik = total;
  if (level == EvalLevel::value) return ev;

  ev.grad.alpha.setZero(m);
  Eigen::VectorXd beta_coef(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = ws.cells[static_cast<size_t>(i)];
    const int k = enc.category[static_cast<size_t>(i)];
    if (k < m) ev.grad.alpha(k) += c.w_upper;
    if (k > 0) ev.grad.alpha(k - 1) -= c.w_lower;
    beta_coef(i) = c.w_lower - c.w_upper;
  }
  ev.grad.beta = p > 0 ? Eigen::VectorXd(z.transpose() * beta_coef) : Eigen::VectorXd(0);
  if (level == EvalLevel::gradient) return ev;

  SparseBlocks& info = ev.info;
  info.diag.setZero(m);
  info.off.setZero(std::max<Eigen::Index>(m - 1, 0));
  info.ab.setZero(m, p);
  Eigen::VectorXd bb_coef(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = ws.cells[static_cast<size_t>(i)];
    const int k = enc.category[static_cast<size_t>(i)];
    const double wu = c.w_upper;
    const double wl = c.w_lower;
    const double dw = wu - wl;
    if (k < m) {
      info.diag(k) += wu * wu - c.slope_upper * wu;
      const double coef = c.slope_upper * wu - wu * dw;
      for (Eigen::Index j = 0; j < p; ++j) info.ab(k, j) += coef * z(i, j);
    }
    if (k > 0) {
      info.diag(k - 1) += wl * wl + c.slope_lower * wl;
      const double coef = wl * dw - c.slope_lower * wl;
      for (Eigen::Index j = 0; j < p; ++j) info.ab(k - 1, j) += coef * z(i, j);
    }
    if (k > 0 && k < m) info.off(k - 1) -= wu * wl;
    bb_coef(i) = dw * dw - (c.slope_upper * wu - c.slope_lower * wl);
  }
  info.bb = p > 0 ? Eigen::MatrixXd(z.transpose() * bb_coef.asDiagonal() * z) : Eigen::MatrixXd(0, 0);
  // the product is symmetric only up to rounding
  info.bb.triangularView<Eigen::StrictlyLower>() = info.bb.transpose();
  return ev;
}

Evaluation evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link, EvalLevel level) {
  auto ev = try_evaluate(enc, params, link, level);
  if (!ev)
    throw NonMonotoneParameters(
        "a likelihood cell has probability <= 0: alpha must be strictly increasing over occupied categories");
  return std::move(*ev);
}

double loglik(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link) {
  return evaluate(enc, params, link, EvalLevel::value).loglik;
}

Gradient score(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link) {
  return evaluate(enc, params, link, EvalLevel::gradient).grad;
}

SparseBlocks hessian(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link) {
  return evaluate(enc, params, link, EvalLevel::hessian).info;
}

double stationarity_residual(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link) {
  return score(enc, params, link).max_abs();
}

}  // namespace cpm
