#include "cpm/tridiag.hpp"

#include <cmath>

namespace cpm {

std::optional<TridiagonalLdlt> TridiagonalLdlt::factor(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  const Eigen::Index n = diag.size();
  TridiagonalLdlt f;
  f.d_.resize(n);
  f.l_.resize(std::max<Eigen::Index>(n - 1, 0));
  double scale = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) scale = std::max(scale, std::abs(diag(k)));
  const double tiny = 1e-14 * std::max(scale, 1e-300);
  for (Eigen::Index k = 0; k < n; ++k) {
    double dk = diag(k);
    if (k > 0) dk -= f.l_(k - 1) * f.l_(k - 1) * f.d_(k - 1);
    if (!(dk > tiny) || !std::isfinite(dk)) return std::nullopt;
    f.d_(k) = dk;
    if (k + 1 < n) f.l_(k) = off(k) / dk;
  }
  return f;
}

void TridiagonalLdlt::solve_in_place(Eigen::Ref<Eigen::VectorXd> rhs) const {
  const Eigen::Index n = d_.size();
  for (Eigen::Index k = 1; k < n; ++k) rhs(k) -= l_(k - 1) * rhs(k - 1);
  for (Eigen::Index k = 0; k < n; ++k) rhs(k) /= d_(k);
  for (Eigen::Index k = n - 2; k >= 0; --k) rhs(k) -= l_(k) * rhs(k + 1);
}

void TridiagonalLdlt::solve_columns_in_place(Eigen::Ref<Eigen::MatrixXd> rhs) const {
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    Eigen::VectorXd col = rhs.col(c);
    solve_in_place(Eigen::Ref<Eigen::VectorXd>(col));
    rhs.col(c) = col;
  }
}

Eigen::VectorXd TridiagonalLdlt::inverse_diagonal() const {
  // Backward recurrence on A^{-1} = L^{-T} D^{-1} L^{-1}:
  // S(k,k) = 1/d_k + l_k^2 S(k+1,k+1).
  const Eigen::Index n = d_.size();
  Eigen::VectorXd s(n);
  if (n == 0) return s;
  s(n - 1) = 1.0 / d_(n - 1);
  for (Eigen::Index k = n - 2; k >= 0; --k) s(k) = 1.0 / d_(k) + l_(k) * l_(k) * s(k + 1);
  return s;
}

std::optional<SchurSolver> SchurSolver::factor(const SparseBlocks& info) {
  auto a = TridiagonalLdlt::factor(info.diag, info.off);
  if (!a) return std::nullopt;
  Eigen::MatrixXd x = info.ab;
  a->solve_columns_in_place(x);
  Eigen::MatrixXd schur = info.bb;
  if (schur.size() > 0) schur.noalias() -= info.ab.transpose() * x;
  Eigen::LLT<Eigen::MatrixXd> llt(schur);
  if (schur.size() > 0 && llt.info() != Eigen::Success) return std::nullopt;
  return SchurSolver(std::move(*a), std::move(x), std::move(llt), info.ab);
}

NewtonStep SchurSolver::solve(const Eigen::VectorXd& rhs_alpha, const Eigen::VectorXd& rhs_beta) const {
  NewtonStep step;
  step.delta_alpha = rhs_alpha;
  a_.solve_in_place(step.delta_alpha);  // y = A^{-1} g_a
  if (n_beta() == 0) {
    step.delta_beta.resize(0);
    return step;
  }
  step.delta_beta = s_.solve(rhs_beta - ab_.transpose() * step.delta_alpha);
  step.delta_alpha.noalias() -= x_ * step.delta_beta;
  return step;
}

Eigen::MatrixXd SchurSolver::solve(const Eigen::MatrixXd& rhs) const {
  const Eigen::Index m = n_alpha();
  const Eigen::Index p = n_beta();
  Eigen::MatrixXd out(m + p, rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    const NewtonStep s = solve(rhs.col(c).head(m), rhs.col(c).tail(p));
    out.col(c).head(m) = s.delta_alpha;
    out.col(c).tail(p) = s.delta_beta;
  }
  return out;
}

Eigen::VectorXd SchurSolver::link_scale_variances(const Eigen::VectorXd& z) const {
  // info^{-1} = [A^{-1} + X S^{-1} X^T, -X S^{-1}; -S^{-1} X^T, S^{-1}], so
  // var(alpha_k - beta^T z) = (A^{-1})_kk + (x_k + z)^T S^{-1} (x_k + z).
  Eigen::VectorXd v = a_.inverse_diagonal();
  if (n_beta() == 0) return v;
  const Eigen::MatrixXd shifted = x_.rowwise() + z.transpose();  // m x p
  const Eigen::MatrixXd solved = s_.solve(shifted.transpose());  // p x m
  v += (shifted.transpose().cwiseProduct(solved)).colwise().sum().transpose();
  return v;
}

Eigen::MatrixXd SchurSolver::beta_covariance() const {
  const Eigen::Index p = n_beta();
  if (p == 0) return Eigen::MatrixXd(0, 0);
  return s_.solve(Eigen::MatrixXd::Identity(p, p));
}

std::optional<NewtonStep> newton_step(const SparseBlocks& info, const Gradient& grad) {
  auto solver = SchurSolver::factor(info);
  if (!solver) return std::nullopt;
  return solver->solve(grad.alpha, grad.beta);
}

}  // namespace cpm
