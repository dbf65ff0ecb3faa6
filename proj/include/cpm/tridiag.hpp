#pragma once

#include <Eigen/Dense>

#include <optional>

#include "cpm/likelihood.hpp"

namespace cpm {

// LDL^T factorization of a symmetric tridiagonal matrix; O(n) factor and solve.
class TridiagonalLdlt {
 public:
  // Returns nullopt unless the matrix is numerically positive definite.
  static std::optional<TridiagonalLdlt> factor(const Eigen::VectorXd& diag, const Eigen::VectorXd& off);

  Eigen::Index size() const { return d_.size(); }
  void solve_in_place(Eigen::Ref<Eigen::VectorXd> rhs) const;
  void solve_columns_in_place(Eigen::Ref<Eigen::MatrixXd> rhs) const;
  // Diagonal of the inverse, O(n).
  Eigen::VectorXd inverse_diagonal() const;

 private:
  Eigen::VectorXd d_;  // pivots
  Eigen::VectorXd l_;  // unit-lower subdiagonal, L(k+1,k) = l_(k)
};

struct NewtonStep {
  Eigen::VectorXd delta_alpha;
  Eigen::VectorXd delta_beta;
};

// Solves the (J-1+p) system with blocks [A B; B^T C] by eliminating the
// tridiagonal A: S = C - B^T A^{-1} B, then back-substitution. Holding the
// factorization lets inference reuse it for many right-hand sides.
class SchurSolver {
 public:
  static std::optional<SchurSolver> factor(const SparseBlocks& info);

  Eigen::Index n_alpha() const { return a_.size(); }
  Eigen::Index n_beta() const { return x_.cols(); }

  NewtonStep solve(const Eigen::VectorXd& rhs_alpha, const Eigen::VectorXd& rhs_beta) const;
  // Column-stacked right-hand sides of height J-1+p; returns info^{-1} rhs.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  // For every cut k, var(alpha_k - beta^T z) = e^T info^{-1} e with
  // e = (unit_k, -z). O(J p^2) for all k together.
  Eigen::VectorXd link_scale_variances(const Eigen::VectorXd& z) const;
  // Inverse of the Schur complement: the beta block of info^{-1}.
  Eigen::MatrixXd beta_covariance() const;

 private:
  SchurSolver(TridiagonalLdlt a, Eigen::MatrixXd x, Eigen::LLT<Eigen::MatrixXd> s, Eigen::MatrixXd ab)
      : a_(std::move(a)), x_(std::move(x)), s_(std::move(s)), ab_(std::move(ab)) {}

  TridiagonalLdlt a_;
  Eigen::MatrixXd x_;  // A^{-1} B
  Eigen::LLT<Eigen::MatrixXd> s_;
  Eigen::MatrixXd ab_;
};

// Newton step info^{-1} grad. nullopt when info is not positive definite.
std::optional<NewtonStep> newton_step(const SparseBlocks& info, const Gradient& grad);

}  // namespace cpm
