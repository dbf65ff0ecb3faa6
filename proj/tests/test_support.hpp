#pragma once

// Test-only oracles: finite differences, dense linear algebra and random
// instance generators.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "cpm/data.hpp"
#include "cpm/likelihood.hpp"

namespace cpm::testing {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// max |a - b| / max(max |b|, 1)
inline double vec_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  if (want.size() == 0) return 0.0;
  return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1.0);
}

inline double mat_rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  if (want.size() == 0) return 0.0;
  return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1.0);
}

inline Eigen::VectorXd stack(const Parameters& p) {
  Eigen::VectorXd v(p.alpha.size() + p.beta.size());
  v << p.alpha, p.beta;
  return v;
}

inline Parameters unstack(const Eigen::VectorXd& v, Eigen::Index m) {
  return {v.head(m), v.tail(v.size() - m)};
}

// Central differences of loglik in every coordinate.
inline Eigen::VectorXd fd_gradient(const OrdinalEncoding& enc, const Parameters& at, LinkFamily link,
                                   double h = 1e-5) {
  const Eigen::VectorXd x = stack(at);
  const Eigen::Index m = at.alpha.size();
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (loglik(enc, unstack(xp, m), link) - loglik(enc, unstack(xm, m), link)) /
           (2 * h);
  }
  return g;
}

// Negative Jacobian of the analytic score by central differences.
inline Eigen::MatrixXd fd_information(const OrdinalEncoding& enc, const Parameters& at, LinkFamily link,
                                      double h = 1e-5) {
  const Eigen::VectorXd x = stack(at);
  const Eigen::Index m = at.alpha.size();
  Eigen::MatrixXd hmat(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const auto gp = score(enc, unstack(xp, m), link);
    const auto gm = score(enc, unstack(xm, m), link);
    Eigen::VectorXd vp(x.size()), vm(x.size());
    vp << gp.alpha, gp.beta;
    vm << gm.alpha, gm.beta;
    hmat.col(i) = -(vp - vm) / (2 * h);
  }
  return 0.5 * (hmat + hmat.transpose());
}

// Random ordinal instance with every category occupied.
struct RandomInstance {
  OrdinalEncoding enc;
  Parameters params;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int max_n = 50, int max_j = 20, int max_p = 3) {
  std::uniform_int_distribution<int> jdist(2, max_j);
  const int J = jdist(rng);
  std::uniform_int_distribution<int> ndist(J, std::max(J, max_n));
  const int n = ndist(rng);
  std::uniform_int_distribution<int> pdist(0, max_p);
  const int p = pdist(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> cdist(0, J - 1);
  std::uniform_real_distribution<double> gap(0.05, 0.6);

  RandomInstance inst;
  auto& enc = inst.enc;
  for (int j = 0; j < J; ++j) enc.cuts.push_back(0.5 * j + 1.0);
  enc.category.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) enc.category[static_cast<size_t>(i)] = i < J ? i : cdist(rng);
  std::shuffle(enc.category.begin(), enc.category.end(), rng);
  enc.covariates.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) enc.covariates(i, j) = normal(rng);

  inst.params.alpha.resize(J - 1);
  double a = 0.0;
  for (int k = 0; k < J - 1; ++k) {
    a += gap(rng);
    inst.params.alpha(k) = a;
  }
  inst.params.alpha.array() -= inst.params.alpha.mean();
  inst.params.beta.resize(p);
  for (int j = 0; j < p; ++j) inst.params.beta(j) = 0.5 * normal(rng);
  return inst;
}

// Encoding from explicit category counts and no covariates.
inline OrdinalEncoding counts_encoding(const std::vector<int>& counts) {
  OrdinalEncoding enc;
  for (size_t k = 0; k < counts.size(); ++k) {
    enc.cuts.push_back(static_cast<double>(k + 1));
    for (int c = 0; c < counts[k]; ++c) enc.category.push_back(static_cast<int>(k));
  }
  enc.covariates.resize(static_cast<Eigen::Index>(enc.category.size()), 0);
  return enc;
}

}  // namespace cpm::testing
