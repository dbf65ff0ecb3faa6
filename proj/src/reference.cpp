#include <cmath>

#include "cpm/errors.hpp"
#include "cpm/likelihood.hpp"

namespace cpm::reference {

Evaluation evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link) {
  const Eigen::Index n = enc.size();
  const Eigen::Index m = enc.n_alpha();
  const Eigen::Index p = enc.num_covariates();
  if (params.alpha.size() != m || params.beta.size() != p)
    throw InvalidArgument("reference::evaluate: dimension mismatch");

  Evaluation ev;
  ev.grad.alpha.setZero(m);
  ev.grad.beta.setZero(p);
  ev.info.diag.setZero(m);
  ev.info.off.setZero(std::max<Eigen::Index>(m - 1, 0));
  ev.info.ab.setZero(m, p);
  ev.info.bb.setZero(p, p);

  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) eta += enc.covariates(i, j) * params.beta(j);
    const int k = enc.category[static_cast<size_t>(i)];

    double Gu = 1.0, gu = 0.0, dgu = 0.0;
    double Gl = 0.0, gl = 0.0, dgl = 0.0;
    if (k < m) {
      const double u = params.alpha(k) - eta;
      Gu = link.cdf(u);
      gu = link.pdf(u);
      dgu = link.dpdf(u);
    }
    if (k > 0) {
      const double l = params.alpha(k - 1) - eta;
      Gl = link.cdf(l);
      gl = link.pdf(l);
      dgl = link.dpdf(l);
    }
    const double pi = Gu - Gl;
    if (!(pi > 0.0)) throw NonMonotoneParameters("reference::evaluate: non-positive cell probability");
    ev.loglik += std::log(pi);

    // d pi / d alpha_k = g(u), d pi / d alpha_{k-1} = -g(l), d pi / d beta = -(g(u) - g(l)) z.
    const double dbeta = -(gu - gl) / pi;
    if (k < m) ev.grad.alpha(k) += gu / pi;
    if (k > 0) ev.grad.alpha(k - 1) -= gl / pi;
    for (Eigen::Index j = 0; j < p; ++j) ev.grad.beta(j) += dbeta * enc.covariates(i, j);

    // Second derivatives of log pi, negated into the information.
    if (k < m) {
      ev.info.diag(k) -= dgu / pi - (gu * gu) / (pi * pi);
      const double c = -dgu / pi + gu * (gu - gl) / (pi * pi);
      for (Eigen::Index j = 0; j < p; ++j) ev.info.ab(k, j) -= c * enc.covariates(i, j);
    }
    if (k > 0) {
      ev.info.diag(k - 1) -= -dgl / pi - (gl * gl) / (pi * pi);
      const double c = dgl / pi - gl * (gu - gl) / (pi * pi);
      for (Eigen::Index j = 0; j < p; ++j) ev.info.ab(k - 1, j) -= c * enc.covariates(i, j);
    }
    if (k > 0 && k < m) ev.info.off(k - 1) -= gu * gl / (pi * pi);
    const double cbb = (dgu - dgl) / pi - (gu - gl) * (gu - gl) / (pi * pi);
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < p; ++b)
        ev.info.bb(a, b) -= cbb * enc.covariates(i, a) * enc.covariates(i, b);
  }
  return ev;
}

}  // namespace cpm::reference
