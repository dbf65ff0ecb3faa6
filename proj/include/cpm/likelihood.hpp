#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "cpm/data.hpp"
#include "cpm/kernels.hpp"
#include "cpm/links.hpp"

namespace cpm {

// alpha[k] is the transformation A at cut k (k = 0..J-2); beta has length p.
struct Parameters {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
};

struct Gradient {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  double max_abs() const;
};

// Observed information (negative Hessian of the log-likelihood) in block form.
// The alpha block is symmetric tridiagonal: diag has J-1 entries, off has J-2.
struct SparseBlocks {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;
  Eigen::MatrixXd ab;  // (J-1) x p
  Eigen::MatrixXd bb;  // p x p

  Eigen::Index n_alpha() const { return diag.size(); }
  Eigen::Index n_beta() const { return bb.rows(); }
  // Full (J-1+p) square matrix, alpha first.
  Eigen::MatrixXd dense() const;
};

enum class EvalLevel { value, gradient, hessian };

struct Evaluation {
  double loglik = 0.0;
  Gradient grad;      // filled for EvalLevel::gradient and above
  SparseBlocks info;  // filled for EvalLevel::hessian
  long clamp_events = 0;
};

// Scratch storage reused across evaluations of the same encoding.
struct LikelihoodWorkspace {
  Eigen::VectorXd eta;
  std::vector<CellTerms> cells;
};

// Returns nullopt when some cell probability is not positive (alpha not
// increasing over an occupied category). Throws InvalidArgument on a
// dimension mismatch.
std::optional<Evaluation> try_evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link,
                                       EvalLevel level, LikelihoodWorkspace* workspace = nullptr,
                                       Execution exec = Execution::parallel);

// As try_evaluate but throws NonMonotoneParameters instead of returning nullopt.
Evaluation evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link, EvalLevel level);

double loglik(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link);
Gradient score(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link);
SparseBlocks hessian(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link);

// Max-abs component of the full gradient; ~0 at a maximizer.
double stationarity_residual(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link);

namespace reference {

// Straightforward serial evaluation from raw CDF differences. Kept as the
// test oracle for the production kernel; no tail-stable arithmetic.
Evaluation evaluate(const OrdinalEncoding& enc, const Parameters& params, LinkFamily link);

}  // namespace reference

}  // namespace cpm
