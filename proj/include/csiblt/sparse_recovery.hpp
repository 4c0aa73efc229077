#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "csiblt/iblt.hpp"

namespace csiblt {

struct SolverConfig {
  // Post-quantization acceptance bound, scaled by max(1, |y|_inf) per column.
  double residual_tol = 1e-6;
  // Solver-internal relative residual target.
  double convergence_tol = 1e-9;
  // Cap on the recovered support size; 0 means the number of measurements.
  std::size_t max_sparsity = 0;
  // Cap on selection iterations; 0 means the number of measurements.
  std::size_t max_iterations = 0;
};

// The receiver's view of the linear system after m rows: regenerated matrix
// rows stacked with the per-column measurement differences.
struct RecoveryProblem {
  Eigen::MatrixXd phi;      // m x b
  Eigen::VectorXd y_sum;    // m
  Eigen::VectorXd y_count;  // m
};

struct SolveResult {
  Eigen::VectorXd x;
  bool converged = false;
};

// Minimum-l1-flavored sparse solve of phi * x = y via greedy orthogonal
// pursuit: repeatedly select the column most correlated with the residual,
// re-fit least squares on the active set, stop when the residual is below
// convergence_tol or the budget runs out. A square system falls through to
// an exact dense solve. converged=false means "wait for more measurements".
SolveResult solve_l1(const Eigen::Ref<const Eigen::MatrixXd>& phi,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const SolverConfig& cfg);

// Componentwise round half away from zero.
std::vector<std::int64_t> quantize(const Eigen::Ref<const Eigen::VectorXd>& x);

struct TableParams {
  std::uint64_t length = 0;
  int hash_count = 0;
  std::uint64_t seed = 0;
};

struct RecoveredIblt {
  Iblt table;
  bool verified = false;
};

// Solves the two columns independently, quantizes each to integers, and
// accepts only if the quantized table reproduces both measurement columns:
//   max_i |(phi x_int)_i - y_i| <= residual_tol * max(1, |y|_inf).
// verified=false leaves the table contents unspecified.
RecoveredIblt recover_difference(const RecoveryProblem& problem, const TableParams& params,
                                 const SolverConfig& cfg);

}  // namespace csiblt
