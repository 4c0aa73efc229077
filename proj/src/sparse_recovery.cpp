#include "csiblt/sparse_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csiblt {

namespace {

// Exact dense solve for the square, generically full-rank system.
SolveResult solve_square(const Eigen::Ref<const Eigen::MatrixXd>& phi,
                         const Eigen::Ref<const Eigen::VectorXd>& y, double tol) {
  SolveResult r;
  r.x = phi.partialPivLu().solve(y);
  const double scale = std::max(1.0, y.norm());
  r.converged = (phi * r.x - y).norm() <= tol * scale;
  return r;
}

}  // namespace

SolveResult solve_l1(const Eigen::Ref<const Eigen::MatrixXd>& phi,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const SolverConfig& cfg) {
  const Eigen::Index m = phi.rows();
  const Eigen::Index b = phi.cols();
  if (m < 1) throw std::invalid_argument("solve_l1: need at least one measurement");

  SolveResult result;
  result.x = Eigen::VectorXd::Zero(b);

  const double y_norm = y.norm();
  const double scale = std::max(1.0, y_norm);
  if (y_norm == 0.0) {
    result.converged = true;  // minimum-norm solution of a homogeneous system
    return result;
  }
  if (m >= b) return solve_square(phi, y, cfg.convergence_tol);

  const std::size_t max_support =
      std::min<std::size_t>(cfg.max_sparsity ? cfg.max_sparsity : m, static_cast<std::size_t>(m));
  const std::size_t max_iter =
      std::min<std::size_t>(cfg.max_iterations ? cfg.max_iterations : m, static_cast<std::size_t>(m));

  const Eigen::VectorXd col_norms =
      phi.colwise().norm().cwiseMax(1e-300).transpose();

  // Incrementally orthonormalized active set: Q holds orthonormal columns,
  // R the triangular factor, so each refit costs O(m * support) instead of
  // a fresh least-squares solve.
  Eigen::MatrixXd q(m, max_support);
  Eigen::MatrixXd r_factor = Eigen::MatrixXd::Zero(max_support, max_support);
  Eigen::VectorXd q_dot_y(max_support);
  Eigen::VectorXd residual = y;
  std::vector<Eigen::Index> active;
  std::vector<char> used(static_cast<std::size_t>(b), 0);

  std::size_t iterations = 0;
  while (active.size() < max_support && iterations < max_iter &&
         residual.norm() > cfg.convergence_tol * scale) {
    ++iterations;

    Eigen::VectorXd corr = (phi.transpose() * residual).cwiseAbs().cwiseQuotient(col_norms);
    for (Eigen::Index j = 0; j < b; ++j) {
      if (used[static_cast<std::size_t>(j)]) corr(j) = -1.0;
    }

    Eigen::Index pick = 0;
    const double best = corr.maxCoeff(&pick);
    if (best <= 0.0) break;

    // Orthogonalize the picked column against the current basis (twice, to
    // keep Q numerically orthonormal over hundreds of selections).
    const auto t = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd v = phi.col(pick);
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(t);
    if (t > 0) {
      Eigen::VectorXd h = q.leftCols(t).transpose() * v;
      v -= q.leftCols(t) * h;
      Eigen::VectorXd h2 = q.leftCols(t).transpose() * v;
      v -= q.leftCols(t) * h2;
      proj = h + h2;
    }
    const double perp = v.norm();
    used[static_cast<std::size_t>(pick)] = 1;
    if (perp <= 1e-12 * col_norms(pick)) continue;  // dependent column, skip

    q.col(t) = v / perp;
    if (t > 0) r_factor.col(t).head(t) = proj;
    r_factor(t, t) = perp;
    q_dot_y(t) = q.col(t).dot(y);
    residual -= q.col(t) * q.col(t).dot(residual);
    active.push_back(pick);
  }

  const auto t = static_cast<Eigen::Index>(active.size());
  if (t > 0) {
    const Eigen::VectorXd coeffs = r_factor.topLeftCorner(t, t)
                                       .triangularView<Eigen::Upper>()
                                       .solve(q_dot_y.head(t));
    for (Eigen::Index i = 0; i < t; ++i) result.x(active[static_cast<std::size_t>(i)]) = coeffs(i);
  }
  result.converged = (phi * result.x - y).norm() <= cfg.convergence_tol * scale;
  return result;
}

std::vector<std::int64_t> quantize(const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = std::llround(x(i));
  return out;
}

namespace {

bool quantized_residual_ok(const Eigen::Ref<const Eigen::MatrixXd>& phi,
                           const std::vector<std::int64_t>& x_int,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double residual_tol) {
  Eigen::VectorXd xq(phi.cols());
  for (Eigen::Index i = 0; i < xq.size(); ++i) {
    xq(i) = static_cast<double>(x_int[static_cast<std::size_t>(i)]);
  }
  const double bound = residual_tol * std::max(1.0, y.lpNorm<Eigen::Infinity>());
  return (phi * xq - y).lpNorm<Eigen::Infinity>() <= bound;
}

}  // namespace

RecoveredIblt recover_difference(const RecoveryProblem& problem, const TableParams& params,
                                 const SolverConfig& cfg) {
  if (problem.phi.cols() != static_cast<Eigen::Index>(params.length) ||
      problem.phi.rows() != problem.y_sum.size() || problem.phi.rows() != problem.y_count.size()) {
    throw std::invalid_argument("recover_difference: inconsistent problem dimensions");
  }

  RecoveredIblt out{Iblt(params.length, params.hash_count, params.seed), false};

  const SolveResult sum_solve = solve_l1(problem.phi, problem.y_sum, cfg);
  if (!sum_solve.converged) return out;
  const auto sum_int = quantize(sum_solve.x);
  if (!quantized_residual_ok(problem.phi, sum_int, problem.y_sum, cfg.residual_tol)) return out;

  const SolveResult count_solve = solve_l1(problem.phi, problem.y_count, cfg);
  if (!count_solve.converged) return out;
  const auto count_int = quantize(count_solve.x);
  if (!quantized_residual_ok(problem.phi, count_int, problem.y_count, cfg.residual_tol)) return out;

  for (std::size_t i = 0; i < params.length; ++i) {
    out.table.cell(i) = IbltCell{sum_int[i], count_int[i]};
  }
  out.verified = true;
  return out;
}

}  // namespace csiblt
