#pragma once

// Truncated Schatten-q minimization
//
//   minimize sum_{j > l - t} lambda_j(X)^q   subject to   b - A(X) in B
//
// where lambda(X) are the singular values in descending order and l = min(m, n).
// The tail position set is re-detected from the current iterate in an outer
// loop; for q = 1 each inner problem is the convex truncated-nuclear-norm
// surrogate, for q < 1 a reweighted nuclear norm.

#include <cstddef>

#include "truncq/core.hpp"
#include "truncq/solvers_vector.hpp"

namespace truncq {

struct MatrixSolverReport {
  Matrix solution;
  bool converged = false;
  int iterations_used = 0;
  double objective_value = 0.0;  // sum of the t smallest singular values to the q
  double constraint_residual = 0.0;
  int outer_rounds_used = 0;
  bool local_only = false;
};

/// Vector of Frobenius inner products <A_i, X>.
Vector apply_map(const LinearMatrixMap& map, const Matrix& X);

/// sum_i y_i A_i.
Matrix apply_adjoint(const LinearMatrixMap& map, const Vector& y);

/// U diag(s') V^T with s'_j = s_j for j < protect and max(s_j - threshold, 0)
/// otherwise.
Matrix truncated_sv_shrink(const Matrix& X, double threshold, std::size_t protect);

/// U diag(max(s_j - weights_j, 0)) V^T; weights are indexed by position in the
/// descending singular-value order.
Matrix weighted_sv_shrink(const Matrix& X, const Vector& weights);

/// max(0, ||A(X) - b||_p - eta), or max(0, ||A*(A(X) - b)||_{S_inf} - eta) for
/// the Dantzig selector set.
double matrix_constraint_violation(const LinearMatrixMap& map, const Vector& b, const Matrix& X,
                                   const NoiseConstraint& constraint);

/// Sum of lambda_j(X)^q over the last t positions.
double tail_schatten_pow(const Matrix& X, std::size_t t, double q);

MatrixSolverReport solve_truncated_schatten(const LinearMatrixMap& map, const Vector& b,
                                            std::size_t t, double q,
                                            const NoiseConstraint& constraint,
                                            const SolverConfig& config, int outer_rounds = 10);

}  // namespace truncq
