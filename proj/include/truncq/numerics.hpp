#pragma once

// Dense linear algebra used across the project. Eigen provides storage and
// BLAS-level products; the factorizations the analysis depends on (SVD and the
// symmetric eigensolver) are implemented here with Jacobi rotations.

#include <cstdint>

#include "truncq/core.hpp"

namespace truncq {

struct SvdFactorization {
  Matrix U;                // m x l, orthonormal columns
  Vector singular_values;  // length l = min(m, n), nonincreasing, nonnegative
  Matrix V;                // n x l, orthonormal columns

  Matrix reconstruct() const;
};

/// One-sided (Hestenes) Jacobi SVD on the taller orientation of X.
/// Throws NumericalFailure if the sweep cap is reached before convergence.
SvdFactorization svd(const Matrix& X);

/// Singular values only, nonincreasing.
Vector singular_values(const Matrix& X);

/// Singular values with those at or below max(m, n) * eps * sigma_1 set to
/// zero. Use before raising to a power q < 1, which amplifies rounding noise.
Vector numerical_singular_values(const Matrix& X);

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix,
/// computed by cyclic Jacobi rotations.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& S);

/// Range of ||Ax||_p^p / ||x||_2^p over nonzero x supported on `support`.
struct RayleighRange {
  double min = 0.0;
  double max = 0.0;
  bool exact = true;  // false for p != 2, where the range is a sampled estimate
};

/// p = 2: extreme eigenvalues of A_S^T A_S. 0 < p <= 1: projected-gradient
/// estimate from 50 seeded restarts on the unit sphere.
RayleighRange extremal_rayleigh(const Matrix& A, const TruncationSet& support, double p,
                                std::uint64_t seed = 0);

/// out_i = sign(v_i) max(|v_i| - w_i, 0).
Vector soft_threshold(const Vector& v, const Vector& weights);

/// Euclidean projection onto {u : ||u||_p <= radius} for p in {1, 2, inf}.
Vector project_lp_ball(const Vector& v, double p, double radius);

/// Minimum-norm least-squares solution of min ||Ax - b||_2.
Vector least_squares(const Matrix& A, const Vector& b);

/// Orthonormal basis (columns) of the null space of A; rank tolerance is
/// max(m, n) * eps * sigma_max.
Matrix null_space_basis(const Matrix& A);

/// ||X||_{S_q} = ||singular values||_q.
double schatten_norm(const Matrix& X, double q);

}  // namespace truncq
