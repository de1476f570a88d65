#pragma once

// Domain types and the sparse-approximation primitives shared by the solvers
// and the analysis suite: q-(quasi)norms, restriction to index sets, best
// k-term supports and errors, and the truncated cone constraint.

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "truncq/error.hpp"

namespace truncq {

using Vector = Eigen::VectorXd;  // signals x, x_hat, errors v, noise z, measurements b
using Matrix = Eigen::MatrixXd;  // measurement matrices A and unknown matrices X

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute slack used by every inequality predicate on q-th power values.
inline constexpr double kInequalitySlack = 1e-12;

bool all_finite(const Vector& x);
bool all_finite(const Matrix& x);
void require_finite(const Vector& x, const char* name);
void require_finite(const Matrix& x, const char* name);

/// Sorted, duplicate-free set of 0-based indices into a ground set of size
/// `ambient` (n for signals, min(m, n) for singular values).
class TruncationSet {
 public:
  TruncationSet() = default;
  /// Sorts and validates; throws InvalidInput on duplicates or out-of-range.
  TruncationSet(std::vector<std::size_t> indices, std::size_t ambient);

  static TruncationSet full(std::size_t ambient);
  static TruncationSet empty(std::size_t ambient);
  /// The last `t` positions {ambient - t, ..., ambient - 1}; for singular
  /// values in descending order these are the t smallest.
  static TruncationSet tail(std::size_t ambient, std::size_t t);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t ambient() const noexcept { return ambient_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t i) const;

  TruncationSet complement() const;
  TruncationSet intersect(const TruncationSet& other) const;
  TruncationSet unite(const TruncationSet& other) const;
  bool is_subset_of(const TruncationSet& other) const;

  /// Boolean mask of length ambient().
  std::vector<bool> mask() const;

  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// 1-based rendering for human-facing text, e.g. "{1, 3, 4}".
  std::string to_string_one_based() const;

  friend bool operator==(const TruncationSet&, const TruncationSet&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t ambient_ = 0;
};

/// Linear map R^{m x n} -> R^l given by l sensing matrices; applying it takes
/// Frobenius inner products. Row i of stacked() is the column-major
/// vectorization of sensing matrix i.
class LinearMatrixMap {
 public:
  LinearMatrixMap() = default;
  /// Throws InvalidInput if the list is empty or the shapes disagree.
  explicit LinearMatrixMap(const std::vector<Matrix>& sensing);
  LinearMatrixMap(Matrix stacked, Eigen::Index rows, Eigen::Index cols);

  /// vec(X) -> vec(X), i.e. the sensing matrices are the unit basis.
  static LinearMatrixMap identity(Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  Eigen::Index size() const noexcept { return stacked_.rows(); }
  const Matrix& stacked() const noexcept { return stacked_; }
  Matrix sensing(Eigen::Index i) const;

 private:
  Matrix stacked_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
};

/// Noise set {z : ||z||_p <= eta}.
struct LpBall {
  double p = 2.0;
  double eta = 0.0;
};

/// Noise set {z : ||A^T z||_inf <= eta}.
struct DantzigSelector {
  double eta = 0.0;
};

using NoiseConstraint = std::variant<LpBall, DantzigSelector>;

void validate(const NoiseConstraint& constraint);
double noise_level(const NoiseConstraint& constraint);

/// Exponent triple (q, r, p) of the (l_r, l_q) - l_p approximation property.
struct NormTriple {
  double q = 1.0;
  double r = 2.0;
  double p = 2.0;

  /// Throws InvalidInput unless 0 < q <= 1, q <= r, 1 <= p (r, p may be inf).
  void validate() const;
  /// q / r, taken as 0 when r is infinite.
  double q_over_r() const { return r == kInf ? 0.0 : q / r; }
};

/// ||x||_q = (sum |x_i|^q)^(1/q); the max-norm when q is infinite.
double qnorm(const Vector& x, double q);

/// sum |x_i|^q (the q-th power of qnorm, computed without the round trip).
double qnorm_pow(const Vector& x, double q);

/// Copy of x that keeps the entries indexed by `set` and zeroes the rest.
Vector restrict(const Vector& x, const TruncationSet& set);

/// The k indices of T carrying the largest |x_i|; ties go to the lower index.
TruncationSet best_k_support(const Vector& x, const TruncationSet& T, std::size_t k);

/// sigma_k(x_T)_q: q-norm of x_T after removing its k largest-magnitude entries.
double sigma_k(const Vector& x, const TruncationSet& T, std::size_t k, double q);

/// ||v_{T∩K^c}||_q^q <= 2 sigma_k(x_T)_q^q + ||v_{T∩K}||_q^q with v = xhat - x and
/// K = best_k_support(x, T, k).
bool cone_constraint_holds(const Vector& x, const Vector& xhat, const TruncationSet& T,
                           std::size_t k, double q);

/// Both sides of the cone constraint, for reporting.
struct ConeConstraintSides {
  double lhs = 0.0;
  double rhs = 0.0;
};
ConeConstraintSides cone_constraint_sides(const Vector& x, const Vector& xhat,
                                          const TruncationSet& T, std::size_t k, double q);

/// Sum of |x_i|^q over the indices of `set`.
double qnorm_pow_on(const Vector& x, const TruncationSet& set, double q);

}  // namespace truncq
