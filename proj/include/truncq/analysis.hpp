#pragma once

// Restricted isometry constants, searches for violations of the truncated
// sparse approximation property (TSAP) and the truncated null space property,
// and the closed-form recovery constants and error bounds.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "truncq/core.hpp"

namespace truncq {

// ---------------------------------------------------------------------------
// Restricted isometry constants

struct RipEstimate {
  std::size_t k = 0;
  double p = 2.0;
  double delta = 0.0;
  TruncationSet extremal_support;
  /// True only for full enumeration at p = 2.
  bool exact = false;
  /// Set when the estimate is vacuous (no samples were drawn).
  bool warning = false;
  std::size_t supports_examined = 0;
};

struct RipOptions {
  /// Enumeration refuses above this many supports unless sampling is allowed.
  double max_supports = 2e6;
  bool allow_sampling = false;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
};

/// delta_k = max over |S| = k of max(1 - min Rayleigh, max Rayleigh - 1) of
/// ||Ax||_p^p / ||x||_2^p. Throws CombinatorialBlowup when C(n, k) exceeds the
/// cap and sampling was not requested.
RipEstimate rip_constant(const Matrix& A, std::size_t k, double p = 2.0,
                         const RipOptions& options = {});

/// Randomized lower bound on the rank-k isometry constant of a matrix map,
/// from sampled rank-k matrices refined by alternating maximization (p = 2).
RipEstimate rip_constant_map(const LinearMatrixMap& map, std::size_t k, double p,
                             std::size_t trials, std::uint64_t seed = 0);

/// Number of k-subsets of an n-set as a double (saturates instead of overflowing).
double binomial(std::size_t n, std::size_t k);

// ---------------------------------------------------------------------------
// TSAP / null space property searches

enum class TsapMode { LpForm, DantzigForm };

struct SearchBudget {
  std::size_t random_samples = 10000;  // per truncation set
  std::size_t restarts = 20;           // coordinate-ascent restarts per truncation set
  std::size_t max_sweeps = 100;
  /// Truncation sets are enumerated when C(n, t) <= max_sets, else sampled.
  double max_sets = 1e4;
  std::size_t sampled_sets = 200;
  std::uint64_t seed = 0;
  /// When set and the search finds nothing, the verdict is Certified.
  std::optional<std::string> certificate;
};

struct Certified {
  std::string source;
  std::size_t samples = 0;
};
struct PassedSampling {
  std::size_t samples = 0;
};
struct Violated {
  Vector x;
  Vector y;  // second vector of a pair (iff check only), else empty
  TruncationSet T;
  TruncationSet K;
  double lhs = 0.0;
  double rhs = 0.0;
};
using TsapVerdict = std::variant<Certified, PassedSampling, Violated>;

struct TsapReport {
  std::size_t k = 0;
  std::size_t t = 0;
  NormTriple norms;
  double D = 0.0;
  double beta = 0.0;
  TsapMode mode = TsapMode::LpForm;
  TsapVerdict verdict;
  std::size_t sets_checked = 0;
  /// Largest observed (||x_K||_r^q - beta k^(q/r-1) sigma^q) / ||Ax||_p^q.
  double worst_ratio = 0.0;

  bool violated() const { return std::holds_alternative<Violated>(verdict); }
};

/// Both sides of ||x_K||_r^q <= D ||Ax||_p^q + beta k^(q/r-1) sigma_k(x_T)_q^q
/// (||A^T A x||_inf in place of ||Ax||_p in Dantzig form).
struct TsapSides {
  double lhs = 0.0;
  double rhs = 0.0;
  TruncationSet K;
};
TsapSides tsap_sides(const Matrix& A, const Vector& x, const TruncationSet& T, std::size_t k,
                     const NormTriple& norms, double D, double beta, TsapMode mode);

TsapReport tsap_check(const Matrix& A, std::size_t k, std::size_t t, const NormTriple& norms,
                      double D, double beta, TsapMode mode, const SearchBudget& budget = {});

/// ||x_K||_r^q <= beta k^(q/r-1) sigma_k(x_T)_q^q over null-space vectors of A.
/// Throws TrivialNullSpace when A is injective.
TsapReport nsp_check(const Matrix& A, std::size_t k, std::size_t t, double beta,
                     const SearchBudget& budget = {}, const NormTriple& norms = {1.0, 1.0, 2.0});

/// Pair inequality
///   ||(y-x)_T||_q^q <= (1+beta)/(1-beta) (||y_T||_q^q - ||x_T||_q^q + 2 sigma_k(x_T)_q^q)
///                      + 2D/(1-beta) ||A(y-x)||_p^q
/// sampled over random pairs and pairs built from TSAP search witnesses.
TsapReport iff_condition_check(const Matrix& A, std::size_t k, std::size_t t, double q, double D,
                               double beta, TsapMode mode, const SearchBudget& budget = {},
                               double p = 2.0);

struct IffSides {
  double lhs = 0.0;
  double rhs = 0.0;
};
IffSides iff_sides(const Matrix& A, const Vector& x, const Vector& y, const TruncationSet& T,
                   std::size_t k, double q, double D, double beta, TsapMode mode, double p = 2.0);

// ---------------------------------------------------------------------------
// Constants from isometry constants

struct TsapConstants {
  double D1 = 0.0;
  double D2 = 0.0;
  double beta = 0.0;
};

/// beta = delta / sqrt((t-1)(1-delta^2)), D1 = 2 sqrt(1+delta) / (1-delta^2),
/// D2 = 2 sqrt(2(k+|T^c|)) / (1-delta^2). Throws DeltaOutOfRange unless
/// delta < sqrt((t-1)/t) (ignored with force).
TsapConstants tsap_constants_from_rip(double delta, double t_factor, std::size_t k,
                                      std::size_t tc_size, bool force = false);

enum class SparsityOrder { OneK, TwoK };

/// C with (1/C) ||x||_r^q <= ||Ax||_p^q on Sigma_k(T) (OneK) or Sigma_2k(T) (TwoK).
double rip_lower_from_tsap(double D, double beta, std::size_t k, std::size_t t,
                           std::size_t tc_size, const NormTriple& norms, SparsityOrder order);

// ---------------------------------------------------------------------------
// Error bounds

enum class BoundForm { Rq, QqStrict, QqEqual };

struct BoundReport {
  std::string theorem;
  double delta = 0.0;  // NaN when the bound was given D and beta directly
  double t_factor = 0.0;
  double D = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
  std::size_t t = 0;  // |T|
  std::size_t tc_size = 0;
  double q = 1.0;
  double r = 2.0;
  double eps = 0.0;
  double eta = 0.0;
  double sigma = 0.0;       // sigma_k(x_T)_q as a norm
  double noise_term = 0.0;  // (eps + eta)^q
  double sigma_term = 0.0;  // what the compressibility coefficient multiplies
  double noise_coefficient = 0.0;
  double compressibility_coefficient = 0.0;
  double bound_value = 0.0;
};

/// Recovery bound from TSAP constants; Rq bounds ||xhat - x||_r^q, the other
/// two forms bound ||xhat - x||_q^q. Throws WhichMismatch when the form does
/// not match q < r / q = r.
BoundReport bound_theorem23(const NormTriple& norms, double D, double beta, std::size_t k,
                            std::size_t t, std::size_t tc_size, double eps, double eta,
                            double sigma, BoundForm which);

/// l2 error bound for q = 1, r = 2 using constants derived from delta (D1 in
/// Lp form, D2 in Dantzig form). `t` is |T|.
BoundReport bound_theorem35(double delta, double t_factor, std::size_t k, std::size_t tc_size,
                            std::size_t t, double eps, double eta, double sigma1,
                            TsapMode mode = TsapMode::LpForm);

/// l2 error bound for plain l1 minimization (no truncation) from delta_{tk}.
BoundReport bound_theorem36(double delta, double t_factor, std::size_t k, double eps, double eta,
                            double sigma1, TsapMode mode = TsapMode::LpForm);

/// Recomputes noise_coefficient * noise_term + compressibility_coefficient * sigma_term.
double recompute_bound(const BoundReport& report);

// ---------------------------------------------------------------------------
// Schatten-norm facts used by the matrix recovery argument

/// Sides of sum_{j<k} |lambda_j(X)^q - lambda_j(Y)^q| <= sum_{j<k} lambda_j(X - Y)^q.
struct PerturbationSides {
  double lhs = 0.0;
  double rhs = 0.0;
};
PerturbationSides perturbation_sides(const Matrix& X, const Matrix& Y, std::size_t k, double q);

/// Matrix cone constraint with V = Xhat - X, K = best k positions of lambda(X)_T,
/// and the restrictions of V taken in lambda(V)'s own ordering:
///   sum_{T∩K^c} lambda_j(V)^q <= 2 sigma_k(lambda(X)_T)_q^q + sum_{T∩K} lambda_j(V)^q.
ConeConstraintSides matrix_cone_constraint_sides(const Matrix& X, const Matrix& Xhat,
                                                 const TruncationSet& T, std::size_t k,
                                                 double q);

}  // namespace truncq
