#pragma once

// Truncated l_q minimization
//
//   minimize ||x_T||_q^q   subject to   b - A x in B
//
// for the l_p-ball noise set B = {z : ||z||_p <= eta} (p in {1, 2, inf}) and the
// Dantzig-selector set B = {z : ||A^T z||_inf <= eta}. The convex case q = 1 is
// solved by ADMM; 0 < q < 1 by iteratively reweighted l1 (local solutions only).
// Iterative support detection (ISD) alternates a truncated solve with support
// re-detection.

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "truncq/core.hpp"

namespace truncq {

struct SolverConfig {
  int max_iterations = 20000;
  double tolerance = 1e-8;
  double admm_rho = 1.0;
  int irl1_outer_iters = 6;
  double irl1_epsilon_start = 1.0;
  std::uint64_t seed = 0;
  /// Cap on the number of truncated solves performed by isd_recover.
  int isd_max_rounds = 12;

  void validate() const;
};

struct SolverReport {
  Vector solution;
  bool converged = false;
  int iterations_used = 0;
  double objective_value = 0.0;      // ||solution_T||_q^q
  double constraint_residual = 0.0;  // distance past the noise set boundary
  /// Detected supports I^(0) = {}, I^(1), ... (ISD only).
  std::vector<TruncationSet> support_history;
  /// Best objective after each IRL1 outer round, starting at the initial point.
  std::vector<double> objective_history;
  /// True for q < 1: the solution is a local one.
  bool local_only = false;
};

/// q = 1 with either noise set. Throws Infeasible when eta = 0 and b is not in
/// range(A); Unsupported for LpBall with p outside {1, 2, inf}.
SolverReport solve_truncated_l1(const Matrix& A, const Vector& b, const TruncationSet& T,
                                const NoiseConstraint& constraint, const SolverConfig& config);

/// q = 1 with the Dantzig-selector set ||A^T (b - A x)||_inf <= eta.
SolverReport solve_truncated_l1_ds(const Matrix& A, const Vector& b, const TruncationSet& T,
                                   double eta, const SolverConfig& config);

/// 0 < q < 1 by iteratively reweighted l1 with epsilon continuation.
SolverReport solve_truncated_lq(const Matrix& A, const Vector& b, const TruncationSet& T,
                                double q, const NoiseConstraint& constraint,
                                const SolverConfig& config);

/// First significant jump: sort |x| ascending and cut at the first gap between
/// consecutive magnitudes larger than ||x||_inf / factor^(round + 1).
struct FirstJump {
  double factor = 3.0;
};

/// Detect the `counts[round]` largest entries (last count repeats).
struct TopJ {
  std::vector<std::size_t> counts;
};

using ThresholdRule = std::variant<FirstJump, TopJ>;

/// Support detected from x at the given detection round.
TruncationSet detect_support(const Vector& x, const ThresholdRule& rule, int round);

/// Iterative support detection. Round 0 solves with T = {0..n-1}; each later
/// solve uses T = I^c for the detected support I. Detection rounds that leave I
/// unchanged do not trigger a solve; the loop ends once the rule's threshold
/// has dropped below 1e-6 ||x||_inf (I has stabilized) or after
/// config.isd_max_rounds solves.
SolverReport isd_recover(const Matrix& A, const Vector& b, double q,
                         const NoiseConstraint& constraint, const SolverConfig& config,
                         const ThresholdRule& rule = FirstJump{});

/// max(0, ||Ax - b||_p - eta) or max(0, ||A^T(Ax - b)||_inf - eta).
double constraint_violation(const Matrix& A, const Vector& b, const Vector& x,
                            const NoiseConstraint& constraint);

/// Reusable solver for a fixed (A, b, constraint): caches the ADMM
/// factorizations across IRL1 and ISD rounds.
class WeightedL1Solver {
 public:
  WeightedL1Solver(const Matrix& A, const Vector& b, const NoiseConstraint& constraint,
                   const SolverConfig& config);
  ~WeightedL1Solver();
  WeightedL1Solver(WeightedL1Solver&&) noexcept;
  WeightedL1Solver& operator=(WeightedL1Solver&&) noexcept;

  /// minimize sum_i w_i |x_i| over the noise set.
  SolverReport solve(const Vector& weights, const Vector* warm_start = nullptr) const;

  /// Truncated l1 (weights 1 on T, 0 elsewhere).
  SolverReport solve_truncated(const TruncationSet& T, const Vector* warm_start = nullptr) const;

  /// Truncated lq via IRL1 for 0 < q < 1.
  SolverReport solve_truncated_lq(const TruncationSet& T, double q,
                                  const Vector* warm_start = nullptr) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace truncq
