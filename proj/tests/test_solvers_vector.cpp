#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "truncq/harness.hpp"
#include "truncq/numerics.hpp"
#include "truncq/solvers_vector.hpp"

using namespace truncq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

TruncationSet support_complement(const Vector& x) {
  std::vector<std::size_t> off;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] == 0.0) off.push_back(static_cast<std::size_t>(i));
  return TruncationSet(off, static_cast<std::size_t>(x.size()));
}

Vector oracle_on_support(const Matrix& A, const Vector& b, const Vector& x0) {
  std::vector<int> supp;
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (x0[i] != 0.0) supp.push_back(static_cast<int>(i));
  const Matrix As = oracle::columns(A, supp);
  const Vector xs = As.colPivHouseholderQr().solve(b);
  Vector out = Vector::Zero(x0.size());
  for (std::size_t j = 0; j < supp.size(); ++j) out[supp[j]] = xs[static_cast<Eigen::Index>(j)];
  return out;
}

const SolverConfig kConfig{};

}  // namespace

TEST(SolveTruncatedL1, IdentityReturnsB) {
  const Vector b = vec({1.5, -2, 0, 0.25});
  const auto rep = solve_truncated_l1(Matrix::Identity(4, 4), b, TruncationSet::full(4),
                                      LpBall{2.0, 0.0}, kConfig);
  EXPECT_LE((rep.solution - b).norm(), 1e-6);
  EXPECT_NEAR(rep.objective_value, 3.75, 1e-6);
}

TEST(SolveTruncatedL1, FreeCoordinateAbsorbsB) {
  Matrix A(2, 4);
  A << 1, 0, 1, 0, 0, 1, 0, 1;
  const Vector b = vec({1, 0});
  const TruncationSet T({1, 2, 3}, 4);
  const auto rep = solve_truncated_l1(A, b, T, LpBall{2.0, 0.0}, kConfig);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE((rep.solution - vec({1, 0, 0, 0})).norm(), 1e-7);
  EXPECT_NEAR(rep.objective_value, 0.0, 1e-6);
  const auto lp = oracle::truncated_l1_by_vertices(A, b, T.mask());
  EXPECT_NEAR(lp.objective, 0.0, 1e-12);
}

TEST(SolveTruncatedL1, OracleTruncationRecoversSparseSignal) {
  const Matrix A = gaussian_matrix(64, 128, 11);
  const Vector x0 = sparse_signal(128, 5, Flat{}, 12);
  const Vector b = A * x0;
  const auto rep = solve_truncated_l1(A, b, support_complement(x0), LpBall{2.0, 0.0}, kConfig);
  EXPECT_LE((rep.solution - oracle_on_support(A, b, x0)).norm(), 1e-5);
  EXPECT_LE((rep.solution - x0).norm(), 1e-5);
  EXPECT_LE((A * rep.solution - b).norm(), 1e-6 * b.norm());
}

TEST(SolveTruncatedL1, InfeasibleEqualityDetected) {
  Matrix A(2, 1);
  A << 1, 1;
  EXPECT_THROW(solve_truncated_l1(A, vec({1, 3}), TruncationSet::full(1), LpBall{2.0, 0.0}, kConfig),
               Error);
  EXPECT_THROW(solve_truncated_l1(A, vec({1, 1}), TruncationSet::full(1), LpBall{3.0, 0.1}, kConfig),
               Error);
}

TEST(SolveTruncatedL1, FeasibilityAndObjectiveAllNorms) {
  const Matrix A = gaussian_matrix(20, 40, 21);
  const Vector x0 = sparse_signal(40, 4, Power{1.0}, 22);
  for (double p : {1.0, 2.0, kInf}) {
    const NoiseConstraint c = LpBall{p, 0.05};
    const Vector b = add_noise(A * x0, c, 0.04, A, 23);
    const TruncationSet T = best_k_support(x0, TruncationSet::full(40), 2).complement();
    const auto rep = solve_truncated_l1(A, b, T, c, kConfig);
    ASSERT_TRUE(rep.converged) << "p = " << p;
    EXPECT_LE(constraint_violation(A, b, rep.solution, c), 1e-6 * (1.0 + b.norm()));
    EXPECT_NEAR(rep.objective_value, qnorm_pow(restrict(rep.solution, T), 1.0), 1e-10);
    // Truth is feasible, so the minimum cannot exceed its objective.
    EXPECT_LE(rep.objective_value, qnorm_pow(restrict(x0, T), 1.0) + 1e-6);
  }
}

TEST(SolveTruncatedL1, MatchesVertexEnumeration) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t m = 4 + trial % 4, n = 10;
    const Matrix A = gaussian_matrix(m, n, 100 + trial);
    const Vector b = A * sparse_signal(n, 3, Power{1.0}, 200 + trial);
    std::vector<std::size_t> Tc{static_cast<std::size_t>(trial % n)};
    const TruncationSet T = TruncationSet(Tc, n).complement();
    const auto rep = solve_truncated_l1(A, b, T, LpBall{2.0, 0.0}, kConfig);
    const auto lp = oracle::truncated_l1_by_vertices(A, b, T.mask());
    EXPECT_NEAR(rep.objective_value, lp.objective, 1e-6) << "trial " << trial;
  }
}

TEST(SolveTruncatedL1, EnlargingTcByTrueSupportNeverIncreasesObjective) {
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = gaussian_matrix(30, 60, 300 + trial);
    const Vector x0 = sparse_signal(60, 8, Power{1.0}, 400 + trial);
    const Vector b = A * x0;
    const TruncationSet Kx = best_k_support(x0, TruncationSet::full(60), 8);
    double previous = kInf;
    std::vector<std::size_t> tc;
    for (std::size_t i : Kx) {
      const auto rep =
          solve_truncated_l1(A, b, TruncationSet(tc, 60).complement(), LpBall{2.0, 0.0}, kConfig);
      EXPECT_LE(rep.objective_value, previous + 1e-7);
      previous = rep.objective_value;
      tc.push_back(i);
    }
  }
}

TEST(SolveTruncatedL1Ds, Examples) {
  const Matrix A = gaussian_matrix(10, 20, 41);
  const auto zero = solve_truncated_l1_ds(A, Vector::Zero(10), TruncationSet::full(20), 0.3, kConfig);
  EXPECT_EQ(zero.solution.norm(), 0.0);
  EXPECT_EQ(zero.objective_value, 0.0);

  const Vector b = A * sparse_signal(20, 3, Flat{}, 42);
  const double big = (A.transpose() * b).cwiseAbs().maxCoeff();
  const auto loose = solve_truncated_l1_ds(A, b, TruncationSet::full(20), big, kConfig);
  EXPECT_NEAR(loose.objective_value, 0.0, 1e-7);
}

TEST(SolveTruncatedL1Ds, RecoversWithOracleTruncation) {
  Matrix A = gaussian_matrix(64, 128, 51);
  A = A * A.colwise().norm().cwiseInverse().asDiagonal();
  const Vector x0 = sparse_signal(128, 5, Flat{}, 52);
  const Vector b = A * x0;
  const auto rep = solve_truncated_l1_ds(A, b, support_complement(x0), 0.0, kConfig);
  EXPECT_LE((rep.solution - x0).norm(), 1e-4);
}

TEST(SolveTruncatedL1Ds, FeasibleWithNoise) {
  const Matrix A = gaussian_matrix(30, 50, 61);
  const Vector x0 = sparse_signal(50, 4, Flat{}, 62);
  const NoiseConstraint c = DantzigSelector{0.05};
  const Vector b = add_noise(A * x0, c, 0.05, A, 63);
  const auto rep = solve_truncated_l1_ds(A, b, TruncationSet::full(50), 0.05, kConfig);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE((A.transpose() * (A * rep.solution - b)).cwiseAbs().maxCoeff(),
            0.05 + 1e-6 * (1.0 + b.norm()));
  EXPECT_LE(rep.objective_value, qnorm_pow(x0, 1.0) + 1e-6);
}

TEST(SolveTruncatedLq, IdentityReturnsB) {
  const Vector b = vec({1, -2, 0.5});
  for (double q : {0.3, 0.7}) {
    const auto rep = solve_truncated_lq(Matrix::Identity(3, 3), b, TruncationSet::full(3), q,
                                        LpBall{2.0, 0.0}, kConfig);
    EXPECT_LE((rep.solution - b).norm(), 1e-7);
    EXPECT_TRUE(rep.local_only);
  }
}

TEST(SolveTruncatedLq, NoWorseThanLeastSquaresStart) {
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix A = gaussian_matrix(20, 50, 70 + trial);
    const Vector b = A * sparse_signal(50, 6, Power{1.0}, 80 + trial);
    const TruncationSet T = TruncationSet::full(50);
    const auto rep = solve_truncated_lq(A, b, T, 0.5, LpBall{2.0, 0.0}, kConfig);
    const Vector ls = least_squares(A, b);
    EXPECT_LE(rep.objective_value, qnorm_pow(ls, 0.5) + 1e-9);
    EXPECT_NEAR(rep.objective_value, qnorm_pow(restrict(rep.solution, T), 0.5), 1e-10);
    for (std::size_t j = 1; j < rep.objective_history.size(); ++j)
      EXPECT_LE(rep.objective_history[j], rep.objective_history[j - 1] + 1e-12);
  }
}

TEST(SolveTruncatedLq, SuccessRateAtLeastConvexRate) {
  int ok_q = 0, ok_1 = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = gaussian_matrix(48, 128, 1000 + trial);
    const Vector x0 = sparse_signal(128, 5, Flat{}, 2000 + trial);
    const Vector b = A * x0;
    const auto r1 = solve_truncated_l1(A, b, TruncationSet::full(128), LpBall{2.0, 0.0}, kConfig);
    const auto rq =
        solve_truncated_lq(A, b, TruncationSet::full(128), 0.5, LpBall{2.0, 0.0}, kConfig);
    ok_1 += (r1.solution - x0).norm() <= 1e-4 * x0.norm();
    ok_q += (rq.solution - x0).norm() <= 1e-4 * x0.norm();
  }
  EXPECT_GE(ok_q, ok_1);
}

TEST(DetectSupport, FirstJumpAndTopJ) {
  const Vector x = vec({0.001, -1.0, 0.5, 0.0, 0.002});
  // Largest gap above 1/3 is between 0.002 and 0.5.
  EXPECT_EQ(detect_support(x, FirstJump{3.0}, 0), TruncationSet({1, 2}, 5));
  EXPECT_EQ(detect_support(Vector::Zero(3), FirstJump{3.0}, 0), TruncationSet::empty(3));
  EXPECT_EQ(detect_support(x, TopJ{{1, 3}}, 0), TruncationSet({1}, 5));
  EXPECT_EQ(detect_support(x, TopJ{{1, 3}}, 1), TruncationSet({1, 2, 4}, 5));
  EXPECT_EQ(detect_support(x, TopJ{{1, 3}}, 7), TruncationSet({1, 2, 4}, 5));
  EXPECT_THROW(detect_support(x, FirstJump{1.0}, 0), Error);
}

TEST(IsdRecover, FirstRoundIsPlainSolve) {
  const Matrix A = gaussian_matrix(40, 100, 91);
  const Vector b = A * sparse_signal(100, 10, Power{2.0}, 92);
  SolverConfig one = kConfig;
  one.isd_max_rounds = 1;
  const auto isd = isd_recover(A, b, 1.0, LpBall{2.0, 0.0}, one);
  const auto plain = solve_truncated_l1(A, b, TruncationSet::full(100), LpBall{2.0, 0.0}, kConfig);
  EXPECT_LE((isd.solution - plain.solution).norm(), 1e-12);
  ASSERT_FALSE(isd.support_history.empty());
  EXPECT_TRUE(isd.support_history.front().empty());
}

TEST(IsdRecover, FixpointWhenRoundZeroIsExact) {
  const Matrix A = gaussian_matrix(64, 128, 93);
  const Vector x0 = sparse_signal(128, 5, Flat{}, 94);
  const auto rep = isd_recover(A, A * x0, 1.0, LpBall{2.0, 0.0}, kConfig);
  EXPECT_LE((rep.solution - x0).norm(), 1e-6);
  EXPECT_LE(rep.support_history.size(), 3u);
  EXPECT_EQ(rep.support_history.back(), support_complement(x0).complement());
}

TEST(IsdRecover, FeasibleAndObjectiveConsistent) {
  const Matrix A = gaussian_matrix(50, 120, 95);
  const Vector x0 = sparse_signal(120, 12, Power{3.0}, 96);
  const NoiseConstraint c = LpBall{2.0, 1e-3};
  const Vector b = add_noise(A * x0, c, 1e-3, A, 97);
  const auto rep = isd_recover(A, b, 1.0, c, kConfig);
  EXPECT_LE(constraint_violation(A, b, rep.solution, c), 1e-6 * (1.0 + b.norm()));
  const TruncationSet T = rep.support_history.back().complement();
  EXPECT_NEAR(rep.objective_value, qnorm_pow(restrict(rep.solution, T), 1.0), 1e-10);
  EXPECT_LE(rep.support_history.size(), static_cast<std::size_t>(kConfig.isd_max_rounds));
}

TEST(SolverConfigValidation, RejectsBadValues) {
  SolverConfig c;
  c.tolerance = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = SolverConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), Error);
}
