#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "truncq/numerics.hpp"

using namespace truncq;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n) {
  std::normal_distribution<double> g;
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  return A;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

}  // namespace

TEST(Svd, Examples) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  EXPECT_NEAR((svd(D).singular_values - vec({2, 1})).norm(), 0.0, 1e-14);
  EXPECT_EQ(svd(Matrix::Zero(3, 5)).singular_values.norm(), 0.0);
  std::mt19937_64 rng(1);
  const Matrix X = random_matrix(rng, 5, 3);
  EXPECT_LE((svd(X).reconstruct() - X).norm(), 1e-9);
}

TEST(Svd, InvariantsOnRandomShapes) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix X = random_matrix(rng, dim(rng), dim(rng));
    const SvdFactorization f = svd(X);
    const Eigen::Index l = std::min(X.rows(), X.cols());
    ASSERT_EQ(f.singular_values.size(), l);
    EXPECT_LE((f.U.transpose() * f.U - Matrix::Identity(l, l)).norm(), 1e-10);
    EXPECT_LE((f.V.transpose() * f.V - Matrix::Identity(l, l)).norm(), 1e-10);
    EXPECT_LE((f.reconstruct() - X).norm(), 1e-9 * std::max(1.0, X.norm()));
    for (Eigen::Index j = 1; j < l; ++j) EXPECT_GE(f.singular_values[j - 1], f.singular_values[j]);
    EXPECT_GE(f.singular_values.minCoeff(), 0.0);
    // Independent oracle.
    const Vector ref = oracle::singular_values(X);
    EXPECT_LE((f.singular_values - ref).norm(), 1e-10 * std::max(1.0, ref[0]));
  }
}

TEST(Svd, MatchesGramEigenvalues) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix X = random_matrix(rng, 6, 4);
    const Vector s = singular_values(X);
    const SymmetricEigen es = symmetric_eigen(X.transpose() * X);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double from_eig = std::sqrt(std::max(es.values[3 - j], 0.0));
      EXPECT_NEAR(s[j], from_eig, 1e-8 * std::max(1.0, s[0]));
    }
  }
}

TEST(NumericalSingularValues, ZeroesRoundingLevelValues) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix Q = Eigen::HouseholderQR<Matrix>(random_matrix(rng, 6, 6)).householderQ();
    Matrix X = Matrix::Zero(6, 5);
    X.topLeftCorner(2, 2) = random_matrix(rng, 2, 2);
    X = Q * X;
    const Vector s = numerical_singular_values(X);
    const Vector raw = singular_values(X);
    EXPECT_EQ(s.tail(3).norm(), 0.0);
    EXPECT_EQ(s.head(2), raw.head(2));
    // Rounding noise is what it removes: (1e-16)^0.3 is far from negligible.
    EXPECT_LE(raw.tail(3).maxCoeff(), 1e-13 * raw[0]);
  }
  const Matrix D = Eigen::Vector3d(3.0, 1e-9, 0.0).asDiagonal();
  EXPECT_EQ(numerical_singular_values(D)[1], 1e-9);
}

TEST(SymmetricEigen, AgainstEigen) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix B = random_matrix(rng, 7, 7);
    const Matrix S = B + B.transpose();
    const SymmetricEigen es = symmetric_eigen(S);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(S);
    EXPECT_LE((es.values - ref.eigenvalues()).norm(), 1e-10 * S.norm());
    EXPECT_LE((S * es.vectors - es.vectors * es.values.asDiagonal()).norm(), 1e-9 * S.norm());
  }
}

TEST(ExtremalRayleigh, Examples) {
  const Matrix I = Matrix::Identity(4, 4);
  const auto r = extremal_rayleigh(I, TruncationSet({1, 3}, 4), 2.0);
  EXPECT_NEAR(r.min, 1.0, 1e-12);
  EXPECT_NEAR(r.max, 1.0, 1e-12);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  const auto d = extremal_rayleigh(D, TruncationSet::full(2), 2.0);
  EXPECT_NEAR(d.min, 1.0, 1e-12);
  EXPECT_NEAR(d.max, 4.0, 1e-12);
  Matrix dup(3, 2);
  dup << 1, 1, 2, 2, -1, -1;
  const auto z = extremal_rayleigh(dup, TruncationSet::full(2), 2.0);
  EXPECT_NEAR(z.min, 0.0, 1e-12);
  EXPECT_NEAR(z.max, 2.0 * 6.0, 1e-12);
  EXPECT_THROW(extremal_rayleigh(I, TruncationSet::empty(4), 2.0), Error);
}

TEST(ExtremalRayleigh, BoundsSampledQuotients) {
  std::mt19937_64 rng(5);
  const Matrix A = random_matrix(rng, 6, 9);
  const TruncationSet S({0, 2, 5, 8}, 9);
  const auto r = extremal_rayleigh(A, S, 2.0);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10000; ++trial) {
    Vector x = Vector::Zero(9);
    for (std::size_t i : S) x[static_cast<Eigen::Index>(i)] = g(rng);
    const double ratio = (A * x).squaredNorm() / x.squaredNorm();
    EXPECT_GE(ratio, r.min - 1e-10);
    EXPECT_LE(ratio, r.max + 1e-10);
  }
}

TEST(ExtremalRayleigh, SampledForSmallP) {
  std::mt19937_64 rng(6);
  const Matrix A = random_matrix(rng, 5, 6);
  const auto r = extremal_rayleigh(A, TruncationSet({0, 1}, 6), 1.0, 7);
  EXPECT_FALSE(r.exact);
  EXPECT_LE(r.min, r.max);
}

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(vec({3, -1}), vec({1, 1})), vec({2, 0}));
  EXPECT_EQ(soft_threshold(vec({3, -1}), vec({0, 0})), vec({3, -1}));
  EXPECT_EQ(soft_threshold(vec({0.5}), vec({1})), vec({0}));
  EXPECT_THROW(soft_threshold(vec({1}), vec({-1})), Error);
}

TEST(ProjectLpBall, Examples) {
  EXPECT_EQ(project_lp_ball(vec({3, 4}), 2.0, 5.0), vec({3, 4}));
  EXPECT_NEAR((project_lp_ball(vec({3, 4}), 2.0, 1.0) - vec({0.6, 0.8})).norm(), 0.0, 1e-15);
  EXPECT_EQ(project_lp_ball(vec({2, 0}), kInf, 1.0), vec({1, 0}));
  EXPECT_THROW(project_lp_ball(vec({2, 0}), 3.0, 1.0), Error);
  // l1 ball: (3, 1) onto radius 2 is (2, 0).
  EXPECT_NEAR((project_lp_ball(vec({3, 1}), 1.0, 2.0) - vec({2, 0})).norm(), 0.0, 1e-15);
}

TEST(ProjectLpBall, IdempotentNonexpansiveFeasible) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rad(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector u = random_matrix(rng, 6, 1).col(0) * 2.0;
    const Vector v = random_matrix(rng, 6, 1).col(0) * 2.0;
    const double radius = rad(rng);
    for (double p : {1.0, 2.0, kInf}) {
      const Vector pu = project_lp_ball(u, p, radius);
      const Vector pv = project_lp_ball(v, p, radius);
      EXPECT_LE(qnorm(pu, p), radius + 1e-12);
      EXPECT_LE((project_lp_ball(pu, p, radius) - pu).norm(), 1e-12);
      EXPECT_LE((pu - pv).norm(), (u - v).norm() + 1e-12);
    }
  }
}

TEST(ProjectLpBall, L1MatchesBruteForceOnSmallCase) {
  // Projection onto the l1 ball minimizes ||y - v||_2; compare with a dense
  // search over the boundary in two dimensions.
  const Vector v = vec({1.7, -0.4});
  const Vector p = project_lp_ball(v, 1.0, 1.0);
  double best = 1e9;
  for (int i = 0; i <= 400000; ++i) {
    const double a = -1.0 + 2.0 * i / 400000.0;
    for (double sign : {1.0, -1.0}) {
      const Vector y = vec({a, sign * (1.0 - std::abs(a))});
      best = std::min(best, (y - v).norm());
    }
  }
  EXPECT_NEAR((p - v).norm(), best, 1e-6);
}

TEST(LeastSquares, Examples) {
  const Vector b = vec({1, -2, 3});
  EXPECT_LE((least_squares(Matrix::Identity(3, 3), b) - b).norm(), 1e-14);
  Matrix A(2, 1);
  A << 1, 1;
  EXPECT_NEAR(least_squares(A, vec({1, 3}))[0], 2.0, 1e-14);
  std::mt19937_64 rng(8);
  const Matrix B = random_matrix(rng, 9, 4);
  const Vector x0 = random_matrix(rng, 4, 1).col(0);
  EXPECT_LE((B * least_squares(B, B * x0) - B * x0).norm(), 1e-10);
}

TEST(LeastSquares, ResidualOrthogonalAndMinimumNorm) {
  std::mt19937_64 rng(9);
  Matrix A = random_matrix(rng, 7, 5);
  A.col(4) = A.col(0) + A.col(1);  // rank deficient
  const Vector b = random_matrix(rng, 7, 1).col(0);
  const Vector x = least_squares(A, b);
  EXPECT_LE((A.transpose() * (A * x - b)).norm(), 1e-9);
  const Vector ref = A.completeOrthogonalDecomposition().solve(b);
  EXPECT_LE((x - ref).norm(), 1e-9);
}

TEST(NullSpaceBasis, OrthonormalAndAnnihilated) {
  std::mt19937_64 rng(10);
  const Matrix A = random_matrix(rng, 3, 7);
  const Matrix N = null_space_basis(A);
  ASSERT_EQ(N.cols(), 4);
  EXPECT_LE((A * N).norm(), 1e-10);
  EXPECT_LE((N.transpose() * N - Matrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(SchattenNorm, Values) {
  Matrix D = Matrix::Zero(3, 3);
  D(0, 0) = 4.0;
  D(1, 1) = 1.0;
  EXPECT_NEAR(schatten_norm(D, 1.0), 5.0, 1e-14);
  EXPECT_NEAR(schatten_norm(D, 2.0), std::sqrt(17.0), 1e-14);
  EXPECT_NEAR(schatten_norm(D, kInf), 4.0, 1e-14);
  EXPECT_NEAR(schatten_norm(D, 0.5), 9.0, 1e-12);
}
