#include <algorithm>
#include <cmath>
#include <random>

#include "combinatorics.hpp"
#include "truncq/analysis.hpp"
#include "truncq/numerics.hpp"

namespace truncq {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(out);
}

RipEstimate rip_constant(const Matrix& A, std::size_t k, double p, const RipOptions& options) {
  require_finite(A, "A");
  const auto n = static_cast<std::size_t>(A.cols());
  require(k >= 1 && k <= n, ErrorCode::InvalidInput, "rip_constant: need 1 <= k <= n");
  require(p == 2.0 || (p > 0.0 && p <= 1.0), ErrorCode::Unsupported,
          "rip_constant supports p = 2 and 0 < p <= 1");

  RipEstimate est;
  est.k = k;
  est.p = p;
  est.extremal_support = TruncationSet(std::vector<std::size_t>{}, n);
  bool all_exact = true;
  double best = -1.0;

  auto visit = [&](const std::vector<std::size_t>& idx) {
    const TruncationSet S(idx, n);
    const RayleighRange range = extremal_rayleigh(A, S, p, options.seed);
    all_exact = all_exact && range.exact;
    const double dev = std::max(1.0 - range.min, range.max - 1.0);
    ++est.supports_examined;
    if (dev > best) {
      best = dev;
      est.extremal_support = S;
    }
    return true;
  };

  const double count = binomial(n, k);
  if (count <= options.max_supports) {
    detail::for_each_combination(n, k, visit);
    est.exact = all_exact;
  } else {
    if (!options.allow_sampling) {
      throw Error(ErrorCode::CombinatorialBlowup,
                  "rip_constant: C(n, k) exceeds the enumeration cap");
    }
    std::mt19937_64 rng(options.seed);
    for (std::size_t s = 0; s < options.samples; ++s) visit(detail::random_subset(n, k, rng));
    est.exact = false;
    est.warning = options.samples == 0;
  }
  est.delta = std::max(best, 0.0);
  return est;
}

namespace {

Vector vectorize(const Matrix& X) { return Eigen::Map<const Vector>(X.data(), X.size()); }

double map_ratio(const LinearMatrixMap& map, const Matrix& X, double p) {
  const double fro = X.norm();
  if (fro == 0.0) return 1.0;
  const Vector y = map.stacked() * vectorize(X);
  return std::pow(qnorm(y, p) / fro, p);
}

Matrix orthonormal_columns(const Matrix& W) { return svd(W).U; }

// With the right factor V (n x k, orthonormal columns) fixed, X = U V^T has
// ||X||_F = ||U||_F and ||A(X)||_2^2 is a quadratic form in vec(U); its
// extreme eigenpairs are the best U for the two directions. Same with U fixed.
struct Extreme {
  double value;
  Matrix factor;
};

Extreme best_left(const LinearMatrixMap& map, const Matrix& V, bool maximize) {
  const Eigen::Index m = map.rows();
  const Eigen::Index k = V.cols();
  Matrix B(map.size(), m * k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index i = 0; i < m; ++i) {
      Matrix E = Matrix::Zero(m, map.cols());
      E.row(i) = V.col(a).transpose();
      B.col(a * m + i) = map.stacked() * vectorize(E);
    }
  }
  const SymmetricEigen eig = symmetric_eigen(B.transpose() * B);
  const Eigen::Index j = maximize ? eig.values.size() - 1 : 0;
  const Vector u = eig.vectors.col(j);
  return {eig.values[j], Eigen::Map<const Matrix>(u.data(), m, k)};
}

Extreme best_right(const LinearMatrixMap& map, const Matrix& U, bool maximize) {
  const Eigen::Index n = map.cols();
  const Eigen::Index k = U.cols();
  Matrix B(map.size(), n * k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix E = Matrix::Zero(map.rows(), n);
      E.col(j) = U.col(a);
      B.col(a * n + j) = map.stacked() * vectorize(E);
    }
  }
  const SymmetricEigen eig = symmetric_eigen(B.transpose() * B);
  const Eigen::Index j = maximize ? eig.values.size() - 1 : 0;
  const Vector v = eig.vectors.col(j);
  return {eig.values[j], Eigen::Map<const Matrix>(v.data(), n, k)};
}

}  // namespace

RipEstimate rip_constant_map(const LinearMatrixMap& map, std::size_t k, double p,
                             std::size_t trials, std::uint64_t seed) {
  const auto l = static_cast<std::size_t>(std::min(map.rows(), map.cols()));
  require(k >= 1 && k <= l, ErrorCode::InvalidInput, "rip_constant_map: need 1 <= k <= min(m, n)");
  require(p > 0.0, ErrorCode::InvalidInput, "rip_constant_map: p must be positive");
  RipEstimate est;
  est.k = k;
  est.p = p;
  est.exact = false;
  est.extremal_support = TruncationSet::full(k);
  est.warning = trials == 0;
  if (trials == 0) return est;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto kk = static_cast<Eigen::Index>(k);
  auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
    Matrix G(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) G(i, j) = normal(rng);
    return G;
  };
  double dev = 0.0;
  auto record = [&](double ratio) { dev = std::max({dev, ratio - 1.0, 1.0 - ratio}); };

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Matrix U0 = gaussian(map.rows(), kk);
    const Matrix V0 = gaussian(map.cols(), kk);
    record(map_ratio(map, U0 * V0.transpose(), p));
    ++est.supports_examined;
    if (p != 2.0) continue;
    for (bool maximize : {true, false}) {
      Matrix V = orthonormal_columns(V0);
      for (int sweep = 0; sweep < 10; ++sweep) {
        const Extreme left = best_left(map, V, maximize);
        record(left.value);
        const Matrix U = orthonormal_columns(left.factor);
        const Extreme right = best_right(map, U, maximize);
        record(right.value);
        V = orthonormal_columns(right.factor);
      }
    }
  }
  est.delta = dev;
  return est;
}

}  // namespace truncq
