#include "truncq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace truncq {

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiTolerance = 1e-12;

// Extends the orthonormal columns Q(:, 0..filled) to `target` orthonormal
// columns by Gram-Schmidt against the standard basis.
void complete_orthonormal(Matrix& Q, Eigen::Index filled, Eigen::Index target) {
  const Eigen::Index dim = Q.rows();
  Eigen::Index next = filled;
  for (Eigen::Index e = 0; e < dim && next < target; ++e) {
    Vector cand = Vector::Unit(dim, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < next; ++j) cand -= Q.col(j).dot(cand) * Q.col(j);
    }
    const double norm = cand.norm();
    if (norm > 1e-6) {
      Q.col(next++) = cand / norm;
    }
  }
  if (next < target) throw Error(ErrorCode::NumericalFailure, "orthonormal completion failed");
}

// Re-orthogonalizes column j of Q against columns 0..j-1 and normalizes it.
// Returns false when the column collapses.
bool reorthogonalize(Matrix& Q, Eigen::Index j) {
  Vector col = Q.col(j);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < j; ++i) col -= Q.col(i).dot(col) * Q.col(i);
  }
  const double norm = col.norm();
  if (norm < 1e-6) return false;
  Q.col(j) = col / norm;
  return true;
}

}  // namespace

Matrix SvdFactorization::reconstruct() const {
  return U * singular_values.asDiagonal() * V.transpose();
}

SvdFactorization svd(const Matrix& X) {
  require_finite(X, "X");
  const bool wide = X.rows() < X.cols();
  Matrix W = wide ? Matrix(X.transpose()) : X;
  const Eigen::Index rows = W.rows();
  const Eigen::Index cols = W.cols();
  Matrix R = Matrix::Identity(cols, cols);
  // Columns below this squared norm are rounding noise; rotating them never settles.
  const double negligible = std::pow(std::numeric_limits<double>::epsilon() * W.norm(), 2);

  bool converged = cols < 2;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < cols; ++i) {
      for (Eigen::Index j = i + 1; j < cols; ++j) {
        const double alpha = W.col(i).squaredNorm();
        const double beta = W.col(j).squaredNorm();
        const double gamma = W.col(i).dot(W.col(j));
        if (gamma == 0.0 || alpha <= negligible || beta <= negligible ||
            std::abs(gamma) <= kJacobiTolerance * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double wi = W(r, i);
          const double wj = W(r, j);
          W(r, i) = c * wi - s * wj;
          W(r, j) = s * wi + c * wj;
        }
        for (Eigen::Index r = 0; r < cols; ++r) {
          const double vi = R(r, i);
          const double vj = R(r, j);
          R(r, i) = c * vi - s * vj;
          R(r, j) = s * vi + c * vj;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw Error(ErrorCode::NumericalFailure, "Jacobi SVD did not converge");

  Vector sigma(cols);
  for (Eigen::Index j = 0; j < cols; ++j) sigma[j] = W.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return sigma[a] > sigma[b]; });

  SvdFactorization out;
  out.singular_values.resize(cols);
  Matrix left(rows, cols);
  Matrix right(cols, cols);
  const double smax = cols > 0 ? sigma[order[0]] : 0.0;
  Eigen::Index filled = 0;
  bool needs_completion = false;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.singular_values[j] = sigma[src];
    right.col(j) = R.col(src);
    if (needs_completion || sigma[src] <= std::numeric_limits<double>::min() ||
        sigma[src] <= 1e-300 + 64 * std::numeric_limits<double>::epsilon() * smax) {
      needs_completion = true;
      continue;
    }
    left.col(j) = W.col(src) / sigma[src];
    if (sigma[src] < 1e-8 * smax && !reorthogonalize(left, j)) {
      needs_completion = true;
      continue;
    }
    filled = j + 1;
  }
  if (filled < cols) complete_orthonormal(left, filled, cols);

  if (wide) {
    out.U = std::move(right);
    out.V = std::move(left);
  } else {
    out.U = std::move(left);
    out.V = std::move(right);
  }
  return out;
}

Vector singular_values(const Matrix& X) { return svd(X).singular_values; }

Vector numerical_singular_values(const Matrix& X) {
  Vector s = singular_values(X);
  if (s.size() == 0) return s;
  const double cutoff = static_cast<double>(std::max(X.rows(), X.cols())) *
                        std::numeric_limits<double>::epsilon() * s[0];
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s[j] <= cutoff) s[j] = 0.0;
  return s;
}

SymmetricEigen symmetric_eigen(const Matrix& S) {
  require(S.rows() == S.cols(), ErrorCode::InvalidInput, "symmetric_eigen needs a square matrix");
  require_finite(S, "S");
  const Eigen::Index n = S.rows();
  Matrix a = 0.5 * (S + S.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw Error(ErrorCode::NumericalFailure, "Jacobi eigensolver did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values[j] = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

namespace {

Matrix columns(const Matrix& A, const TruncationSet& support) {
  Matrix sub(A.rows(), static_cast<Eigen::Index>(support.size()));
  Eigen::Index j = 0;
  for (auto i : support) sub.col(j++) = A.col(static_cast<Eigen::Index>(i));
  return sub;
}

double lp_pow(const Vector& y, double p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += std::pow(std::abs(y[i]), p);
  return acc;
}

// Sampled extremes of ||By||_p^p on the unit sphere for 0 < p <= 1.
RayleighRange sampled_lp_range(const Matrix& B, double p, std::uint64_t seed) {
  constexpr int kStarts = 50;
  constexpr int kSteps = 300;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index dim = B.cols();
  RayleighRange out{kInf, -kInf, false};

  auto gradient = [&](const Vector& y) {
    const Vector z = B * y;
    Vector w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double mag = std::sqrt(z[i] * z[i] + 1e-12);
      w[i] = p * std::pow(mag, p - 2.0) * z[i];
    }
    return Vector(B.transpose() * w);
  };

  for (int start = 0; start < kStarts; ++start) {
    for (double direction : {-1.0, 1.0}) {
      Vector y(dim);
      for (Eigen::Index i = 0; i < dim; ++i) y[i] = normal(rng);
      y.normalize();
      double step = 0.1;
      for (int it = 0; it < kSteps; ++it) {
        const double value = lp_pow(B * y, p);
        out.min = std::min(out.min, value);
        out.max = std::max(out.max, value);
        Vector g = gradient(y);
        g -= g.dot(y) * y;
        const double gn = g.norm();
        if (gn < 1e-14) break;
        y += direction * step * g / gn;
        y.normalize();
        step *= 0.98;
      }
      const double value = lp_pow(B * y, p);
      out.min = std::min(out.min, value);
      out.max = std::max(out.max, value);
    }
  }
  return out;
}

}  // namespace

RayleighRange extremal_rayleigh(const Matrix& A, const TruncationSet& support, double p,
                                std::uint64_t seed) {
  require(!support.empty(), ErrorCode::InvalidInput, "extremal_rayleigh: empty support");
  require(support.ambient() == static_cast<std::size_t>(A.cols()), ErrorCode::InvalidInput,
          "extremal_rayleigh: support ambient differs from column count");
  const Matrix sub = columns(A, support);
  if (p == 2.0) {
    const SymmetricEigen eig = symmetric_eigen(sub.transpose() * sub);
    return {eig.values[0], eig.values[eig.values.size() - 1], true};
  }
  require(p > 0.0 && p <= 1.0, ErrorCode::Unsupported,
          "extremal_rayleigh supports p = 2 or 0 < p <= 1");
  return sampled_lp_range(sub, p, seed);
}

Vector soft_threshold(const Vector& v, const Vector& weights) {
  require(v.size() == weights.size(), ErrorCode::InvalidInput,
          "soft_threshold: weights length differs");
  require((weights.array() >= 0.0).all(), ErrorCode::InvalidInput,
          "soft_threshold: negative weight");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - weights[i];
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector project_lp_ball(const Vector& v, double p, double radius) {
  require(radius >= 0.0, ErrorCode::InvalidInput, "project_lp_ball: negative radius");
  if (p == 2.0) {
    const double norm = v.norm();
    return norm <= radius ? v : Vector(v * (radius / norm));
  }
  if (p == kInf) {
    return v.cwiseMax(-radius).cwiseMin(radius);
  }
  if (p == 1.0) {
    const Vector mag = v.cwiseAbs();
    if (mag.sum() <= radius) return v;
    if (radius == 0.0) return Vector::Zero(v.size());
    std::vector<double> sorted(mag.data(), mag.data() + mag.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      cumulative += sorted[j];
      const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
      if (sorted[j] - candidate > 0.0) theta = candidate;
    }
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double m = mag[i] - theta;
      out[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
    }
    return out;
  }
  throw Error(ErrorCode::Unsupported, "project_lp_ball supports p in {1, 2, inf}");
}

Vector least_squares(const Matrix& A, const Vector& b) {
  require(A.rows() == b.size(), ErrorCode::InvalidInput, "least_squares: shape mismatch");
  require_finite(b, "b");
  const SvdFactorization f = svd(A);
  const double smax = f.singular_values.size() ? f.singular_values[0] : 0.0;
  const double tol = static_cast<double>(std::max(A.rows(), A.cols())) *
                     std::numeric_limits<double>::epsilon() * smax;
  Vector coeff = f.U.transpose() * b;
  for (Eigen::Index j = 0; j < coeff.size(); ++j) {
    coeff[j] = f.singular_values[j] > tol ? coeff[j] / f.singular_values[j] : 0.0;
  }
  return f.V * coeff;
}

Matrix null_space_basis(const Matrix& A) {
  const SvdFactorization f = svd(A);
  const double smax = f.singular_values.size() ? f.singular_values[0] : 0.0;
  const double tol = static_cast<double>(std::max(A.rows(), A.cols())) *
                     std::numeric_limits<double>::epsilon() * smax;
  Eigen::Index rank = 0;
  while (rank < f.singular_values.size() && f.singular_values[rank] > tol) ++rank;
  const Eigen::Index n = A.cols();
  Matrix Q(n, n);
  Q.leftCols(rank) = f.V.leftCols(rank);
  complete_orthonormal(Q, rank, n);
  return Q.rightCols(n - rank);
}

double schatten_norm(const Matrix& X, double q) { return qnorm(numerical_singular_values(X), q); }

}  // namespace truncq
