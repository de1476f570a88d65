#pragma once

// Reference computations for tests. These deliberately avoid the library's
// own factorizations and enumerators: eigenvalues and SVDs come from Eigen,
// subsets from bitmasks.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

inline std::vector<int> bits_of(std::uint32_t mask) {
  std::vector<int> out;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

inline Eigen::MatrixXd columns(const Eigen::MatrixXd& A, const std::vector<int>& cols) {
  Eigen::MatrixXd out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
  return out;
}

// delta_k at p = 2 by enumerating every k-subset as a bitmask.
inline double rip_delta(const Eigen::MatrixXd& A, int k) {
  const int n = static_cast<int>(A.cols());
  double delta = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    const Eigen::MatrixXd S = columns(A, bits_of(mask));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.transpose() * S, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    delta = std::max({delta, 1.0 - ev.minCoeff(), ev.maxCoeff() - 1.0});
  }
  return delta;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& X) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(X).singularValues();
}

// Optimal value of min sum_{i in T} |x_i| s.t. Ax = b by vertex enumeration of
// the standard-form LP over y = (x+, x-) >= 0 with [A, -A] y = b. Assumes A has
// full row rank. Returns +inf when infeasible.
struct LpResult {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
};

inline LpResult truncated_l1_by_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                         const std::vector<bool>& in_T) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd M(m, 2 * n);
  M << A, -A;
  LpResult best;
  std::vector<int> pick(m);
  for (int i = 0; i < m; ++i) pick[i] = i;
  while (true) {
    bool paired = false;
    for (int i = 0; i + 1 < m && !paired; ++i)
      for (int j = i + 1; j < m; ++j)
        if (pick[i] % n == pick[j] % n) { paired = true; break; }
    if (!paired) {
      const Eigen::MatrixXd B = columns(M, pick);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
      if (lu.rank() == m) {
        const Eigen::VectorXd yb = lu.solve(b);
        if (yb.minCoeff() >= -1e-10) {
          Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
          double obj = 0.0;
          for (int j = 0; j < m; ++j) {
            const int c = pick[j];
            const double val = std::max(yb[j], 0.0);
            x[c % n] += c < n ? val : -val;
            if (in_T[c % n]) obj += val;
          }
          if (obj < best.objective) best = {obj, x};
        }
      }
    }
    int i = m - 1;
    while (i >= 0 && pick[i] == 2 * n - m + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < m; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace oracle
