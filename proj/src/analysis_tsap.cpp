#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>

#include "combinatorics.hpp"
#include "truncq/analysis.hpp"
#include "truncq/numerics.hpp"

namespace truncq {

namespace {

constexpr double kRatioSlack = 1e-9;

// std::pow with the exponents that dominate the searches done directly.
inline double power(double v, double e) {
  if (e == 1.0) return v;
  if (e == 2.0) return v * v;
  if (e == 0.5) return std::sqrt(v);
  return std::pow(v, e);
}

// ||x_K||_r^q and sum_{T \ K} |x_i|^q for K = the k largest |x_i| on T
// (ties to the lower index), with a reusable scratch buffer.
struct SplitTerms {
  double head = 0.0;
  double tail = 0.0;
};

class Splitter {
 public:
  Splitter(std::size_t k, double q, double r) : k_(k), q_(q), r_(r) {}

  SplitTerms operator()(const Vector& x, const std::vector<std::size_t>& T) {
    buf_.clear();
    for (auto i : T) buf_.emplace_back(std::abs(x[static_cast<Eigen::Index>(i)]), i);
    const auto mid = buf_.begin() + static_cast<std::ptrdiff_t>(std::min(k_, buf_.size()));
    std::partial_sort(buf_.begin(), mid, buf_.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    SplitTerms out;
    double head = 0.0;
    for (auto it = buf_.begin(); it != mid; ++it) {
      head = r_ == kInf ? std::max(head, it->first) : head + power(it->first, r_);
    }
    out.head = r_ == kInf ? power(head, q_) : power(head, q_ / r_);
    for (auto it = mid; it != buf_.end(); ++it) out.tail += power(it->first, q_);
    return out;
  }

 private:
  std::size_t k_;
  double q_;
  double r_;
  std::vector<std::pair<double, std::size_t>> buf_;
};

// Search over x = basis * c for the largest ratio(x, aux, T) with aux = aux_map * c.
struct SearchProblem {
  Matrix basis;
  Matrix aux_map;
  std::function<double(const Vector& x, const Vector& aux, const std::vector<std::size_t>& T)>
      ratio;
  double threshold = 0.0;
};

struct SearchOutcome {
  double worst = -kInf;
  Vector witness;
  std::vector<std::size_t> witness_T;
  std::size_t sets = 0;
  std::size_t samples = 0;
  bool violated = false;
};

std::vector<std::vector<std::size_t>> truncation_sets(std::size_t n, std::size_t t,
                                                      const SearchBudget& budget,
                                                      std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> sets;
  if (binomial(n, t) <= budget.max_sets) {
    detail::for_each_combination(n, t, [&](const std::vector<std::size_t>& idx) {
      sets.push_back(idx);
      return true;
    });
  } else {
    for (std::size_t s = 0; s < budget.sampled_sets; ++s) {
      sets.push_back(detail::random_subset(n, t, rng));
    }
  }
  return sets;
}

// Starting coefficient vectors: Gaussian, sparse in x, low-gain, and
// power-decay draws, each normalized.
std::vector<Vector> sample_pool(const SearchProblem& prob, std::size_t count, std::size_t k,
                                std::mt19937_64& rng, const Matrix* low_gain) {
  const Eigen::Index n = prob.basis.rows();
  const Eigen::Index d = prob.basis.cols();
  const bool identity_basis = n == d && prob.basis.isIdentity(0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Vector> pool;
  pool.reserve(count);
  const int kinds = low_gain ? 4 : 3;
  for (std::size_t s = 0; s < count; ++s) {
    Vector c(d);
    switch (static_cast<int>(s % static_cast<std::size_t>(kinds))) {
      case 0:
        for (Eigen::Index i = 0; i < d; ++i) c[i] = normal(rng);
        break;
      case 1: {
        // Sparse in x; for a nontrivial basis, take the least-squares coefficients.
        const auto max_support = std::min<std::size_t>(static_cast<std::size_t>(n), 3 * k + 2);
        std::uniform_int_distribution<std::size_t> size(1, max_support);
        Vector x = Vector::Zero(n);
        for (auto i : detail::random_subset(static_cast<std::size_t>(n), size(rng), rng)) {
          x[static_cast<Eigen::Index>(i)] = normal(rng);
        }
        c = identity_basis ? x : Vector(prob.basis.transpose() * x);
        break;
      }
      case 2: {
        Vector x = Vector::Zero(n);
        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const double e = 0.5 + 2.5 * uniform(rng);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double sign = uniform(rng) < 0.5 ? -1.0 : 1.0;
          x[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)])] =
              sign * std::pow(static_cast<double>(j + 1), -e);
        }
        c = identity_basis ? x : Vector(prob.basis.transpose() * x);
        break;
      }
      default: {
        Vector g(d);
        for (Eigen::Index i = 0; i < d; ++i) g[i] = normal(rng);
        c = *low_gain * g;
        break;
      }
    }
    const double norm = (prob.basis * c).norm();
    if (norm > 0.0) pool.push_back(c / norm);
  }
  return pool;
}

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > kInequalitySlack ? kInf : -kInf;
}

// Normalized coordinate ascent on the coefficients c.
double ascend(const SearchProblem& prob, const std::vector<std::size_t>& T, Vector& c,
              std::size_t max_sweeps) {
  Vector x = prob.basis * c;
  Vector aux = prob.aux_map * c;
  double f = prob.ratio(x, aux, T);
  double step = 0.5;
  for (std::size_t sweep = 0; sweep < max_sweeps && f < kInf; ++sweep) {
    bool improved = false;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      for (double sign : {1.0, -1.0}) {
        const double delta = sign * step;
        c[j] += delta;
        x += delta * prob.basis.col(j);
        aux += delta * prob.aux_map.col(j);
        const double g = prob.ratio(x, aux, T);
        if (g > f) {
          f = g;
          improved = true;
          break;
        }
        c[j] -= delta;
        x -= delta * prob.basis.col(j);
        aux -= delta * prob.aux_map.col(j);
      }
    }
    const double norm = x.norm();
    if (norm > 0.0) {
      c /= norm;
      x /= norm;
      aux /= norm;
    }
    if (!improved) {
      step /= 2.0;
      if (step < 1e-7) break;
    }
  }
  return f;
}

SearchOutcome run_search(const SearchProblem& prob, std::size_t t, std::size_t k,
                         const SearchBudget& budget, const Matrix* low_gain) {
  std::mt19937_64 rng(budget.seed);
  const auto n = static_cast<std::size_t>(prob.basis.rows());
  const auto sets = truncation_sets(n, t, budget, rng);
  const std::vector<Vector> pool = sample_pool(prob, budget.random_samples, k, rng, low_gain);
  std::vector<Vector> pool_x;
  std::vector<Vector> pool_aux;
  pool_x.reserve(pool.size());
  pool_aux.reserve(pool.size());
  for (const auto& c : pool) {
    pool_x.push_back(prob.basis * c);
    pool_aux.push_back(prob.aux_map * c);
  }

  SearchOutcome out;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto consider = [&](double f, const Vector& x, const std::vector<std::size_t>& T) {
    if (f > out.worst) {
      out.worst = f;
      out.witness = x;
      out.witness_T = T;
    }
    if (f > prob.threshold + kRatioSlack) out.violated = true;
  };

  for (const auto& T : sets) {
    ++out.sets;
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(pool.size());
    for (std::size_t s = 0; s < pool.size(); ++s) {
      const double f = prob.ratio(pool_x[s], pool_aux[s], T);
      ++out.samples;
      consider(f, pool_x[s], T);
      scored.emplace_back(f, s);
    }
    if (out.violated) break;
    // Half the restarts start from the best pool samples, half at random.
    const std::size_t from_pool = std::min(budget.restarts / 2, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(from_pool),
                      scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; r < budget.restarts; ++r) {
      Vector c;
      if (r < from_pool) {
        c = pool[scored[r].second];
      } else {
        c.resize(prob.basis.cols());
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = normal(rng);
        const double norm = (prob.basis * c).norm();
        if (norm == 0.0) continue;
        c /= norm;
      }
      const double f = ascend(prob, T, c, budget.max_sweeps);
      ++out.samples;
      consider(f, prob.basis * c, T);
      if (out.violated) break;
    }
    if (out.violated) break;
  }
  return out;
}

// Directions where ||Ax|| is small relative to ||x||: g -> sum_i g_i v_i / (lambda_i + 0.05 lambda_max)
// over the eigenpairs of A^T A. Skipped for large n.
std::optional<Matrix> low_gain_operator(const Matrix& A) {
  if (A.cols() > 64) return std::nullopt;
  const SymmetricEigen eig = symmetric_eigen(A.transpose() * A);
  const double lmax = std::max(eig.values.maxCoeff(), 1e-300);
  const Vector scale = (eig.values.array().max(0.0) + 0.05 * lmax).inverse().matrix();
  return Matrix(eig.vectors * scale.asDiagonal() * eig.vectors.transpose());
}

double scaled_k(std::size_t k, const NormTriple& norms) {
  return std::pow(static_cast<double>(k), norms.q_over_r() - 1.0);
}

void validate_common(const Matrix& A, std::size_t k, std::size_t t, double beta) {
  require_finite(A, "A");
  require(k >= 1 && k <= t && t <= static_cast<std::size_t>(A.cols()), ErrorCode::InvalidInput,
          "need 1 <= k <= t <= n");
  require(beta > 0.0 && beta < 1.0, ErrorCode::BetaOutOfRange, "beta must lie in (0, 1)");
}

}  // namespace

TsapSides tsap_sides(const Matrix& A, const Vector& x, const TruncationSet& T, std::size_t k,
                     const NormTriple& norms, double D, double beta, TsapMode mode) {
  norms.validate();
  require(x.size() == A.cols() && T.ambient() == static_cast<std::size_t>(A.cols()),
          ErrorCode::InvalidInput, "tsap_sides: dimension mismatch");
  TsapSides sides;
  sides.K = best_k_support(x, T, k);
  const Vector xK = restrict(x, sides.K);
  sides.lhs = std::pow(qnorm(xK, norms.r), norms.q);
  const Vector Ax = A * x;
  const double gain = mode == TsapMode::LpForm ? qnorm(Ax, norms.p)
                                               : (A.transpose() * Ax).cwiseAbs().maxCoeff();
  sides.rhs = D * std::pow(gain, norms.q) +
              beta * scaled_k(k, norms) * std::pow(sigma_k(x, T, k, norms.q), norms.q);
  return sides;
}

TsapReport tsap_check(const Matrix& A, std::size_t k, std::size_t t, const NormTriple& norms,
                      double D, double beta, TsapMode mode, const SearchBudget& budget) {
  norms.validate();
  validate_common(A, k, t, beta);
  require(D > 0.0, ErrorCode::InvalidInput, "D must be positive");
  const auto n = static_cast<std::size_t>(A.cols());

  SearchProblem prob;
  prob.basis = Matrix::Identity(A.cols(), A.cols());
  prob.aux_map = mode == TsapMode::LpForm ? A : Matrix(A.transpose() * A);
  prob.threshold = D;
  const double bk = beta * scaled_k(k, norms);
  auto split = std::make_shared<Splitter>(k, norms.q, norms.r);
  const double q = norms.q;
  const double p = norms.p;
  const bool lp = mode == TsapMode::LpForm;
  prob.ratio = [split, bk, q, p, lp](const Vector& x, const Vector& aux,
                                     const std::vector<std::size_t>& T) {
    const SplitTerms s = (*split)(x, T);
    double gain = aux.cwiseAbs().maxCoeff();
    if (lp && p == 2.0) gain = aux.norm();
    else if (lp && p == 1.0) gain = aux.lpNorm<1>();
    else if (lp && p != kInf) gain = qnorm(aux, p);
    return safe_ratio(s.head - bk * s.tail, power(gain, q));
  };
  const auto low_gain = low_gain_operator(A);
  const SearchOutcome out = run_search(prob, t, k, budget, low_gain ? &*low_gain : nullptr);

  TsapReport report;
  report.k = k;
  report.t = t;
  report.norms = norms;
  report.D = D;
  report.beta = beta;
  report.mode = mode;
  report.sets_checked = out.sets;
  report.worst_ratio = out.worst;
  if (out.violated) {
    const TruncationSet T(out.witness_T, n);
    const TsapSides sides = tsap_sides(A, out.witness, T, k, norms, D, beta, mode);
    report.verdict = Violated{out.witness, Vector(), T, sides.K, sides.lhs, sides.rhs};
  } else if (budget.certificate) {
    report.verdict = Certified{*budget.certificate, out.samples};
  } else {
    report.verdict = PassedSampling{out.samples};
  }
  return report;
}

TsapReport nsp_check(const Matrix& A, std::size_t k, std::size_t t, double beta,
                     const SearchBudget& budget, const NormTriple& norms) {
  norms.validate();
  validate_common(A, k, t, beta);
  const Matrix N = null_space_basis(A);
  if (N.cols() == 0) throw Error(ErrorCode::TrivialNullSpace, "nsp_check: A is injective");
  const auto n = static_cast<std::size_t>(A.cols());

  SearchProblem prob;
  prob.basis = N;
  prob.aux_map = Matrix(0, N.cols());
  prob.threshold = beta;
  const double sk = scaled_k(k, norms);
  auto split = std::make_shared<Splitter>(k, norms.q, norms.r);
  prob.ratio = [split, sk](const Vector& x, const Vector&, const std::vector<std::size_t>& T) {
    const SplitTerms s = (*split)(x, T);
    return safe_ratio(s.head, sk * s.tail);
  };
  const SearchOutcome out = run_search(prob, t, k, budget, nullptr);

  TsapReport report;
  report.k = k;
  report.t = t;
  report.norms = norms;
  report.D = 0.0;
  report.beta = beta;
  report.sets_checked = out.sets;
  report.worst_ratio = out.worst;
  if (out.violated) {
    const TruncationSet T(out.witness_T, n);
    const TruncationSet K = best_k_support(out.witness, T, k);
    const double lhs = std::pow(qnorm(restrict(out.witness, K), norms.r), norms.q);
    const double rhs = beta * sk * std::pow(sigma_k(out.witness, T, k, norms.q), norms.q);
    report.verdict = Violated{out.witness, Vector(), T, K, lhs, rhs};
  } else if (budget.certificate) {
    report.verdict = Certified{*budget.certificate, out.samples};
  } else {
    report.verdict = PassedSampling{out.samples};
  }
  return report;
}

IffSides iff_sides(const Matrix& A, const Vector& x, const Vector& y, const TruncationSet& T,
                   std::size_t k, double q, double D, double beta, TsapMode mode, double p) {
  require(x.size() == A.cols() && y.size() == A.cols(), ErrorCode::InvalidInput,
          "iff_sides: dimension mismatch");
  const Vector v = y - x;
  const Vector Av = A * v;
  const double gain =
      mode == TsapMode::LpForm ? qnorm(Av, p) : (A.transpose() * Av).cwiseAbs().maxCoeff();
  IffSides sides;
  sides.lhs = qnorm_pow_on(v, T, q);
  sides.rhs = (1.0 + beta) / (1.0 - beta) *
                  (qnorm_pow_on(y, T, q) - qnorm_pow_on(x, T, q) +
                   2.0 * std::pow(sigma_k(x, T, k, q), q)) +
              2.0 * D / (1.0 - beta) * std::pow(gain, q);
  return sides;
}

TsapReport iff_condition_check(const Matrix& A, std::size_t k, std::size_t t, double q, double D,
                               double beta, TsapMode mode, const SearchBudget& budget, double p) {
  const NormTriple norms{q, q, p};
  norms.validate();
  validate_common(A, k, t, beta);
  const auto n = static_cast<std::size_t>(A.cols());

  TsapReport report;
  report.k = k;
  report.t = t;
  report.norms = norms;
  report.D = D;
  report.beta = beta;
  report.mode = mode;

  std::mt19937_64 rng(budget.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t samples = 0;
  auto check = [&](const Vector& x, const Vector& y, const TruncationSet& T) {
    ++samples;
    const IffSides s = iff_sides(A, x, y, T, k, q, D, beta, mode, p);
    if (s.lhs > s.rhs + kRatioSlack * (1.0 + std::abs(s.rhs))) {
      report.verdict = Violated{x, y, T, best_k_support(x, T, k), s.lhs, s.rhs};
      return true;
    }
    return false;
  };

  // Random pairs, including ones where y_T is shrunk below x_T.
  const auto sets = truncation_sets(n, t, budget, rng);
  report.sets_checked = sets.size();
  const std::size_t per_set = std::max<std::size_t>(1, budget.random_samples / 10);
  for (const auto& idx : sets) {
    const TruncationSet T(idx, n);
    for (std::size_t s = 0; s < per_set; ++s) {
      Vector x(A.cols());
      Vector y(A.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = normal(rng);
        y[i] = normal(rng);
      }
      if (s % 2 == 1) y = x + 0.1 * y;
      if (check(x, y, T)) return report;
    }
  }

  // Stress pairs from the TSAP search with the same constants: a witness w gives
  // x = -w_K, y = w_{K^c}, for which the pair inequality is equivalent to the
  // TSAP inequality at w.
  SearchBudget inner = budget;
  inner.certificate.reset();
  const TsapReport tsap = tsap_check(A, k, t, norms, D, beta, mode, inner);
  report.worst_ratio = tsap.worst_ratio;
  samples += std::visit(
      [](const auto& v) -> std::size_t {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Violated>) return 1;
        else return v.samples;
      },
      tsap.verdict);
  if (const auto* w = std::get_if<Violated>(&tsap.verdict)) {
    const Vector x = -restrict(w->x, w->K);
    const Vector y = w->x + x;
    if (check(x, y, w->T)) return report;
  }
  if (budget.certificate) {
    report.verdict = Certified{*budget.certificate, samples};
  } else {
    report.verdict = PassedSampling{samples};
  }
  return report;
}

}  // namespace truncq
