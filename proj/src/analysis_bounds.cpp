#include <algorithm>
#include <cmath>
#include <limits>

#include "truncq/analysis.hpp"
#include "truncq/numerics.hpp"

namespace truncq {

namespace {

double ratio(std::size_t a, std::size_t b) {
  return static_cast<double>(a) / static_cast<double>(b);
}

void require_beta(double beta) {
  require(beta > 0.0 && beta < 1.0, ErrorCode::BetaOutOfRange, "beta must lie in (0, 1)");
}

void require_delta(double delta, double t_factor, bool force) {
  require(t_factor >= 4.0 / 3.0, ErrorCode::InvalidInput, "t_factor must be >= 4/3");
  require(delta >= 0.0 && delta < 1.0, ErrorCode::DeltaOutOfRange, "delta must lie in [0, 1)");
  if (!force) {
    require(delta < std::sqrt((t_factor - 1.0) / t_factor), ErrorCode::DeltaOutOfRange,
            "delta must be below sqrt((t - 1) / t)");
  }
}

}  // namespace

TsapConstants tsap_constants_from_rip(double delta, double t_factor, std::size_t k,
                                      std::size_t tc_size, bool force) {
  require(k >= 1, ErrorCode::InvalidInput, "k must be >= 1");
  require_delta(delta, t_factor, force);
  const double d2 = delta * delta;
  TsapConstants c;
  c.beta = delta / std::sqrt((t_factor - 1.0) * (1.0 - d2));
  c.D1 = 2.0 * std::sqrt(1.0 + delta) / (1.0 - d2);
  c.D2 = 2.0 * std::sqrt(2.0 * static_cast<double>(k + tc_size)) / (1.0 - d2);
  return c;
}

double rip_lower_from_tsap(double D, double beta, std::size_t k, std::size_t t,
                           std::size_t tc_size, const NormTriple& norms, SparsityOrder order) {
  norms.validate();
  require_beta(beta);
  require(D > 0.0 && k >= 1 && k <= t, ErrorCode::InvalidInput, "need D > 0 and 1 <= k <= t");
  const double q = norms.q;
  const double max_term = std::max(std::pow(ratio(tc_size, k), q), 1.0);
  if (order == SparsityOrder::OneK) return (max_term + 1.0) * D;
  // |T ∩ K^c| instantiated as t - k; pow(0, 0) = 1.
  const double tk = std::pow(ratio(t - k, k), 1.0 - norms.q_over_r());
  return (2.0 / (1.0 - beta) + max_term * (tk * 2.0 * beta / (1.0 - beta) + 1.0)) * D;
}

BoundReport bound_theorem23(const NormTriple& norms, double D, double beta, std::size_t k,
                            std::size_t t, std::size_t tc_size, double eps, double eta,
                            double sigma, BoundForm which) {
  norms.validate();
  require_beta(beta);
  require(D > 0.0 && k >= 1 && k <= t, ErrorCode::InvalidInput, "need D > 0 and 1 <= k <= t");
  require(eps >= 0.0 && eta >= 0.0 && sigma >= 0.0, ErrorCode::InvalidInput,
          "eps, eta and sigma must be nonnegative");
  const double q = norms.q;
  const double r = norms.r;
  if (which == BoundForm::QqStrict) {
    require(q < r, ErrorCode::WhichMismatch, "QqStrict requires q < r");
  }
  if (which == BoundForm::QqEqual) {
    require(q == r, ErrorCode::WhichMismatch, "QqEqual requires q = r");
  }

  BoundReport rep;
  rep.delta = std::numeric_limits<double>::quiet_NaN();
  rep.D = D;
  rep.beta = beta;
  rep.k = k;
  rep.t = t;
  rep.tc_size = tc_size;
  rep.q = q;
  rep.r = r;
  rep.eps = eps;
  rep.eta = eta;
  rep.sigma = sigma;
  rep.noise_term = std::pow(eps + eta, q);
  const double qr = norms.q_over_r();
  const double kd = static_cast<double>(k);
  const double max_term = std::max(std::pow(ratio(tc_size, k), q), 1.0);
  const double sigma_q = std::pow(sigma, q);

  switch (which) {
    case BoundForm::Rq: {
      rep.theorem = "truncated-recovery-rq";
      const double bracket = max_term + 1.0 + std::pow(ratio(t - k, k), qr);
      rep.noise_coefficient = bracket * D / (1.0 - beta);
      rep.compressibility_coefficient = bracket * 2.0 * beta / (1.0 - beta);
      rep.sigma_term = std::pow(kd, qr - 1.0) * sigma_q;
      break;
    }
    case BoundForm::QqStrict: {
      rep.theorem = "truncated-recovery-qq-strict";
      const double tc_factor = std::pow(ratio(tc_size, k), 1.0 - qr);
      rep.noise_coefficient =
          (max_term * tc_factor + 2.0) * D / (1.0 - beta) * std::pow(kd, 1.0 - qr);
      rep.compressibility_coefficient =
          max_term * tc_factor * 2.0 * beta / (1.0 - beta) + 2.0 * (1.0 + beta) / (1.0 - beta);
      rep.sigma_term = sigma_q;
      break;
    }
    case BoundForm::QqEqual: {
      rep.theorem = "truncated-recovery-qq-equal";
      rep.noise_coefficient = (max_term + 2.0) * D / (1.0 - beta);
      rep.compressibility_coefficient =
          max_term * 2.0 * beta / (1.0 - beta) + 2.0 * (1.0 + beta) / (1.0 - beta);
      rep.sigma_term = sigma_q;
      break;
    }
  }
  rep.bound_value = recompute_bound(rep);
  return rep;
}

BoundReport bound_theorem35(double delta, double t_factor, std::size_t k, std::size_t tc_size,
                            std::size_t t, double eps, double eta, double sigma1, TsapMode mode) {
  const TsapConstants c = tsap_constants_from_rip(delta, t_factor, k, tc_size);
  const double D = mode == TsapMode::LpForm ? c.D1 : c.D2;
  require(k <= t, ErrorCode::InvalidInput, "need k <= |T|");
  require(eps >= 0.0 && eta >= 0.0 && sigma1 >= 0.0, ErrorCode::InvalidInput,
          "eps, eta and sigma must be nonnegative");

  BoundReport rep;
  rep.theorem = mode == TsapMode::LpForm ? "rip-truncated-l2" : "rip-truncated-dantzig";
  rep.delta = delta;
  rep.t_factor = t_factor;
  rep.D = D;
  rep.beta = c.beta;
  rep.k = k;
  rep.t = t;
  rep.tc_size = tc_size;
  rep.q = 1.0;
  rep.r = 2.0;
  rep.eps = eps;
  rep.eta = eta;
  rep.sigma = sigma1;
  rep.noise_term = eps + eta;
  const double bracket =
      std::max(ratio(tc_size, k), 1.0) + 1.0 + std::pow(ratio(t - k, k), 0.5);
  rep.noise_coefficient = bracket * D / (1.0 - c.beta);
  rep.compressibility_coefficient = bracket * 2.0 * c.beta / (1.0 - c.beta);
  rep.sigma_term = std::pow(static_cast<double>(k), -0.5) * sigma1;
  rep.bound_value = recompute_bound(rep);
  return rep;
}

BoundReport bound_theorem36(double delta, double t_factor, std::size_t k, double eps, double eta,
                            double sigma1, TsapMode mode) {
  require(k >= 1, ErrorCode::InvalidInput, "k must be >= 1");
  require_delta(delta, t_factor, false);
  require(eps >= 0.0 && eta >= 0.0 && sigma1 >= 0.0, ErrorCode::InvalidInput,
          "eps, eta and sigma must be nonnegative");
  const double d2 = delta * delta;
  const double s = std::sqrt((t_factor - 1.0) * (1.0 - d2));
  const double lead = mode == TsapMode::LpForm ? 2.0 * std::sqrt(1.0 + delta)
                                               : 2.0 * std::sqrt(2.0 * static_cast<double>(k));

  BoundReport rep;
  rep.theorem = mode == TsapMode::LpForm ? "rip-l1-l2" : "rip-l1-dantzig";
  rep.delta = delta;
  rep.t_factor = t_factor;
  rep.k = k;
  rep.q = 1.0;
  rep.r = 2.0;
  rep.eps = eps;
  rep.eta = eta;
  rep.sigma = sigma1;
  rep.noise_term = eps + eta;
  rep.noise_coefficient = lead * (3.0 * s + delta) / ((1.0 - d2) * (s - delta));
  rep.compressibility_coefficient = (s + delta) * (s + delta) / (s * (s - delta)) * 2.0;
  rep.sigma_term = sigma1 / std::sqrt(static_cast<double>(k));
  rep.bound_value = recompute_bound(rep);
  return rep;
}

double recompute_bound(const BoundReport& report) {
  return report.noise_coefficient * report.noise_term +
         report.compressibility_coefficient * report.sigma_term;
}

PerturbationSides perturbation_sides(const Matrix& X, const Matrix& Y, std::size_t k, double q) {
  require(X.rows() == Y.rows() && X.cols() == Y.cols(), ErrorCode::InvalidInput,
          "perturbation_sides: shape mismatch");
  require(q > 0.0 && q <= 1.0, ErrorCode::InvalidInput, "q must lie in (0, 1]");
  const Vector sx = numerical_singular_values(X);
  const Vector sy = numerical_singular_values(Y);
  const Vector sd = numerical_singular_values(X - Y);
  require(k >= 1 && k <= static_cast<std::size_t>(sx.size()), ErrorCode::InvalidInput,
          "k must lie in [1, min(m, n)]");
  PerturbationSides out;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
    out.lhs += std::abs(std::pow(sx[j], q) - std::pow(sy[j], q));
    out.rhs += std::pow(sd[j], q);
  }
  return out;
}

ConeConstraintSides matrix_cone_constraint_sides(const Matrix& X, const Matrix& Xhat,
                                                 const TruncationSet& T, std::size_t k,
                                                 double q) {
  require(X.rows() == Xhat.rows() && X.cols() == Xhat.cols(), ErrorCode::InvalidInput,
          "matrix_cone_constraint_sides: shape mismatch");
  const Vector lx = numerical_singular_values(X);
  const Vector lv = numerical_singular_values(Xhat - X);
  require(T.ambient() == static_cast<std::size_t>(lx.size()), ErrorCode::InvalidInput,
          "T must index min(m, n) singular-value positions");
  const TruncationSet K = best_k_support(lx, T, k);
  const TruncationSet TKc = T.intersect(K.complement());
  ConeConstraintSides sides;
  sides.lhs = qnorm_pow_on(lv, TKc, q);
  sides.rhs = 2.0 * std::pow(sigma_k(lx, T, k, q), q) + qnorm_pow_on(lv, K, q);
  return sides;
}

}  // namespace truncq
