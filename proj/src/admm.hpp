#pragma once

// Shared ADMM engine for problems of the form
//
//   minimize  g(s)   subject to  M x - c = u,  u in C,  x = s
//
// where g has a cheap proximal map and C a cheap projection. The x-update
// solves (I + M^T M) x = rhs with a factorization cached at construction,
// which does not depend on the penalty rho.

#include <functional>

#include <Eigen/Cholesky>

#include "truncq/core.hpp"

namespace truncq::detail {

struct AdmmSettings {
  int max_iterations = 20000;
  double tolerance = 1e-8;
  double rho = 1.0;
  int balance_every = 50;
  int max_rho_changes = 30;
  /// Residuals are compared against tolerance * residual_scale; a nonpositive
  /// value selects 1 + ||c||_2.
  double residual_scale = -1.0;
};

struct AdmmOutput {
  Vector x;
  Vector s;
  Vector u;
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

using Projector = std::function<Vector(const Vector&)>;
/// prox(v, scale) = argmin_s g(s) / scale^{-1} + 0.5 ||s - v||^2, scale = 1/rho.
using Prox = std::function<Vector(const Vector&, double)>;

class AdmmEngine {
 public:
  explicit AdmmEngine(Matrix M);

  const Matrix& op() const noexcept { return M_; }

  /// Applies (I + M^T M)^{-1}.
  Vector solve_shifted_normal(const Vector& rhs) const;

  AdmmOutput run(const Vector& c, const Projector& project, const Prox& prox,
                 const AdmmSettings& settings, const Vector* warm_start = nullptr) const;

 private:
  Matrix M_;
  bool use_woodbury_ = false;
  Eigen::LLT<Matrix> factor_;
};

}  // namespace truncq::detail
