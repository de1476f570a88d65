#include "admm.hpp"

#include <cmath>

namespace truncq::detail {

AdmmEngine::AdmmEngine(Matrix M) : M_(std::move(M)) {
  use_woodbury_ = M_.rows() < M_.cols();
  if (use_woodbury_) {
    Matrix small = M_ * M_.transpose();
    small.diagonal().array() += 1.0;
    factor_.compute(small);
  } else {
    Matrix big = M_.transpose() * M_;
    big.diagonal().array() += 1.0;
    factor_.compute(big);
  }
  if (factor_.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "ADMM: factorization of I + M^T M failed");
  }
}

Vector AdmmEngine::solve_shifted_normal(const Vector& rhs) const {
  if (!use_woodbury_) return factor_.solve(rhs);
  // (I + M^T M)^{-1} = I - M^T (I + M M^T)^{-1} M
  const Vector inner = factor_.solve(M_ * rhs);
  return rhs - M_.transpose() * inner;
}

AdmmOutput AdmmEngine::run(const Vector& c, const Projector& project, const Prox& prox,
                           const AdmmSettings& settings, const Vector* warm_start) const {
  const Eigen::Index n = M_.cols();
  AdmmOutput out;
  out.x = warm_start ? *warm_start : Vector(Vector::Zero(n));
  Vector Mx = M_ * out.x;
  out.u = project(Mx - c);
  out.s = out.x;
  Vector dual_u = Vector::Zero(c.size());
  Vector dual_s = Vector::Zero(n);
  double rho = settings.rho;
  int rho_changes = 0;
  const double scale = settings.residual_scale > 0.0 ? settings.residual_scale : 1.0 + c.norm();
  const double threshold = settings.tolerance * scale;

  for (int it = 1; it <= settings.max_iterations; ++it) {
    out.x = solve_shifted_normal(M_.transpose() * (c + out.u - dual_u) + (out.s - dual_s));
    Mx.noalias() = M_ * out.x;

    const Vector u_prev = out.u;
    const Vector s_prev = out.s;
    out.u = project(Mx - c + dual_u);
    out.s = prox(out.x + dual_s, 1.0 / rho);

    const Vector ru = Mx - c - out.u;
    const Vector rs = out.x - out.s;
    dual_u += ru;
    dual_s += rs;

    out.iterations = it;
    out.primal_residual = std::sqrt(ru.squaredNorm() + rs.squaredNorm());
    out.dual_residual = rho * (M_.transpose() * (out.u - u_prev) + (out.s - s_prev)).norm();
    if (out.primal_residual <= threshold && out.dual_residual <= threshold) {
      out.converged = true;
      break;
    }
    // A bounded number of penalty changes; unlimited flipping can stall convergence.
    if (settings.balance_every > 0 && it % settings.balance_every == 0 &&
        rho_changes < settings.max_rho_changes) {
      if (out.primal_residual > 10.0 * out.dual_residual) {
        rho *= 2.0;
        dual_u /= 2.0;
        dual_s /= 2.0;
        ++rho_changes;
      } else if (out.dual_residual > 10.0 * out.primal_residual) {
        rho /= 2.0;
        dual_u *= 2.0;
        dual_s *= 2.0;
        ++rho_changes;
      }
    }
  }
  return out;
}

}  // namespace truncq::detail
