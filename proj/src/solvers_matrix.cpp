#include "truncq/solvers_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "admm.hpp"
#include "truncq/numerics.hpp"

namespace truncq {

namespace {

Vector vec(const Matrix& X) { return Eigen::Map<const Vector>(X.data(), X.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix spectral_clip(const Matrix& X, double radius) {
  SvdFactorization f = svd(X);
  f.singular_values = f.singular_values.cwiseMin(radius);
  return f.reconstruct();
}

}  // namespace

Vector apply_map(const LinearMatrixMap& map, const Matrix& X) {
  require(X.rows() == map.rows() && X.cols() == map.cols(), ErrorCode::InvalidInput,
          "apply_map: shape mismatch");
  return map.stacked() * vec(X);
}

Matrix apply_adjoint(const LinearMatrixMap& map, const Vector& y) {
  require(y.size() == map.size(), ErrorCode::InvalidInput, "apply_adjoint: length mismatch");
  return unvec(map.stacked().transpose() * y, map.rows(), map.cols());
}

Matrix weighted_sv_shrink(const Matrix& X, const Vector& weights) {
  SvdFactorization f = svd(X);
  require(weights.size() == f.singular_values.size(), ErrorCode::InvalidInput,
          "weighted_sv_shrink: one weight per singular value");
  f.singular_values = (f.singular_values - weights).cwiseMax(0.0);
  return f.reconstruct();
}

Matrix truncated_sv_shrink(const Matrix& X, double threshold, std::size_t protect) {
  const auto l = std::min(X.rows(), X.cols());
  require(threshold >= 0.0, ErrorCode::InvalidInput, "threshold must be nonnegative");
  require(protect <= static_cast<std::size_t>(l), ErrorCode::InvalidInput,
          "protect exceeds min(m, n)");
  Vector weights = Vector::Constant(l, threshold);
  weights.head(static_cast<Eigen::Index>(protect)).setZero();
  return weighted_sv_shrink(X, weights);
}

double matrix_constraint_violation(const LinearMatrixMap& map, const Vector& b, const Matrix& X,
                                   const NoiseConstraint& constraint) {
  const Vector residual = apply_map(map, X) - b;
  if (const auto* ball = std::get_if<LpBall>(&constraint)) {
    return std::max(0.0, qnorm(residual, ball->p) - ball->eta);
  }
  const double spec = singular_values(apply_adjoint(map, residual))[0];
  return std::max(0.0, spec - std::get<DantzigSelector>(constraint).eta);
}

double tail_schatten_pow(const Matrix& X, std::size_t t, double q) {
  const Vector s = numerical_singular_values(X);
  require(t <= static_cast<std::size_t>(s.size()), ErrorCode::InvalidInput, "t exceeds min(m, n)");
  return qnorm_pow(s.tail(static_cast<Eigen::Index>(t)), q);
}

MatrixSolverReport solve_truncated_schatten(const LinearMatrixMap& map, const Vector& b,
                                            std::size_t t, double q,
                                            const NoiseConstraint& constraint,
                                            const SolverConfig& config, int outer_rounds) {
  config.validate();
  validate(constraint);
  require(b.size() == map.size(), ErrorCode::InvalidInput, "b length differs from the map size");
  require_finite(b, "b");
  require(q > 0.0 && q <= 1.0, ErrorCode::InvalidInput, "q must lie in (0, 1]");
  require(outer_rounds >= 1, ErrorCode::InvalidInput, "outer_rounds must be >= 1");
  const Eigen::Index rows = map.rows();
  const Eigen::Index cols = map.cols();
  const auto l = static_cast<std::size_t>(std::min(rows, cols));
  require(t >= 1 && t <= l, ErrorCode::InvalidInput, "t must lie in [1, min(m, n)]");
  const std::size_t protect = l - t;
  const Matrix& S = map.stacked();

  MatrixSolverReport report;
  report.local_only = q < 1.0;
  const double bscale = b.norm();
  if (bscale == 0.0) {
    report.solution = Matrix::Zero(rows, cols);
    report.converged = true;
    return report;
  }

  const Vector ls = least_squares(S, b);
  detail::AdmmSettings settings;
  settings.max_iterations = config.max_iterations;
  settings.tolerance = config.tolerance;
  settings.rho = config.admm_rho;
  settings.residual_scale = 1.0 + bscale;

  detail::Projector project;
  Matrix op;
  Vector offset;
  if (const auto* ball = std::get_if<LpBall>(&constraint)) {
    const double p = ball->p;
    const double eta = ball->eta;
    require(p == 1.0 || p == 2.0 || p == kInf, ErrorCode::Unsupported,
            "LpBall solvers support p in {1, 2, inf}");
    if (eta == 0.0) {
      require((S * ls - b).norm() <= 1e-9 * (1.0 + bscale), ErrorCode::Infeasible,
              "eta = 0 but b is not in the range of the map");
    } else if (p == 2.0) {
      require((S * ls - b).norm() <= eta * (1.0 + 1e-12), ErrorCode::Infeasible,
              "least-squares residual exceeds eta");
    }
    if (p == 1.0) settings.residual_scale /= std::sqrt(static_cast<double>(b.size()));
    project = [p, eta](const Vector& v) { return project_lp_ball(v, p, eta); };
    op = S;
    offset = b;
  } else {
    const double eta = std::get<DantzigSelector>(constraint).eta;
    project = [eta, rows, cols](const Vector& v) {
      return vec(spectral_clip(unvec(v, rows, cols), eta));
    };
    op = S.transpose() * S;
    offset = S.transpose() * b;
  }
  const detail::AdmmEngine engine(std::move(op));

  Vector current = ls;
  report.solution = unvec(ls, rows, cols);
  report.objective_value = kInf;
  const double feasible_slack = config.tolerance * (1.0 + bscale);
  double epsilon = config.irl1_epsilon_start * bscale;
  Matrix previous_frame;

  for (int round = 0; round < outer_rounds; ++round) {
    const SvdFactorization f = svd(unvec(current, rows, cols));
    detail::Prox prox;
    bool frame_fixed = false;
    if (q == 1.0) {
      // Truncated nuclear norm surrogate: ||Z||_* - <U_r V_r^T, Z>.
      const auto r = static_cast<Eigen::Index>(protect);
      const Matrix frame = f.U.leftCols(r) * f.V.leftCols(r).transpose();
      if (round > 0 && (frame - previous_frame).norm() <= 1e-9) frame_fixed = true;
      previous_frame = frame;
      prox = [frame, rows, cols](const Vector& v, double scale) {
        return vec(truncated_sv_shrink(unvec(v, rows, cols) + scale * frame, scale, 0));
      };
    } else {
      Vector weights = Vector::Zero(static_cast<Eigen::Index>(l));
      for (auto j = static_cast<Eigen::Index>(protect); j < weights.size(); ++j) {
        weights[j] = std::pow(f.singular_values[j] + epsilon, q - 1.0);
      }
      const double wmax = weights.maxCoeff();
      if (wmax > 0.0) weights /= wmax;
      prox = [weights, rows, cols](const Vector& v, double scale) {
        return vec(weighted_sv_shrink(unvec(v, rows, cols), weights * scale));
      };
      epsilon = std::max(epsilon / 10.0, 1e-10 * bscale);
    }
    if (frame_fixed) break;

    const detail::AdmmOutput out = engine.run(offset, project, prox, settings, &current);
    report.iterations_used += out.iterations;
    report.outer_rounds_used = round + 1;
    current = out.x;
    const Matrix X = unvec(out.x, rows, cols);
    const double violation = matrix_constraint_violation(map, b, X, constraint);
    const double objective = tail_schatten_pow(X, t, q);
    if (out.converged && violation <= feasible_slack && objective <= report.objective_value) {
      report.solution = X;
      report.objective_value = objective;
      report.converged = true;
    }
    // Plain nuclear norm: nothing to re-detect.
    if (q == 1.0 && protect == 0) break;
  }

  if (!report.converged) {
    report.solution = unvec(current, rows, cols);
    report.objective_value = tail_schatten_pow(report.solution, t, q);
  }
  report.constraint_residual = matrix_constraint_violation(map, b, report.solution, constraint);
  return report;
}

}  // namespace truncq
