#include "truncq/solvers_vector.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "admm.hpp"
#include "truncq/numerics.hpp"

namespace truncq {

void SolverConfig::validate() const {
  require(max_iterations >= 1, ErrorCode::InvalidInput, "max_iterations must be >= 1");
  require(tolerance > 0.0, ErrorCode::InvalidInput, "tolerance must be positive");
  require(admm_rho > 0.0, ErrorCode::InvalidInput, "admm_rho must be positive");
  require(irl1_outer_iters >= 1, ErrorCode::InvalidInput, "irl1_outer_iters must be >= 1");
  require(irl1_epsilon_start > 0.0, ErrorCode::InvalidInput,
          "irl1_epsilon_start must be positive");
  require(isd_max_rounds >= 1, ErrorCode::InvalidInput, "isd_max_rounds must be >= 1");
}

double constraint_violation(const Matrix& A, const Vector& b, const Vector& x,
                            const NoiseConstraint& constraint) {
  const Vector residual = A * x - b;
  if (const auto* ball = std::get_if<LpBall>(&constraint)) {
    return std::max(0.0, qnorm(residual, ball->p) - ball->eta);
  }
  const auto& ds = std::get<DantzigSelector>(constraint);
  return std::max(0.0, (A.transpose() * residual).cwiseAbs().maxCoeff() - ds.eta);
}

namespace {

// Minimum-norm least-squares point; uses the Cholesky route when A has full
// row rank and falls back to the SVD otherwise.
Vector min_norm_point(const Matrix& A, const Vector& b) {
  if (A.rows() <= A.cols()) {
    Eigen::LLT<Matrix> llt(A * A.transpose());
    if (llt.info() == Eigen::Success) {
      const Vector x = A.transpose() * llt.solve(b);
      if (x.allFinite() && (A * x - b).norm() <= 1e-10 * (1.0 + b.norm())) return x;
    }
  }
  return least_squares(A, b);
}

}  // namespace

struct WeightedL1Solver::Impl {
  Matrix A;
  Vector b;
  NoiseConstraint constraint;
  SolverConfig config;
  Vector ls_point;
  Vector offset;  // c in M x - c = u
  detail::AdmmEngine engine;
  detail::Projector project;
  detail::AdmmSettings settings;

  Impl(const Matrix& A_, const Vector& b_, const NoiseConstraint& constraint_,
       const SolverConfig& config_)
      : A(A_),
        b(b_),
        constraint(constraint_),
        config(config_),
        ls_point(min_norm_point(A_, b_)),
        offset(std::holds_alternative<LpBall>(constraint_) ? Vector(b_)
                                                           : Vector(A_.transpose() * b_)),
        engine(std::holds_alternative<LpBall>(constraint_) ? Matrix(A_)
                                                           : Matrix(A_.transpose() * A_)) {
    settings.max_iterations = config.max_iterations;
    settings.tolerance = config.tolerance;
    settings.rho = config.admm_rho;
    settings.residual_scale = 1.0 + b.norm();
    if (const auto* ball = std::get_if<LpBall>(&constraint)) {
      const double p = ball->p;
      const double eta = ball->eta;
      require(p == 1.0 || p == 2.0 || p == kInf, ErrorCode::Unsupported,
              "LpBall solvers support p in {1, 2, inf}");
      if (eta == 0.0) {
        require((A * ls_point - b).norm() <= 1e-9 * (1.0 + b.norm()), ErrorCode::Infeasible,
                "eta = 0 but b is not in the range of A");
      } else if (p == 2.0) {
        require((A * ls_point - b).norm() <= eta * (1.0 + 1e-12), ErrorCode::Infeasible,
                "least-squares residual exceeds eta");
      }
      if (p == 1.0) settings.residual_scale /= std::sqrt(static_cast<double>(A.rows()));
      project = [p, eta](const Vector& v) { return project_lp_ball(v, p, eta); };
    } else {
      const double eta = std::get<DantzigSelector>(constraint).eta;
      project = [eta](const Vector& v) { return project_lp_ball(v, kInf, eta); };
    }
  }

  SolverReport finish(const Vector& x, const detail::AdmmOutput& out) const {
    SolverReport report;
    report.solution = x;
    report.converged = out.converged;
    report.iterations_used = out.iterations;
    report.constraint_residual = constraint_violation(A, b, x, constraint);
    return report;
  }

  SolverReport solve_weighted(const Vector& weights, const Vector* warm) const {
    require(weights.size() == A.cols(), ErrorCode::InvalidInput, "weights length != n");
    if (b.norm() == 0.0) {
      // Zero is feasible and attains the minimum of any nonnegative weighted norm.
      SolverReport report;
      report.solution = Vector::Zero(A.cols());
      report.converged = true;
      return report;
    }
    const detail::Prox prox = [&weights](const Vector& v, double scale) {
      return soft_threshold(v, weights * scale);
    };
    const Vector& start = warm ? *warm : ls_point;
    const detail::AdmmOutput out = engine.run(offset, project, prox, settings, &start);
    return finish(out.x, out);
  }
};

WeightedL1Solver::WeightedL1Solver(const Matrix& A, const Vector& b,
                                   const NoiseConstraint& constraint, const SolverConfig& config) {
  require(A.rows() == b.size(), ErrorCode::InvalidInput, "A and b shapes disagree");
  require(A.rows() >= 1 && A.cols() >= 1, ErrorCode::InvalidInput, "A must be nonempty");
  require_finite(A, "A");
  require_finite(b, "b");
  validate(constraint);
  config.validate();
  impl_ = std::make_unique<Impl>(A, b, constraint, config);
}

WeightedL1Solver::~WeightedL1Solver() = default;
WeightedL1Solver::WeightedL1Solver(WeightedL1Solver&&) noexcept = default;
WeightedL1Solver& WeightedL1Solver::operator=(WeightedL1Solver&&) noexcept = default;

SolverReport WeightedL1Solver::solve(const Vector& weights, const Vector* warm_start) const {
  require((weights.array() >= 0.0).all(), ErrorCode::InvalidInput, "negative weight");
  return impl_->solve_weighted(weights, warm_start);
}

SolverReport WeightedL1Solver::solve_truncated(const TruncationSet& T,
                                               const Vector* warm_start) const {
  require(T.ambient() == static_cast<std::size_t>(impl_->A.cols()), ErrorCode::InvalidInput,
          "truncation set ambient size differs from n");
  Vector weights = Vector::Zero(impl_->A.cols());
  for (auto i : T) weights[static_cast<Eigen::Index>(i)] = 1.0;
  SolverReport report = impl_->solve_weighted(weights, warm_start);
  report.objective_value = qnorm_pow_on(report.solution, T, 1.0);
  return report;
}

SolverReport WeightedL1Solver::solve_truncated_lq(const TruncationSet& T, double q,
                                                  const Vector* warm_start) const {
  require(q > 0.0 && q < 1.0, ErrorCode::InvalidInput, "IRL1 requires 0 < q < 1");
  require(T.ambient() == static_cast<std::size_t>(impl_->A.cols()), ErrorCode::InvalidInput,
          "truncation set ambient size differs from n");
  const Impl& s = *impl_;
  const double bscale = s.b.norm();
  const double feasible_slack = s.config.tolerance * (1.0 + bscale);

  SolverReport best;
  best.local_only = true;
  best.solution = warm_start ? *warm_start : s.ls_point;
  best.converged = constraint_violation(s.A, s.b, best.solution, s.constraint) <= feasible_slack;
  best.objective_value = best.converged ? qnorm_pow_on(best.solution, T, q) : kInf;
  best.constraint_residual = constraint_violation(s.A, s.b, best.solution, s.constraint);
  best.objective_history.push_back(best.objective_value);
  if (bscale == 0.0) {
    best.solution = Vector::Zero(s.A.cols());
    best.objective_value = 0.0;
    best.constraint_residual = 0.0;
    best.converged = true;
    best.objective_history.assign(1, 0.0);
    return best;
  }

  // Epsilon continuation, expressed in the units of b (equivalent to scaling
  // b to unit norm and starting at irl1_epsilon_start).
  double epsilon = s.config.irl1_epsilon_start * bscale;
  const double epsilon_floor = 1e-10 * bscale;
  Vector current = best.solution;
  int total_iterations = 0;
  for (int outer = 0; outer < s.config.irl1_outer_iters; ++outer) {
    Vector weights = Vector::Zero(s.A.cols());
    for (auto i : T) {
      const auto j = static_cast<Eigen::Index>(i);
      weights[j] = std::pow(std::abs(current[j]) + epsilon, q - 1.0);
    }
    const double wmax = weights.maxCoeff();
    if (wmax > 0.0) weights /= wmax;
    SolverReport step = s.solve_weighted(weights, &current);
    total_iterations += step.iterations_used;
    current = step.solution;
    const double objective = qnorm_pow_on(step.solution, T, q);
    if (step.converged && objective <= best.objective_value) {
      best.solution = step.solution;
      best.objective_value = objective;
      best.constraint_residual = step.constraint_residual;
      best.converged = true;
    }
    best.objective_history.push_back(best.objective_value);
    epsilon = std::max(epsilon / 10.0, epsilon_floor);
  }
  best.iterations_used = total_iterations;
  return best;
}

SolverReport solve_truncated_l1(const Matrix& A, const Vector& b, const TruncationSet& T,
                                const NoiseConstraint& constraint, const SolverConfig& config) {
  const WeightedL1Solver solver(A, b, constraint, config);
  return solver.solve_truncated(T);
}

SolverReport solve_truncated_l1_ds(const Matrix& A, const Vector& b, const TruncationSet& T,
                                   double eta, const SolverConfig& config) {
  return solve_truncated_l1(A, b, T, DantzigSelector{eta}, config);
}

SolverReport solve_truncated_lq(const Matrix& A, const Vector& b, const TruncationSet& T,
                                double q, const NoiseConstraint& constraint,
                                const SolverConfig& config) {
  const WeightedL1Solver solver(A, b, constraint, config);
  return solver.solve_truncated_lq(T, q);
}

// ---------------------------------------------------------------------------
// Iterative support detection

namespace {

bool rule_saturated(const ThresholdRule& rule, int round) {
  if (const auto* jump = std::get_if<FirstJump>(&rule)) {
    return std::pow(jump->factor, round + 1) > 1e6;
  }
  return round >= static_cast<int>(std::get<TopJ>(rule).counts.size());
}

}  // namespace

TruncationSet detect_support(const Vector& x, const ThresholdRule& rule, int round) {
  const auto n = static_cast<std::size_t>(x.size());
  require(round >= 0, ErrorCode::InvalidInput, "detection round must be nonnegative");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const auto mag = [&](std::size_t i) { return std::abs(x[static_cast<Eigen::Index>(i)]); };

  if (const auto* jump = std::get_if<FirstJump>(&rule)) {
    require(jump->factor > 1.0, ErrorCode::InvalidInput, "FirstJump factor must exceed 1");
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mag(a) < mag(b); });
    if (n == 0 || mag(order.back()) == 0.0) return TruncationSet::empty(n);
    const double tau = mag(order.back()) / std::pow(jump->factor, round + 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (mag(order[i + 1]) - mag(order[i]) > tau) {
        const double cut = mag(order[i]);
        std::vector<std::size_t> detected;
        for (std::size_t j = 0; j < n; ++j)
          if (mag(j) > cut) detected.push_back(j);
        return TruncationSet(std::move(detected), n);
      }
    }
    return TruncationSet::empty(n);
  }

  const auto& top = std::get<TopJ>(rule);
  require(!top.counts.empty(), ErrorCode::InvalidInput, "TopJ needs a nonempty schedule");
  const std::size_t count =
      std::min(top.counts[std::min(static_cast<std::size_t>(round), top.counts.size() - 1)], n);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
  std::vector<std::size_t> detected;
  for (std::size_t j = 0; j < count && mag(order[j]) > 0.0; ++j) detected.push_back(order[j]);
  return TruncationSet(std::move(detected), n);
}

SolverReport isd_recover(const Matrix& A, const Vector& b, double q,
                         const NoiseConstraint& constraint, const SolverConfig& config,
                         const ThresholdRule& rule) {
  require(q > 0.0 && q <= 1.0, ErrorCode::InvalidInput, "ISD requires 0 < q <= 1");
  const WeightedL1Solver solver(A, b, constraint, config);
  const auto n = static_cast<std::size_t>(A.cols());
  const std::size_t max_detected = std::max<std::size_t>(1, static_cast<std::size_t>(A.rows()) / 2);

  auto solve_on = [&](const TruncationSet& T, const Vector* warm) {
    return q == 1.0 ? solver.solve_truncated(T, warm) : solver.solve_truncated_lq(T, q, warm);
  };

  TruncationSet detected = TruncationSet::empty(n);
  SolverReport current = solve_on(detected.complement(), nullptr);
  std::vector<TruncationSet> history{detected};
  int total_iterations = current.iterations_used;
  int solves = 1;

  for (int round = 0; solves < config.isd_max_rounds && !rule_saturated(rule, round); ++round) {
    TruncationSet next = detect_support(current.solution, rule, round);
    if (next.size() > max_detected) {
      std::vector<std::size_t> idx = next.indices();
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
        return std::abs(current.solution[static_cast<Eigen::Index>(a)]) >
               std::abs(current.solution[static_cast<Eigen::Index>(c)]);
      });
      idx.resize(max_detected);
      next = TruncationSet(std::move(idx), n);
    }
    if (next == detected) continue;
    detected = std::move(next);
    const Vector warm = current.solution;
    current = solve_on(detected.complement(), &warm);
    history.push_back(detected);
    total_iterations += current.iterations_used;
    ++solves;
  }

  current.support_history = std::move(history);
  current.iterations_used = total_iterations;
  current.objective_value = qnorm_pow_on(current.solution, detected.complement(), q);
  return current;
}

}  // namespace truncq
