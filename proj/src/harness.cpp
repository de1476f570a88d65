#include "truncq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "truncq/analysis.hpp"
#include "truncq/io.hpp"
#include "truncq/numerics.hpp"
#include "truncq/solvers_matrix.hpp"

namespace truncq {

namespace {

Matrix gaussian_block(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = scale * normal(rng);
  return G;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, ErrorCode::InvalidInput, "matrix dimensions must be positive");
  std::mt19937_64 rng(seed);
  return gaussian_block(m, n, 1.0 / std::sqrt(static_cast<double>(m)), rng);
}

Matrix bernoulli_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, ErrorCode::InvalidInput, "matrix dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  const double v = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = coin(rng) ? v : -v;
  return A;
}

Vector sparse_signal(std::size_t n, std::size_t k, const Decay& decay, std::uint64_t seed) {
  require(n >= 1 && k <= n, ErrorCode::InvalidInput, "sparse_signal: need k <= n");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution coin(0.5);
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < k; ++j) {
    double magnitude = 1.0;
    if (const auto* power = std::get_if<Power>(&decay)) {
      magnitude = std::pow(static_cast<double>(j + 1), -power->exponent);
    }
    x[static_cast<Eigen::Index>(perm[j])] = coin(rng) ? magnitude : -magnitude;
  }
  return x;
}

Vector add_noise(const Vector& clean, const NoiseConstraint& model, double eps, const Matrix& A,
                 std::uint64_t seed) {
  require(eps >= 0.0, ErrorCode::InvalidInput, "noise level must be nonnegative");
  if (eps == 0.0) return clean;
  std::mt19937_64 rng(seed);
  const Vector z = gaussian_block(static_cast<std::size_t>(clean.size()), 1, 1.0, rng).col(0);
  double size = 0.0;
  if (const auto* ball = std::get_if<LpBall>(&model)) {
    size = qnorm(z, ball->p);
  } else {
    require(A.rows() == clean.size(), ErrorCode::InvalidInput, "add_noise: A rows != length");
    size = (A.transpose() * z).cwiseAbs().maxCoeff();
  }
  require(size > 0.0, ErrorCode::NumericalFailure, "add_noise: degenerate noise direction");
  return clean + (eps / size) * z;
}

void ExperimentSpec::validate() const {
  require(trials >= 1, ErrorCode::InvalidInput, "trials must be >= 1");
  require(threads >= 1, ErrorCode::InvalidInput, "threads must be >= 1");
  require(eta >= 0.0 && eps >= 0.0, ErrorCode::InvalidInput, "eta and eps must be nonnegative");
  require(success_threshold > 0.0, ErrorCode::InvalidInput, "success_threshold must be positive");
  require(decay_exponent >= 0.0, ErrorCode::InvalidInput, "decay_exponent must be nonnegative");
  NormTriple{q, r, p}.validate();
  solver.validate();
  if (ensemble == Ensemble::FromFile) {
    require(!matrix_path.empty(), ErrorCode::InvalidInput, "FromFile ensemble needs matrix_path");
  } else {
    require(m >= 1 && n >= 1, ErrorCode::InvalidInput, "dimensions must be positive");
  }
  switch (kind) {
    case ExperimentKind::Sweep:
      require(!grid.empty(), ErrorCode::InvalidInput, "Sweep needs a nonempty grid");
      break;
    case ExperimentKind::RecoverMatrix:
      require(measurements >= 1, ErrorCode::InvalidInput, "measurements must be >= 1");
      require(t >= 1 && t <= std::min(m, n), ErrorCode::InvalidInput, "t must lie in [1, min(m, n)]");
      require(k <= std::min(m, n), ErrorCode::InvalidInput, "rank exceeds min(m, n)");
      break;
    case ExperimentKind::Rip:
    case ExperimentKind::Tsap:
    case ExperimentKind::Bound:
      require(k >= 1, ErrorCode::InvalidInput, "k must be >= 1");
      require(t_factor >= 4.0 / 3.0, ErrorCode::InvalidInput, "t_factor must be >= 4/3");
      break;
    case ExperimentKind::Recover:
      break;
  }
}

namespace {

struct Task {
  std::size_t grid_index;
  std::size_t trial;
  double grid_value;
};

Matrix make_matrix(const ExperimentSpec& spec, std::size_t m, std::size_t n, std::uint64_t seed) {
  switch (spec.ensemble) {
    case Ensemble::Gaussian:
      return gaussian_matrix(m, n, seed);
    case Ensemble::Bernoulli:
      return bernoulli_matrix(m, n, seed);
    case Ensemble::FromFile:
      break;
  }
  return read_matrix(spec.matrix_path);
}

NoiseConstraint constraint_of(const ExperimentSpec& spec) {
  if (spec.dantzig) return DantzigSelector{spec.eta};
  return LpBall{spec.p, spec.eta};
}

Decay decay_of(const ExperimentSpec& spec) {
  if (spec.decay_exponent == 0.0) return Flat{};
  return Power{spec.decay_exponent};
}

std::size_t isometry_order(const ExperimentSpec& spec, std::size_t n) {
  const double order = std::ceil(spec.t_factor * static_cast<double>(spec.k + spec.tc_size));
  return std::min(static_cast<std::size_t>(order), n);
}

void fill_errors(TrialRecord& rec, const Vector& xhat, const Vector& x, double q,
                 double threshold) {
  const Vector v = xhat - x;
  rec.error_l2 = v.norm();
  rec.error_qq = qnorm_pow(v, q);
  rec.relative_error = x.norm() > 0.0 ? rec.error_l2 / x.norm() : rec.error_l2;
  rec.success = rec.relative_error <= threshold;
}

void vector_recovery_trial(const ExperimentSpec& spec, std::size_t m, std::size_t k,
                           TrialRecord& rec) {
  const Matrix A = make_matrix(spec, m, spec.n, derive_seed(rec.seed, 1));
  const auto n = static_cast<std::size_t>(A.cols());
  require(k <= n, ErrorCode::InvalidInput, "k exceeds n");
  const Vector x = sparse_signal(n, k, decay_of(spec), derive_seed(rec.seed, 2));
  const NoiseConstraint constraint = constraint_of(spec);
  const Vector b = add_noise(A * x, constraint, spec.eps, A, derive_seed(rec.seed, 3));
  TruncationSet T = TruncationSet::full(n);
  if (spec.truncation == TruncationChoice::OracleComplement) {
    std::vector<std::size_t> off;
    for (std::size_t i = 0; i < n; ++i)
      if (x[static_cast<Eigen::Index>(i)] == 0.0) off.push_back(i);
    T = TruncationSet(std::move(off), n);
  }
  SolverReport report;
  if (spec.method == RecoveryMethod::Isd) {
    report = isd_recover(A, b, spec.q, constraint, spec.solver);
  } else if (spec.q == 1.0) {
    report = solve_truncated_l1(A, b, T, constraint, spec.solver);
  } else {
    report = solve_truncated_lq(A, b, T, spec.q, constraint, spec.solver);
  }
  rec.converged = report.converged;
  fill_errors(rec, report.solution, x, spec.q, spec.success_threshold);
}

void matrix_recovery_trial(const ExperimentSpec& spec, TrialRecord& rec) {
  std::mt19937_64 rng(derive_seed(rec.seed, 2));
  const Matrix U = gaussian_block(spec.m, spec.k, 1.0, rng);
  const Matrix V = gaussian_block(spec.n, spec.k, 1.0, rng);
  const Matrix X0 = U * V.transpose();
  const LinearMatrixMap map(
      gaussian_matrix(spec.measurements, spec.m * spec.n, derive_seed(rec.seed, 1)),
      static_cast<Eigen::Index>(spec.m), static_cast<Eigen::Index>(spec.n));
  Vector b = apply_map(map, X0);
  const NoiseConstraint constraint = constraint_of(spec);
  if (spec.eps > 0.0) {
    std::mt19937_64 noise_rng(derive_seed(rec.seed, 3));
    const Vector z = gaussian_block(spec.measurements, 1, 1.0, noise_rng).col(0);
    const double size = spec.dantzig ? singular_values(apply_adjoint(map, z))[0] : qnorm(z, spec.p);
    b += (spec.eps / size) * z;
  }
  const MatrixSolverReport report =
      solve_truncated_schatten(map, b, spec.t, spec.q, constraint, spec.solver);
  rec.converged = report.converged;
  const Matrix E = report.solution - X0;
  rec.error_l2 = E.norm();
  rec.error_qq = std::pow(schatten_norm(E, spec.q), spec.q);
  rec.relative_error = X0.norm() > 0.0 ? rec.error_l2 / X0.norm() : rec.error_l2;
  rec.success = rec.relative_error <= spec.success_threshold;

  // Rank analogue of the isometry-constant bound, with T the t tail positions.
  // The map's constant is a sampled lower bound, so a violation is reported for
  // investigation rather than taken as a refutation.
  const auto l = static_cast<std::size_t>(std::min(spec.m, spec.n));
  const std::size_t tc = l - spec.t;
  const auto order = static_cast<std::size_t>(
      std::ceil(spec.t_factor * static_cast<double>(spec.k + tc)));
  if (spec.k > spec.t || order > l) return;
  const double delta = rip_constant_map(map, order, 2.0, 200, derive_seed(rec.seed, 4)).delta;
  rec.delta = delta;
  if (delta >= std::sqrt((spec.t_factor - 1.0) / spec.t_factor)) return;
  const TsapConstants c = tsap_constants_from_rip(delta, spec.t_factor, spec.k, tc);
  const TruncationSet T = TruncationSet::tail(l, spec.t);
  const double sigma = sigma_k(numerical_singular_values(X0), T, spec.k, spec.q);
  const BoundReport bound = bound_theorem23(NormTriple{spec.q, 2.0, spec.p},
                                            spec.dantzig ? c.D2 : c.D1, c.beta, spec.k, spec.t,
                                            tc, spec.eps, spec.eta, sigma, BoundForm::Rq);
  rec.bound = bound.bound_value;
  rec.bound_inputs = bound;
  rec.bound_checked = true;
  rec.bound_violated =
      std::pow(rec.error_l2, spec.q) > bound.bound_value + 1e-6 * (1.0 + X0.norm());
}

void rip_trial(const ExperimentSpec& spec, TrialRecord& rec) {
  const Matrix A = make_matrix(spec, spec.m, spec.n, derive_seed(rec.seed, 1));
  rec.delta = rip_constant(A, spec.k).delta;
  rec.success = true;
}

void tsap_trial(const ExperimentSpec& spec, TrialRecord& rec) {
  const Matrix A = make_matrix(spec, spec.m, spec.n, derive_seed(rec.seed, 1));
  const auto n = static_cast<std::size_t>(A.cols());
  const double delta = rip_constant(A, isometry_order(spec, n)).delta;
  rec.delta = delta;
  if (delta >= std::sqrt((spec.t_factor - 1.0) / spec.t_factor)) return;
  const TsapConstants c = tsap_constants_from_rip(delta, spec.t_factor, spec.k, spec.tc_size);
  SearchBudget budget;
  budget.seed = derive_seed(rec.seed, 4);
  budget.certificate = "exact isometry constant";
  const TsapMode mode = spec.dantzig ? TsapMode::DantzigForm : TsapMode::LpForm;
  const TsapReport report = tsap_check(A, spec.k, n - spec.tc_size, NormTriple{1.0, 2.0, 2.0},
                                       spec.dantzig ? c.D2 : c.D1, c.beta, mode, budget);
  rec.bound_checked = true;
  rec.bound_violated = report.violated();
  rec.success = !rec.bound_violated;
}

void bound_trial(const ExperimentSpec& spec, TrialRecord& rec) {
  // Draw matrices until one has an isometry constant inside the certified range.
  Matrix A;
  double delta = 1.0;
  const double limit = std::sqrt((spec.t_factor - 1.0) / spec.t_factor);
  for (std::uint64_t attempt = 0; attempt < 50 && delta >= limit; ++attempt) {
    A = make_matrix(spec, spec.m, spec.n, derive_seed(rec.seed, 10 + attempt));
    delta = rip_constant(A, isometry_order(spec, static_cast<std::size_t>(A.cols()))).delta;
  }
  rec.delta = delta;
  if (delta >= limit) throw Error(ErrorCode::Infeasible, "no matrix with certified constants");
  const auto n = static_cast<std::size_t>(A.cols());
  require(spec.tc_size + spec.k <= n, ErrorCode::InvalidInput, "k + |T^c| exceeds n");

  const Vector x = sparse_signal(n, spec.decay_exponent == 0.0 ? spec.k : n, decay_of(spec),
                                 derive_seed(rec.seed, 2));
  const TruncationSet Tc = best_k_support(x, TruncationSet::full(n), spec.tc_size);
  const TruncationSet T = Tc.complement();
  const NoiseConstraint constraint =
      spec.dantzig ? NoiseConstraint{DantzigSelector{spec.eta}} : NoiseConstraint{LpBall{2.0, spec.eta}};
  const Vector b = add_noise(A * x, constraint, spec.eps, A, derive_seed(rec.seed, 3));
  const SolverReport report = solve_truncated_l1(A, b, T, constraint, spec.solver);
  rec.converged = report.converged;
  fill_errors(rec, report.solution, x, 1.0, spec.success_threshold);

  const BoundReport bound = bound_theorem35(
      delta, spec.t_factor, spec.k, spec.tc_size, T.size(), spec.eps, spec.eta,
      sigma_k(x, T, spec.k, 1.0), spec.dantzig ? TsapMode::DantzigForm : TsapMode::LpForm);
  rec.bound = bound.bound_value;
  rec.bound_inputs = bound;
  rec.bound_checked = true;
  // Solver slack: the bound is exactly zero in the noiseless sparse case.
  rec.bound_violated = rec.error_l2 > bound.bound_value + 1e-6 * (1.0 + x.norm());
  rec.success = !rec.bound_violated;
}

void run_trial(const ExperimentSpec& spec, const Task& task, TrialRecord& rec) {
  switch (spec.kind) {
    case ExperimentKind::Recover:
      vector_recovery_trial(spec, spec.m, spec.k, rec);
      break;
    case ExperimentKind::Sweep: {
      const auto value = static_cast<std::size_t>(task.grid_value);
      if (spec.sweep_parameter == SweepParameter::M) {
        vector_recovery_trial(spec, value, spec.k, rec);
      } else {
        vector_recovery_trial(spec, spec.m, value, rec);
      }
      break;
    }
    case ExperimentKind::RecoverMatrix:
      matrix_recovery_trial(spec, rec);
      break;
    case ExperimentKind::Rip:
      rip_trial(spec, rec);
      break;
    case ExperimentKind::Tsap:
      tsap_trial(spec, rec);
      break;
    case ExperimentKind::Bound:
      bound_trial(spec, rec);
      break;
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

void summarize(ExperimentReport& report) {
  report.success_rate = report.mean_error = report.max_error = 0.0;
  report.bound_checked = report.bound_violations = 0;
  report.grid.clear();
  std::size_t measured = 0;
  for (const auto& rec : report.records) {
    report.success_rate += rec.success ? 1.0 : 0.0;
    if (rec.failure.empty()) {
      report.mean_error += rec.relative_error;
      report.max_error = std::max(report.max_error, rec.relative_error);
      ++measured;
    }
    report.bound_checked += rec.bound_checked ? 1 : 0;
    report.bound_violations += rec.bound_violated ? 1 : 0;

    if (report.grid.empty() || report.grid.back().value != rec.grid_value) {
      report.grid.push_back(GridSummary{rec.grid_value});
    }
    GridSummary& g = report.grid.back();
    ++g.trials;
    g.success_rate += rec.success ? 1.0 : 0.0;
    g.mean_error += rec.relative_error;
    g.mean_bound += rec.bound.value_or(0.0);
    g.violations += rec.bound_violated ? 1 : 0;
  }
  if (!report.records.empty()) {
    report.success_rate /= static_cast<double>(report.records.size());
  }
  if (measured > 0) report.mean_error /= static_cast<double>(measured);
  for (auto& g : report.grid) {
    g.success_rate /= static_cast<double>(g.trials);
    g.mean_error /= static_cast<double>(g.trials);
    g.mean_bound /= static_cast<double>(g.trials);
  }
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Task> tasks;
  if (spec.kind == ExperimentKind::Sweep) {
    for (std::size_t g = 0; g < spec.grid.size(); ++g)
      for (std::size_t i = 0; i < spec.trials; ++i)
        tasks.push_back({g, i, static_cast<double>(spec.grid[g])});
  } else {
    for (std::size_t i = 0; i < spec.trials; ++i) tasks.push_back({0, i, 0.0});
  }

  ExperimentReport report;
  report.spec = spec;
  report.version = kVersion;
  report.timestamp = utc_timestamp();
  report.records.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < tasks.size(); j = next++) {
      TrialRecord& rec = report.records[j];
      rec.trial = tasks[j].trial;
      rec.grid_value = tasks[j].grid_value;
      rec.seed = spec.seed + tasks[j].trial;
      try {
        run_trial(spec, tasks[j], rec);
      } catch (const std::exception& e) {
        rec.failure = e.what();
        rec.success = false;
      }
    }
  };
  const unsigned workers = std::min<unsigned>(spec.threads, static_cast<unsigned>(tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  summarize(report);
  if (!spec.output.empty()) {
    write_text(spec.output, report_to_json(report));
    if (spec.kind == ExperimentKind::Sweep) write_text(spec.output + ".csv", sweep_csv(report));
  }
  return report;
}

}  // namespace truncq
