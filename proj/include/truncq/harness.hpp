#pragma once

// Random problem ensembles and the experiment runner used by the CLI and the
// acceptance suite.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "truncq/analysis.hpp"
#include "truncq/core.hpp"
#include "truncq/solvers_vector.hpp"

namespace truncq {

/// Entries i.i.d. N(0, 1/m).
Matrix gaussian_matrix(std::size_t m, std::size_t n, std::uint64_t seed);

/// Entries i.i.d. +-1/sqrt(m).
Matrix bernoulli_matrix(std::size_t m, std::size_t n, std::uint64_t seed);

struct Flat {};
struct Power {
  double exponent = 1.0;
};
using Decay = std::variant<Flat, Power>;

/// Exactly k nonzeros at random positions with random signs: magnitude 1
/// (Flat) or j^(-exponent) for the j-th largest (Power).
Vector sparse_signal(std::size_t n, std::size_t k, const Decay& decay, std::uint64_t seed);

/// clean + z with z a Gaussian direction scaled so that ||z||_p = eps (LpBall)
/// or ||A^T z||_inf = eps (DantzigSelector).
Vector add_noise(const Vector& clean, const NoiseConstraint& model, double eps, const Matrix& A,
                 std::uint64_t seed);

/// Independent stream seeds derived from one trial seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class ExperimentKind { Recover, RecoverMatrix, Rip, Tsap, Bound, Sweep };
enum class Ensemble { Gaussian, Bernoulli, FromFile };
/// Truncation set used by the recovery kinds: everything, or the complement
/// of the true support.
enum class TruncationChoice { Full, OracleComplement };
enum class RecoveryMethod { Plain, Isd };
enum class SweepParameter { M, K };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Recover;
  std::size_t m = 64;
  std::size_t n = 128;
  std::size_t k = 5;
  std::size_t t = 1;        // RecoverMatrix: number of tail singular values penalized
  std::size_t tc_size = 0;  // Tsap / Bound: |T^c|
  double t_factor = 2.0;    // Tsap / Bound: isometry order t_factor (k + |T^c|)
  double q = 1.0;
  double r = 2.0;
  double p = 2.0;
  double eta = 0.0;
  double eps = 0.0;
  bool dantzig = false;
  Ensemble ensemble = Ensemble::Gaussian;
  std::string matrix_path;
  double decay_exponent = 0.0;  // 0 selects Flat
  TruncationChoice truncation = TruncationChoice::Full;
  RecoveryMethod method = RecoveryMethod::Plain;
  SweepParameter sweep_parameter = SweepParameter::M;
  std::vector<std::size_t> grid;
  std::size_t measurements = 80;  // RecoverMatrix: map size l
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double success_threshold = 1e-4;
  std::string output;
  SolverConfig solver;

  void validate() const;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double grid_value = 0.0;
  double error_l2 = 0.0;
  double error_qq = 0.0;
  double relative_error = 0.0;
  std::optional<double> delta;
  std::optional<double> bound;
  std::optional<BoundReport> bound_inputs;  // everything the bound was computed from
  bool success = false;
  bool converged = false;
  bool bound_checked = false;
  bool bound_violated = false;
  std::string failure;
};

struct GridSummary {
  double value = 0.0;
  std::size_t trials = 0;
  double success_rate = 0.0;
  double mean_error = 0.0;
  double mean_bound = 0.0;  // over trials with a bound, 0 if none
  std::size_t violations = 0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<TrialRecord> records;  // sorted by (grid value, trial)
  double success_rate = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  std::size_t bound_checked = 0;
  std::size_t bound_violations = 0;
  std::vector<GridSummary> grid;
  std::string version;
  std::string timestamp;
};

/// Runs spec.trials seeded trials (seed + trial index) on spec.threads workers.
/// Per-trial failures are recorded in the record, not thrown.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Recomputes the aggregate fields from the records.
void summarize(ExperimentReport& report);

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

}  // namespace truncq
