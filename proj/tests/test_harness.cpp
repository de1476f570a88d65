#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "truncq/harness.hpp"
#include "truncq/io.hpp"

using namespace truncq;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "truncq_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(GaussianMatrix, DeterministicAndCalibrated) {
  EXPECT_EQ(gaussian_matrix(5, 7, 3), gaussian_matrix(5, 7, 3));
  EXPECT_NE(gaussian_matrix(5, 7, 3), gaussian_matrix(5, 7, 4));
  const Matrix big = gaussian_matrix(1000, 1000, 5);
  EXPECT_LE(std::abs(big.mean()), 0.005);
  const Matrix A = gaussian_matrix(64, 400, 6);
  const double avg = A.colwise().norm().mean();
  EXPECT_GE(avg, 0.9);
  EXPECT_LE(avg, 1.1);
  const Matrix B = bernoulli_matrix(16, 10, 7);
  EXPECT_NEAR(B.cwiseAbs().maxCoeff(), 0.25, 1e-15);
  EXPECT_NEAR(B.cwiseAbs().minCoeff(), 0.25, 1e-15);
}

TEST(SparseSignal, Examples) {
  EXPECT_EQ(sparse_signal(10, 0, Flat{}, 1).norm(), 0.0);
  const Vector flat = sparse_signal(10, 3, Flat{}, 2);
  EXPECT_EQ((flat.array() != 0.0).count(), 3);
  EXPECT_EQ((flat.array().abs() == 1.0).count(), 3);
  const Vector pw = sparse_signal(20, 5, Power{3.0}, 3);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < pw.size(); ++i)
    if (pw[i] != 0.0) mags.push_back(std::abs(pw[i]));
  std::sort(mags.rbegin(), mags.rend());
  ASSERT_EQ(mags.size(), 5u);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(mags[j], std::pow(j + 1.0, -3.0));
  EXPECT_EQ(sparse_signal(20, 5, Power{3.0}, 3), pw);
  EXPECT_THROW(sparse_signal(3, 4, Flat{}, 0), Error);
}

TEST(AddNoise, ScaledExactly) {
  const Matrix A = gaussian_matrix(12, 20, 1);
  const Vector clean = A * sparse_signal(20, 3, Flat{}, 2);
  EXPECT_EQ(add_noise(clean, LpBall{2.0, 0.0}, 0.0, A, 3), clean);
  for (double p : {1.0, 2.0, kInf}) {
    const Vector b = add_noise(clean, LpBall{p, 0.0}, 0.25, A, 4);
    EXPECT_NEAR(qnorm(b - clean, p), 0.25, 1e-12);
  }
  const Vector d = add_noise(clean, DantzigSelector{0.0}, 0.25, A, 5);
  EXPECT_NEAR((A.transpose() * (d - clean)).cwiseAbs().maxCoeff(), 0.25, 1e-12);
  EXPECT_THROW(add_noise(clean, LpBall{}, -1.0, A, 6), Error);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(0, 1), derive_seed(0, 2));
  EXPECT_NE(derive_seed(0, 1), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
}

TEST(Io, VectorAndMatrixRoundTrip) {
  const Matrix A = gaussian_matrix(4, 3, 9);
  write_matrix(scratch("a.csv").string(), A);
  EXPECT_EQ(read_matrix(scratch("a.csv").string()), A);
  const Vector x = sparse_signal(6, 3, Power{1.5}, 10);
  write_vector(scratch("x.txt").string(), x);
  EXPECT_EQ(read_vector(scratch("x.txt").string()), x);
  try {
    read_matrix(scratch("missing.csv").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
  write_text(scratch("ragged.csv").string(), "1,2\n3\n");
  EXPECT_THROW(read_matrix(scratch("ragged.csv").string()), Error);
}

TEST(Io, SpecJsonRoundTripAndValidation) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Sweep;
  spec.grid = {40, 60};
  spec.r = kInf;
  spec.method = RecoveryMethod::Isd;
  spec.solver.tolerance = 1e-7;
  const ExperimentSpec back = spec_from_json(spec_to_json(spec));
  EXPECT_EQ(spec_to_json(back), spec_to_json(spec));
  EXPECT_EQ(back.r, kInf);
  EXPECT_THROW(spec_from_json(R"({"kind": "recover", "bogus": 1})"), Error);
  EXPECT_THROW(spec_from_json(R"({"kind": "nonsense"})"), Error);
  EXPECT_THROW(spec_from_json("{not json"), Error);
  EXPECT_EQ(spec_from_json(R"({"p": "inf"})").p, kInf);
}

TEST(RunExperiment, ByteIdenticalFromFile) {
  const std::string path = scratch("pinned.csv").string();
  write_matrix(path, gaussian_matrix(30, 60, 11));
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Recover;
  spec.ensemble = Ensemble::FromFile;
  spec.matrix_path = path;
  spec.n = 60;
  spec.k = 4;
  spec.trials = 1;
  spec.seed = 5;
  const std::string a = report_to_json(run_experiment(spec), false);
  const std::string b = report_to_json(run_experiment(spec), false);
  EXPECT_EQ(a, b);
}

TEST(RunExperiment, IndependentOfThreadCount) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Sweep;
  spec.n = 60;
  spec.k = 4;
  spec.grid = {16, 24};
  spec.trials = 4;
  spec.seed = 8;
  spec.threads = 1;
  const std::string one = report_to_json(run_experiment(spec), false);
  spec.threads = 3;
  std::string three = report_to_json(run_experiment(spec), false);
  // Only the threads field of the echoed spec differs.
  const auto pos = three.find("\"threads\": 3");
  ASSERT_NE(pos, std::string::npos);
  three.replace(pos, 12, "\"threads\": 1");
  EXPECT_EQ(one, three);
}

TEST(RunExperiment, OracleRecoverySuccess) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Recover;
  spec.m = 64;
  spec.n = 128;
  spec.k = 5;
  spec.truncation = TruncationChoice::OracleComplement;
  spec.trials = 10;
  spec.seed = 100;
  const ExperimentReport rep = run_experiment(spec);
  EXPECT_GE(rep.success_rate, 0.95);
  for (std::size_t i = 0; i < rep.records.size(); ++i) EXPECT_EQ(rep.records[i].trial, i);
}

TEST(RunExperiment, BoundSpecZeroViolationsAndRevalidates) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Bound;
  spec.m = 100;
  spec.n = 12;
  spec.k = 2;
  spec.tc_size = 1;
  spec.t_factor = 2.0;
  spec.eps = spec.eta = 0.01;
  spec.trials = 4;
  spec.seed = 21;
  spec.output = scratch("bound.json").string();
  const ExperimentReport rep = run_experiment(spec);
  EXPECT_EQ(rep.bound_checked, 4u);
  EXPECT_EQ(rep.bound_violations, 0u);
  const std::string stored = read_text(spec.output);
  EXPECT_LE(revalidate_report(stored), 1e-12);
}

TEST(RunExperiment, SweepWritesCsv) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Sweep;
  spec.n = 40;
  spec.k = 3;
  spec.grid = {10, 20};
  spec.trials = 2;
  spec.output = scratch("sweep.json").string();
  run_experiment(spec);
  const std::string csv = read_text(spec.output + ".csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "value,success_rate,mean_error,bound,violations");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(RunExperiment, TrialFailuresAreRecorded) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Recover;
  spec.m = 10;
  spec.n = 5;
  spec.k = 6;  // more nonzeros than coordinates: fails inside the trial
  spec.trials = 2;
  const ExperimentReport rep = run_experiment(spec);
  ASSERT_EQ(rep.records.size(), 2u);
  EXPECT_FALSE(rep.records[0].failure.empty());
  EXPECT_EQ(rep.success_rate, 0.0);
}

TEST(ExperimentSpecValidation, Rejects) {
  ExperimentSpec spec;
  spec.trials = 0;
  EXPECT_THROW(spec.validate(), Error);
  spec = ExperimentSpec{};
  spec.kind = ExperimentKind::Sweep;
  EXPECT_THROW(spec.validate(), Error);
  spec = ExperimentSpec{};
  spec.q = 1.5;
  EXPECT_THROW(spec.validate(), Error);
}
