// Command-line front end. Exit codes: 0 success, 1 violation or infeasibility,
// 2 usage or input errors.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "truncq/analysis.hpp"
#include "truncq/harness.hpp"
#include "truncq/io.hpp"
#include "truncq/solvers_matrix.hpp"
#include "truncq/solvers_vector.hpp"

namespace {

using namespace truncq;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string output;
  unsigned threads = 1;
};

void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
  } else {
    write_text(g.output, text);
  }
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoul(cell)));
  }
  return out;
}

double parse_exponent(const std::string& text) {
  if (text == "inf") return kInf;
  return std::stod(text);
}

NoiseConstraint make_constraint(bool dantzig, double p, double eta) {
  if (dantzig) return DantzigSelector{eta};
  return LpBall{p, eta};
}

SolverConfig load_solver_config(const Globals& g) {
  SolverConfig config;
  if (!g.config.empty()) config = spec_from_json(read_text(g.config)).solver;
  config.seed = g.seed;
  return config;
}

std::string verdict_json(const TsapReport& r) {
  json j = {{"k", r.k},
            {"t", r.t},
            {"q", r.norms.q},
            {"r", r.norms.r == kInf ? json("inf") : json(r.norms.r)},
            {"p", r.norms.p == kInf ? json("inf") : json(r.norms.p)},
            {"D", r.D},
            {"beta", r.beta},
            {"mode", r.mode == TsapMode::LpForm ? "lp" : "dantzig"},
            {"sets_checked", r.sets_checked},
            {"worst_ratio", std::isfinite(r.worst_ratio) ? json(r.worst_ratio) : json("inf")}};
  if (const auto* v = std::get_if<Violated>(&r.verdict)) {
    j["verdict"] = "violated";
    j["witness"] = std::vector<double>(v->x.data(), v->x.data() + v->x.size());
    if (v->y.size() > 0) j["witness_y"] = std::vector<double>(v->y.data(), v->y.data() + v->y.size());
    j["T"] = v->T.to_string_one_based();
    j["K"] = v->K.to_string_one_based();
    j["lhs"] = v->lhs;
    j["rhs"] = v->rhs;
  } else if (const auto* c = std::get_if<Certified>(&r.verdict)) {
    j["verdict"] = "certified";
    j["source"] = c->source;
    j["samples"] = c->samples;
  } else {
    j["verdict"] = "passed-sampling";
    j["samples"] = std::get<PassedSampling>(r.verdict).samples;
  }
  return j.dump(2) + "\n";
}

json bound_json(const BoundReport& b) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"theorem", b.theorem},
          {"delta", num(b.delta)},
          {"t_factor", b.t_factor},
          {"D", b.D},
          {"beta", b.beta},
          {"k", b.k},
          {"T_size", b.t},
          {"Tc_size", b.tc_size},
          {"q", b.q},
          {"r", num(b.r)},
          {"eps", b.eps},
          {"eta", b.eta},
          {"sigma", b.sigma},
          {"noise_coefficient", b.noise_coefficient},
          {"compressibility_coefficient", b.compressibility_coefficient},
          {"noise_term", b.noise_term},
          {"sigma_term", b.sigma_term},
          {"bound_value", b.bound_value}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated lq recovery, isometry constants and recovery bounds"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--config", g.config, "JSON config mirroring the experiment spec");
  app.add_option("--output", g.output, "Write results here instead of stdout");
  app.add_option("--threads", g.threads, "Worker threads for experiments")->check(CLI::PositiveNumber);

  // recover
  auto* recover = app.add_subcommand("recover", "Truncated lq recovery of a vector");
  std::string a_path, b_path, detected, truncation;
  double q = 1.0, eta = 0.0;
  std::string p_text = "2";
  bool dantzig = false, isd = false;
  recover->add_option("--matrix", a_path, "CSV matrix A")->required();
  recover->add_option("--measurements", b_path, "Vector b, one value per line")->required();
  recover->add_option("--truncation", truncation, "0-based indices of T (default: all)");
  recover->add_option("--detected", detected, "0-based indices of T^c (alternative to --truncation)");
  recover->add_option("--q", q, "Exponent q in (0, 1]")->capture_default_str();
  recover->add_option("--p", p_text, "Noise norm p: 1, 2 or inf")->capture_default_str();
  recover->add_option("--eta", eta, "Noise level")->capture_default_str();
  recover->add_flag("--dantzig", dantzig, "Dantzig selector noise set");
  recover->add_flag("--isd", isd, "Iterative support detection");

  // recover-matrix
  auto* recover_matrix = app.add_subcommand("recover-matrix", "Truncated Schatten-q recovery");
  std::string map_path;
  long rows = 0, cols = 0;
  std::size_t tail = 1;
  recover_matrix->add_option("--map", map_path, "CSV, row i = column-major sensing matrix i")->required();
  recover_matrix->add_option("--rows", rows, "Rows of the unknown matrix")->required();
  recover_matrix->add_option("--cols", cols, "Columns of the unknown matrix")->required();
  recover_matrix->add_option("--measurements", b_path, "Vector b")->required();
  recover_matrix->add_option("--t", tail, "Number of smallest singular values penalized")->required();
  recover_matrix->add_option("--q", q, "Exponent q in (0, 1]")->capture_default_str();
  recover_matrix->add_option("--p", p_text, "Noise norm p: 1, 2 or inf")->capture_default_str();
  recover_matrix->add_option("--eta", eta, "Noise level")->capture_default_str();
  recover_matrix->add_flag("--dantzig", dantzig, "Dantzig selector noise set");

  // rip
  auto* rip = app.add_subcommand("rip", "Restricted isometry constant");
  std::size_t k = 1;
  bool sample = false;
  rip->add_option("--matrix", a_path, "CSV matrix A")->required();
  rip->add_option("--k", k, "Sparsity order")->required();
  rip->add_option("--p", p_text, "Exponent p (2 exact; 0 < p <= 1 sampled)")->capture_default_str();
  rip->add_flag("--sample", sample, "Sample supports when enumeration is too large");

  // tsap
  auto* tsap = app.add_subcommand("tsap", "Search for truncated sparse approximation violations");
  std::size_t t = 1, samples = 10000, restarts = 20;
  double D = 1.0, beta = 0.5;
  std::string r_text = "2";
  tsap->add_option("--matrix", a_path, "CSV matrix A")->required();
  tsap->add_option("--k", k, "Order k")->required();
  tsap->add_option("--t", t, "Truncation size |T|")->required();
  tsap->add_option("--q", q, "q")->capture_default_str();
  tsap->add_option("--r", r_text, "r (number or inf)")->capture_default_str();
  tsap->add_option("--p", p_text, "p (number or inf)")->capture_default_str();
  tsap->add_option("--D", D, "Constant D")->required();
  tsap->add_option("--beta", beta, "Constant beta in (0, 1)")->required();
  tsap->add_flag("--dantzig", dantzig, "Dantzig selector form");
  tsap->add_option("--samples", samples, "Random samples per T")->capture_default_str();
  tsap->add_option("--restarts", restarts, "Ascent restarts per T")->capture_default_str();

  // nsp
  auto* nsp = app.add_subcommand("nsp", "Search for truncated null space property violations");
  nsp->add_option("--matrix", a_path, "CSV matrix A")->required();
  nsp->add_option("--k", k, "Order k")->required();
  nsp->add_option("--t", t, "Truncation size |T|")->required();
  nsp->add_option("--beta", beta, "Constant beta in (0, 1)")->required();
  nsp->add_option("--samples", samples, "Random samples per T")->capture_default_str();
  nsp->add_option("--restarts", restarts, "Ascent restarts per T")->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate a recovery bound");
  std::string form = "rq";
  double delta = 0.0, t_factor = 2.0, eps = 0.0, sigma = 0.0;
  std::size_t tc_size = 0;
  bound->add_option("--form", form, "rq | qq-strict | qq-equal | rip-truncated | rip-plain")
      ->capture_default_str();
  bound->add_option("--D", D, "Constant D (rq / qq forms)");
  bound->add_option("--beta", beta, "Constant beta (rq / qq forms)");
  bound->add_option("--delta", delta, "Isometry constant (rip forms)");
  bound->add_option("--t-factor", t_factor, "Isometry order factor (rip forms)")->capture_default_str();
  bound->add_option("--k", k, "Order k")->required();
  bound->add_option("--t", t, "|T|");
  bound->add_option("--tc", tc_size, "|T^c|")->capture_default_str();
  bound->add_option("--q", q, "q")->capture_default_str();
  bound->add_option("--r", r_text, "r")->capture_default_str();
  bound->add_option("--eps", eps, "Noise level of the data")->capture_default_str();
  bound->add_option("--eta", eta, "Noise level of the program")->capture_default_str();
  bound->add_option("--sigma", sigma, "sigma_k(x_T)_q (as a norm)")->capture_default_str();
  bound->add_flag("--dantzig", dantzig, "Dantzig selector constants");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run an experiment spec (needs --config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*recover) {
      const Matrix A = read_matrix(a_path);
      const Vector b = read_vector(b_path);
      const auto n = static_cast<std::size_t>(A.cols());
      TruncationSet T = TruncationSet::full(n);
      if (!truncation.empty() && !detected.empty()) {
        throw Error(ErrorCode::InvalidInput, "use either --truncation or --detected");
      }
      if (!truncation.empty()) T = TruncationSet(parse_indices(truncation), n);
      if (!detected.empty()) T = TruncationSet(parse_indices(detected), n).complement();
      const NoiseConstraint constraint = make_constraint(dantzig, parse_exponent(p_text), eta);
      const SolverConfig config = load_solver_config(g);
      SolverReport rep;
      if (isd) {
        rep = isd_recover(A, b, q, constraint, config);
      } else if (q == 1.0) {
        rep = solve_truncated_l1(A, b, T, constraint, config);
      } else {
        rep = solve_truncated_lq(A, b, T, q, constraint, config);
      }
      std::ostringstream out;
      out << std::setprecision(17);
      for (Eigen::Index i = 0; i < rep.solution.size(); ++i) out << rep.solution[i] << '\n';
      emit(g, out.str());
      std::cerr << "converged=" << rep.converged << " iterations=" << rep.iterations_used
                << " objective=" << rep.objective_value
                << " constraint_residual=" << rep.constraint_residual << '\n';
      return kExitOk;
    }
    if (*recover_matrix) {
      const LinearMatrixMap map(read_matrix(map_path), rows, cols);
      const Vector b = read_vector(b_path);
      const MatrixSolverReport rep = solve_truncated_schatten(
          map, b, tail, q, make_constraint(dantzig, parse_exponent(p_text), eta),
          load_solver_config(g));
      std::ostringstream out;
      out << std::setprecision(17);
      for (Eigen::Index i = 0; i < rep.solution.rows(); ++i) {
        for (Eigen::Index j = 0; j < rep.solution.cols(); ++j) {
          out << (j ? "," : "") << rep.solution(i, j);
        }
        out << '\n';
      }
      emit(g, out.str());
      std::cerr << "converged=" << rep.converged << " iterations=" << rep.iterations_used
                << " objective=" << rep.objective_value
                << " constraint_residual=" << rep.constraint_residual << '\n';
      return kExitOk;
    }
    if (*rip) {
      RipOptions options;
      options.allow_sampling = sample;
      options.seed = g.seed;
      const RipEstimate est = rip_constant(read_matrix(a_path), k, parse_exponent(p_text), options);
      const json j = {{"k", est.k},
                      {"p", est.p},
                      {"delta", est.delta},
                      {"exact", est.exact},
                      {"extremal_support", est.extremal_support.to_string_one_based()},
                      {"supports_examined", est.supports_examined}};
      emit(g, j.dump(2) + "\n");
      return kExitOk;
    }
    if (*tsap || *nsp) {
      SearchBudget budget;
      budget.seed = g.seed;
      budget.random_samples = samples;
      budget.restarts = restarts;
      const Matrix A = read_matrix(a_path);
      const TsapReport rep =
          *tsap ? tsap_check(A, k, t, NormTriple{q, parse_exponent(r_text), parse_exponent(p_text)},
                             D, beta, dantzig ? TsapMode::DantzigForm : TsapMode::LpForm, budget)
                : nsp_check(A, k, t, beta, budget);
      emit(g, verdict_json(rep));
      return rep.violated() ? kExitViolation : kExitOk;
    }
    if (*bound) {
      const TsapMode mode = dantzig ? TsapMode::DantzigForm : TsapMode::LpForm;
      BoundReport rep;
      if (form == "rip-truncated") {
        rep = bound_theorem35(delta, t_factor, k, tc_size, t, eps, eta, sigma, mode);
      } else if (form == "rip-plain") {
        rep = bound_theorem36(delta, t_factor, k, eps, eta, sigma, mode);
      } else {
        BoundForm which = BoundForm::Rq;
        if (form == "qq-strict") {
          which = BoundForm::QqStrict;
        } else if (form == "qq-equal") {
          which = BoundForm::QqEqual;
        } else if (form != "rq") {
          throw Error(ErrorCode::InvalidInput, "unknown --form " + form);
        }
        rep = bound_theorem23(NormTriple{q, parse_exponent(r_text), 2.0}, D, beta, k, t, tc_size,
                              eps, eta, sigma, which);
      }
      emit(g, bound_json(rep).dump(2) + "\n");
      return kExitOk;
    }
    if (*experiment) {
      if (g.config.empty()) throw Error(ErrorCode::InvalidInput, "experiment needs --config");
      ExperimentSpec spec = spec_from_json(read_text(g.config));
      if (app.count("--seed")) spec.seed = g.seed;
      if (app.count("--threads")) spec.threads = g.threads;
      if (!g.output.empty()) spec.output = g.output;
      const ExperimentReport rep = run_experiment(spec);
      if (spec.output.empty()) std::cout << report_to_json(rep);
      std::cerr << "trials=" << rep.records.size() << " success_rate=" << rep.success_rate
                << " bound_violations=" << rep.bound_violations << '\n';
      return rep.bound_violations > 0 ? kExitViolation : kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    const bool verification_failure =
        e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::DeltaOutOfRange ||
        e.code() == ErrorCode::BetaOutOfRange;
    return verification_failure ? kExitViolation : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
