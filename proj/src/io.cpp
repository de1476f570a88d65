#include "truncq/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace truncq {

using nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(ExperimentKind, {{ExperimentKind::Recover, "recover"},
                                              {ExperimentKind::RecoverMatrix, "recover-matrix"},
                                              {ExperimentKind::Rip, "rip"},
                                              {ExperimentKind::Tsap, "tsap"},
                                              {ExperimentKind::Bound, "bound"},
                                              {ExperimentKind::Sweep, "sweep"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Ensemble, {{Ensemble::Gaussian, "gaussian"},
                                        {Ensemble::Bernoulli, "bernoulli"},
                                        {Ensemble::FromFile, "file"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TruncationChoice, {{TruncationChoice::Full, "full"},
                                                {TruncationChoice::OracleComplement,
                                                 "oracle-complement"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RecoveryMethod, {{RecoveryMethod::Plain, "plain"},
                                              {RecoveryMethod::Isd, "isd"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SweepParameter, {{SweepParameter::M, "m"}, {SweepParameter::K, "k"}})

namespace {

std::string path_error(const std::string& what, const std::string& path) {
  return what + ": " + path;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_number(const std::string& text, const std::string& path) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, path_error("not a number '" + text + "'", path));
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw Error(ErrorCode::Io, path_error("not a number '" + text + "'", path));
  return value;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Unknown values of an enum map to the first entry silently; reject them.
template <class E>
E parse_enum(const json& value, const char* key) {
  const E out = value.get<E>();
  if (json(out) != value) {
    throw Error(ErrorCode::InvalidInput, std::string("unknown value for ") + key);
  }
  return out;
}

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json config_to_json(const SolverConfig& c) {
  return {{"max_iterations", c.max_iterations},   {"tolerance", c.tolerance},
          {"admm_rho", c.admm_rho},               {"irl1_outer_iters", c.irl1_outer_iters},
          {"irl1_epsilon_start", c.irl1_epsilon_start}, {"seed", c.seed},
          {"isd_max_rounds", c.isd_max_rounds}};
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, path_error("cannot open for reading", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, path_error("cannot open for writing", path));
  out << text;
  if (!out) throw Error(ErrorCode::Io, path_error("write failed", path));
}

Vector read_vector(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!blank(line)) values.push_back(parse_number(line, path));
  }
  if (values.empty()) throw Error(ErrorCode::Io, path_error("empty vector file", path));
  Vector x = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  require_finite(x, "vector file");
  return x;
}

void write_vector(const std::string& path, const Vector& x) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < x.size(); ++i) out << x[i] << '\n';
  write_text(path, out.str());
}

Matrix read_matrix(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv(line)) row.push_back(parse_number(cell, path));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Io, path_error("ragged matrix rows", path));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::Io, path_error("empty matrix file", path));
  }
  Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  require_finite(A, "matrix file");
  return A;
}

void write_matrix(const std::string& path, const Matrix& A) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << A(i, j);
    out << '\n';
  }
  write_text(path, out.str());
}

ExperimentSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::InvalidInput, "config must be a JSON object");
  static const std::set<std::string> known = {
      "kind", "m", "n", "k", "t", "tc_size", "t_factor", "q", "r", "p", "eta", "eps", "dantzig",
      "ensemble", "matrix_path", "decay_exponent", "truncation", "method", "sweep_parameter",
      "grid", "measurements", "trials", "seed", "threads", "success_threshold", "output",
      "solver"};
  for (const auto& [key, value] : j.items()) {
    require(known.count(key) == 1, ErrorCode::InvalidInput, "unknown config key: " + key);
  }
  ExperimentSpec s;
  try {
    if (j.contains("kind")) s.kind = parse_enum<ExperimentKind>(j["kind"], "kind");
    if (j.contains("ensemble")) s.ensemble = parse_enum<Ensemble>(j["ensemble"], "ensemble");
    if (j.contains("truncation"))
      s.truncation = parse_enum<TruncationChoice>(j["truncation"], "truncation");
    if (j.contains("method")) s.method = parse_enum<RecoveryMethod>(j["method"], "method");
    if (j.contains("sweep_parameter"))
      s.sweep_parameter = parse_enum<SweepParameter>(j["sweep_parameter"], "sweep_parameter");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("m", s.m);
    get("n", s.n);
    get("k", s.k);
    get("t", s.t);
    get("tc_size", s.tc_size);
    get("t_factor", s.t_factor);
    get("q", s.q);
    auto get_exponent = [&](const char* key, double& field) {
      if (!j.contains(key)) return;
      if (j[key].is_string()) {
        require(j[key] == "inf", ErrorCode::InvalidInput,
                std::string(key) + " must be a number or \"inf\"");
        field = kInf;
      } else {
        field = j[key].get<double>();
      }
    };
    get_exponent("r", s.r);
    get_exponent("p", s.p);
    get("eta", s.eta);
    get("eps", s.eps);
    get("dantzig", s.dantzig);
    get("matrix_path", s.matrix_path);
    get("decay_exponent", s.decay_exponent);
    get("grid", s.grid);
    get("measurements", s.measurements);
    get("trials", s.trials);
    get("seed", s.seed);
    get("threads", s.threads);
    get("success_threshold", s.success_threshold);
    get("output", s.output);
    if (j.contains("solver")) {
      const json& c = j["solver"];
      auto cget = [&](const char* key, auto& field) {
        if (c.contains(key)) field = c[key].get<std::decay_t<decltype(field)>>();
      };
      cget("max_iterations", s.solver.max_iterations);
      cget("tolerance", s.solver.tolerance);
      cget("admm_rho", s.solver.admm_rho);
      cget("irl1_outer_iters", s.solver.irl1_outer_iters);
      cget("irl1_epsilon_start", s.solver.irl1_epsilon_start);
      cget("seed", s.solver.seed);
      cget("isd_max_rounds", s.solver.isd_max_rounds);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad config value: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

json number_or_inf(double v) {
  if (v == kInf) return "inf";
  return v;
}

json spec_json(const ExperimentSpec& s) {
  return {{"kind", s.kind},
          {"m", s.m},
          {"n", s.n},
          {"k", s.k},
          {"t", s.t},
          {"tc_size", s.tc_size},
          {"t_factor", s.t_factor},
          {"q", s.q},
          {"r", number_or_inf(s.r)},
          {"p", number_or_inf(s.p)},
          {"eta", s.eta},
          {"eps", s.eps},
          {"dantzig", s.dantzig},
          {"ensemble", s.ensemble},
          {"matrix_path", s.matrix_path},
          {"decay_exponent", s.decay_exponent},
          {"truncation", s.truncation},
          {"method", s.method},
          {"sweep_parameter", s.sweep_parameter},
          {"grid", s.grid},
          {"measurements", s.measurements},
          {"trials", s.trials},
          {"seed", s.seed},
          {"threads", s.threads},
          {"success_threshold", s.success_threshold},
          {"output", s.output},
          {"solver", config_to_json(s.solver)}};
}

}  // namespace

std::string spec_to_json(const ExperimentSpec& spec) { return spec_json(spec).dump(2); }

namespace {

json bound_inputs_json(const BoundReport& b) {
  return {{"theorem", b.theorem},
          {"delta", std::isnan(b.delta) ? json(nullptr) : json(b.delta)},
          {"t_factor", b.t_factor},
          {"D", b.D},
          {"beta", b.beta},
          {"k", b.k},
          {"t", b.t},
          {"tc_size", b.tc_size},
          {"q", b.q},
          {"r", number_or_inf(b.r)},
          {"eps", b.eps},
          {"eta", b.eta},
          {"sigma", b.sigma}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report, bool include_timestamp) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"trial", r.trial},
                       {"seed", r.seed},
                       {"grid_value", r.grid_value},
                       {"error_l2", r.error_l2},
                       {"error_qq", r.error_qq},
                       {"relative_error", r.relative_error},
                       {"delta", optional_number(r.delta)},
                       {"bound", optional_number(r.bound)},
                       {"success", r.success},
                       {"converged", r.converged},
                       {"bound_checked", r.bound_checked},
                       {"bound_violated", r.bound_violated},
                       {"failure", r.failure}});
    if (r.bound_inputs) records.back()["bound_inputs"] = bound_inputs_json(*r.bound_inputs);
  }
  json grid = json::array();
  for (const auto& g : report.grid) {
    grid.push_back({{"value", g.value},
                    {"trials", g.trials},
                    {"success_rate", g.success_rate},
                    {"mean_error", g.mean_error},
                    {"mean_bound", g.mean_bound},
                    {"violations", g.violations}});
  }
  json env = {{"seed", report.spec.seed}, {"version", report.version}};
  if (include_timestamp) env["timestamp"] = report.timestamp;
  const json out = {{"schema_version", kReportSchemaVersion},
                    {"spec", spec_json(report.spec)},
                    {"environment", env},
                    {"aggregate",
                     {{"trials", report.records.size()},
                      {"success_rate", report.success_rate},
                      {"mean_error", report.mean_error},
                      {"max_error", report.max_error},
                      {"bound_checked", report.bound_checked},
                      {"bound_violations", report.bound_violations}}},
                    {"grid", grid},
                    {"records", records}};
  return out.dump(2) + "\n";
}

double revalidate_report(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("report is not valid JSON: ") + e.what());
  }
  require(doc.value("schema_version", 0) == kReportSchemaVersion, ErrorCode::Io,
          "unsupported report schema version");
  double worst = 0.0;
  for (const auto& rec : doc.at("records")) {
    if (!rec.contains("bound_inputs")) continue;
    const json& in = rec.at("bound_inputs");
    const std::string theorem = in.at("theorem");
    const auto k = in.at("k").get<std::size_t>();
    const auto t = in.at("t").get<std::size_t>();
    const auto tc = in.at("tc_size").get<std::size_t>();
    const double eps = in.at("eps"), eta = in.at("eta"), sigma = in.at("sigma");
    BoundReport again;
    if (theorem == "rip-truncated-l2" || theorem == "rip-truncated-dantzig") {
      const TsapMode mode = theorem == "rip-truncated-l2" ? TsapMode::LpForm : TsapMode::DantzigForm;
      again = bound_theorem35(in.at("delta").get<double>(), in.at("t_factor").get<double>(), k, tc,
                              t, eps, eta, sigma, mode);
    } else if (theorem == "truncated-recovery-rq") {
      const json& r = in.at("r");
      const double rv = r.is_string() ? kInf : r.get<double>();
      again = bound_theorem23(NormTriple{in.at("q").get<double>(), rv, 2.0}, in.at("D"),
                              in.at("beta"), k, t, tc, eps, eta, sigma, BoundForm::Rq);
    } else {
      throw Error(ErrorCode::Io, "unknown theorem tag in report: " + theorem);
    }
    worst = std::max(worst, std::abs(again.bound_value - rec.at("bound").get<double>()));
  }
  return worst;
}

std::string sweep_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "value,success_rate,mean_error,bound,violations\n";
  for (const auto& g : report.grid) {
    out << g.value << ',' << g.success_rate << ',' << g.mean_error << ',' << g.mean_bound << ','
        << g.violations << '\n';
  }
  return out.str();
}

}  // namespace truncq
