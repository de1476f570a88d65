#pragma once

// Plain-text formats: vectors one value per line, matrices as CSV rows,
// experiment specs and reports as JSON, sweep grids as CSV.

#include <string>

#include "truncq/core.hpp"
#include "truncq/harness.hpp"

namespace truncq {

Vector read_vector(const std::string& path);
void write_vector(const std::string& path, const Vector& x);
Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& A);

/// Parses a JSON object whose keys mirror ExperimentSpec; missing keys keep
/// their defaults, unknown keys are rejected.
ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);

/// JSON report with a schema_version field. The timestamp is left out when
/// include_timestamp is false, which makes equal runs byte-identical.
std::string report_to_json(const ExperimentReport& report, bool include_timestamp = true);

/// Recomputes every stored bound from its stored inputs; returns the largest
/// absolute difference from the stored value.
double revalidate_report(const std::string& report_json);

/// Columns: grid value, success_rate, mean_error, bound, violations.
std::string sweep_csv(const ExperimentReport& report);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace truncq
