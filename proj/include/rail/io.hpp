#pragma once

#include "rail/core.hpp"
#include "rail/hybrid.hpp"
#include "rail/qubo.hpp"

namespace rail {

struct LoadError : RailError {
  std::vector<Diagnostic> diagnostics;
  explicit LoadError(std::vector<Diagnostic> d)
      : RailError("load-error", d.empty() ? "load failed" : d.front().message),
        diagnostics(std::move(d)) {}
};

// Parses the documented instance schema; unknown keys are rejected and all
// schema violations are reported together.
DispatchInstance load_instance(const std::string& path);
DispatchInstance parse_instance(const std::string& text);

void save_instance(const DispatchInstance& instance, const std::string& path);

// Coordinate export: one `i j coeff` line per term (i == j for linear terms),
// header comments carrying n, offset and the penalty constants. A sidecar
// JSON file maps indices to (train, station, time) and auxiliary products.
void export_qubo(const QuboEncoding& encoding, const std::string& path);
QuboModel import_qubo(const std::string& path);

std::string export_sampleset(const SampleSet& set, const QuboEncoding& encoding,
                             const DispatchInstance& instance);

struct RunReport {
  std::string mode;
  int trains = 0, stations = 0;
  VariableCounts linear_counts;
  int num_x = 0, num_aux = 0;
  Schedule schedule;
  int resolution = 1;
  std::map<EventKey, GridTime> scheduled;
  std::map<EventKey, GridTime> unavoidable;
  long solver_assignments = 0;
  std::vector<IterationRecord> iterations;
  std::string terminated_by;
};

RunReport make_report(const DispatchInstance& instance, const Routing& routing,
                      const std::string& mode, const Schedule& schedule);

std::string render_report(const RunReport& report);
std::string render_report_structured(const RunReport& report);

}  // namespace rail
