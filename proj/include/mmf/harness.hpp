#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmf/benchmarks.hpp"

namespace mmf {

/// Invalid flag, config key or value. The message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  SystemId system = SystemId::ungm_quadratic;
  std::vector<FilterKind> filters{FilterKind::ekf, FilterKind::ukf, FilterKind::pf, FilterKind::mmf};
  FilterSettings settings;
  int runs = 100;
  int steps = 100;
  std::uint64_t base_seed = 1;
  std::filesystem::path out = "results";
  bool emit_trace = false;
  /// Report particle-filter NLL in the CSVs (left empty by default).
  bool pf_nll = false;
};

/// Parses bench flags (args excludes the program name). A `--config FILE`
/// is read first; flags given on the command line override its values, and
/// both override the defaults. Throws ConfigError.
ExperimentConfig parse_config(const std::vector<std::string>& args);

/// Throws ConfigError if a field violates its invariant.
void validate_config(const ExperimentConfig& cfg);

/// Runs the experiment and writes runs.csv, summary.csv, summary.json (and
/// traces/run_NNNN.jsonl when emit_trace is set) into cfg.out. Returns 0 on
/// success and 2 on an I/O failure; diverged runs do not change the result.
int run_cli(const ExperimentConfig& cfg, std::ostream& log);

/// Full command-line entry point: parse, then run. Returns 1 on usage errors.
int bench_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writers, exposed for tests.
void write_runs_csv(std::ostream& os, const ExperimentResult& result, bool pf_nll);
void write_summary_csv(std::ostream& os, const ExperimentResult& result, bool pf_nll);
std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string trace_line(const TraceEvent& event);

}  // namespace mmf
