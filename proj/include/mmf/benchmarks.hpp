#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/filters.hpp"

namespace mmf {

enum class SystemId { ungm_quadratic, ungm_sin, stationary_sin };
enum class FilterKind { ekf, ukf, pf, mmf };

std::string to_string(SystemId id);
std::string to_string(FilterKind kind);
/// Accepts the CLI spellings ("ungm-quadratic", ...); throws std::invalid_argument.
SystemId parse_system_id(std::string_view text);
FilterKind parse_filter_kind(std::string_view text);

struct SystemSpec {
  SystemId id;
  DynamicalModel model;
  Gaussian prior;
};

/// The scalar growth-model benchmarks, with Q = R = 1 and prior N(0, 1):
///   ungm_quadratic: x/2 + 25x/(1+x^2) + 8cos(1.2(n-1)),  y = x^2/20
///   ungm_sin:       same transition,                   y = 5 sin x
///   stationary_sin: x/2 + 25x/(1+x^2),                 y = 5 sin x
SystemSpec make_system(SystemId id);

/// Ground truth x_1..x_T (row n-1 holds x_n) and observations y_1..y_T.
struct Trajectory {
  Matrix states;
  Matrix observations;
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(states.rows()); }
};

/// x_0 is drawn from the prior; all noise comes from a generator seeded with seed.
Trajectory simulate(const SystemSpec& spec, int steps, std::uint64_t seed);

struct FilterSettings {
  MMFConfig mmf;
  std::size_t particles = 500;
};

struct MetricsResult {
  double rmse = 0.0;
  double nll_mean = 0.0;
  double nll_sum = 0.0;
  bool diverged = false;
  int completed_steps = 0;
};

/// rmse over (estimate, truth) pairs and the negative mean log predictive
/// density. nll_sum is defined as nll_mean * count so the identity is exact.
MetricsResult compute_metrics(const std::vector<Vector>& estimates, const std::vector<Vector>& truths,
                              const std::vector<double>& log_predictive);

/// Called after every successful filter step.
using StepObserver = std::function<void(int n, const FilterStepOutput&)>;

std::unique_ptr<RecursiveFilter> make_filter(const SystemSpec& spec, FilterKind kind,
                                             const FilterSettings& settings, std::uint64_t seed);

/// Runs one filter over a trajectory. A step that throws marks the run as
/// diverged and the metrics cover the completed steps only.
MetricsResult evaluate(const SystemSpec& spec, FilterKind kind, const FilterSettings& settings,
                       const Trajectory& trajectory, const StepObserver& observer = {});

struct RunRecord {
  int run_id;
  SystemId system;
  FilterKind filter;
  std::uint64_t seed;
  MetricsResult metrics;
};

struct SummaryRow {
  SystemId system;
  FilterKind filter;
  int runs;
  double rmse_mean;
  double rmse_std;
  double nll_mean_mean;
  double nll_mean_std;
  int divergences;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

struct TraceEvent {
  int run_id;
  FilterKind filter;
  int n;
  const Vector& truth;
  const Vector& observation;
  const FilterStepOutput& output;
};
using TraceSink = std::function<void(const TraceEvent&)>;

/// Run k simulates trajectory seed base_seed + k once and every filter sees
/// that same trajectory. Records are ordered by run, then by filter order.
ExperimentResult run_experiment(const SystemSpec& spec, const std::vector<FilterKind>& filters,
                                const FilterSettings& settings, int runs, int steps,
                                std::uint64_t base_seed, const TraceSink& trace = {});

/// Mean and sample standard deviation (n - 1 denominator; 0 for one sample).
std::pair<double, double> mean_and_std(const std::vector<double>& values);

}  // namespace mmf
