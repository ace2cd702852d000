#include "mmf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace mmf {

namespace {

using nlohmann::json;

struct CliFields {
  std::string system = "ungm-quadratic";
  std::vector<std::string> filters{"ekf", "ukf", "pf", "mmf"};
  int runs = 100;
  int steps = 100;
  std::size_t components = 3;
  std::optional<std::size_t> reduction_target;
  double split_alpha = 1.0;
  double ut_alpha = 1.0;
  double ut_beta = 2.0;
  double ut_kappa = 2.0;
  std::size_t particles = 500;
  std::uint64_t seed = 1;
  std::string out = "results";
  bool emit_trace = false;
  bool pf_nll = false;
};

void define_options(CLI::App& app, CliFields& f) {
  app.set_config("--config", "", "Read flags from a key = value file (keys are flag names)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--system", f.system, "ungm-quadratic | ungm-sin | stationary-sin");
  app.add_option("--filter", f.filters, "Comma-separated list of ekf, ukf, pf, mmf")->delimiter(',');
  app.add_option("--runs", f.runs, "Independent simulations");
  app.add_option("--steps", f.steps, "Time steps per simulation");
  app.add_option("--components", f.components, "Mixture components kept by the M-MF");
  app.add_option("--reduction-target", f.reduction_target,
                 "Reduction target; must equal --components when given");
  app.add_option("--split-alpha", f.split_alpha, "Split offset scaling");
  app.add_option("--ut-alpha", f.ut_alpha, "Unscented transform alpha");
  app.add_option("--ut-beta", f.ut_beta, "Unscented transform beta");
  app.add_option("--ut-kappa", f.ut_kappa, "Unscented transform kappa");
  app.add_option("--particles", f.particles, "Particle count for the PF");
  app.add_option("--seed", f.seed, "Base seed; run k uses seed + k");
  app.add_option("--out", f.out, "Output directory");
  app.add_flag("--emit-trace", f.emit_trace, "Write per-step posterior traces (JSON lines)");
  app.add_flag("--pf-nll", f.pf_nll, "Report PF NLL instead of leaving it empty");
}

ExperimentConfig to_config(const CliFields& f) {
  ExperimentConfig cfg;
  try {
    cfg.system = parse_system_id(f.system);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--system: ") + e.what());
  }
  cfg.filters.clear();
  for (const std::string& name : f.filters) {
    try {
      const FilterKind kind = parse_filter_kind(name);
      if (std::find(cfg.filters.begin(), cfg.filters.end(), kind) == cfg.filters.end()) {
        cfg.filters.push_back(kind);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--filter: ") + e.what());
    }
  }
  if (f.reduction_target && *f.reduction_target != f.components) {
    throw ConfigError("--reduction-target: must equal --components (" +
                      std::to_string(f.components) + ")");
  }
  cfg.runs = f.runs;
  cfg.steps = f.steps;
  cfg.settings.mmf = MMFConfig::with_components(f.components);
  cfg.settings.mmf.split.alpha = f.split_alpha;
  cfg.settings.mmf.ut = UTParams{f.ut_alpha, f.ut_beta, f.ut_kappa};
  cfg.settings.particles = f.particles;
  cfg.base_seed = f.seed;
  cfg.out = f.out;
  cfg.emit_trace = f.emit_trace;
  cfg.pf_nll = f.pf_nll;
  return cfg;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool reports_nll(FilterKind kind, bool pf_nll) { return kind != FilterKind::pf || pf_nll; }

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw OutputError("cannot open " + path.string() + " for writing");
  os << contents;
  os.flush();
  if (!os) throw OutputError("failed writing " + path.string());
}

}  // namespace

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Gaussian-mixture filter benchmarks", "bench"};
  CliFields fields;
  define_options(app, fields);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig cfg = to_config(fields);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("--runs: must be >= 1");
  if (cfg.steps < 1) throw ConfigError("--steps: must be >= 1");
  if (cfg.filters.empty()) throw ConfigError("--filter: at least one filter is required");
  if (cfg.settings.particles < 1) throw ConfigError("--particles: must be >= 1");
  const Eigen::Index dim = make_system(cfg.system).model.state_dim;
  const MMFConfig& mmf = cfg.settings.mmf;
  if (mmf.components < 1) throw ConfigError("--components: must be >= 1");
  if (mmf.reduction.target_components != mmf.components) {
    throw ConfigError("--reduction-target: must equal --components");
  }
  try {
    mmf.split.validate(dim);
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("--split-alpha: ") + e.what());
  }
  try {
    mmf.ut.validate(dim);
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("--ut-alpha/--ut-kappa: ") + e.what());
  }
}

void write_runs_csv(std::ostream& os, const ExperimentResult& result, bool pf_nll) {
  os << "run_id,system,filter,seed,rmse,nll_mean,nll_sum,diverged\n";
  for (const RunRecord& r : result.runs) {
    const bool nll = reports_nll(r.filter, pf_nll);
    os << r.run_id << ',' << to_string(r.system) << ',' << to_string(r.filter) << ',' << r.seed << ','
       << format_real(r.metrics.rmse) << ',' << (nll ? format_real(r.metrics.nll_mean) : "") << ','
       << (nll ? format_real(r.metrics.nll_sum) : "") << ',' << (r.metrics.diverged ? "true" : "false")
       << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ExperimentResult& result, bool pf_nll) {
  os << "system,filter,runs,rmse_mean,rmse_std,nll_mean_mean,nll_mean_std,divergences\n";
  for (const SummaryRow& s : result.summary) {
    const bool nll = reports_nll(s.filter, pf_nll);
    os << to_string(s.system) << ',' << to_string(s.filter) << ',' << s.runs << ','
       << format_real(s.rmse_mean) << ',' << format_real(s.rmse_std) << ','
       << (nll ? format_real(s.nll_mean_mean) : "") << ',' << (nll ? format_real(s.nll_mean_std) : "")
       << ',' << s.divergences << '\n';
  }
}

std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const MMFConfig& mmf = cfg.settings.mmf;
  json doc;
  doc["config"] = {
      {"system", to_string(cfg.system)},
      {"runs", cfg.runs},
      {"steps", cfg.steps},
      {"seed", cfg.base_seed},
      {"components", mmf.components},
      {"split_alpha", mmf.split.alpha},
      {"ut_alpha", mmf.ut.alpha},
      {"ut_beta", mmf.ut.beta},
      {"ut_kappa", mmf.ut.kappa},
      {"particles", cfg.settings.particles},
  };
  json rows = json::array();
  for (const SummaryRow& s : result.summary) {
    const bool nll = reports_nll(s.filter, cfg.pf_nll);
    rows.push_back({
        {"system", to_string(s.system)},
        {"filter", to_string(s.filter)},
        {"runs", s.runs},
        {"rmse_mean", real_or_null(s.rmse_mean)},
        {"rmse_std", real_or_null(s.rmse_std)},
        {"nll_mean_mean", nll ? real_or_null(s.nll_mean_mean) : json(nullptr)},
        {"nll_mean_std", nll ? real_or_null(s.nll_mean_std) : json(nullptr)},
        {"divergences", s.divergences},
    });
  }
  doc["summary"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string trace_line(const TraceEvent& event) {
  const GaussianMixture& post = event.output.posterior;
  json means = json::array();
  json covs = json::array();
  for (const Gaussian& g : post.components()) {
    means.push_back(vector_json(g.mean()));
    covs.push_back(matrix_json(g.cov()));
  }
  json line = {
      {"n", event.n},
      {"truth", vector_json(event.truth)},
      {"observation", vector_json(event.observation)},
      {"filter", to_string(event.filter)},
      {"estimate", vector_json(event.output.state_estimate)},
      {"weights", post.weights()},
      {"means", std::move(means)},
      {"covs", std::move(covs)},
  };
  return line.dump();
}

int run_cli(const ExperimentConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  const SystemSpec spec = make_system(cfg.system);

  std::map<int, std::string> traces;
  TraceSink sink;
  if (cfg.emit_trace) {
    sink = [&traces](const TraceEvent& ev) { traces[ev.run_id] += trace_line(ev) + '\n'; };
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec || !std::filesystem::is_directory(cfg.out)) {
      throw OutputError("cannot create output directory " + cfg.out.string());
    }

    const ExperimentResult result =
        run_experiment(spec, cfg.filters, cfg.settings, cfg.runs, cfg.steps, cfg.base_seed, sink);

    std::ostringstream runs_csv;
    write_runs_csv(runs_csv, result, cfg.pf_nll);
    write_file(cfg.out / "runs.csv", runs_csv.str());
    std::ostringstream summary_csv;
    write_summary_csv(summary_csv, result, cfg.pf_nll);
    write_file(cfg.out / "summary.csv", summary_csv.str());
    write_file(cfg.out / "summary.json", summary_json(cfg, result));

    if (cfg.emit_trace) {
      const auto dir = cfg.out / "traces";
      std::filesystem::create_directories(dir, ec);
      if (ec) throw OutputError("cannot create trace directory " + dir.string());
      for (const auto& [run, text] : traces) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%04d.jsonl", run);
        write_file(dir / name, text);
      }
    }

    log << std::left << std::setw(16) << "system" << std::setw(6) << "filter" << std::right
        << std::setw(22) << "rmse" << std::setw(22) << "nll/obs" << std::setw(6) << "div" << '\n';
    for (const SummaryRow& s : result.summary) {
      std::ostringstream rmse;
      rmse << std::fixed << std::setprecision(3) << s.rmse_mean << " +/- " << s.rmse_std;
      std::ostringstream nll;
      if (reports_nll(s.filter, cfg.pf_nll)) {
        nll << std::fixed << std::setprecision(3) << s.nll_mean_mean << " +/- " << s.nll_mean_std;
      } else {
        nll << "N/A";
      }
      log << std::left << std::setw(16) << to_string(s.system) << std::setw(6) << to_string(s.filter)
          << std::right << std::setw(22) << rmse.str() << std::setw(22) << nll.str() << std::setw(6)
          << s.divergences << '\n';
    }
  } catch (const OutputError& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int bench_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (std::find(args.begin(), args.end(), "--help") != args.end() ||
      std::find(args.begin(), args.end(), "-h") != args.end()) {
    CLI::App app{"Gaussian-mixture filter benchmarks", "bench"};
    CliFields fields;
    define_options(app, fields);
    out << app.help();
    return 0;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n(run with --help for the list of flags)\n";
    return 1;
  }
  return run_cli(cfg, out);
}

}  // namespace mmf
