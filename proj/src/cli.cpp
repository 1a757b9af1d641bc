#include "ccards/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "ccards/analysis.hpp"
#include "ccards/config.hpp"
#include "ccards/ensemble.hpp"
#include "ccards/error.hpp"

namespace ccards {

namespace {

constexpr std::int64_t kDefaultTauMax = 10'000;
constexpr double kExperimentalEta = 0.23;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimFlags {
  int n = 10;
  int c = 10;
  std::string strategy = "uniform";
  std::optional<double> beta;
  std::string topology = "complete";
  std::int64_t runs = 100'000;
  std::optional<std::int64_t> tau_max;
  std::string checkpoints;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t enum_cap = kDefaultEnumerationCap;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--n", f.n, "number of agents")->capture_default_str();
  cmd->add_option("--c", f.c, "cards displayed per interaction")->capture_default_str();
  cmd->add_option("--strategy", f.strategy, "uniform | topc | gibbs")
      ->check(CLI::IsMember({"uniform", "topc", "gibbs"}))
      ->capture_default_str();
  cmd->add_option("--beta", f.beta, "inverse temperature (gibbs only)");
  cmd->add_option("--topology", f.topology, "complete | cycle")
      ->check(CLI::IsMember({"complete", "cycle"}))
      ->capture_default_str();
  cmd->add_option("--runs", f.runs, "independent runs")->capture_default_str();
  cmd->add_option("--tau-max", f.tau_max, "last round simulated (default: last checkpoint, else 10000)");
  cmd->add_option("--checkpoints", f.checkpoints, "start:stop:step and/or comma list");
  cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores")
      ->envname("CONSENSUS_CARDS_THREADS")
      ->capture_default_str();
  cmd->add_option("--enum-cap", f.enum_cap, "largest subset enumeration allowed")
      ->capture_default_str();
}

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (requested < 0) throw UsageError("--threads must be non-negative");
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Everything that can be rejected before work starts is rejected here.
SimConfig to_config(const SimFlags& f) {
  SimConfig config;
  config.n = f.n;
  config.c = f.c;
  config.strategy = parse_strategy_kind(f.strategy);
  if (config.strategy == StrategyKind::gibbs) {
    if (!f.beta) throw UsageError("--strategy gibbs needs --beta");
    config.beta = *f.beta;
  } else if (f.beta) {
    throw UsageError("--beta applies only to --strategy gibbs");
  }
  config.topology = parse_topology_kind(f.topology);
  config.runs = f.runs;
  config.seed = f.seed;
  config.enum_cap = f.enum_cap;
  if (!f.checkpoints.empty()) config.checkpoints = parse_checkpoints(f.checkpoints);
  if (f.tau_max) {
    config.tau_max = *f.tau_max;
  } else {
    config.tau_max = config.checkpoints.empty() ? kDefaultTauMax : config.checkpoints.back();
  }
  if (config.checkpoints.empty()) config.checkpoints = {config.tau_max};
  config.validate();
  return config;
}

void write_to(const std::string& path, std::ostream& fallback,
              const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::file_error, "cannot open " + path + " for writing");
  write(file);
  file.flush();
  if (!file) throw Error(ErrorKind::file_error, "write failed for " + path);
}

std::string eta_path_for(const std::string& curve_path) {
  std::filesystem::path p(curve_path);
  const auto ext = p.extension().string();
  p.replace_filename(p.stem().string() + "_eta" + (ext.empty() ? ".csv" : ext));
  return p.string();
}

bool is_usage_kind(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_size:
    case ErrorKind::invalid_topology:
    case ErrorKind::invalid_argument:
    case ErrorKind::parse_error:
      return true;
    default:
      return false;
  }
}

// Runs `prepare` and maps its errors to usage errors.
template <class F>
auto checked(F&& prepare) {
  try {
    return prepare();
  } catch (const Error& e) {
    if (is_usage_kind(e.kind())) throw UsageError(e.what());
    throw;
  }
}

// ---- run

struct RunFlags {
  SimFlags sim;
  bool eta = false;
  std::optional<std::int64_t> eta_tau;
  std::string out;
  std::string eta_out;
};

int cmd_run(const RunFlags& f, std::ostream& out) {
  const SimConfig config = checked([&] { return to_config(f.sim); });
  const int threads = thread_count(f.sim.threads);
  const std::int64_t eta_tau = f.eta_tau.value_or(config.checkpoints.back());
  if (f.eta && !std::binary_search(config.checkpoints.begin(), config.checkpoints.end(), eta_tau)) {
    throw UsageError("--eta-tau " + std::to_string(eta_tau) + " is not a checkpoint");
  }

  const EnsembleCounts counts = run_ensemble_counts(config, {.threads = threads});
  write_to(f.out, out, [&](std::ostream& s) { write_curve_csv(make_curve(config, counts), s); });
  if (f.eta) {
    const std::string path = !f.eta_out.empty() ? f.eta_out
                             : f.out.empty()    ? std::string()
                                                : eta_path_for(f.out);
    write_to(path, out, [&](std::ostream& s) {
      write_eta_csv({make_eta(config, counts, eta_tau)}, s);
    });
  }
  return kExitOk;
}

// ---- sweep

struct SweepFlags {
  SimFlags sim;
  std::string axis;
  std::string values;
  std::optional<double> c_ratio;
  bool eta = false;
  std::string out_dir = ".";
  std::string prefix = "curve";
};

struct SweepPoint {
  std::string label;
  SimConfig config;
};

std::vector<SweepPoint> sweep_points(const SweepFlags& f) {
  if (f.values.find_first_not_of(" ,") == std::string::npos) {
    throw UsageError("sweep needs a non-empty --values list");
  }
  if (f.c_ratio && f.axis != "n") throw UsageError("--c-ratio applies only to --axis n");
  std::vector<SweepPoint> points;
  if (f.axis == "beta") {
    std::string_view rest = f.values;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      if (!item.empty()) {
        SimFlags sim = f.sim;
        sim.beta = parse_double(item);
        points.push_back({std::string(item), to_config(sim)});
      }
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    }
    return points;
  }
  for (std::int64_t v : parse_checkpoints(f.values)) {
    SimFlags sim = f.sim;
    if (f.axis == "c") {
      sim.c = static_cast<int>(v);
    } else {
      sim.n = static_cast<int>(v);
      if (f.c_ratio) sim.c = std::max(1, static_cast<int>(std::lround(*f.c_ratio * sim.n)));
    }
    points.push_back({std::to_string(v), to_config(sim)});
  }
  return points;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  const auto points = checked([&] { return sweep_points(f); });
  const int threads = thread_count(f.sim.threads);
  const std::filesystem::path dir(f.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::file_error, "cannot create " + dir.string());

  std::vector<FailureCurve> curves;
  std::vector<EtaEstimate> etas;
  for (const auto& point : points) {
    const EnsembleCounts counts = run_ensemble_counts(point.config, {.threads = threads});
    curves.push_back(make_curve(point.config, counts));
    if (f.eta) etas.push_back(make_eta(point.config, counts, point.config.checkpoints.back()));
    const auto path = dir / (f.prefix + "_" + f.axis + "_" + point.label + ".csv");
    write_curve_csv(curves.back(), path);
    out << path.string() << '\n';
  }
  const auto summary = dir / (f.prefix + "_summary.csv");
  write_to(summary.string(), out, [&](std::ostream& s) {
    bool header = true;
    for (const auto& curve : curves) {
      write_curve_csv(curve, s, header);
      header = false;
    }
  });
  out << summary.string() << '\n';
  if (f.eta) {
    const auto eta_path = dir / (f.prefix + "_eta.csv");
    write_eta_csv(etas, eta_path);
    out << eta_path.string() << '\n';
  }
  return kExitOk;
}

// ---- fit

struct FitFlags {
  std::vector<std::string> inputs;
  std::string out;
  bool scaling = false;
  std::string scaling_out;
  double max_p = FitWindow{}.max_p;
  std::int64_t min_failures = FitWindow{}.min_failures;
};

int cmd_fit(const FitFlags& f, std::ostream& out) {
  std::vector<FailureCurve> curves;
  for (const auto& input : f.inputs) {
    auto more = read_curve_csv(std::filesystem::path(input));
    curves.insert(curves.end(), more.begin(), more.end());
  }
  const FitWindow window{f.max_p, f.min_failures};
  std::vector<FitRow> rows;
  for (const auto& curve : curves) rows.push_back({curve.fingerprint, fit_exponential(curve, window)});

  // tau_c against N over the C = N curves, one mean per N
  std::map<int, std::vector<double>> full_display;
  for (const auto& row : rows) {
    if (row.fingerprint.c == row.fingerprint.n) {
      full_display[row.fingerprint.n].push_back(row.fit.tau_c);
    }
  }

  write_to(f.out, out, [&](std::ostream& s) {
    write_fit_csv(rows, s);
    if (full_display.size() >= 2) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& [n, values] : full_display) {
        for (double v : values) {
          xs.push_back(n);
          ys.push_back(v);
        }
      }
      const LinearFit line = fit_line(xs, ys);
      s << "# linear_law slope=" << format_double(line.slope)
        << " intercept=" << format_double(line.intercept) << " points=" << xs.size() << '\n';
    }
  });

  if (f.scaling) {
    std::vector<TauCEntry> entries;
    for (const auto& row : rows) {
      if (row.fingerprint.c < row.fingerprint.n) {
        entries.push_back({row.fingerprint.n, row.fingerprint.c, row.fit.tau_c});
      }
    }
    const CollapseReport report = scaling_check(entries);
    write_to(f.scaling_out, out, [&](std::ostream& s) { write_collapse_csv(report, entries, s); });
  }
  return kExitOk;
}

// ---- table1

struct Table1Flags {
  int n = 5;
  std::string topology = "cycle";
  std::int64_t tau = kDefaultTauMax;
  std::int64_t runs = 100'000;
  std::string betas = "0.1,0.3,0.5";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

std::vector<SimConfig> table1_cells(const Table1Flags& f) {
  std::vector<double> betas;
  std::string_view rest = f.betas;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (!item.empty()) betas.push_back(parse_double(item));
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
  }
  std::vector<SimConfig> cells;
  for (int c = 1; c <= f.n; ++c) {
    SimFlags sim;
    sim.n = f.n;
    sim.c = c;
    sim.topology = f.topology;
    sim.runs = f.runs;
    sim.tau_max = f.tau;
    sim.seed = f.seed;
    sim.strategy = "uniform";
    cells.push_back(to_config(sim));
    sim.strategy = "gibbs";
    for (double beta : betas) {
      sim.beta = beta;
      cells.push_back(to_config(sim));
    }
    sim.beta.reset();
    sim.strategy = "topc";
    cells.push_back(to_config(sim));
  }
  return cells;
}

int cmd_table1(const Table1Flags& f, std::ostream& out) {
  const auto cells = checked([&] { return table1_cells(f); });
  const int threads = thread_count(f.threads);
  std::vector<EtaEstimate> rows;
  for (const auto& config : cells) {
    rows.push_back(make_eta(config, run_ensemble_counts(config, {.threads = threads}), f.tau));
  }
  write_to(f.out, out, [&](std::ostream& s) {
    s << "# experimental eta = " << format_double(kExperimentalEta) << '\n';
    write_eta_csv(rows, s);
  });
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo ensembles and fits for the common-card task", "consensus_cards"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "one ensemble, failure curve CSV (and eta CSV)");
  add_sim_flags(run, run_flags.sim);
  run->add_flag("--eta", run_flags.eta, "also estimate eta");
  run->add_option("--eta-tau", run_flags.eta_tau, "round at which eta is measured (default: last checkpoint)");
  run->add_option("--out", run_flags.out, "curve CSV path (default: stdout)");
  run->add_option("--eta-out", run_flags.eta_out, "eta CSV path (default: <out>_eta.csv)");

  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "one ensemble per value of c, n or beta");
  add_sim_flags(sweep, sweep_flags.sim);
  sweep->add_option("--axis", sweep_flags.axis, "c | n | beta")
      ->required()
      ->check(CLI::IsMember({"c", "n", "beta"}));
  sweep->add_option("--values", sweep_flags.values, "values, ranges allowed for c and n")->required();
  sweep->add_option("--c-ratio", sweep_flags.c_ratio, "with --axis n, set C = round(ratio * N)");
  sweep->add_flag("--eta", sweep_flags.eta, "also write eta at the last checkpoint");
  sweep->add_option("--out-dir", sweep_flags.out_dir, "output directory")->capture_default_str();
  sweep->add_option("--prefix", sweep_flags.prefix, "file name prefix")->capture_default_str();

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "exponential fits of failure curves");
  fit->add_option("inputs", fit_flags.inputs, "curve CSV files")->required();
  fit->add_option("--out", fit_flags.out, "fit CSV path (default: stdout)");
  fit->add_flag("--scaling", fit_flags.scaling, "also check the tau_c collapse");
  fit->add_option("--scaling-out", fit_flags.scaling_out, "collapse CSV path (default: stdout)");
  fit->add_option("--max-p", fit_flags.max_p, "fit rows need p below this")->capture_default_str();
  fit->add_option("--min-failures", fit_flags.min_failures, "fit rows need this many failures")
      ->capture_default_str();

  Table1Flags table_flags;
  auto* table = app.add_subcommand("table1", "eta grid over C and beta");
  table->add_option("--n", table_flags.n)->capture_default_str();
  table->add_option("--topology", table_flags.topology)
      ->check(CLI::IsMember({"complete", "cycle"}))
      ->capture_default_str();
  table->add_option("--tau-max", table_flags.tau, "round at which eta is measured")->capture_default_str();
  table->add_option("--runs", table_flags.runs)->capture_default_str();
  table->add_option("--betas", table_flags.betas, "finite beta columns")->capture_default_str();
  table->add_option("--seed", table_flags.seed)->capture_default_str();
  table->add_option("--threads", table_flags.threads, "worker threads, 0 = all cores")
      ->envname("CONSENSUS_CARDS_THREADS")
      ->capture_default_str();
  table->add_option("--out", table_flags.out, "CSV path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, out);
    if (*sweep) return cmd_sweep(sweep_flags, out);
    if (*fit) return cmd_fit(fit_flags, out);
    if (*table) return cmd_table1(table_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ccards
