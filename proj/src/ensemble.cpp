#include "ccards/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "ccards/dynamics.hpp"
#include "ccards/error.hpp"
#include "ccards/rng.hpp"

namespace ccards {

namespace {

constexpr std::int64_t kChunk = 64;

double binomial_se(double p, std::int64_t runs) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const auto end = line.find(',', begin);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
  return fields;
}

void write_fingerprint(const Fingerprint& f, std::ostream& out) {
  out << f.n << ',' << f.c << ',' << to_string(f.strategy) << ','
      << (f.strategy == StrategyKind::gibbs ? format_double(f.beta) : std::string()) << ','
      << to_string(f.topology) << ',' << f.seed;
}

Fingerprint read_fingerprint(const std::vector<std::string_view>& fields, std::size_t at) {
  Fingerprint f;
  f.n = static_cast<int>(parse_int(fields[at]));
  f.c = static_cast<int>(parse_int(fields[at + 1]));
  f.strategy = parse_strategy_kind(fields[at + 2]);
  f.beta = fields[at + 3].empty() ? 0.0 : parse_double(fields[at + 3]);
  f.topology = parse_topology_kind(fields[at + 4]);
  const auto seed_text = fields[at + 5];
  std::uint64_t seed = 0;
  const auto [ptr, ec] =
      std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
  if (ec != std::errc() || ptr != seed_text.data() + seed_text.size()) {
    throw Error(ErrorKind::parse_error, "bad seed field '" + std::string(seed_text) + "'");
  }
  f.seed = seed;
  return f;
}

}  // namespace

Fingerprint Fingerprint::of(const SimConfig& config) {
  return {config.n,
          config.c,
          config.strategy,
          config.strategy == StrategyKind::gibbs ? config.beta : 0.0,
          config.topology,
          config.seed};
}

void EnsembleCounts::merge(const EnsembleCounts& other) {
  if (checkpoints != other.checkpoints) {
    throw Error(ErrorKind::invalid_argument, "cannot merge counts over different checkpoints");
  }
  runs += other.runs;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    failures[i] += other.failures[i];
    any_error[i] += other.any_error[i];
  }
}

std::uint64_t run_seed(std::uint64_t master_seed, std::int64_t run_index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(run_index));
}

EnsembleCounts run_ensemble_counts(const SimConfig& config, const EnsembleOptions& options) {
  config.validate();
  const Problem problem = Problem::from_config(config);
  const std::int64_t first = options.first_run;
  const std::int64_t count =
      options.run_count < 0 ? config.runs - options.first_run : options.run_count;
  if (first < 0 || count < 0) {
    throw Error(ErrorKind::invalid_argument, "run range out of bounds");
  }

  auto empty_counts = [&] {
    EnsembleCounts c;
    c.checkpoints = config.checkpoints;
    c.failures.assign(config.checkpoints.size(), 0);
    c.any_error.assign(config.checkpoints.size(), 0);
    return c;
  };

  const int threads =
      static_cast<int>(std::clamp<std::int64_t>(options.threads, 1, std::max<std::int64_t>(1, count / kChunk)));
  std::vector<EnsembleCounts> partial(static_cast<std::size_t>(threads), empty_counts());
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&](EnsembleCounts& local) {
    try {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::int64_t begin = next.fetch_add(kChunk);
        if (begin >= count) break;
        const std::int64_t end = std::min(count, begin + kChunk);
        for (std::int64_t i = begin; i < end; ++i) {
          const RunOutcome outcome = run_single(problem, config, run_seed(config.seed, first + i));
          ++local.runs;
          for (std::size_t k = 0; k < outcome.records.size(); ++k) {
            if (!outcome.records[k].group_correct) ++local.failures[k];
            if (outcome.records[k].individual_errors > 0) ++local.any_error[k];
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  if (threads == 1) {
    worker(partial[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (auto& local : partial) pool.emplace_back(worker, std::ref(local));
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleCounts total = empty_counts();
  for (const auto& local : partial) total.merge(local);
  return total;
}

FailureCurve make_curve(const SimConfig& config, const EnsembleCounts& counts) {
  FailureCurve curve;
  curve.fingerprint = Fingerprint::of(config);
  curve.rows.reserve(counts.checkpoints.size());
  for (std::size_t k = 0; k < counts.checkpoints.size(); ++k) {
    CurveRow row;
    row.tau = counts.checkpoints[k];
    row.failures = counts.failures[k];
    row.runs = counts.runs;
    row.p = counts.runs > 0 ? static_cast<double>(row.failures) / static_cast<double>(counts.runs)
                            : 0.0;
    row.se = counts.runs > 0 ? binomial_se(row.p, counts.runs) : 0.0;
    curve.rows.push_back(row);
  }
  return curve;
}

EtaEstimate make_eta(const SimConfig& config, const EnsembleCounts& counts,
                     std::int64_t tau_eval) {
  const auto it = std::find(counts.checkpoints.begin(), counts.checkpoints.end(), tau_eval);
  if (it == counts.checkpoints.end()) {
    throw Error(ErrorKind::invalid_argument,
                "tau_eval " + std::to_string(tau_eval) + " is not a checkpoint");
  }
  const auto k = static_cast<std::size_t>(it - counts.checkpoints.begin());
  EtaEstimate eta;
  eta.fingerprint = Fingerprint::of(config);
  eta.tau_eval = tau_eval;
  eta.runs = counts.runs;
  eta.eta = static_cast<double>(counts.any_error[k]) / static_cast<double>(counts.runs);
  eta.se = binomial_se(eta.eta, counts.runs);
  return eta;
}

FailureCurve run_ensemble(const SimConfig& config, int threads) {
  return make_curve(config, run_ensemble_counts(config, {.threads = threads}));
}

EtaEstimate estimate_eta(const SimConfig& config, std::int64_t tau_eval, int threads) {
  if (std::find(config.checkpoints.begin(), config.checkpoints.end(), tau_eval) ==
      config.checkpoints.end()) {
    throw Error(ErrorKind::invalid_argument,
                "tau_eval " + std::to_string(tau_eval) + " is not a checkpoint");
  }
  return make_eta(config, run_ensemble_counts(config, {.threads = threads}), tau_eval);
}

void write_curve_csv(const FailureCurve& curve, std::ostream& out, bool header) {
  if (header) out << kCurveHeader << '\n';
  for (const auto& row : curve.rows) {
    out << row.tau << ',' << row.failures << ',' << row.runs << ',' << format_double(row.p) << ','
        << format_double(row.se) << ',';
    write_fingerprint(curve.fingerprint, out);
    out << '\n';
  }
}

void write_curve_csv(const FailureCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::file_error, "cannot open " + path.string() + " for writing");
  write_curve_csv(curve, out);
  out.flush();
  if (!out) throw Error(ErrorKind::file_error, "write failed for " + path.string());
}

std::vector<FailureCurve> read_curve_csv(std::istream& in) {
  std::vector<FailureCurve> curves;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!saw_header) {
      if (line != kCurveHeader) {
        throw Error(ErrorKind::parse_error, "unexpected curve CSV header: " + line);
      }
      saw_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != 11) {
      throw Error(ErrorKind::parse_error, "curve CSV row needs 11 fields: " + line);
    }
    CurveRow row{parse_int(fields[0]), parse_int(fields[1]), parse_int(fields[2]),
                 parse_double(fields[3]), parse_double(fields[4])};
    const Fingerprint fp = read_fingerprint(fields, 5);
    if (curves.empty() || !(curves.back().fingerprint == fp)) {
      curves.push_back(FailureCurve{fp, {}});
    }
    curves.back().rows.push_back(row);
  }
  if (!saw_header) throw Error(ErrorKind::parse_error, "curve CSV is empty");
  return curves;
}

std::vector<FailureCurve> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::file_error, "cannot open " + path.string());
  return read_curve_csv(in);
}

void write_eta_csv(const std::vector<EtaEstimate>& rows, std::ostream& out) {
  out << kEtaHeader << '\n';
  for (const auto& row : rows) {
    out << row.tau_eval << ',' << format_double(row.eta) << ',' << format_double(row.se) << ','
        << row.runs << ',';
    write_fingerprint(row.fingerprint, out);
    out << '\n';
  }
}

void write_eta_csv(const std::vector<EtaEstimate>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::file_error, "cannot open " + path.string() + " for writing");
  write_eta_csv(rows, out);
  out.flush();
  if (!out) throw Error(ErrorKind::file_error, "write failed for " + path.string());
}

}  // namespace ccards
