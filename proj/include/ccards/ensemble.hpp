#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ccards/config.hpp"

namespace ccards {

/// Identifies the ensemble a curve or eta row came from.
struct Fingerprint {
  int n = 0;
  int c = 0;
  StrategyKind strategy = StrategyKind::uniform;
  double beta = 0.0;
  TopologyKind topology = TopologyKind::complete;
  std::uint64_t seed = 0;

  static Fingerprint of(const SimConfig& config);
  bool operator==(const Fingerprint&) const = default;
};

struct CurveRow {
  std::int64_t tau = 0;
  std::int64_t failures = 0;
  std::int64_t runs = 0;
  double p = 0.0;
  double se = 0.0;

  bool operator==(const CurveRow&) const = default;
};

struct FailureCurve {
  Fingerprint fingerprint;
  std::vector<CurveRow> rows;

  bool operator==(const FailureCurve&) const = default;
};

struct EtaEstimate {
  Fingerprint fingerprint;
  std::int64_t tau_eval = 0;
  std::int64_t runs = 0;
  double eta = 0.0;
  double se = 0.0;
};

/// Integer tallies per checkpoint. Merging is plain addition, so any
/// partition of the run indices gives the same totals.
struct EnsembleCounts {
  std::vector<std::int64_t> checkpoints;
  std::int64_t runs = 0;
  std::vector<std::int64_t> failures;
  std::vector<std::int64_t> any_error;

  void merge(const EnsembleCounts& other);
  bool operator==(const EnsembleCounts&) const = default;
};

/// Seed of run `index`: a pure function of (master seed, index).
std::uint64_t run_seed(std::uint64_t master_seed, std::int64_t run_index);

struct EnsembleOptions {
  int threads = 1;
  std::int64_t first_run = 0;
  std::int64_t run_count = -1;  // -1: config.runs - first_run
};

EnsembleCounts run_ensemble_counts(const SimConfig& config, const EnsembleOptions& options = {});

FailureCurve make_curve(const SimConfig& config, const EnsembleCounts& counts);
EtaEstimate make_eta(const SimConfig& config, const EnsembleCounts& counts,
                     std::int64_t tau_eval);

FailureCurve run_ensemble(const SimConfig& config, int threads = 1);
EtaEstimate estimate_eta(const SimConfig& config, std::int64_t tau_eval, int threads = 1);

void write_curve_csv(const FailureCurve& curve, std::ostream& out, bool header = true);
void write_curve_csv(const FailureCurve& curve, const std::filesystem::path& path);

/// Reads one or more curves; consecutive rows with the same fingerprint form
/// one curve.
std::vector<FailureCurve> read_curve_csv(std::istream& in);
std::vector<FailureCurve> read_curve_csv(const std::filesystem::path& path);

void write_eta_csv(const std::vector<EtaEstimate>& rows, std::ostream& out);
void write_eta_csv(const std::vector<EtaEstimate>& rows, const std::filesystem::path& path);

inline constexpr const char* kCurveHeader = "tau,failures,runs,p,se,n,c,strategy,beta,topology,seed";
inline constexpr const char* kEtaHeader = "tau_eval,eta,se,runs,n,c,strategy,beta,topology,seed";

}  // namespace ccards
