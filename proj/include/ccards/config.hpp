#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ccards/core_model.hpp"
#include "ccards/samplers.hpp"

namespace ccards {

/// Everything that defines an ensemble. Immutable once validated.
struct SimConfig {
  int n = 10;
  int c = 10;
  StrategyKind strategy = StrategyKind::uniform;
  double beta = 0.0;  // only meaningful for gibbs
  TopologyKind topology = TopologyKind::complete;
  std::int64_t tau_max = 0;
  std::vector<std::int64_t> checkpoints;  // strictly increasing, within [0, tau_max]
  std::uint64_t seed = 1;
  std::int64_t runs = 100'000;
  std::size_t enum_cap = kDefaultEnumerationCap;

  DisplayStrategy display() const { return {strategy, c, beta}; }

  /// Throws ccards::Error (invalid_size / invalid_argument / invalid_topology)
  /// on the first violated constraint.
  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

/// "start:stop:step" ranges (stop inclusive) and plain values, comma
/// separated, e.g. "0:400:10" or "43,91,144,190". Result is sorted and unique.
std::vector<std::int64_t> parse_checkpoints(std::string_view text);

std::string format_checkpoints(const std::vector<std::int64_t>& checkpoints);

/// Flat key=value form. Keys: n, c, strategy, beta, topology, tau_max,
/// checkpoints, seed, runs, enum_cap. Lines starting with '#' are comments.
std::map<std::string, std::string> to_key_values(const SimConfig& config);
SimConfig from_key_values(const std::map<std::string, std::string>& values);

SimConfig read_config_file(const std::filesystem::path& path);
void write_config_file(const SimConfig& config, const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

}  // namespace ccards
