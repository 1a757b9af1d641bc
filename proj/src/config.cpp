#include "ccards/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ccards/error.hpp"

namespace ccards {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::parse_error, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::parse_error, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

void SimConfig::validate() const {
  if (n < 2) throw Error(ErrorKind::invalid_size, "N must be at least 2");
  if (c < 1 || c > n) throw Error(ErrorKind::invalid_size, "C must be in [1, N]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::invalid_argument, "beta must be finite and non-negative");
  }
  if (topology == TopologyKind::custom) {
    throw Error(ErrorKind::invalid_topology, "custom topologies cannot be configured by name");
  }
  if (topology == TopologyKind::cycle && n < 3) {
    throw Error(ErrorKind::invalid_topology, "cycle topology needs N >= 3");
  }
  if (tau_max < 0) throw Error(ErrorKind::invalid_argument, "tau_max must be non-negative");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || checkpoints[i] > tau_max) {
      throw Error(ErrorKind::invalid_argument, "checkpoints must lie in [0, tau_max]");
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw Error(ErrorKind::invalid_argument, "checkpoints must be strictly increasing");
    }
  }
  if (runs < 1) throw Error(ErrorKind::invalid_argument, "runs must be at least 1");
  if (enum_cap < 1) throw Error(ErrorKind::invalid_argument, "enum_cap must be at least 1");
}

std::vector<std::int64_t> parse_checkpoints(std::string_view text) {
  std::vector<std::int64_t> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const auto end = std::min(text.find(',', begin), text.size());
    const auto item = trim(text.substr(begin, end - begin));
    if (!item.empty()) {
      const auto first = item.find(':');
      if (first == std::string_view::npos) {
        out.push_back(parse_int(item));
      } else {
        const auto second = item.find(':', first + 1);
        const std::int64_t start = parse_int(item.substr(0, first));
        const std::int64_t stop = parse_int(item.substr(
            first + 1, second == std::string_view::npos ? std::string_view::npos
                                                        : second - first - 1));
        const std::int64_t step =
            second == std::string_view::npos ? 1 : parse_int(item.substr(second + 1));
        if (step <= 0) throw Error(ErrorKind::parse_error, "checkpoint step must be positive");
        if (stop < start) {
          throw Error(ErrorKind::parse_error, "empty checkpoint range '" + std::string(item) + "'");
        }
        for (std::int64_t t = start; t <= stop; t += step) out.push_back(t);
      }
    }
    begin = end + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_checkpoints(const std::vector<std::int64_t>& checkpoints) {
  std::string out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(checkpoints[i]);
  }
  return out;
}

std::map<std::string, std::string> to_key_values(const SimConfig& config) {
  return {
      {"n", std::to_string(config.n)},
      {"c", std::to_string(config.c)},
      {"strategy", std::string(to_string(config.strategy))},
      {"beta", config.strategy == StrategyKind::gibbs ? format_double(config.beta) : ""},
      {"topology", std::string(to_string(config.topology))},
      {"tau_max", std::to_string(config.tau_max)},
      {"checkpoints", format_checkpoints(config.checkpoints)},
      {"seed", std::to_string(config.seed)},
      {"runs", std::to_string(config.runs)},
      {"enum_cap", std::to_string(config.enum_cap)},
  };
}

SimConfig from_key_values(const std::map<std::string, std::string>& values) {
  SimConfig config;
  for (const auto& [key, value] : values) {
    if (key == "n") {
      config.n = static_cast<int>(parse_int(value));
    } else if (key == "c") {
      config.c = static_cast<int>(parse_int(value));
    } else if (key == "strategy") {
      config.strategy = parse_strategy_kind(trim(value));
    } else if (key == "beta") {
      config.beta = trim(value).empty() ? 0.0 : parse_double(value);
    } else if (key == "topology") {
      config.topology = parse_topology_kind(trim(value));
    } else if (key == "tau_max") {
      config.tau_max = parse_int(value);
    } else if (key == "checkpoints") {
      config.checkpoints = parse_checkpoints(value);
    } else if (key == "seed") {
      const auto text = trim(value);
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
      if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::parse_error, "bad seed '" + std::string(text) + "'");
      }
      config.seed = seed;
    } else if (key == "runs") {
      config.runs = parse_int(value);
    } else if (key == "enum_cap") {
      config.enum_cap = static_cast<std::size_t>(parse_int(value));
    } else {
      throw Error(ErrorKind::parse_error, "unknown config key '" + key + "'");
    }
  }
  if (config.strategy != StrategyKind::gibbs) config.beta = 0.0;
  if (config.checkpoints.empty() && !values.contains("checkpoints")) {
    config.checkpoints = {config.tau_max};
  }
  config.validate();
  return config;
}

SimConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::file_error, "cannot open config " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::parse_error,
                  path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    values[std::string(trim(text.substr(0, eq)))] = std::string(trim(text.substr(eq + 1)));
  }
  return from_key_values(values);
}

void write_config_file(const SimConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::file_error, "cannot write config " + path.string());
  for (const auto& [key, value] : to_key_values(config)) out << key << '=' << value << '\n';
  if (!out) throw Error(ErrorKind::file_error, "write failed for " + path.string());
}

}  // namespace ccards
