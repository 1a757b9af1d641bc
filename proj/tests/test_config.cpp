#include <filesystem>

#include "ccards/config.hpp"
#include "ccards/error.hpp"
#include "doctest.h"

using namespace ccards;

namespace {

ErrorKind validation_kind(const SimConfig& config) {
  try {
    config.validate();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::file_error;  // stands for "valid"
}

SimConfig valid_config() {
  SimConfig c;
  c.n = 10;
  c.c = 5;
  c.tau_max = 400;
  c.checkpoints = parse_checkpoints("0:400:10");
  return c;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("checkpoint ranges and lists") {
  const auto range = parse_checkpoints("0:400:10");
  CHECK(range.size() == 41);
  CHECK(range.front() == 0);
  CHECK(range.back() == 400);
  CHECK(parse_checkpoints("43,91,144,190") == std::vector<std::int64_t>{43, 91, 144, 190});
  CHECK(parse_checkpoints("5,0:4:2,2") == std::vector<std::int64_t>{0, 2, 4, 5});
  CHECK(parse_checkpoints("0:10:4") == std::vector<std::int64_t>{0, 4, 8});
  CHECK_THROWS_AS(parse_checkpoints("1:x:2"), Error);
  CHECK_THROWS_AS(parse_checkpoints("0:10:0"), Error);
  CHECK_THROWS_AS(parse_checkpoints("5:1:1"), Error);
  CHECK(parse_checkpoints(format_checkpoints(range)) == range);
}

TEST_CASE("validation") {
  CHECK(validation_kind(valid_config()) == ErrorKind::file_error);
  SimConfig c = valid_config();
  c.c = 11;
  CHECK(validation_kind(c) == ErrorKind::invalid_size);
  try {
    c.validate();
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "C must be in [1, N]");
  }
  c = valid_config();
  c.c = 0;
  CHECK(validation_kind(c) == ErrorKind::invalid_size);
  c = valid_config();
  c.beta = -0.1;
  CHECK(validation_kind(c) == ErrorKind::invalid_argument);
  c = valid_config();
  c.checkpoints.push_back(401);
  CHECK(validation_kind(c) == ErrorKind::invalid_argument);
  c = valid_config();
  c.runs = 0;
  CHECK(validation_kind(c) == ErrorKind::invalid_argument);
  c = valid_config();
  c.n = 2;
  c.c = 1;
  c.topology = TopologyKind::cycle;
  CHECK(validation_kind(c) == ErrorKind::invalid_topology);
}

TEST_CASE("key value round trip") {
  SimConfig c = valid_config();
  c.strategy = StrategyKind::gibbs;
  c.beta = 0.3;
  c.topology = TopologyKind::cycle;
  c.seed = 0xfeedfacecafebeefULL;
  c.runs = 12345;
  c.enum_cap = 999;
  const auto kv = to_key_values(c);
  CHECK(kv.at("strategy") == "gibbs");
  CHECK(kv.at("beta") == "0.3");
  CHECK(from_key_values(kv) == c);

  c.strategy = StrategyKind::top_c;
  c.beta = 0.0;
  CHECK(to_key_values(c).at("beta").empty());
  CHECK(from_key_values(to_key_values(c)) == c);
}

TEST_CASE("config file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "ccards_config_test.cfg";
  SimConfig c = valid_config();
  c.strategy = StrategyKind::gibbs;
  c.beta = 0.1 + 0.2;  // not exactly representable as a short decimal
  write_config_file(c, path);
  CHECK(read_config_file(path) == c);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_config_file(path), Error);
}

TEST_CASE("shortest round trip doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.287, 123456789.125, 0.0}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK_THROWS_AS(parse_double("0.5x"), Error);
  CHECK_THROWS_AS(parse_int("12a"), Error);
}

}
