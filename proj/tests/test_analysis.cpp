#include <cmath>
#include <functional>
#include <sstream>

#include "ccards/analysis.hpp"
#include "ccards/error.hpp"
#include "doctest.h"

using namespace ccards;

namespace {

// Noiseless curve with p(tau) = shape(tau) and a large nominal run count.
template <class F>
FailureCurve synthetic_curve(F shape, std::int64_t tau_max, std::int64_t step = 1) {
  FailureCurve curve;
  curve.fingerprint = {10, 5, StrategyKind::uniform, 0.0, TopologyKind::complete, 1};
  const std::int64_t runs = 1'000'000'000;
  for (std::int64_t tau = 0; tau <= tau_max; tau += step) {
    CurveRow row;
    row.tau = tau;
    row.runs = runs;
    row.p = shape(static_cast<double>(tau));
    row.failures = std::llround(row.p * runs);
    row.se = std::sqrt(row.p * (1 - row.p) / runs);
    curve.rows.push_back(row);
  }
  return curve;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::file_error;  // stands for "no error"
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("noiseless exponential is recovered") {
  const auto curve = synthetic_curve([](double t) { return 0.5 * std::exp(-t / 50.0); }, 400, 5);
  const FitResult fit = fit_exponential(curve);
  CHECK(std::abs(fit.tau_c - 50.0) < 1e-9);
  CHECK(fit.a == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.residual < 1e-9);
  CHECK(fit.window_min == 5);  // p = 0.5 at tau 0 is outside p < 0.5
  CHECK(fit.window_max == 400);
  CHECK(fit.points_used == 80);
}

TEST_CASE("scaling p by a constant scales a only") {
  const auto shape = [](double t) { return 0.3 * std::exp(-t / 12.0); };
  const auto base = fit_exponential(synthetic_curve(shape, 200, 2));
  const auto scaled =
      fit_exponential(synthetic_curve([&](double t) { return 0.5 * shape(t); }, 200, 2));
  CHECK(scaled.a == doctest::Approx(0.5 * base.a).epsilon(1e-9));
  CHECK(scaled.tau_c == doctest::Approx(base.tau_c).epsilon(1e-9));
}

TEST_CASE("early rows off the exponential only add residual") {
  // p stays near 1 for small tau, then decays exponentially
  const auto shape = [](double t) {
    return 0.8 * std::exp(-t / 30.0) + 0.19 * std::exp(-t / 4.0);
  };
  const auto curve = synthetic_curve(shape, 400, 2);
  double previous = -1.0;
  for (double max_p : {0.05, 0.2, 0.4, 0.6, 0.9}) {
    const FitResult fit = fit_exponential(curve, {max_p, 50});
    CHECK(fit.residual >= previous);
    previous = fit.residual;
  }
  CHECK(fit_exponential(curve, {0.05, 50}).tau_c == doctest::Approx(30.0).epsilon(1e-3));
}

TEST_CASE("window rule") {
  FailureCurve curve;
  curve.rows = {{0, 900, 1000, 0.9, 0.01},
                {10, 300, 1000, 0.3, 0.01},
                {20, 100, 1000, 0.1, 0.01},
                {30, 40, 1000, 0.04, 0.01}};
  CHECK(kind_of([&] { (void)fit_exponential(curve); }) == ErrorKind::insufficient_data);
  curve.rows.push_back({40, 60, 1000, 0.06, 0.01});  // non-monotone but usable
  const auto fit = fit_exponential(curve);
  CHECK(fit.points_used == 3);
  CHECK(fit.window_min == 10);
  CHECK(fit.window_max == 40);

  FailureCurve flat;
  flat.rows = {{0, 100, 1000, 0.1, 0.01}, {1, 100, 1000, 0.1, 0.01}, {2, 100, 1000, 0.1, 0.01}};
  CHECK(kind_of([&] { (void)fit_exponential(flat); }) == ErrorKind::insufficient_data);
}

TEST_CASE("scaling function") {
  CHECK(scaling_function(0.5) == 1.75);
  CHECK(scaling_function(1.0) == 0.0);
  CHECK(scaling_function(0.2) == doctest::Approx(7.0));
}

TEST_CASE("collapse report") {
  std::vector<TauCEntry> half;
  for (int n : {10, 16, 20}) {
    half.push_back({n, n / 2, std::pow(n, 1.5) * 1.75 * 1.1});  // 10% above the curve
  }
  const auto report = scaling_check(half);
  REQUIRE(report.points.size() == 3);
  for (const auto& p : report.points) {
    CHECK(p.x == 0.5);
    CHECK(p.predicted == 1.75);
    CHECK(p.collapsed == doctest::Approx(1.925));
    CHECK(p.relative_error == doctest::Approx(0.1));
  }
  CHECK(report.rms_deviation == doctest::Approx(0.175));
  CHECK(report.max_relative_error == doctest::Approx(0.1));

  // C/N near 1: tau_c following the law collapses toward zero
  const std::vector<TauCEntry> near_one{{100, 99, std::pow(100, 1.5) * scaling_function(0.99)}};
  CHECK(scaling_check(near_one).points[0].collapsed < 0.02);

  const std::vector<TauCEntry> single{{10, 5, 60.0}};
  const auto one = scaling_check(single);
  CHECK(one.rms_deviation == doctest::Approx(std::abs(60.0 / std::pow(10, 1.5) - 1.75)));

  CHECK(kind_of([] { (void)scaling_check({}); }) == ErrorKind::invalid_argument);
  const std::vector<TauCEntry> full{{10, 10, 1.4}};
  CHECK(kind_of([&] { (void)scaling_check(full); }) == ErrorKind::invalid_argument);
}

TEST_CASE("line fit") {
  const std::vector<double> x{10, 20, 30};
  const std::vector<double> y{0.15 * 10 - 0.09, 0.15 * 20 - 0.09, 0.15 * 30 - 0.09};
  const LinearFit line = fit_line(x, y);
  CHECK(line.slope == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(line.intercept == doctest::Approx(-0.09).epsilon(1e-9));
  const std::vector<double> one{1.0};
  CHECK(kind_of([&] { (void)fit_line(one, one); }) == ErrorKind::insufficient_data);
}

TEST_CASE("beta decay fit") {
  std::vector<BetaPoint> points;
  for (double beta : {0.1, 0.2, 0.3, 0.5}) points.push_back({beta, 0.251 * std::exp(-0.428 / beta)});
  const BetaFit fit = fit_beta_decay(points);
  CHECK(std::abs(fit.a - 0.251) < 1e-9);
  CHECK(std::abs(fit.b - 0.428) < 1e-9);
  CHECK(fit.points_used == 4);

  points.push_back({0.0, 0.9});   // beta = 0 is ignored
  points.push_back({0.05, 0.0});  // p = 0 is ignored
  CHECK(fit_beta_decay(points).points_used == 4);

  const std::vector<BetaPoint> two{{0.1, 0.01}, {0.2, 0.03}};
  CHECK(kind_of([&] { (void)fit_beta_decay(two); }) == ErrorKind::insufficient_data);
}

TEST_CASE("uniform display on the complete graph never fails at long times") {
  SimConfig config;
  config.n = 10;
  config.c = 5;
  config.runs = 1000;
  config.tau_max = 10'000;
  config.checkpoints = {10'000};
  const PlateauEstimate p = estimate_p_infinity(config);
  CHECK(p.failures == 0);
  CHECK(p.p == 0.0);
  CHECK(p.runs == 1000);
}

TEST_CASE("fit and collapse CSV") {
  FitRow row;
  row.fingerprint = {10, 5, StrategyKind::gibbs, 0.3, TopologyKind::complete, 7};
  row.fit.a = 0.5;
  row.fit.tau_c = 55.25;
  row.fit.residual = 0.01;
  row.fit.points_used = 12;
  std::ostringstream s;
  write_fit_csv({row}, s);
  CHECK(s.str() == "n,c,strategy,beta,a,tau_c,residual,points_used\n10,5,gibbs,0.3,0.5,55.25,0.01,12\n");

  const std::vector<TauCEntry> entries{{10, 5, std::pow(10, 1.5) * 1.75}};
  std::ostringstream c;
  write_collapse_csv(scaling_check(entries), entries, c);
  CHECK(c.str().rfind("n,c,x,tau_c,collapsed,f_x,relative_error\n10,5,0.5,", 0) == 0);
  CHECK(c.str().find("# rms_deviation=") != std::string::npos);
}

}
