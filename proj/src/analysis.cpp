#include "ccards/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ccards/error.hpp"

namespace ccards {

namespace {

struct WeightedLine {
  double intercept = 0.0;
  double slope = 0.0;
};

WeightedLine weighted_least_squares(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorKind::insufficient_data, "fit needs at least two distinct abscissae");
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double rms_residual(std::span<const double> x, std::span<const double> y, WeightedLine line) {
  double sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (line.intercept + line.slope * x[i]);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(x.size()));
}

}  // namespace

FitResult fit_exponential(const FailureCurve& curve, const FitWindow& window) {
  std::vector<double> tau, log_p, weight;
  FitResult result;
  for (const auto& row : curve.rows) {
    if (!(row.p < window.max_p) || row.failures < window.min_failures || !(row.p > 0.0)) continue;
    tau.push_back(static_cast<double>(row.tau));
    log_p.push_back(std::log(row.p));
    // delta method: var(log p) = (se / p)^2
    weight.push_back(row.se > 0.0 ? (row.p / row.se) * (row.p / row.se) : 1.0);
    if (tau.size() == 1) result.window_min = row.tau;
    result.window_max = row.tau;
  }
  if (tau.size() < 3) {
    throw Error(ErrorKind::insufficient_data,
                "exponential fit needs at least 3 usable rows (p < " +
                    std::to_string(window.max_p) + ", failures >= " +
                    std::to_string(window.min_failures) + "), found " +
                    std::to_string(tau.size()));
  }
  const WeightedLine line = weighted_least_squares(tau, log_p, weight);
  if (!(line.slope < 0.0)) {
    throw Error(ErrorKind::insufficient_data, "failure probability does not decay in the fit window");
  }
  result.a = std::exp(line.intercept);
  result.tau_c = -1.0 / line.slope;
  result.residual = rms_residual(tau, log_p, line);
  result.points_used = static_cast<int>(tau.size());
  return result;
}

double scaling_function(double x) { return 1.75 * (1.0 / x - 1.0); }

CollapseReport scaling_check(std::span<const TauCEntry> entries) {
  if (entries.empty()) throw Error(ErrorKind::invalid_argument, "scaling_check: empty table");
  CollapseReport report;
  double sum_sq = 0;
  for (const auto& e : entries) {
    if (e.n < 2 || e.c < 1 || e.c >= e.n) {
      throw Error(ErrorKind::invalid_argument, "scaling_check: entries need 1 <= C < N");
    }
    CollapsePoint point;
    point.n = e.n;
    point.c = e.c;
    point.x = static_cast<double>(e.c) / e.n;
    point.collapsed = e.tau_c / std::pow(static_cast<double>(e.n), 1.5);
    point.predicted = scaling_function(point.x);
    point.relative_error = (point.collapsed - point.predicted) / point.predicted;
    sum_sq += (point.collapsed - point.predicted) * (point.collapsed - point.predicted);
    report.max_relative_error = std::max(report.max_relative_error, std::abs(point.relative_error));
    report.points.push_back(point);
  }
  report.rms_deviation = std::sqrt(sum_sq / static_cast<double>(entries.size()));
  return report;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::insufficient_data, "line fit needs at least two points");
  }
  const std::vector<double> ones(x.size(), 1.0);
  const WeightedLine line = weighted_least_squares(x, y, ones);
  return {line.slope, line.intercept, rms_residual(x, y, line)};
}

PlateauEstimate estimate_p_infinity(const SimConfig& config, std::int64_t tau_eval, int threads) {
  SimConfig at_tau = config;
  at_tau.tau_max = std::max(config.tau_max, tau_eval);
  at_tau.checkpoints = {tau_eval};
  const FailureCurve curve = run_ensemble(at_tau, threads);
  const CurveRow& row = curve.rows.front();
  return {row.p, row.se, row.failures, row.runs};
}

BetaFit fit_beta_decay(std::span<const BetaPoint> points) {
  std::vector<double> inv_beta, log_p;
  for (const auto& point : points) {
    if (point.p > 0.0 && point.beta > 0.0 && std::isfinite(point.beta)) {
      inv_beta.push_back(1.0 / point.beta);
      log_p.push_back(std::log(point.p));
    }
  }
  if (inv_beta.size() < 3) {
    throw Error(ErrorKind::insufficient_data,
                "beta fit needs at least 3 points with p > 0 and beta > 0, found " +
                    std::to_string(inv_beta.size()));
  }
  const std::vector<double> ones(inv_beta.size(), 1.0);
  const WeightedLine line = weighted_least_squares(inv_beta, log_p, ones);
  BetaFit fit;
  fit.a = std::exp(line.intercept);
  fit.b = -line.slope;
  fit.residual = rms_residual(inv_beta, log_p, line);
  fit.points_used = static_cast<int>(inv_beta.size());
  return fit;
}

void write_fit_csv(const std::vector<FitRow>& rows, std::ostream& out) {
  out << kFitHeader << '\n';
  for (const auto& row : rows) {
    const auto& f = row.fingerprint;
    out << f.n << ',' << f.c << ',' << to_string(f.strategy) << ','
        << (f.strategy == StrategyKind::gibbs ? format_double(f.beta) : std::string()) << ','
        << format_double(row.fit.a) << ',' << format_double(row.fit.tau_c) << ','
        << format_double(row.fit.residual) << ',' << row.fit.points_used << '\n';
  }
}

void write_collapse_csv(const CollapseReport& report, std::span<const TauCEntry> entries,
                        std::ostream& out) {
  out << kCollapseHeader << '\n';
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    out << p.n << ',' << p.c << ',' << format_double(p.x) << ',' << format_double(entries[i].tau_c)
        << ',' << format_double(p.collapsed) << ',' << format_double(p.predicted) << ','
        << format_double(p.relative_error) << '\n';
  }
  out << "# rms_deviation=" << format_double(report.rms_deviation)
      << " max_relative_error=" << format_double(report.max_relative_error) << '\n';
}

}  // namespace ccards
