#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ccards/config.hpp"
#include "ccards/ensemble.hpp"

namespace ccards {

/// Rows enter an exponential fit only when p < max_p and failures >= min_failures.
struct FitWindow {
  double max_p = 0.5;
  std::int64_t min_failures = 50;
};

/// p(tau) ~ a * exp(-tau / tau_c)
struct FitResult {
  double a = 0.0;
  double tau_c = 0.0;
  std::int64_t window_min = 0;
  std::int64_t window_max = 0;
  double residual = 0.0;  // rms of log-residuals
  int points_used = 0;
};

/// Weighted least squares of log p on tau with weights (p / se)^2.
/// Throws insufficient_data with fewer than 3 usable rows or no decay.
FitResult fit_exponential(const FailureCurve& curve, const FitWindow& window = {});

/// Scaling function of the tau_c collapse for C < N.
double scaling_function(double x);

struct TauCEntry {
  int n = 0;
  int c = 0;
  double tau_c = 0.0;
};

struct CollapsePoint {
  int n = 0;
  int c = 0;
  double x = 0.0;          // C / N
  double collapsed = 0.0;  // tau_c / N^{3/2}
  double predicted = 0.0;  // scaling_function(x)
  double relative_error = 0.0;
};

struct CollapseReport {
  std::vector<CollapsePoint> points;
  double rms_deviation = 0.0;  // in collapsed units
  double max_relative_error = 0.0;
};

CollapseReport scaling_check(std::span<const TauCEntry> entries);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct PlateauEstimate {
  double p = 0.0;
  double se = 0.0;
  std::int64_t failures = 0;
  std::int64_t runs = 0;
};

/// Failure probability at tau_eval (the long-time plateau) with binomial se.
PlateauEstimate estimate_p_infinity(const SimConfig& config, std::int64_t tau_eval = 10'000,
                                    int threads = 1);

struct BetaPoint {
  double beta = 0.0;
  double p = 0.0;
};

/// p ~ a * exp(-b / beta)
struct BetaFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
  int points_used = 0;
};

/// Least squares of log p on 1/beta over points with p > 0 and beta > 0.
BetaFit fit_beta_decay(std::span<const BetaPoint> points);

struct FitRow {
  Fingerprint fingerprint;
  FitResult fit;
};

inline constexpr const char* kFitHeader = "n,c,strategy,beta,a,tau_c,residual,points_used";
inline constexpr const char* kCollapseHeader = "n,c,x,tau_c,collapsed,f_x,relative_error";

void write_fit_csv(const std::vector<FitRow>& rows, std::ostream& out);
void write_collapse_csv(const CollapseReport& report, std::span<const TauCEntry> entries,
                        std::ostream& out);

}  // namespace ccards
