#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trmflow/linalg.hpp"

namespace trm {

double rmse(const Matrix& pred, const Matrix& truth);

struct MapeResult {
  double percent = 0.0;
  long compared = 0;
  long excluded = 0;
};

// Mean of |pred - truth| / |truth| over entries with |truth| above the
// exclusion threshold, reported in percent. Throws DataError when every
// entry is excluded.
MapeResult mape(const Matrix& pred, const Matrix& truth, double epsilon_exclude = 1e-9);

// Per-horizon MAPE over stacked predicted rows. predicted[w] and truth[w]
// are N_f x N_i matrices for window w; horizons are 1-based; only the given
// interface columns are compared. NaN truth at a requested interface is an
// error.
std::map<int, double> horizon_mape(const std::vector<Matrix>& predicted,
                                   const std::vector<Matrix>& truth,
                                   const std::vector<int>& horizons,
                                   const std::vector<int>& interfaces,
                                   double epsilon_exclude = 1e-9);

// One MAPE per interface column over all windows and horizons.
std::vector<double> per_interface_mape(const std::vector<Matrix>& predicted,
                                       const std::vector<Matrix>& truth,
                                       double epsilon_exclude = 1e-9);

struct SmoothingStats {
  double bias = 0.0;            // mean(smoothed - measured)
  double sd = 0.0;              // standard deviation of the differences
  double smoothed_sd = 0.0;     // dispersion of the smoothed values
  double measurement_sd = 0.0;  // dispersion of the raw values
  std::vector<std::pair<double, double>> quantiles;  // (probability, difference quantile)
  std::vector<std::pair<double, double>> qq;  // (normal quantile, standardized difference)
};

// Distributional comparison between smoothed fluxes and the measurements
// they re-estimate. QQ pairs match sorted standardized differences with
// standard normal quantiles at (i - 0.5) / n.
SmoothingStats smoothing_stats(const std::vector<double>& smoothed,
                               const std::vector<double>& measurements);

// Rational approximation of the standard normal quantile function
// (Abramowitz & Stegun 26.2.23), absolute error below 4.5e-4.
double inverse_normal_cdf(double p);

struct EvalReport {
  double overall_rmse = 0.0;
  double overall_mape = 0.0;
  std::map<int, double> horizon;           // model MAPE per horizon
  std::map<int, double> baseline_horizon;  // last-known-measurement MAPE per horizon
  std::vector<double> interface_mape;      // one entry per interface, NaN if no truth
  std::vector<std::string> interface_tag;  // observed / hidden / unobserved
  double observed_mape = 0.0;
  double hidden_mape = 0.0;
  SmoothingStats smoothing;
  long clipped = 0;
  long mape_excluded = 0;
};

std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);

// Companion CSV tables (per-interface, per-horizon, difference histogram,
// QQ pairs) under `dir`.
void write_report_tables(const EvalReport& r, const std::string& dir);

}  // namespace trm
