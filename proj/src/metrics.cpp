#include "trmflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "trmflow/errors.hpp"
#include "trmflow/fsutil.hpp"

namespace trm {

namespace {

struct MapeAccum {
  double sum = 0.0;
  long compared = 0;
  long excluded = 0;

  void add(double pred, double truth, double eps) {
    if (std::isnan(truth)) throw DataError("mape: no truth value for a compared entry");
    if (std::abs(truth) > eps) {
      sum += std::abs(pred - truth) / std::abs(truth);
      ++compared;
    } else {
      ++excluded;
    }
  }

  MapeResult result() const {
    if (compared == 0) throw DataError("mape: every entry was excluded");
    return {100.0 * sum / static_cast<double>(compared), compared, excluded};
  }
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

double rmse(const Matrix& pred, const Matrix& truth) {
  if (!pred.same_shape(truth)) throw DimensionError("rmse: shape mismatch");
  if (pred.data.empty()) throw DimensionError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - truth.data[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred.data.size()));
}

MapeResult mape(const Matrix& pred, const Matrix& truth, double epsilon_exclude) {
  if (!pred.same_shape(truth)) throw DimensionError("mape: shape mismatch");
  MapeAccum acc;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    acc.add(pred.data[i], truth.data[i], epsilon_exclude);
  }
  return acc.result();
}

std::map<int, double> horizon_mape(const std::vector<Matrix>& predicted,
                                   const std::vector<Matrix>& truth,
                                   const std::vector<int>& horizons,
                                   const std::vector<int>& interfaces, double epsilon_exclude) {
  if (predicted.size() != truth.size()) throw DimensionError("horizon_mape: window count mismatch");
  std::map<int, double> out;
  for (const int h : horizons) {
    MapeAccum acc;
    for (std::size_t w = 0; w < predicted.size(); ++w) {
      const Matrix& p = predicted[w];
      const Matrix& t = truth[w];
      if (!p.same_shape(t)) throw DimensionError("horizon_mape: shape mismatch");
      if (h < 1 || h > p.rows) throw DimensionError("horizon_mape: horizon out of range");
      for (const int j : interfaces) {
        if (j < 0 || j >= p.cols) throw DimensionError("horizon_mape: interface out of range");
        acc.add(p(h - 1, j), t(h - 1, j), epsilon_exclude);
      }
    }
    out[h] = acc.result().percent;
  }
  return out;
}

std::vector<double> per_interface_mape(const std::vector<Matrix>& predicted,
                                       const std::vector<Matrix>& truth,
                                       double epsilon_exclude) {
  if (predicted.empty()) throw DimensionError("per_interface_mape: no windows");
  const int cols = predicted[0].cols;
  std::vector<double> out(static_cast<std::size_t>(cols));
  for (int j = 0; j < cols; ++j) {
    MapeAccum acc;
    for (std::size_t w = 0; w < predicted.size(); ++w) {
      const Matrix& p = predicted[w];
      const Matrix& t = truth[w];
      if (!p.same_shape(t) || p.cols != cols) throw DimensionError("per_interface_mape: shape mismatch");
      for (int r = 0; r < p.rows; ++r) acc.add(p(r, j), t(r, j), epsilon_exclude);
    }
    out[static_cast<std::size_t>(j)] = acc.result().percent;
  }
  return out;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");
  const bool lower = p < 0.5;
  const double q = lower ? p : 1.0 - p;
  const double t = std::sqrt(-2.0 * std::log(q));
  const double num = 2.515517 + t * (0.802853 + t * 0.010328);
  const double den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308));
  const double z = t - num / den;
  return lower ? -z : z;
}

SmoothingStats smoothing_stats(const std::vector<double>& smoothed,
                               const std::vector<double>& measurements) {
  if (smoothed.size() != measurements.size()) throw DimensionError("smoothing_stats: size mismatch");
  const std::size_t n = smoothed.size();
  if (n < 2) throw DataError("smoothing_stats: need at least 2 samples");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = smoothed[i] - measurements[i];

  SmoothingStats s;
  s.bias = mean_of(diff);
  s.sd = sd_of(diff, s.bias);
  s.smoothed_sd = sd_of(smoothed, mean_of(smoothed));
  s.measurement_sd = sd_of(measurements, mean_of(measurements));

  std::vector<double> sorted = diff;
  std::sort(sorted.begin(), sorted.end());
  for (const double p : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    s.quantiles.emplace_back(p, sorted[lo] * (1.0 - frac) + sorted[hi] * frac);
  }

  const double scale = s.sd > 0.0 ? s.sd : 1.0;
  s.qq.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    s.qq.emplace_back(inverse_normal_cdf(p), (sorted[i] - s.bias) / scale);
  }
  return s;
}

namespace {

using nlohmann::json;

json smoothing_to_json(const SmoothingStats& s) {
  json j;
  j["bias"] = s.bias;
  j["sd"] = s.sd;
  j["smoothed_sd"] = s.smoothed_sd;
  j["measurement_sd"] = s.measurement_sd;
  j["quantiles"] = s.quantiles;
  j["qq"] = s.qq;
  return j;
}

SmoothingStats smoothing_from_json(const json& j) {
  SmoothingStats s;
  s.bias = j.at("bias");
  s.sd = j.at("sd");
  s.smoothed_sd = j.at("smoothed_sd");
  s.measurement_sd = j.at("measurement_sd");
  s.quantiles = j.at("quantiles").get<std::vector<std::pair<double, double>>>();
  s.qq = j.at("qq").get<std::vector<std::pair<double, double>>>();
  return s;
}

// NaN is not representable in JSON; per-interface entries without truth are
// serialized as null.
json interface_mape_to_json(const std::vector<double>& v) {
  json arr = json::array();
  for (const double x : v) {
    if (std::isnan(x)) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(x);
    }
  }
  return arr;
}

std::map<int, double> horizon_from_json(const json& j) {
  std::map<int, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[std::stoi(it.key())] = it.value();
  return out;
}

json horizon_to_json(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [h, v] : m) j[std::to_string(h)] = v;
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json j;
  j["overall_rmse"] = r.overall_rmse;
  j["overall_mape"] = r.overall_mape;
  j["horizon_mape"] = horizon_to_json(r.horizon);
  j["baseline_horizon_mape"] = horizon_to_json(r.baseline_horizon);
  j["interface_mape"] = interface_mape_to_json(r.interface_mape);
  j["interface_tag"] = r.interface_tag;
  j["observed_mape"] = r.observed_mape;
  j["hidden_mape"] = r.hidden_mape;
  j["smoothing"] = smoothing_to_json(r.smoothing);
  j["clipped"] = r.clipped;
  j["mape_excluded"] = r.mape_excluded;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  EvalReport r;
  r.overall_rmse = j.at("overall_rmse");
  r.overall_mape = j.at("overall_mape");
  r.horizon = horizon_from_json(j.at("horizon_mape"));
  r.baseline_horizon = horizon_from_json(j.at("baseline_horizon_mape"));
  for (const auto& x : j.at("interface_mape")) {
    r.interface_mape.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : x.get<double>());
  }
  r.interface_tag = j.at("interface_tag").get<std::vector<std::string>>();
  r.observed_mape = j.at("observed_mape");
  r.hidden_mape = j.at("hidden_mape");
  r.smoothing = smoothing_from_json(j.at("smoothing"));
  r.clipped = j.at("clipped");
  r.mape_excluded = j.at("mape_excluded");
  return r;
}

void write_report_tables(const EvalReport& r, const std::string& dir) {
  char buf[64];
  std::ostringstream per_if;
  per_if << "interface,tag,mape_percent\n";
  for (std::size_t i = 0; i < r.interface_mape.size(); ++i) {
    per_if << i << ',' << (i < r.interface_tag.size() ? r.interface_tag[i] : "") << ',';
    if (std::isnan(r.interface_mape[i])) {
      per_if << "\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g\n", r.interface_mape[i]);
      per_if << buf;
    }
  }
  atomic_write_file(dir + "/per_interface.csv", per_if.str());

  std::ostringstream per_h;
  per_h << "horizon,model_mape_percent,baseline_mape_percent\n";
  for (const auto& [h, v] : r.horizon) {
    per_h << h << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    per_h << buf << ',';
    const auto it = r.baseline_horizon.find(h);
    if (it != r.baseline_horizon.end()) {
      std::snprintf(buf, sizeof(buf), "%.17g", it->second);
      per_h << buf;
    }
    per_h << '\n';
  }
  atomic_write_file(dir + "/per_horizon.csv", per_h.str());

  // Fixed-bin histogram of the smoothing differences, reconstructed from the
  // QQ data (which carries every standardized difference).
  std::ostringstream hist;
  hist << "bin_left,bin_right,count\n";
  if (!r.smoothing.qq.empty()) {
    const int n_bins = 40;
    double lo = r.smoothing.qq.front().second;
    double hi = r.smoothing.qq.back().second;
    if (hi <= lo) hi = lo + 1.0;
    std::vector<long> counts(n_bins, 0);
    for (const auto& [z, d] : r.smoothing.qq) {
      int b = static_cast<int>((d - lo) / (hi - lo) * n_bins);
      b = std::min(std::max(b, 0), n_bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < n_bins; ++b) {
      const double left = lo + (hi - lo) * b / n_bins;
      const double right = lo + (hi - lo) * (b + 1) / n_bins;
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", left, right);
      hist << buf << counts[static_cast<std::size_t>(b)] << '\n';
    }
  }
  atomic_write_file(dir + "/histogram.csv", hist.str());

  std::ostringstream qq;
  qq << "normal_quantile,standardized_difference\n";
  for (const auto& [z, d] : r.smoothing.qq) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", z, d);
    qq << buf;
  }
  atomic_write_file(dir + "/qq.csv", qq.str());
}

}  // namespace trm
