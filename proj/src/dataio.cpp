#include "trmflow/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>

#include "trmflow/fsutil.hpp"
#include "trmflow/rng.hpp"

namespace trm {

namespace {

constexpr double kClipCeiling = 0.5 - 1e-6;
constexpr double kTwoPi = 6.283185307179586476925287;

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw DataError("line " + std::to_string(line_no) + ": malformed " + what + " '" + s + "'");
  }
  return v;
}

void append_fmt(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

}  // namespace

long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yr = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yr + (m <= 2));
}

std::string format_timestamp(long day_number, int second_of_day) {
  int y, m, d;
  civil_from_days(day_number, y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d, second_of_day / 3600,
                (second_of_day / 60) % 60, second_of_day % 60);
  return buf;
}

bool parse_timestamp(const std::string& ts, long& day_number, int& second_of_day) {
  int y, mo, d, h, mi, s;
  if (std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 ||
      s > 60) {
    return false;
  }
  day_number = days_from_civil(y, mo, d);
  second_of_day = h * 3600 + mi * 60 + s;
  return true;
}

long MeasurementSeries::total_rows() const {
  long n = 0;
  for (const auto& d : days) n += d.values.rows;
  return n;
}

MeasurementSeries load_csv(const std::string& path) {
  std::istringstream is(read_file(path));
  std::string line;
  MeasurementSeries s;

  if (!std::getline(is, line)) throw DataError(path + ": empty file");
  {
    bool have_dx = false, have_dt = false, have_rho = false;
    for (const std::string& kv : split_line(line, ',')) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw DataError("line 1: expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const double value = parse_double(kv.substr(eq + 1), 1, key.c_str());
      if (key == "dx_meters") {
        s.dx = value;
        have_dx = true;
      } else if (key == "dt_seconds") {
        s.dT = value;
        have_dt = true;
      } else if (key == "rho_max_veh_per_m") {
        s.rho_max = value;
        have_rho = true;
      } else {
        throw DataError("line 1: unknown key '" + key + "'");
      }
    }
    if (!have_dx || !have_dt || !have_rho) throw DataError("line 1: missing metadata keys");
  }

  if (!std::getline(is, line)) throw DataError(path + ": missing column header");
  {
    const std::vector<std::string> cols = split_line(line, ',');
    if (cols.empty() || cols[0] != "timestamp") {
      throw DataError("line 2: header must start with 'timestamp'");
    }
    int prev = -1;
    for (std::size_t c = 1; c < cols.size(); ++c) {
      const double v = parse_double(cols[c], 2, "interface index");
      const int idx = static_cast<int>(v);
      if (static_cast<double>(idx) != v || idx <= prev) {
        throw DataError("line 2: interface indices must be strictly increasing integers");
      }
      s.interfaces.push_back(idx);
      prev = idx;
    }
    if (s.interfaces.empty()) throw DataError("line 2: no interface columns");
  }

  const int n_cols = s.n_columns();
  std::vector<Vec> rows;
  std::string cur_day;
  std::string cur_start;
  auto flush_day = [&]() {
    if (rows.empty()) return;
    DayBlock day;
    day.day_id = cur_day;
    day.start_timestamp = cur_start;
    day.values = Matrix(static_cast<int>(rows.size()), n_cols);
    for (std::size_t r = 0; r < rows.size(); ++r) day.values.set_row(static_cast<int>(r), rows[r]);
    s.days.push_back(std::move(day));
    rows.clear();
  };

  int line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line, ',');
    if (static_cast<int>(fields.size()) != n_cols + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(n_cols + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    long day_num;
    int sec;
    if (!parse_timestamp(fields[0], day_num, sec)) {
      throw DataError("line " + std::to_string(line_no) + ": malformed timestamp '" + fields[0] +
                      "'");
    }
    const std::string day_id = fields[0].substr(0, 10);
    if (day_id != cur_day) {
      flush_day();
      cur_day = day_id;
      cur_start = fields[0];
    }
    Vec row(static_cast<std::size_t>(n_cols));
    for (int c = 0; c < n_cols; ++c) {
      const std::string& f = fields[static_cast<std::size_t>(c + 1)];
      if (f.empty()) {
        row[static_cast<std::size_t>(c)] = std::numeric_limits<double>::quiet_NaN();
      } else {
        const double v = parse_double(f, line_no, "count");
        if (v < 0.0) {
          throw DataError("line " + std::to_string(line_no) + ": negative count " + f);
        }
        row[static_cast<std::size_t>(c)] = v;
      }
    }
    rows.push_back(std::move(row));
  }
  flush_day();
  return s;
}

std::string series_to_csv(const MeasurementSeries& s) {
  std::string out;
  append_fmt(out, "dx_meters=%.17g", s.dx);
  append_fmt(out, ",dt_seconds=%.17g", s.dT);
  append_fmt(out, ",rho_max_veh_per_m=%.17g", s.rho_max);
  out += "\ntimestamp";
  for (const int i : s.interfaces) out += "," + std::to_string(i);
  out += '\n';
  for (const auto& day : s.days) {
    long day_num;
    int sec0;
    if (!parse_timestamp(day.start_timestamp, day_num, sec0)) {
      throw DataError("series: malformed start timestamp '" + day.start_timestamp + "'");
    }
    for (int r = 0; r < day.values.rows; ++r) {
      out += format_timestamp(day_num, sec0 + r * static_cast<int>(s.dT));
      for (int c = 0; c < day.values.cols; ++c) {
        out += ',';
        const double v = day.values(r, c);
        if (!std::isnan(v)) append_fmt(out, "%.17g", v);
      }
      out += '\n';
    }
  }
  return out;
}

void save_csv(const std::string& path, const MeasurementSeries& s) {
  atomic_write_file(path, series_to_csv(s));
}

MeasurementSeries interpolate_missing(const MeasurementSeries& s) {
  MeasurementSeries out = s;
  for (auto& day : out.days) {
    for (int r = 0; r < day.values.rows; ++r) {
      std::vector<int> seen;
      for (int c = 0; c < day.values.cols; ++c) {
        if (!std::isnan(day.values(r, c))) seen.push_back(c);
      }
      if (static_cast<int>(seen.size()) == day.values.cols) continue;
      if (seen.size() < 2) {
        throw DataError("interpolate: day " + day.day_id + " row " + std::to_string(r) +
                        " has fewer than 2 observations");
      }
      for (int c = 0; c < day.values.cols; ++c) {
        if (!std::isnan(day.values(r, c))) continue;
        const double x = s.interfaces[static_cast<std::size_t>(c)];
        if (c < seen.front()) {
          day.values(r, c) = day.values(r, seen.front());
        } else if (c > seen.back()) {
          day.values(r, c) = day.values(r, seen.back());
        } else {
          const auto it = std::upper_bound(seen.begin(), seen.end(), c);
          const int hi = *it;
          const int lo = *(it - 1);
          const double xa = s.interfaces[static_cast<std::size_t>(lo)];
          const double xb = s.interfaces[static_cast<std::size_t>(hi)];
          const double va = day.values(r, lo);
          const double vb = day.values(r, hi);
          day.values(r, c) = va + (x - xa) / (xb - xa) * (vb - va);
        }
      }
    }
  }
  return out;
}

NormalizeResult normalize(const MeasurementSeries& s, const TrmConfig& cfg) {
  cfg.validate();
  NormalizeResult out;
  out.series = s;
  const double scale = flux_scale(cfg);
  for (auto& day : out.series.days) {
    for (double& v : day.values.data) {
      if (std::isnan(v)) continue;
      v = (v / s.dT) / scale;
      if (v > kClipCeiling) {
        v = kClipCeiling;
        ++out.clipped;
      }
    }
  }
  return out;
}

MeasurementSeries denormalize(const MeasurementSeries& s, const TrmConfig& cfg) {
  MeasurementSeries out = s;
  const double scale = flux_scale(cfg);
  for (auto& day : out.days) {
    for (double& v : day.values.data) {
      if (!std::isnan(v)) v = v * scale * s.dT;
    }
  }
  return out;
}

MeasurementSeries select_interfaces(const MeasurementSeries& s, const std::vector<int>& keep) {
  std::vector<int> cols;
  for (const int k : keep) {
    const auto it = std::find(s.interfaces.begin(), s.interfaces.end(), k);
    if (it == s.interfaces.end()) {
      throw DataError("select_interfaces: interface " + std::to_string(k) + " not in series");
    }
    cols.push_back(static_cast<int>(it - s.interfaces.begin()));
  }
  MeasurementSeries out;
  out.dx = s.dx;
  out.dT = s.dT;
  out.rho_max = s.rho_max;
  out.interfaces = keep;
  for (const auto& day : s.days) {
    DayBlock nd;
    nd.day_id = day.day_id;
    nd.start_timestamp = day.start_timestamp;
    nd.values = Matrix(day.values.rows, static_cast<int>(cols.size()));
    for (int r = 0; r < day.values.rows; ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        nd.values(r, static_cast<int>(c)) = day.values(r, cols[c]);
      }
    }
    out.days.push_back(std::move(nd));
  }
  return out;
}

std::vector<WindowExample> window_examples(const MeasurementSeries& s, int n_past, int n_future,
                                           int stride, std::vector<WindowRef>* refs) {
  if (n_past < 1 || n_future < 1 || stride < 1) {
    throw ConfigError("window_examples: n_past, n_future, stride must be positive");
  }
  const int len = n_past + n_future;
  std::vector<WindowExample> out;
  for (std::size_t d = 0; d < s.days.size(); ++d) {
    const Matrix& v = s.days[d].values;
    for (int start = 0; start + len <= v.rows; start += stride) {
      WindowExample ex;
      ex.past = Matrix(n_past, v.cols);
      ex.target = Matrix(len, v.cols);
      for (int r = 0; r < len; ++r) {
        for (int c = 0; c < v.cols; ++c) {
          const double x = v(start + r, c);
          if (std::isnan(x)) {
            throw DataError("window_examples: missing value in day " + s.days[d].day_id +
                            " (interpolate first)");
          }
          if (!(x >= 0.0 && x < 0.5)) {
            throw DataError("window_examples: value out of [0, 1/2) in day " + s.days[d].day_id +
                            " (normalize first)");
          }
          ex.target(r, c) = x;
          if (r < n_past) ex.past(r, c) = x;
        }
      }
      out.push_back(std::move(ex));
      if (refs != nullptr) refs->push_back({static_cast<int>(d), start});
    }
  }
  return out;
}

void SynthConfig::validate() const {
  geometry.validate();
  trm.validate();
  if (geometry.dx != trm.dx) throw ConfigError("synth: geometry.dx and trm.dx disagree");
  if (n_days < 1 || steps_per_day < 2) throw ConfigError("synth: need n_days >= 1, steps_per_day >= 2");
  if (spatial_modes < 1) throw ConfigError("synth: spatial_modes must be >= 1");
  if (!(temporal_period_steps > 0.0)) throw ConfigError("synth: temporal period must be positive");
  if (noise_std < 0.0) throw ConfigError("synth: noise_std must be >= 0");
  constexpr double eps = 1e-3;
  if (!(rate_amplitude >= 0.0) || rate_mean - rate_amplitude < eps ||
      rate_mean + rate_amplitude > 0.5 - eps) {
    throw ConfigError("synth: invalid amplitude bounds (rates must stay in (" +
                      std::to_string(eps) + ", 1/2 - " + std::to_string(eps) + "))");
  }
}

SynthResult synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const int ni = cfg.geometry.n_interfaces;
  const int ns = cfg.geometry.n_cells;
  const int T = cfg.steps_per_day;
  const std::vector<int> obs = cfg.geometry.observed_indices();
  const long base_day = days_from_civil(2006, 2, 1);
  constexpr int start_sec = 6 * 3600;

  SynthResult res;
  res.observations.dx = cfg.geometry.dx;
  res.observations.dT = cfg.trm.dT;
  res.observations.rho_max = cfg.trm.rho_max;
  res.observations.interfaces = obs;

  // Pass 1: rate fields and noiseless rollouts, one substream per day.
  for (int d = 0; d < cfg.n_days; ++d) {
    Rng rng(derive_seed(cfg.seed, "synth") ^ static_cast<std::uint64_t>(d));

    struct Mode {
      double w, phase, spatial;
    };
    std::vector<Mode> modes;
    double w_total = 0.0;
    for (int k = 0; k < cfg.spatial_modes; ++k) {
      Mode m;
      m.w = rng.uniform(-1.0, 1.0);
      m.phase = rng.uniform(0.0, kTwoPi);
      m.spatial = static_cast<double>(rng.uniform_int(cfg.spatial_modes + 1));
      modes.push_back(m);
      w_total += std::abs(m.w);
    }
    if (w_total < 1e-9) w_total = 1e-9;

    Matrix rates(T, ni);
    for (int m = 0; m < T; ++m) {
      for (int j = 0; j < ni; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) {
          g += modes[k].w * std::sin(kTwoPi * static_cast<double>(k + 1) * m /
                                         cfg.temporal_period_steps +
                                     kTwoPi * modes[k].spatial * j / ni + modes[k].phase);
        }
        rates(m, j) = cfg.rate_mean + cfg.rate_amplitude * (g / w_total);
      }
    }

    const double amp = rng.uniform(0.0, 0.3);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double offset = rng.uniform(-0.15, 0.15);
    DensityState u;
    u.u.resize(static_cast<std::size_t>(ns));
    for (int j = 0; j < ns; ++j) {
      u.u[static_cast<std::size_t>(j)] = 0.5 + offset + amp * std::sin(kTwoPi * j / ns + phase);
    }

    Matrix densities(T, ns);
    Matrix fluxes(T, ni);
    for (int m = 0; m < T; ++m) {
      const RateVector c{rates.row(m)};
      densities.set_row(m, u.u);
      fluxes.set_row(m, trm_fluxes(u, c).f);
      if (m + 1 < T) {
        for (int sub = 0; sub < cfg.trm.p_t; ++sub) u = trm_step(u, c).first;
      }
    }

    res.truth.rates.push_back(std::move(rates));
    res.truth.densities.push_back(std::move(densities));
    res.truth.fluxes.push_back(std::move(fluxes));
  }

  double flux_sum = 0.0;
  long flux_n = 0;
  for (const Matrix& f : res.truth.fluxes) {
    for (int r = 0; r < f.rows; ++r) {
      for (const int j : obs) {
        flux_sum += f(r, j);
        ++flux_n;
      }
    }
  }
  res.mean_flux = flux_sum / static_cast<double>(flux_n);

  // Pass 2: noisy observations in vehicle counts.
  const double sigma = cfg.noise_std * res.mean_flux;
  const double count_scale = flux_scale(cfg.trm) * cfg.trm.dT;
  for (int d = 0; d < cfg.n_days; ++d) {
    Rng noise_rng(derive_seed(cfg.seed, "noise") ^ static_cast<std::uint64_t>(d));
    DayBlock day;
    day.day_id = format_timestamp(base_day + d, 0).substr(0, 10);
    day.start_timestamp = format_timestamp(base_day + d, start_sec);
    day.values = Matrix(T, static_cast<int>(obs.size()));
    const Matrix& f = res.truth.fluxes[static_cast<std::size_t>(d)];
    for (int m = 0; m < T; ++m) {
      for (std::size_t c = 0; c < obs.size(); ++c) {
        double v = f(m, obs[c]) + sigma * noise_rng.normal();
        if (v < 0.0) {
          v = 0.0;
          ++res.truncated;
        } else if (v > kClipCeiling) {
          v = kClipCeiling;
          ++res.truncated;
        }
        day.values(m, static_cast<int>(c)) = v * count_scale;
      }
    }
    res.observations.days.push_back(std::move(day));
  }
  return res;
}

std::string ground_truth_to_csv(const SynthConfig& cfg, const SynthResult& r) {
  const int ni = cfg.geometry.n_interfaces;
  const int ns = cfg.geometry.n_cells;
  std::string out;
  append_fmt(out, "dx_meters=%.17g", cfg.geometry.dx);
  append_fmt(out, ",dt_seconds=%.17g", cfg.trm.dT);
  append_fmt(out, ",rho_max_veh_per_m=%.17g", cfg.trm.rho_max);
  out += "\ntimestamp";
  for (int j = 0; j < ni; ++j) out += ",rate_" + std::to_string(j);
  for (int j = 0; j < ns; ++j) out += ",density_" + std::to_string(j);
  for (int j = 0; j < ni; ++j) out += ",flux_" + std::to_string(j);
  out += '\n';
  for (std::size_t d = 0; d < r.truth.rates.size(); ++d) {
    const DayBlock& day = r.observations.days[d];
    long day_num;
    int sec0;
    parse_timestamp(day.start_timestamp, day_num, sec0);
    const Matrix& rates = r.truth.rates[d];
    const Matrix& dens = r.truth.densities[d];
    const Matrix& flux = r.truth.fluxes[d];
    for (int m = 0; m < rates.rows; ++m) {
      out += format_timestamp(day_num, sec0 + m * static_cast<int>(cfg.trm.dT));
      for (int j = 0; j < ni; ++j) append_fmt(out, ",%.17g", rates(m, j));
      for (int j = 0; j < ns; ++j) append_fmt(out, ",%.17g", dens(m, j));
      for (int j = 0; j < ni; ++j) append_fmt(out, ",%.17g", flux(m, j));
      out += '\n';
    }
  }
  return out;
}

void save_ground_truth(const std::string& path, const SynthConfig& cfg, const SynthResult& r) {
  atomic_write_file(path, ground_truth_to_csv(cfg, r));
}

GroundTruth load_ground_truth(const std::string& path, int n_interfaces,
                              std::vector<std::string>* day_ids) {
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line)) throw DataError(path + ": empty ground truth file");
  if (!std::getline(is, line)) throw DataError(path + ": missing column header");
  const int ni = n_interfaces;
  const int ns = ni - 1;
  const int n_cols = 1 + ni + ns + ni;
  if (static_cast<int>(split_line(line, ',').size()) != n_cols) {
    throw DataError(path + ": column count does not match n_interfaces");
  }

  GroundTruth gt;
  std::vector<Vec> rows;
  std::string cur_day;
  auto flush = [&]() {
    if (rows.empty()) return;
    Matrix rates(static_cast<int>(rows.size()), ni);
    Matrix dens(static_cast<int>(rows.size()), ns);
    Matrix flux(static_cast<int>(rows.size()), ni);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int j = 0; j < ni; ++j) rates(static_cast<int>(r), j) = rows[r][static_cast<std::size_t>(j)];
      for (int j = 0; j < ns; ++j) dens(static_cast<int>(r), j) = rows[r][static_cast<std::size_t>(ni + j)];
      for (int j = 0; j < ni; ++j) flux(static_cast<int>(r), j) = rows[r][static_cast<std::size_t>(ni + ns + j)];
    }
    gt.rates.push_back(std::move(rates));
    gt.densities.push_back(std::move(dens));
    gt.fluxes.push_back(std::move(flux));
    if (day_ids != nullptr) day_ids->push_back(cur_day);
    rows.clear();
  };

  int line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line, ',');
    if (static_cast<int>(fields.size()) != n_cols) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                      " fields");
    }
    const std::string day_id = fields[0].substr(0, 10);
    if (day_id != cur_day) {
      flush();
      cur_day = day_id;
    }
    Vec row(static_cast<std::size_t>(n_cols - 1));
    for (int c = 1; c < n_cols; ++c) {
      row[static_cast<std::size_t>(c - 1)] = parse_double(fields[static_cast<std::size_t>(c)], line_no, "value");
    }
    rows.push_back(std::move(row));
  }
  flush();
  return gt;
}

DaySplit split_by_days(const MeasurementSeries& s, const std::array<double, 3>& fractions) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split_by_days: fractions must sum to 1");
  const int n = static_cast<int>(s.days.size());
  int n_train = static_cast<int>(std::floor(fractions[0] * n));
  int n_valid = static_cast<int>(std::floor(fractions[1] * n));
  if (fractions[0] > 0.0) n_train = std::max(n_train, 1);
  if (fractions[1] > 0.0) n_valid = std::max(n_valid, 1);
  const int n_test = n - n_train - n_valid;
  if (n_train < 1 || n_valid < 1 || n_test < 1) {
    throw DataError("split_by_days: too few days (" + std::to_string(n) + ") for the split");
  }

  auto take = [&](int from, int count) {
    MeasurementSeries out;
    out.dx = s.dx;
    out.dT = s.dT;
    out.rho_max = s.rho_max;
    out.interfaces = s.interfaces;
    for (int d = from; d < from + count; ++d) out.days.push_back(s.days[static_cast<std::size_t>(d)]);
    return out;
  };

  DaySplit split;
  split.train = take(0, n_train);
  split.valid = take(n_train, n_valid);
  split.test = take(n_train + n_valid, n_test);
  split.n_train_days = n_train;
  split.n_valid_days = n_valid;
  split.n_test_days = n_test;
  return split;
}

}  // namespace trm
