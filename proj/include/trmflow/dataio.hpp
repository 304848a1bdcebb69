#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trmflow/linalg.hpp"
#include "trmflow/pipeline.hpp"
#include "trmflow/trm_core.hpp"

namespace trm {

// One recording day; rows are measurement periods, columns follow the
// series' interface list. NaN marks a missing measurement.
struct DayBlock {
  std::string day_id;           // YYYY-MM-DD
  std::string start_timestamp;  // ISO-8601, first row's timestamp
  Matrix values;
};

struct MeasurementSeries {
  double dx = 0.0;
  double dT = 0.0;
  double rho_max = 0.0;
  std::vector<int> interfaces;  // strictly increasing interface indices
  std::vector<DayBlock> days;

  int n_columns() const { return static_cast<int>(interfaces.size()); }
  long total_rows() const;
};

// CSV layout: line 1 `dx_meters=..,dt_seconds=..,rho_max_veh_per_m=..`,
// line 2 `timestamp,<interface indices>`, then one row per measurement
// period (vehicle counts; empty field = missing). Rows sharing a calendar
// date form one day block.
MeasurementSeries load_csv(const std::string& path);
std::string series_to_csv(const MeasurementSeries& s);
void save_csv(const std::string& path, const MeasurementSeries& s);

// Fills missing values by linear interpolation in interface position;
// missing boundary values copy the nearest observed interface.
MeasurementSeries interpolate_missing(const MeasurementSeries& s);

struct NormalizeResult {
  MeasurementSeries series;  // dimensionless flux values
  long clipped = 0;          // entries clipped at 1/2 - 1e-6
};

// counts per period -> dimensionless flux: (count / dT) / flux_scale.
NormalizeResult normalize(const MeasurementSeries& s, const TrmConfig& cfg);
MeasurementSeries denormalize(const MeasurementSeries& s, const TrmConfig& cfg);

MeasurementSeries select_interfaces(const MeasurementSeries& s, const std::vector<int>& keep);

struct WindowRef {
  int day = 0;
  int start = 0;
};

// Sliding windows over a normalized series; windows never cross day
// boundaries. `refs`, when given, receives the (day, start row) of each
// produced example.
std::vector<WindowExample> window_examples(const MeasurementSeries& s, int n_past, int n_future,
                                           int stride = 1, std::vector<WindowRef>* refs = nullptr);

struct SynthConfig {
  RoadGeometry geometry;
  TrmConfig trm;
  int n_days = 12;
  int steps_per_day = 300;  // measurement periods per day (5 h at 60 s)
  double rate_mean = 0.25;
  double rate_amplitude = 0.15;
  int spatial_modes = 2;
  double temporal_period_steps = 120.0;
  double noise_std = 0.05;  // noise sigma as a fraction of the mean flux
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  std::vector<Matrix> rates;      // per day, T x N_i
  std::vector<Matrix> densities;  // per day, T x N_s (state at each period start)
  std::vector<Matrix> fluxes;     // per day, T x N_i noiseless dimensionless flux
};

struct SynthResult {
  MeasurementSeries observations;  // noisy counts at the observed interfaces
  GroundTruth truth;
  double mean_flux = 0.0;  // mean noiseless flux over observed interfaces
  long truncated = 0;      // noisy values pushed back into [0, 1/2)
};

// Smooth space-time rate field + TRM rollout per day; observations are the
// noiseless period-start fluxes at observed interfaces plus truncated
// Gaussian noise. Deterministic per seed with per-day substreams.
SynthResult synth_generate(const SynthConfig& cfg);

// Ground-truth sidecar: same two header lines as the data CSV (line 2 lists
// rate_j, density_j, flux_j columns) and one row per measurement period.
std::string ground_truth_to_csv(const SynthConfig& cfg, const SynthResult& r);
void save_ground_truth(const std::string& path, const SynthConfig& cfg, const SynthResult& r);
GroundTruth load_ground_truth(const std::string& path, int n_interfaces,
                              std::vector<std::string>* day_ids = nullptr);

struct DaySplit {
  MeasurementSeries train;
  MeasurementSeries valid;
  MeasurementSeries test;
  int n_train_days = 0, n_valid_days = 0, n_test_days = 0;
};

// Contiguous day-level split; every split receives at least one day.
DaySplit split_by_days(const MeasurementSeries& s, const std::array<double, 3>& fractions);

// Calendar helpers (proleptic Gregorian).
long days_from_civil(int y, int m, int d);
void civil_from_days(long z, int& y, int& m, int& d);
std::string format_timestamp(long day_number, int second_of_day);
bool parse_timestamp(const std::string& ts, long& day_number, int& second_of_day);

}  // namespace trm
