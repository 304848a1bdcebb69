#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trmflow/dataio.hpp"
#include "trmflow/metrics.hpp"
#include "trmflow/pipeline.hpp"

namespace trm {

// Everything a run needs, loaded from one JSON document. Flags may override
// only the seed and the paths; all numeric parameters live here so that an
// experiment is archivable as its config file.
struct ExperimentConfig {
  // geometry
  int n_interfaces = 11;
  double dx = 150.0;
  std::vector<int> observed = {0, 2, 6, 10};
  std::vector<int> hidden = {3, 7};

  // trm
  double rho_max = 0.2;
  double dT = 60.0;
  double v_max = 130.0 / 3.6;
  int p_t = 0;  // 0: smallest admissible substep count

  // pipeline
  int n_past = 10;
  int n_future = 5;
  double reg_weight = 1.0;

  // training
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 60;
  int patience = 10;
  double max_seconds = 0.0;

  // data
  std::string data_csv;          // defaults to <output_dir>/data.csv
  std::string ground_truth_csv;  // defaults to <output_dir>/ground_truth.csv for synth runs
  Vec sim_initial_density;             // optional inline rollout state for `simulate`
  std::vector<Vec> sim_rate_schedule;  // optional inline measurement-grid rate rows
  std::array<double, 3> split = {0.8, 0.1, 0.1};
  int stride = 1;
  int synth_days = 12;
  int synth_steps_per_day = 300;
  double synth_rate_mean = 0.25;
  double synth_rate_amplitude = 0.15;
  int synth_spatial_modes = 2;
  double synth_temporal_period = 120.0;
  double synth_noise_std = 0.05;

  std::vector<int> gridsearch_n_past = {5, 10, 15};

  std::uint64_t seed = 1;
  std::string output_dir = "out";

  std::string resolved_data_csv() const;
  std::string resolved_ground_truth_csv() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

PipelineConfig make_pipeline_config(const ExperimentConfig& cfg);
SynthConfig make_synth_config(const ExperimentConfig& cfg);
TrainConfig make_train_config(const ExperimentConfig& cfg);

// Executes one subcommand (synth, simulate, train, predict, evaluate,
// gridsearch-np, inspect-params). Throws ConfigError / DataError /
// NumericalError; the CLI maps these to exit codes 2 / 3 / 4.
void run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& out);

}  // namespace trm
