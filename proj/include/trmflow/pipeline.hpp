#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trmflow/autodiff.hpp"
#include "trmflow/neural.hpp"
#include "trmflow/trm_core.hpp"

namespace trm {

struct PipelineConfig {
  RoadGeometry geometry;
  TrmConfig trm;
  int n_past = 0;
  int n_future = 0;
  double reg_weight = 1.0;

  int n_substep_rows() const { return (n_past + n_future - 1) * trm.p_t + 1; }
  void validate() const;
};

// Trainable blocks in canonical flattening order.
struct PipelineParams {
  MlpParams mlp1;        // first observation -> LSTM initial state (c0, h0)
  LstmParams extractor;  // observations -> reaction rates at past steps
  MlpParams mlp2;        // first observation -> initial density
  SrnnParams predictor;  // zero-input extrapolation of the rates

  long param_count() const;
};

PipelineParams init_params(const PipelineConfig& cfg, std::uint64_t seed);
Vec flatten(const PipelineParams& p);
void unflatten(PipelineParams& p, const Vec& theta);

// One training pair: `past` holds the N_p observation rows fed to the
// network, `target` the N_p + N_f rows it should reproduce and predict.
// Columns are the observed interfaces in ascending index order.
struct WindowExample {
  Matrix past;
  Matrix target;

  void validate(int n_past, int n_observed) const;
};

struct PredictionOutput {
  Matrix rates;       // (N_p+N_f) x N_i reaction rates on the measurement grid
  Matrix densities;   // substep trajectory (post-step states)
  Matrix fluxes_sub;  // substep fluxes, ((N_p+N_f-1)*P_t + 1) x N_i
  Matrix smoothed;    // first N_p measurement-grid flux rows
  Matrix predicted;   // last N_f measurement-grid flux rows
};

Matrix extract_rates(const PipelineParams& p, const PipelineConfig& cfg, const Matrix& past,
                     LstmState* final_state = nullptr);
Matrix predict_rates(const PipelineParams& p, const PipelineConfig& cfg,
                     const LstmState& final_state, int n_future);
DensityState init_density(const PipelineParams& p, const PipelineConfig& cfg,
                          const Vec& first_obs);
Matrix upsample_rates(const Matrix& rates, int p_t);
PredictionOutput forward(const PipelineParams& p, const PipelineConfig& cfg, const Matrix& past);

Matrix baseline_last_value(const Matrix& past, int n_future);

double loss(const PipelineParams& p, const PipelineConfig& cfg,
            std::span<const WindowExample> batch);

// Records one example's loss on the tape; binds parameters at the canonical
// offsets of `theta`. Used by training and by gradient checks.
Var build_example_loss(Tape& tape, const PipelineConfig& cfg, const PipelineParams& shapes,
                       const Vec& theta, const WindowExample& ex);

struct LossGrad {
  double value = 0.0;
  GradientVector grad;
};
LossGrad loss_and_grad(const PipelineConfig& cfg, const PipelineParams& shapes, const Vec& theta,
                       std::span<const WindowExample> batch);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  double max_seconds = 0.0;  // wall-clock budget; 0 disables the cap
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_rmse = 0.0;
  double valid_mape = 0.0;
};

// Full optimizer state; saving and reloading it resumes training with
// bit-identical results (per-epoch shuffles are derived from seed + epoch,
// so no RNG state needs to persist).
struct Checkpoint {
  std::uint64_t seed = 0;
  int epoch = 0;  // next epoch to run
  long adam_t = 0;
  double best_valid_rmse = 0.0;
  int epochs_since_improve = 0;
  Vec theta;
  Vec adam_m;
  Vec adam_v;
  Vec best_theta;
};

struct TrainResult {
  PipelineParams params;  // best-validation parameters
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_valid_rmse = 0.0;
  Checkpoint state;  // final optimizer state, resumable
  bool stopped_early = false;
  bool hit_time_cap = false;
};

TrainResult train(const PipelineConfig& cfg, std::span<const WindowExample> train_set,
                  std::span<const WindowExample> valid_set, const TrainConfig& tc,
                  const Checkpoint* resume = nullptr);

void save_checkpoint(const std::string& path, const PipelineConfig& cfg, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path, const PipelineConfig& cfg);

void save_params(const std::string& path, std::uint64_t seed, const PipelineParams& p);

std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace trm
