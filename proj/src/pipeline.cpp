#include "trmflow/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "trmflow/fsutil.hpp"
#include "trmflow/metrics.hpp"
#include "trmflow/rng.hpp"

namespace trm {

void PipelineConfig::validate() const {
  geometry.validate();
  trm.validate();
  if (geometry.dx != trm.dx) throw ConfigError("pipeline: geometry.dx and trm.dx disagree");
  if (n_past < 1) throw ConfigError("pipeline: n_past must be >= 1");
  if (n_future < 1) throw ConfigError("pipeline: n_future must be >= 1");
  if (reg_weight < 0.0) throw ConfigError("pipeline: reg_weight must be >= 0");
}

long PipelineParams::param_count() const {
  return mlp1.param_count() + extractor.param_count() + mlp2.param_count() +
         predictor.param_count();
}

PipelineParams init_params(const PipelineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int ni = cfg.geometry.n_interfaces;
  const int no = cfg.geometry.n_observed();
  Rng rng(derive_seed(seed, "init"));
  PipelineParams p;
  p.mlp1 = make_mlp2(no, 2 * ni, 2 * ni, rng);
  p.extractor = make_lstm(ni, no, rng);
  p.mlp2 = make_mlp2(no, ni - 1, ni - 1, rng);
  p.predictor = make_srnn(ni, ni, ni, rng);
  return p;
}

Vec flatten(const PipelineParams& p) {
  Vec theta;
  theta.reserve(static_cast<std::size_t>(p.param_count()));
  append_flat(p.mlp1, theta);
  append_flat(p.extractor, theta);
  append_flat(p.mlp2, theta);
  append_flat(p.predictor, theta);
  return theta;
}

void unflatten(PipelineParams& p, const Vec& theta) {
  if (static_cast<long>(theta.size()) != p.param_count()) {
    throw DimensionError("unflatten: theta length does not match parameter count");
  }
  int offset = 0;
  offset = read_flat(p.mlp1, theta, offset);
  offset = read_flat(p.extractor, theta, offset);
  offset = read_flat(p.mlp2, theta, offset);
  read_flat(p.predictor, theta, offset);
}

void WindowExample::validate(int n_past, int n_observed) const {
  if (past.rows != n_past || past.cols != n_observed) {
    throw DimensionError("window: past must be n_past x n_observed");
  }
  if (target.rows <= n_past || target.cols != n_observed) {
    throw DimensionError("window: target must be (n_past + n_future) x n_observed");
  }
  for (int r = 0; r < n_past; ++r) {
    for (int c = 0; c < n_observed; ++c) {
      if (past(r, c) != target(r, c)) throw DataError("window: prefix rows must equal past");
    }
  }
  for (const double x : target.data) {
    if (!(x >= 0.0 && x < 0.5)) throw DataError("window: entries must lie in [0, 1/2)");
  }
}

Matrix extract_rates(const PipelineParams& p, const PipelineConfig& cfg, const Matrix& past,
                     LstmState* final_state) {
  const int ni = cfg.geometry.n_interfaces;
  if (past.rows != cfg.n_past || past.cols != cfg.geometry.n_observed()) {
    throw DimensionError("extract_rates: past must be n_past x n_observed");
  }
  const Vec mlp1_out = mlp_forward(p.mlp1, past.row(0));
  LstmState state;
  state.c.assign(mlp1_out.begin(), mlp1_out.begin() + ni);
  state.h.assign(mlp1_out.begin() + ni, mlp1_out.end());

  Matrix rates(cfg.n_past, ni);
  for (int k = 0; k < cfg.n_past; ++k) {
    state = lstm_cell(p.extractor, state, past.row(k));
    for (int j = 0; j < ni; ++j) rates(k, j) = state.h[static_cast<std::size_t>(j)] * 0.5;
  }
  if (final_state != nullptr) *final_state = state;
  return rates;
}

Matrix predict_rates(const PipelineParams& p, const PipelineConfig& cfg,
                     const LstmState& final_state, int n_future) {
  const int ni = cfg.geometry.n_interfaces;
  Matrix rates(n_future, ni);
  Vec s = final_state.h;
  const Vec zero(static_cast<std::size_t>(ni), 0.0);
  for (int l = 0; l < n_future; ++l) {
    auto [next, y] = srnn_cell(p.predictor, s, zero);
    s = std::move(next);
    for (int j = 0; j < ni; ++j) rates(l, j) = y[static_cast<std::size_t>(j)] * 0.5;
  }
  return rates;
}

DensityState init_density(const PipelineParams& p, const PipelineConfig& cfg,
                          const Vec& first_obs) {
  if (static_cast<int>(first_obs.size()) != cfg.geometry.n_observed()) {
    throw DimensionError("init_density: observation size mismatch");
  }
  return DensityState{mlp_forward(p.mlp2, first_obs)};
}

Matrix upsample_rates(const Matrix& rates, int p_t) {
  if (p_t < 1) throw ConfigError("upsample_rates: p_t must be positive");
  const int n_sub = (rates.rows - 1) * p_t + 1;
  Matrix out(n_sub, rates.cols);
  for (int k = 0; k < n_sub; ++k) {
    for (int j = 0; j < rates.cols; ++j) out(k, j) = rates(k / p_t, j);
  }
  return out;
}

PredictionOutput forward(const PipelineParams& p, const PipelineConfig& cfg, const Matrix& past) {
  const int ni = cfg.geometry.n_interfaces;
  const int n_rows = cfg.n_past + cfg.n_future;

  PredictionOutput out;
  LstmState final_state;
  const Matrix past_rates = extract_rates(p, cfg, past, &final_state);
  const Matrix future_rates = predict_rates(p, cfg, final_state, cfg.n_future);
  out.rates = Matrix(n_rows, ni);
  for (int k = 0; k < cfg.n_past; ++k) out.rates.set_row(k, past_rates.row(k));
  for (int l = 0; l < cfg.n_future; ++l) out.rates.set_row(cfg.n_past + l, future_rates.row(l));

  const Matrix sub = upsample_rates(out.rates, cfg.trm.p_t);
  std::vector<RateVector> schedule;
  schedule.reserve(static_cast<std::size_t>(sub.rows));
  for (int k = 0; k < sub.rows; ++k) schedule.push_back(RateVector{sub.row(k)});

  const DensityState u0 = init_density(p, cfg, past.row(0));
  const Rollout roll = trm_rollout(u0, schedule);

  out.fluxes_sub = Matrix(sub.rows, ni);
  out.densities = Matrix(sub.rows, cfg.geometry.n_cells);
  for (int k = 0; k < sub.rows; ++k) {
    out.fluxes_sub.set_row(k, roll.fluxes[static_cast<std::size_t>(k)].f);
    out.densities.set_row(k, roll.densities[static_cast<std::size_t>(k)].u);
  }

  out.smoothed = Matrix(cfg.n_past, ni);
  out.predicted = Matrix(cfg.n_future, ni);
  for (int m = 0; m < n_rows; ++m) {
    const Vec row = out.fluxes_sub.row(m * cfg.trm.p_t);
    if (m < cfg.n_past) {
      out.smoothed.set_row(m, row);
    } else {
      out.predicted.set_row(m - cfg.n_past, row);
    }
  }
  return out;
}

Matrix baseline_last_value(const Matrix& past, int n_future) {
  if (past.rows < 1) throw DimensionError("baseline_last_value: need at least one past row");
  Matrix out(n_future, past.cols);
  const Vec last = past.row(past.rows - 1);
  for (int r = 0; r < n_future; ++r) out.set_row(r, last);
  return out;
}

namespace {

// Shared accumulation order between the plain and taped loss paths: per-row
// sums of squared differences over observed columns, rows added in order.
double example_loss_plain(const PipelineParams& p, const PipelineConfig& cfg,
                          const WindowExample& ex) {
  const std::vector<int> obs = cfg.geometry.observed_indices();
  const PredictionOutput out = forward(p, cfg, ex.past);

  double past_acc = 0.0;
  for (int k = 0; k < cfg.n_past; ++k) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < obs.size(); ++c) {
      const double d = out.smoothed(k, obs[c]) - ex.target(k, static_cast<int>(c));
      row_sum += d * d;
    }
    past_acc += row_sum;
  }
  double future_acc = 0.0;
  for (int l = 0; l < cfg.n_future; ++l) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < obs.size(); ++c) {
      const double d = out.predicted(l, obs[c]) - ex.target(cfg.n_past + l, static_cast<int>(c));
      row_sum += d * d;
    }
    future_acc += row_sum;
  }

  double reg_acc = 0.0;
  for (int r = 0; r < out.rates.rows; ++r) {
    double row_sum = 0.0;
    for (int i = 0; i + 1 < out.rates.cols; ++i) {
      const double d = out.rates(r, i + 1) - out.rates(r, i);
      row_sum += d * d;
    }
    reg_acc += row_sum;
  }
  const double reg = reg_acc / static_cast<double>(cfg.geometry.n_cells) /
                     static_cast<double>(cfg.n_past + cfg.n_future);

  return past_acc / static_cast<double>(cfg.n_past) +
         future_acc / static_cast<double>(cfg.n_future) + cfg.reg_weight * reg;
}

}  // namespace

double loss(const PipelineParams& p, const PipelineConfig& cfg,
            std::span<const WindowExample> batch) {
  if (batch.empty()) throw DataError("loss: empty batch");
  double total = 0.0;
  for (const WindowExample& ex : batch) total += example_loss_plain(p, cfg, ex);
  return total / static_cast<double>(batch.size());
}

Var build_example_loss(Tape& tape, const PipelineConfig& cfg, const PipelineParams& shapes,
                       const Vec& theta, const WindowExample& ex) {
  const int ni = cfg.geometry.n_interfaces;
  const int ns = cfg.geometry.n_cells;
  const int p_t = cfg.trm.p_t;
  const std::vector<int> obs = cfg.geometry.observed_indices();

  int offset = 0;
  const TapedMlp mlp1 = bind_params(tape, shapes.mlp1, offset, theta);
  const TapedLstm extractor = bind_params(tape, shapes.extractor, offset, theta);
  const TapedMlp mlp2 = bind_params(tape, shapes.mlp2, offset, theta);
  const TapedSrnn predictor = bind_params(tape, shapes.predictor, offset, theta);

  std::vector<Var> past_rows;
  past_rows.reserve(static_cast<std::size_t>(cfg.n_past));
  for (int k = 0; k < cfg.n_past; ++k) past_rows.push_back(tape.constant(ex.past.row(k)));

  const Var half = tape.constant(0.5);

  // Extractor: MLP1 seeds the LSTM state, each step's h becomes a rate row.
  const Var mlp1_out = taped_forward(tape, mlp1, past_rows[0]);
  TapedLstmState state{tape.slice(mlp1_out, 0, ni), tape.slice(mlp1_out, ni, ni)};
  std::vector<Var> rate_rows;
  rate_rows.reserve(static_cast<std::size_t>(cfg.n_past + cfg.n_future));
  for (int k = 0; k < cfg.n_past; ++k) {
    state = taped_cell(tape, extractor, state, past_rows[static_cast<std::size_t>(k)]);
    rate_rows.push_back(tape.mul(state.h, half));
  }

  // Predictor: zero-input SRNN started from the LSTM's h.
  const Var zero_in = tape.constant(Vec(static_cast<std::size_t>(ni), 0.0));
  Var srnn_state = state.h;
  for (int l = 0; l < cfg.n_future; ++l) {
    auto [next, y] = taped_cell(tape, predictor, srnn_state, zero_in);
    srnn_state = next;
    rate_rows.push_back(tape.mul(y, half));
  }

  // TRM rollout at substep resolution; rates are piecewise constant over
  // each measurement period, so substep k reuses rate row k / p_t.
  const Var one = tape.constant(Vec{1.0});
  const Var ones_cells = tape.constant(Vec(static_cast<std::size_t>(ns), 1.0));
  Var u = taped_forward(tape, mlp2, past_rows[0]);
  const int n_sub = cfg.n_substep_rows();
  std::vector<Var> sampled_flux;
  sampled_flux.reserve(static_cast<std::size_t>(cfg.n_past + cfg.n_future));
  for (int k = 0; k < n_sub; ++k) {
    const Var c = rate_rows[static_cast<std::size_t>(k / p_t)];
    const Var upwind = tape.concat(one, u);
    const Var room = tape.concat(tape.sub(ones_cells, u), one);
    const Var f = tape.mul(tape.mul(c, upwind), room);
    if (k % p_t == 0) sampled_flux.push_back(f);
    if (k + 1 < n_sub) {
      u = tape.add(u, tape.sub(tape.slice(f, 0, ns), tape.slice(f, 1, ns)));
    }
  }

  // Data terms over observed interfaces, past and future separately.
  Var past_acc = tape.constant(0.0);
  for (int k = 0; k < cfg.n_past; ++k) {
    Vec target_row(obs.size());
    for (std::size_t c = 0; c < obs.size(); ++c) target_row[c] = ex.target(k, static_cast<int>(c));
    const Var d = tape.sub(tape.gather(sampled_flux[static_cast<std::size_t>(k)], obs),
                           tape.constant(target_row));
    past_acc = tape.add(past_acc, tape.sum(tape.square(d)));
  }
  Var future_acc = tape.constant(0.0);
  for (int l = 0; l < cfg.n_future; ++l) {
    Vec target_row(obs.size());
    for (std::size_t c = 0; c < obs.size(); ++c) {
      target_row[c] = ex.target(cfg.n_past + l, static_cast<int>(c));
    }
    const Var d =
        tape.sub(tape.gather(sampled_flux[static_cast<std::size_t>(cfg.n_past + l)], obs),
                 tape.constant(target_row));
    future_acc = tape.add(future_acc, tape.sum(tape.square(d)));
  }

  // Spatial-variation regularizer over the measurement-grid rate rows.
  Var reg_acc = tape.constant(0.0);
  for (const Var& row : rate_rows) {
    const Var d = tape.sub(tape.slice(row, 1, ni - 1), tape.slice(row, 0, ni - 1));
    reg_acc = tape.add(reg_acc, tape.sum(tape.square(d)));
  }
  const Var reg = tape.div(tape.div(reg_acc, tape.constant(static_cast<double>(ns))),
                           tape.constant(static_cast<double>(cfg.n_past + cfg.n_future)));

  return tape.add(tape.add(tape.div(past_acc, tape.constant(static_cast<double>(cfg.n_past))),
                           tape.div(future_acc, tape.constant(static_cast<double>(cfg.n_future)))),
                  tape.mul(tape.constant(cfg.reg_weight), reg));
}

LossGrad loss_and_grad(const PipelineConfig& cfg, const PipelineParams& shapes, const Vec& theta,
                       std::span<const WindowExample> batch) {
  if (batch.empty()) throw DataError("loss_and_grad: empty batch");
  LossGrad out;
  out.grad.assign(theta.size(), 0.0);
  for (const WindowExample& ex : batch) {
    Tape tape(static_cast<int>(theta.size()));
    const Var l = build_example_loss(tape, cfg, shapes, theta, ex);
    out.value += tape.scalar(l);
    const GradientVector g = tape.backward(l);
    for (std::size_t i = 0; i < g.size(); ++i) out.grad[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.value *= inv;
  for (double& g : out.grad) g *= inv;
  return out;
}

namespace {

struct ValidStats {
  double loss = 0.0;
  double rmse_value = 0.0;
  double mape_percent = 0.0;
};

ValidStats evaluate_validation(const PipelineParams& p, const PipelineConfig& cfg,
                               std::span<const WindowExample> valid_set) {
  const std::vector<int> obs = cfg.geometry.observed_indices();
  ValidStats v;
  v.loss = loss(p, cfg, valid_set);
  Matrix pred(static_cast<int>(valid_set.size()) * cfg.n_future, static_cast<int>(obs.size()));
  Matrix truth(pred.rows, pred.cols);
  int r = 0;
  for (const WindowExample& ex : valid_set) {
    const PredictionOutput out = forward(p, cfg, ex.past);
    for (int l = 0; l < cfg.n_future; ++l, ++r) {
      for (std::size_t c = 0; c < obs.size(); ++c) {
        pred(r, static_cast<int>(c)) = out.predicted(l, obs[c]);
        truth(r, static_cast<int>(c)) = ex.target(cfg.n_past + l, static_cast<int>(c));
      }
    }
  }
  v.rmse_value = rmse(pred, truth);
  v.mape_percent = mape(pred, truth).percent;
  return v;
}

}  // namespace

TrainResult train(const PipelineConfig& cfg, std::span<const WindowExample> train_set,
                  std::span<const WindowExample> valid_set, const TrainConfig& tc,
                  const Checkpoint* resume) {
  cfg.validate();
  if (train_set.empty() || valid_set.empty()) throw DataError("train: empty dataset");
  const int no = cfg.geometry.n_observed();
  for (const WindowExample& ex : train_set) ex.validate(cfg.n_past, no);
  for (const WindowExample& ex : valid_set) ex.validate(cfg.n_past, no);

  PipelineParams shapes = init_params(cfg, tc.seed);
  const std::size_t n_theta = static_cast<std::size_t>(shapes.param_count());

  Checkpoint st;
  if (resume != nullptr) {
    st = *resume;
    if (st.theta.size() != n_theta) throw ConfigError("train: checkpoint does not match config");
  } else {
    st.seed = tc.seed;
    st.theta = flatten(shapes);
    st.adam_m.assign(n_theta, 0.0);
    st.adam_v.assign(n_theta, 0.0);
    st.best_valid_rmse = std::numeric_limits<double>::infinity();
    st.best_theta = st.theta;
  }

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  TrainResult result;
  result.best_valid_rmse = st.best_valid_rmse;

  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = st.epoch; epoch < tc.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(tc.seed, "shuffle") ^ static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      std::vector<WindowExample> examples;
      examples.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        examples.push_back(train_set[static_cast<std::size_t>(order[i])]);
      }

      const LossGrad lg = loss_and_grad(cfg, shapes, st.theta, examples);
      if (!std::isfinite(lg.value)) {
        throw NumericalError("train: loss diverged (epoch " + std::to_string(epoch) + ", batch at " +
                             std::to_string(start) + ", loss " + std::to_string(lg.value) + ")");
      }
      epoch_loss += lg.value * static_cast<double>(examples.size());

      ++st.adam_t;
      const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(st.adam_t));
      const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(st.adam_t));
      for (std::size_t i = 0; i < n_theta; ++i) {
        st.adam_m[i] = tc.beta1 * st.adam_m[i] + (1.0 - tc.beta1) * lg.grad[i];
        st.adam_v[i] = tc.beta2 * st.adam_v[i] + (1.0 - tc.beta2) * lg.grad[i] * lg.grad[i];
        const double m_hat = st.adam_m[i] / bc1;
        const double v_hat = st.adam_v[i] / bc2;
        st.theta[i] -= tc.learning_rate * m_hat / (std::sqrt(v_hat) + tc.epsilon);
      }
    }

    unflatten(shapes, st.theta);
    ValidStats vs;
    try {
      vs = evaluate_validation(shapes, cfg, valid_set);
    } catch (const NumericalError& e) {
      throw NumericalError("train: validation failed at epoch " + std::to_string(epoch) + ": " +
                           e.what());
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = epoch_loss / static_cast<double>(train_set.size());
    es.valid_loss = vs.loss;
    es.valid_rmse = vs.rmse_value;
    es.valid_mape = vs.mape_percent;
    result.history.push_back(es);

    if (vs.rmse_value < st.best_valid_rmse) {
      st.best_valid_rmse = vs.rmse_value;
      st.best_theta = st.theta;
      st.epochs_since_improve = 0;
      result.best_epoch = epoch;
    } else {
      ++st.epochs_since_improve;
    }
    st.epoch = epoch + 1;

    if (st.epochs_since_improve >= tc.patience) {
      result.stopped_early = true;
      break;
    }
    if (tc.max_seconds > 0.0 && elapsed() > tc.max_seconds) {
      result.hit_time_cap = true;
      break;
    }
  }

  unflatten(shapes, st.best_theta);
  result.params = shapes;
  result.best_valid_rmse = st.best_valid_rmse;
  result.state = st;
  return result;
}

namespace {

constexpr char kCkptMagic[8] = {'T', 'R', 'M', 'C', '0', '0', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint: truncated file");
  return v;
}

void put_vec(std::ostream& os, const Vec& v) {
  put(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vec get_vec(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  Vec v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated vector");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const PipelineConfig& cfg, const Checkpoint& ckpt) {
  std::ostringstream os(std::ios::binary);
  os.write(kCkptMagic, sizeof(kCkptMagic));
  put(os, static_cast<std::int32_t>(cfg.geometry.n_interfaces));
  put(os, static_cast<std::int32_t>(cfg.geometry.n_observed()));
  put(os, static_cast<std::int32_t>(cfg.n_past));
  put(os, static_cast<std::int32_t>(cfg.n_future));
  put(os, ckpt.seed);
  put(os, static_cast<std::int32_t>(ckpt.epoch));
  put(os, static_cast<std::int64_t>(ckpt.adam_t));
  put(os, ckpt.best_valid_rmse);
  put(os, static_cast<std::int32_t>(ckpt.epochs_since_improve));
  put_vec(os, ckpt.theta);
  put_vec(os, ckpt.adam_m);
  put_vec(os, ckpt.adam_v);
  put_vec(os, ckpt.best_theta);
  atomic_write_file(path, os.str());
}

Checkpoint load_checkpoint(const std::string& path, const PipelineConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto ni = get<std::int32_t>(is);
  const auto no = get<std::int32_t>(is);
  const auto np = get<std::int32_t>(is);
  const auto nf = get<std::int32_t>(is);
  if (ni != cfg.geometry.n_interfaces || no != cfg.geometry.n_observed() || np != cfg.n_past ||
      nf != cfg.n_future) {
    throw ConfigError("checkpoint: dimensions do not match the configuration");
  }
  Checkpoint c;
  c.seed = get<std::uint64_t>(is);
  c.epoch = get<std::int32_t>(is);
  c.adam_t = get<std::int64_t>(is);
  c.best_valid_rmse = get<double>(is);
  c.epochs_since_improve = get<std::int32_t>(is);
  c.theta = get_vec(is);
  c.adam_m = get_vec(is);
  c.adam_v = get_vec(is);
  c.best_theta = get_vec(is);
  return c;
}

void save_params(const std::string& path, std::uint64_t seed, const PipelineParams& p) {
  std::ostringstream os(std::ios::binary);
  std::vector<ParamBlock> blocks;
  blocks.push_back({"mlp1", tensors_of(p.mlp1)});
  blocks.push_back({"extractor", tensors_of(p.extractor)});
  blocks.push_back({"mlp2", tensors_of(p.mlp2)});
  blocks.push_back({"predictor", tensors_of(p.predictor)});
  write_param_blocks(os, seed, blocks);
  atomic_write_file(path, os.str());
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,valid_loss,valid_rmse,valid_mape\n";
  char buf[160];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.valid_loss, e.valid_rmse, e.valid_mape);
    os << buf;
  }
  return os.str();
}

}  // namespace trm
