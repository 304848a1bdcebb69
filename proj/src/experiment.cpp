#include "trmflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "trmflow/fsutil.hpp"

namespace trm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ExperimentConfig::resolved_data_csv() const {
  return data_csv.empty() ? output_dir + "/data.csv" : data_csv;
}

std::string ExperimentConfig::resolved_ground_truth_csv() const {
  return ground_truth_csv.empty() ? output_dir + "/ground_truth.csv" : ground_truth_csv;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      maybe(g, "n_interfaces", c.n_interfaces);
      maybe(g, "dx_meters", c.dx);
      maybe(g, "observed", c.observed);
      maybe(g, "hidden", c.hidden);
    }
    if (j.contains("trm")) {
      const json& t = j.at("trm");
      maybe(t, "rho_max_veh_per_m", c.rho_max);
      maybe(t, "dt_seconds", c.dT);
      maybe(t, "v_max_m_per_s", c.v_max);
      maybe(t, "p_t", c.p_t);
    }
    if (j.contains("pipeline")) {
      const json& p = j.at("pipeline");
      maybe(p, "n_past", c.n_past);
      maybe(p, "n_future", c.n_future);
      maybe(p, "reg_weight", c.reg_weight);
    }
    if (j.contains("training")) {
      const json& t = j.at("training");
      maybe(t, "learning_rate", c.learning_rate);
      maybe(t, "batch_size", c.batch_size);
      maybe(t, "epochs", c.epochs);
      maybe(t, "patience", c.patience);
      maybe(t, "max_seconds", c.max_seconds);
    }
    if (j.contains("data")) {
      const json& d = j.at("data");
      maybe(d, "csv", c.data_csv);
      maybe(d, "ground_truth", c.ground_truth_csv);
      maybe(d, "stride", c.stride);
      if (d.contains("split")) {
        const auto v = d.at("split").get<std::vector<double>>();
        if (v.size() != 3) throw ConfigError("config: data.split must have 3 entries");
        c.split = {v[0], v[1], v[2]};
      }
      if (d.contains("simulate")) {
        const json& s = d.at("simulate");
        maybe(s, "initial_density", c.sim_initial_density);
        maybe(s, "rates", c.sim_rate_schedule);
      }
      if (d.contains("synth")) {
        const json& s = d.at("synth");
        maybe(s, "n_days", c.synth_days);
        maybe(s, "steps_per_day", c.synth_steps_per_day);
        maybe(s, "rate_mean", c.synth_rate_mean);
        maybe(s, "rate_amplitude", c.synth_rate_amplitude);
        maybe(s, "spatial_modes", c.synth_spatial_modes);
        maybe(s, "temporal_period_steps", c.synth_temporal_period);
        maybe(s, "noise_std", c.synth_noise_std);
      }
    }
    if (j.contains("gridsearch")) {
      maybe(j.at("gridsearch"), "n_past_values", c.gridsearch_n_past);
    }
    maybe(j, "seed", c.seed);
    maybe(j, "output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  return parse_experiment_config(read_file(path));
}

PipelineConfig make_pipeline_config(const ExperimentConfig& cfg) {
  PipelineConfig p;
  p.geometry = make_geometry(cfg.n_interfaces, cfg.dx, cfg.observed, cfg.hidden);
  p.trm.rho_max = cfg.rho_max;
  p.trm.dx = cfg.dx;
  p.trm.dT = cfg.dT;
  p.trm.v_max = cfg.v_max;
  p.trm.p_t = cfg.p_t > 0 ? cfg.p_t : compute_substeps(cfg.v_max, cfg.dT, cfg.dx);
  p.n_past = cfg.n_past;
  p.n_future = cfg.n_future;
  p.reg_weight = cfg.reg_weight;
  p.validate();
  return p;
}

SynthConfig make_synth_config(const ExperimentConfig& cfg) {
  const PipelineConfig p = make_pipeline_config(cfg);
  SynthConfig s;
  s.geometry = p.geometry;
  s.trm = p.trm;
  s.n_days = cfg.synth_days;
  s.steps_per_day = cfg.synth_steps_per_day;
  s.rate_mean = cfg.synth_rate_mean;
  s.rate_amplitude = cfg.synth_rate_amplitude;
  s.spatial_modes = cfg.synth_spatial_modes;
  s.temporal_period_steps = cfg.synth_temporal_period;
  s.noise_std = cfg.synth_noise_std;
  s.seed = cfg.seed;
  s.validate();
  return s;
}

TrainConfig make_train_config(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.learning_rate = cfg.learning_rate;
  t.batch_size = cfg.batch_size;
  t.epochs = cfg.epochs;
  t.patience = cfg.patience;
  t.seed = cfg.seed;
  t.max_seconds = cfg.max_seconds;
  return t;
}

namespace {

struct PreparedData {
  NormalizeResult normalized;      // all detector columns, dimensionless
  MeasurementSeries observed_set;  // observed subset of the normalized series
  DaySplit split;
  std::vector<WindowExample> train_w, valid_w, test_w;
  std::vector<WindowRef> test_refs;
};

PreparedData prepare_data(const ExperimentConfig& cfg, const PipelineConfig& pcfg) {
  const std::string path = cfg.resolved_data_csv();
  if (!fs::exists(path)) throw DataError("data csv not found: " + path);
  const MeasurementSeries raw = load_csv(path);
  PreparedData d;
  d.normalized = normalize(interpolate_missing(raw), pcfg.trm);
  d.observed_set = select_interfaces(d.normalized.series, pcfg.geometry.observed_indices());
  d.split = split_by_days(d.observed_set, cfg.split);
  d.train_w = window_examples(d.split.train, cfg.n_past, cfg.n_future, cfg.stride);
  d.valid_w = window_examples(d.split.valid, cfg.n_past, cfg.n_future, cfg.stride);
  d.test_w = window_examples(d.split.test, cfg.n_past, cfg.n_future, cfg.stride, &d.test_refs);
  if (d.train_w.empty() || d.valid_w.empty() || d.test_w.empty()) {
    throw DataError("dataset too small: a split produced no windows");
  }
  return d;
}

std::string checkpoint_path(const ExperimentConfig& cfg) {
  return cfg.output_dir + "/checkpoints/model.ckpt";
}

PipelineParams params_from_checkpoint(const PipelineConfig& pcfg, const Checkpoint& ckpt,
                                      std::uint64_t seed) {
  PipelineParams p = init_params(pcfg, seed);
  unflatten(p, ckpt.best_theta);
  return p;
}

void append_row_csv(std::string& out, int window, int step, const Vec& row) {
  out += std::to_string(window);
  out += ',';
  out += std::to_string(step);
  char buf[40];
  for (const double v : row) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out += buf;
  }
  out += '\n';
}

std::string matrix_table_header(const char* value_name, int n_cols) {
  std::string h = "window,step";
  for (int j = 0; j < n_cols; ++j) h += "," + std::string(value_name) + "_" + std::to_string(j);
  return h + "\n";
}

void cmd_synth(const ExperimentConfig& cfg, std::ostream& out) {
  const SynthConfig scfg = make_synth_config(cfg);
  const SynthResult r = synth_generate(scfg);
  save_csv(cfg.resolved_data_csv(), r.observations);
  save_ground_truth(cfg.resolved_ground_truth_csv(), scfg, r);
  out << "synth: wrote " << cfg.resolved_data_csv() << " (" << r.observations.total_rows()
      << " rows, " << scfg.n_days << " days), mean flux " << r.mean_flux << ", truncated "
      << r.truncated << "\n";
}

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const PipelineConfig pcfg = make_pipeline_config(cfg);
  const int ni = pcfg.geometry.n_interfaces;

  // Initial densities and measurement-grid rate rows, either inline from the
  // config or from a ground-truth sidecar.
  std::vector<std::string> block_ids;
  std::vector<Matrix> rate_blocks;
  std::vector<Vec> initial_states;
  if (!cfg.sim_rate_schedule.empty()) {
    if (static_cast<int>(cfg.sim_initial_density.size()) != pcfg.geometry.n_cells) {
      throw ConfigError("simulate: initial_density must have n_cells entries");
    }
    Matrix rates(static_cast<int>(cfg.sim_rate_schedule.size()), ni);
    for (std::size_t r = 0; r < cfg.sim_rate_schedule.size(); ++r) {
      if (static_cast<int>(cfg.sim_rate_schedule[r].size()) != ni) {
        throw ConfigError("simulate: every rate row must have n_interfaces entries");
      }
      rates.set_row(static_cast<int>(r), cfg.sim_rate_schedule[r]);
    }
    block_ids.push_back("inline");
    rate_blocks.push_back(std::move(rates));
    initial_states.push_back(cfg.sim_initial_density);
  } else {
    const std::string gt_path = cfg.resolved_ground_truth_csv();
    if (!fs::exists(gt_path)) {
      throw DataError("simulate: no inline schedule and no ground truth csv at " + gt_path);
    }
    const GroundTruth gt = load_ground_truth(gt_path, ni, &block_ids);
    for (std::size_t d = 0; d < gt.rates.size(); ++d) {
      rate_blocks.push_back(gt.rates[d]);
      initial_states.push_back(gt.densities[d].row(0));
    }
  }

  std::string csv = "day,step";
  for (int j = 0; j < ni; ++j) csv += ",flux_" + std::to_string(j);
  csv += '\n';
  char buf[40];
  for (std::size_t d = 0; d < rate_blocks.size(); ++d) {
    const Matrix sub = upsample_rates(rate_blocks[d], pcfg.trm.p_t);
    std::vector<RateVector> schedule;
    schedule.reserve(static_cast<std::size_t>(sub.rows));
    for (int k = 0; k < sub.rows; ++k) schedule.push_back(RateVector{sub.row(k)});
    const Rollout roll = trm_rollout(DensityState{initial_states[d]}, schedule);
    for (int m = 0; m < rate_blocks[d].rows; ++m) {
      csv += block_ids[d] + "," + std::to_string(m);
      for (const double f : roll.fluxes[static_cast<std::size_t>(m * pcfg.trm.p_t)].f) {
        std::snprintf(buf, sizeof(buf), ",%.17g", f);
        csv += buf;
      }
      csv += '\n';
    }
  }
  const std::string path = cfg.output_dir + "/simulated_fluxes.csv";
  atomic_write_file(path, csv);
  out << "simulate: wrote " << path << " (" << rate_blocks.size() << " blocks)\n";
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
  const PipelineConfig pcfg = make_pipeline_config(cfg);
  const PreparedData data = prepare_data(cfg, pcfg);
  const TrainConfig tc = make_train_config(cfg);

  const TrainResult r = train(pcfg, data.train_w, data.valid_w, tc);
  save_checkpoint(checkpoint_path(cfg), pcfg, r.state);
  save_params(cfg.output_dir + "/checkpoints/model.params", tc.seed, r.params);
  atomic_write_file(cfg.output_dir + "/history.csv", history_csv(r.history));

  out << "train: " << r.history.size() << " epochs on " << data.train_w.size() << " windows ("
      << data.normalized.clipped << " clipped), best epoch " << r.best_epoch << ", valid RMSE "
      << r.best_valid_rmse << (r.stopped_early ? " (early stop)" : "")
      << (r.hit_time_cap ? " (time cap)" : "") << "\n";
}

void cmd_predict(const ExperimentConfig& cfg, std::ostream& out) {
  const PipelineConfig pcfg = make_pipeline_config(cfg);
  const PreparedData data = prepare_data(cfg, pcfg);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg), pcfg);
  const PipelineParams params = params_from_checkpoint(pcfg, ckpt, ckpt.seed);

  const int ni = pcfg.geometry.n_interfaces;
  std::string smoothed = matrix_table_header("flux", ni);
  std::string predicted = matrix_table_header("flux", ni);
  std::string rates = matrix_table_header("rate", ni);
  std::string densities = matrix_table_header("density", pcfg.geometry.n_cells);

  for (std::size_t w = 0; w < data.test_w.size(); ++w) {
    const PredictionOutput o = forward(params, pcfg, data.test_w[w].past);
    for (int k = 0; k < o.smoothed.rows; ++k) {
      append_row_csv(smoothed, static_cast<int>(w), k, o.smoothed.row(k));
    }
    for (int l = 0; l < o.predicted.rows; ++l) {
      append_row_csv(predicted, static_cast<int>(w), l, o.predicted.row(l));
    }
    for (int r = 0; r < o.rates.rows; ++r) {
      append_row_csv(rates, static_cast<int>(w), r, o.rates.row(r));
    }
    // Densities are emitted on the measurement grid (substep rows are
    // available through the library API).
    for (int m = 0; m < cfg.n_past + cfg.n_future; ++m) {
      append_row_csv(densities, static_cast<int>(w), m, o.densities.row(m * pcfg.trm.p_t));
    }
  }
  atomic_write_file(cfg.output_dir + "/predictions/smoothed.csv", smoothed);
  atomic_write_file(cfg.output_dir + "/predictions/predicted.csv", predicted);
  atomic_write_file(cfg.output_dir + "/predictions/rates.csv", rates);
  atomic_write_file(cfg.output_dir + "/predictions/densities.csv", densities);
  out << "predict: wrote predictions for " << data.test_w.size() << " test windows\n";
}

struct Evaluation {
  EvalReport report;
  bool has_ground_truth = false;
};

Evaluation evaluate_test_set(const ExperimentConfig& cfg, const PipelineConfig& pcfg,
                             const PreparedData& data, const PipelineParams& params) {
  const int ni = pcfg.geometry.n_interfaces;
  const std::vector<int> obs = pcfg.geometry.observed_indices();
  const std::string gt_path = cfg.resolved_ground_truth_csv();

  Evaluation ev;
  ev.has_ground_truth = fs::exists(gt_path);

  GroundTruth gt;
  if (ev.has_ground_truth) {
    gt = load_ground_truth(gt_path, ni);
    if (gt.fluxes.size() != data.observed_set.days.size()) {
      throw DataError("ground truth day count does not match the dataset");
    }
  }
  const int test_day0 = data.split.n_train_days + data.split.n_valid_days;

  std::vector<Matrix> model_pred;   // per window, N_f x N_i
  std::vector<Matrix> truth_full;   // per window, N_f x N_i (NaN where unknown)
  std::vector<Matrix> base_pred;    // per window, N_f x N_o
  std::vector<Matrix> truth_obs;    // per window, N_f x N_o
  std::vector<double> smooth_vals, meas_vals;

  for (std::size_t w = 0; w < data.test_w.size(); ++w) {
    const WindowExample& ex = data.test_w[w];
    const WindowRef& ref = data.test_refs[w];
    const PredictionOutput o = forward(params, pcfg, ex.past);
    model_pred.push_back(o.predicted);

    Matrix tf(cfg.n_future, ni, std::numeric_limits<double>::quiet_NaN());
    if (ev.has_ground_truth) {
      const Matrix& day_flux = gt.fluxes[static_cast<std::size_t>(test_day0 + ref.day)];
      for (int l = 0; l < cfg.n_future; ++l) {
        for (int j = 0; j < ni; ++j) tf(l, j) = day_flux(ref.start + cfg.n_past + l, j);
      }
    } else {
      for (int l = 0; l < cfg.n_future; ++l) {
        for (std::size_t c = 0; c < obs.size(); ++c) {
          tf(l, obs[c]) = ex.target(cfg.n_past + l, static_cast<int>(c));
        }
      }
    }
    truth_full.push_back(tf);

    base_pred.push_back(baseline_last_value(ex.past, cfg.n_future));
    Matrix to(cfg.n_future, static_cast<int>(obs.size()));
    for (int l = 0; l < cfg.n_future; ++l) {
      for (std::size_t c = 0; c < obs.size(); ++c) {
        to(l, static_cast<int>(c)) = tf(l, obs[c]);
      }
    }
    truth_obs.push_back(to);

    for (int k = 0; k < cfg.n_past; ++k) {
      for (std::size_t c = 0; c < obs.size(); ++c) {
        smooth_vals.push_back(o.smoothed(k, obs[c]));
        meas_vals.push_back(ex.past(k, static_cast<int>(c)));
      }
    }
  }

  // Observed-interface stacks for the headline numbers.
  const int n_w = static_cast<int>(model_pred.size());
  Matrix stack_pred(n_w * cfg.n_future, static_cast<int>(obs.size()));
  Matrix stack_truth(n_w * cfg.n_future, static_cast<int>(obs.size()));
  int r = 0;
  for (int w = 0; w < n_w; ++w) {
    for (int l = 0; l < cfg.n_future; ++l, ++r) {
      for (std::size_t c = 0; c < obs.size(); ++c) {
        stack_pred(r, static_cast<int>(c)) = model_pred[static_cast<std::size_t>(w)](l, obs[c]);
        stack_truth(r, static_cast<int>(c)) = truth_obs[static_cast<std::size_t>(w)](l, static_cast<int>(c));
      }
    }
  }

  EvalReport& rep = ev.report;
  rep.overall_rmse = rmse(stack_pred, stack_truth);
  const MapeResult overall = mape(stack_pred, stack_truth);
  rep.overall_mape = overall.percent;
  rep.mape_excluded = overall.excluded;
  rep.clipped = data.normalized.clipped;

  std::vector<int> horizons;
  for (int h = 1; h <= cfg.n_future; ++h) horizons.push_back(h);
  rep.horizon = horizon_mape(model_pred, truth_full, horizons, obs);

  {
    std::vector<Matrix> base_full;
    std::vector<int> obs_cols;
    for (std::size_t c = 0; c < obs.size(); ++c) obs_cols.push_back(static_cast<int>(c));
    for (int w = 0; w < n_w; ++w) base_full.push_back(base_pred[static_cast<std::size_t>(w)]);
    rep.baseline_horizon = horizon_mape(base_full, truth_obs, horizons, obs_cols);
  }

  rep.interface_mape.assign(static_cast<std::size_t>(ni),
                            std::numeric_limits<double>::quiet_NaN());
  rep.interface_tag.assign(static_cast<std::size_t>(ni), "unobserved");
  for (const int j : obs) rep.interface_tag[static_cast<std::size_t>(j)] = "observed";
  for (const int j : pcfg.geometry.hidden) rep.interface_tag[static_cast<std::size_t>(j)] = "hidden";
  for (int j = 0; j < ni; ++j) {
    bool have_truth = true;
    for (const Matrix& t : truth_full) {
      for (int l = 0; l < t.rows && have_truth; ++l) have_truth = !std::isnan(t(l, j));
      if (!have_truth) break;
    }
    if (!have_truth) continue;
    Matrix col_p(n_w * cfg.n_future, 1), col_t(n_w * cfg.n_future, 1);
    int rr = 0;
    for (int w = 0; w < n_w; ++w) {
      for (int l = 0; l < cfg.n_future; ++l, ++rr) {
        col_p(rr, 0) = model_pred[static_cast<std::size_t>(w)](l, j);
        col_t(rr, 0) = truth_full[static_cast<std::size_t>(w)](l, j);
      }
    }
    rep.interface_mape[static_cast<std::size_t>(j)] = mape(col_p, col_t).percent;
  }

  rep.observed_mape = rep.overall_mape;
  if (ev.has_ground_truth && !pcfg.geometry.hidden.empty()) {
    // Single MAPE over every hidden-interface entry, all horizons pooled.
    Matrix hp(n_w * cfg.n_future, static_cast<int>(pcfg.geometry.hidden.size()));
    Matrix ht(hp.rows, hp.cols);
    int rr = 0;
    for (int w = 0; w < n_w; ++w) {
      for (int l = 0; l < cfg.n_future; ++l, ++rr) {
        for (std::size_t c = 0; c < pcfg.geometry.hidden.size(); ++c) {
          hp(rr, static_cast<int>(c)) = model_pred[static_cast<std::size_t>(w)](l, pcfg.geometry.hidden[c]);
          ht(rr, static_cast<int>(c)) = truth_full[static_cast<std::size_t>(w)](l, pcfg.geometry.hidden[c]);
        }
      }
    }
    rep.hidden_mape = mape(hp, ht).percent;
  }

  rep.smoothing = smoothing_stats(smooth_vals, meas_vals);
  return ev;
}

void cmd_evaluate(const ExperimentConfig& cfg, std::ostream& out) {
  const PipelineConfig pcfg = make_pipeline_config(cfg);
  const PreparedData data = prepare_data(cfg, pcfg);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg), pcfg);
  const PipelineParams params = params_from_checkpoint(pcfg, ckpt, ckpt.seed);

  const Evaluation ev = evaluate_test_set(cfg, pcfg, data, params);
  atomic_write_file(cfg.output_dir + "/report.json", report_to_json(ev.report));
  fs::create_directories(cfg.output_dir + "/tables");
  write_report_tables(ev.report, cfg.output_dir + "/tables");

  out << "evaluate: RMSE " << ev.report.overall_rmse << ", MAPE " << ev.report.overall_mape
      << "% over " << data.test_w.size() << " windows"
      << (ev.has_ground_truth ? " (against noiseless ground truth)" : " (against measurements)")
      << "\n";
  for (const auto& [h, v] : ev.report.horizon) {
    out << "  horizon " << h << ": model " << v << "% vs baseline "
        << ev.report.baseline_horizon.at(h) << "%\n";
  }
}

void cmd_gridsearch(const ExperimentConfig& cfg, std::ostream& out) {
  std::string csv = "n_past,valid_rmse,valid_mape\n";
  char buf[80];
  for (const int np : cfg.gridsearch_n_past) {
    ExperimentConfig sub = cfg;
    sub.n_past = np;
    sub.output_dir = cfg.output_dir + "/np_" + std::to_string(np);
    sub.data_csv = cfg.resolved_data_csv();
    sub.ground_truth_csv = cfg.resolved_ground_truth_csv();
    const PipelineConfig pcfg = make_pipeline_config(sub);
    const PreparedData data = prepare_data(sub, pcfg);
    const TrainResult r = train(pcfg, data.train_w, data.valid_w, make_train_config(sub));
    save_checkpoint(checkpoint_path(sub), pcfg, r.state);
    atomic_write_file(sub.output_dir + "/history.csv", history_csv(r.history));

    double best_mape = 0.0;
    for (const EpochStats& e : r.history) {
      if (e.epoch == r.best_epoch) best_mape = e.valid_mape;
    }
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", np, r.best_valid_rmse, best_mape);
    csv += buf;
    out << "gridsearch: n_past " << np << " -> valid RMSE " << r.best_valid_rmse << ", MAPE "
        << best_mape << "%\n";
  }
  atomic_write_file(cfg.output_dir + "/tables/gridsearch.csv", csv);
}

void cmd_inspect_params(const ExperimentConfig& cfg, std::ostream& out) {
  const PipelineConfig pcfg = make_pipeline_config(cfg);
  const PipelineParams p = init_params(pcfg, cfg.seed);
  const ClosedFormCounts c =
      closed_form_counts(pcfg.geometry.n_interfaces, pcfg.geometry.n_observed());

  char buf[96];
  out << "block        parameters  closed_form\n";
  std::snprintf(buf, sizeof(buf), "MLP1        %10ld  %11ld\n", p.mlp1.param_count(), c.mlp1);
  out << buf;
  std::snprintf(buf, sizeof(buf), "Extractor   %10ld  %11ld\n", p.extractor.param_count(),
                c.extractor);
  out << buf;
  std::snprintf(buf, sizeof(buf), "MLP2        %10ld  %11ld\n", p.mlp2.param_count(), c.mlp2);
  out << buf;
  std::snprintf(buf, sizeof(buf), "Predictor   %10ld  %11ld\n", p.predictor.param_count(),
                c.predictor);
  out << buf;
  std::snprintf(buf, sizeof(buf), "total       %10ld  %11ld\n", p.param_count(),
                c.mlp1 + c.extractor + c.mlp2 + c.predictor);
  out << buf;
  out << "Predictor reference count (sizing table): " << c.predictor_reference << ", delta "
      << (c.predictor_reference - c.predictor) << " = N_i\n";
}

}  // namespace

void run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& out) {
  fs::create_directories(cfg.output_dir);
  if (command == "synth") {
    cmd_synth(cfg, out);
  } else if (command == "simulate") {
    cmd_simulate(cfg, out);
  } else if (command == "train") {
    cmd_train(cfg, out);
  } else if (command == "predict") {
    cmd_predict(cfg, out);
  } else if (command == "evaluate") {
    cmd_evaluate(cfg, out);
  } else if (command == "gridsearch-np") {
    cmd_gridsearch(cfg, out);
  } else if (command == "inspect-params") {
    cmd_inspect_params(cfg, out);
  } else {
    throw ConfigError("unknown command: " + command);
  }
}

}  // namespace trm
