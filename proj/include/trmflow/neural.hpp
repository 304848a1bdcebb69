#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "trmflow/autodiff.hpp"
#include "trmflow/linalg.hpp"
#include "trmflow/rng.hpp"

namespace trm {

enum class Activation : unsigned char { kSigmoid, kTanh, kIdentity };

// Single layer: y_i = act(W^(i) . x + b_i).
struct PerceptronParams {
  Matrix weights;  // out x in
  Vec biases;      // out
  Activation activation = Activation::kSigmoid;

  int in_size() const { return weights.cols; }
  int out_size() const { return weights.rows; }
  long param_count() const {
    return static_cast<long>(weights.data.size()) + static_cast<long>(biases.size());
  }
};

struct MlpParams {
  std::vector<PerceptronParams> layers;

  long param_count() const;
  void validate() const;  // adjacent layer dims must chain
};

// Four gate perceptrons, each mapping (h ++ x) to a hidden-sized vector:
//   c' = p1(h,x) . c + p2(h,x) . p3(h,x)
//   h' = p4(h,x) . act(c')
struct LstmParams {
  PerceptronParams p1, p2, p3, p4;
  Activation state_activation = Activation::kSigmoid;

  int hidden_size() const { return p1.out_size(); }
  int input_size() const { return p1.in_size() - p1.out_size(); }
  long param_count() const;
  void validate() const;
};

// Elman recurrence: s' = f1(s ++ x), y = f2(s').
struct SrnnParams {
  PerceptronParams f1;
  PerceptronParams f2;

  int state_size() const { return f1.out_size(); }
  int input_size() const { return f1.in_size() - f1.out_size(); }
  int out_size() const { return f2.out_size(); }
  long param_count() const { return f1.param_count() + f2.param_count(); }
  void validate() const;
};

struct LstmState {
  Vec c, h;
};

Vec perceptron_forward(const PerceptronParams& p, const Vec& x);
Vec mlp_forward(const MlpParams& m, const Vec& x);
LstmState lstm_cell(const LstmParams& p, const LstmState& state, const Vec& x);
// Returns (new state, output).
std::pair<Vec, Vec> srnn_cell(const SrnnParams& p, const Vec& s, const Vec& x);

// Closed forms from the architecture's sizing table, given N_i road
// interfaces and N_o observed interfaces. `predictor` is the Elman count
// 3*N_i^2 + 2*N_i actually implemented; `predictor_reference` is the
// reference table's 3*N_i*(N_i+1), which exceeds it by exactly N_i.
struct ClosedFormCounts {
  long mlp1 = 0;
  long extractor = 0;
  long mlp2 = 0;
  long predictor = 0;
  long predictor_reference = 0;
};
ClosedFormCounts closed_form_counts(int n_interfaces, int n_observed);

// Seeded initialization: weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
// drawn in row-major order, biases zero.
PerceptronParams make_perceptron(int out, int in, Activation act, Rng& rng);
MlpParams make_mlp2(int in, int hidden, int out, Rng& rng);  // 2 sigmoid layers
LstmParams make_lstm(int hidden, int input, Rng& rng);
SrnnParams make_srnn(int state, int input, int out, Rng& rng);

// Canonical flat layout: per perceptron, weights row-major then biases;
// blocks in the order their tensors are appended. bind_* mirrors the same
// walk to create tape leaves at matching offsets.
void append_flat(const PerceptronParams& p, Vec& out);
void append_flat(const MlpParams& m, Vec& out);
void append_flat(const LstmParams& p, Vec& out);
void append_flat(const SrnnParams& p, Vec& out);
int read_flat(PerceptronParams& p, const Vec& theta, int offset);
int read_flat(MlpParams& m, const Vec& theta, int offset);
int read_flat(LstmParams& p, const Vec& theta, int offset);
int read_flat(SrnnParams& p, const Vec& theta, int offset);

struct TapedPerceptron {
  Var w, b;
  int out = 0, in = 0;
  Activation activation = Activation::kSigmoid;
};
struct TapedMlp {
  std::vector<TapedPerceptron> layers;
};
struct TapedLstm {
  TapedPerceptron p1, p2, p3, p4;
  Activation state_activation = Activation::kSigmoid;
};
struct TapedSrnn {
  TapedPerceptron f1, f2;
};
struct TapedLstmState {
  Var c, h;
};

TapedPerceptron bind_params(Tape& tape, const PerceptronParams& p, int& offset, const Vec& theta);
TapedMlp bind_params(Tape& tape, const MlpParams& m, int& offset, const Vec& theta);
TapedLstm bind_params(Tape& tape, const LstmParams& p, int& offset, const Vec& theta);
TapedSrnn bind_params(Tape& tape, const SrnnParams& p, int& offset, const Vec& theta);

Var taped_forward(Tape& tape, const TapedPerceptron& p, Var x);
Var taped_forward(Tape& tape, const TapedMlp& m, Var x);
TapedLstmState taped_cell(Tape& tape, const TapedLstm& p, const TapedLstmState& state, Var x);
std::pair<Var, Var> taped_cell(Tape& tape, const TapedSrnn& p, Var s, Var x);

// Binary parameter container: header (magic, version, seed, block count),
// then named blocks of row-major tensors. Round trips are bit-exact.
struct ParamBlock {
  std::string name;
  std::vector<Matrix> tensors;
};
std::vector<Matrix> tensors_of(const PerceptronParams& p);
std::vector<Matrix> tensors_of(const MlpParams& m);
std::vector<Matrix> tensors_of(const LstmParams& p);
std::vector<Matrix> tensors_of(const SrnnParams& p);

void write_param_blocks(std::ostream& os, std::uint64_t seed,
                        const std::vector<ParamBlock>& blocks);
std::pair<std::uint64_t, std::vector<ParamBlock>> read_param_blocks(std::istream& is);

}  // namespace trm
