#include "trmflow/neural.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "trmflow/errors.hpp"

namespace trm {

namespace {

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kIdentity: return x;
  }
  throw NumericalError("unknown activation");
}

Vec concat_vec(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

long MlpParams::param_count() const {
  long n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

void MlpParams::validate() const {
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    if (layers[k].out_size() != layers[k + 1].in_size()) {
      throw DimensionError("mlp: layer " + std::to_string(k) + " output does not chain");
    }
  }
  for (const auto& l : layers) {
    if (static_cast<int>(l.biases.size()) != l.out_size()) {
      throw DimensionError("perceptron: bias length mismatch");
    }
  }
}

long LstmParams::param_count() const {
  return p1.param_count() + p2.param_count() + p3.param_count() + p4.param_count();
}

void LstmParams::validate() const {
  const int u = p1.out_size();
  const int in = p1.in_size();
  for (const PerceptronParams* g : {&p1, &p2, &p3, &p4}) {
    if (g->out_size() != u || g->in_size() != in) {
      throw DimensionError("lstm: gate dimensions disagree");
    }
    if (static_cast<int>(g->biases.size()) != u) throw DimensionError("lstm: bias length mismatch");
  }
  if (in <= u) throw DimensionError("lstm: gate input must be hidden + input sized");
}

void SrnnParams::validate() const {
  if (f1.in_size() != f1.out_size() + input_size() || input_size() < 0) {
    throw DimensionError("srnn: f1 must map (state ++ input) to state");
  }
  if (f2.in_size() != f1.out_size()) throw DimensionError("srnn: f2 input must be the state");
}

Vec perceptron_forward(const PerceptronParams& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.in_size()) {
    throw DimensionError("perceptron: input size " + std::to_string(x.size()) + " != " +
                         std::to_string(p.in_size()));
  }
  Vec y(static_cast<std::size_t>(p.out_size()));
  for (int i = 0; i < p.out_size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < p.in_size(); ++j) s += p.weights(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = apply_activation(p.activation, s + p.biases[static_cast<std::size_t>(i)]);
  }
  return y;
}

Vec mlp_forward(const MlpParams& m, const Vec& x) {
  Vec v = x;
  for (const auto& layer : m.layers) v = perceptron_forward(layer, v);
  return v;
}

LstmState lstm_cell(const LstmParams& p, const LstmState& state, const Vec& x) {
  if (state.c.size() != state.h.size() ||
      static_cast<int>(state.h.size()) != p.hidden_size()) {
    throw DimensionError("lstm: state size mismatch");
  }
  const Vec hx = concat_vec(state.h, x);
  const Vec g1 = perceptron_forward(p.p1, hx);
  const Vec g2 = perceptron_forward(p.p2, hx);
  const Vec g3 = perceptron_forward(p.p3, hx);
  const Vec g4 = perceptron_forward(p.p4, hx);
  LstmState next;
  next.c.resize(state.c.size());
  next.h.resize(state.h.size());
  for (std::size_t i = 0; i < state.c.size(); ++i) {
    next.c[i] = g1[i] * state.c[i] + g2[i] * g3[i];
  }
  for (std::size_t i = 0; i < state.h.size(); ++i) {
    next.h[i] = g4[i] * apply_activation(p.state_activation, next.c[i]);
  }
  return next;
}

std::pair<Vec, Vec> srnn_cell(const SrnnParams& p, const Vec& s, const Vec& x) {
  if (static_cast<int>(s.size()) != p.state_size()) throw DimensionError("srnn: state size mismatch");
  const Vec next = perceptron_forward(p.f1, concat_vec(s, x));
  Vec y = perceptron_forward(p.f2, next);
  return {next, std::move(y)};
}

ClosedFormCounts closed_form_counts(int n_interfaces, int n_observed) {
  const long ni = n_interfaces;
  const long no = n_observed;
  ClosedFormCounts c;
  c.mlp1 = 2 * ni * (2 * ni + no + 2);
  c.extractor = 4 * ni * (ni + no + 1);
  c.mlp2 = (ni - 1) * (ni + no + 1);
  c.predictor = 3 * ni * ni + 2 * ni;
  c.predictor_reference = 3 * ni * (ni + 1);
  return c;
}

PerceptronParams make_perceptron(int out, int in, Activation act, Rng& rng) {
  PerceptronParams p;
  p.weights = Matrix(out, in);
  p.biases.assign(static_cast<std::size_t>(out), 0.0);
  p.activation = act;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : p.weights.data) w = rng.uniform(-bound, bound);
  return p;
}

MlpParams make_mlp2(int in, int hidden, int out, Rng& rng) {
  MlpParams m;
  m.layers.push_back(make_perceptron(hidden, in, Activation::kSigmoid, rng));
  m.layers.push_back(make_perceptron(out, hidden, Activation::kSigmoid, rng));
  return m;
}

LstmParams make_lstm(int hidden, int input, Rng& rng) {
  LstmParams p;
  p.p1 = make_perceptron(hidden, hidden + input, Activation::kSigmoid, rng);
  p.p2 = make_perceptron(hidden, hidden + input, Activation::kSigmoid, rng);
  p.p3 = make_perceptron(hidden, hidden + input, Activation::kSigmoid, rng);
  p.p4 = make_perceptron(hidden, hidden + input, Activation::kSigmoid, rng);
  p.state_activation = Activation::kSigmoid;
  return p;
}

SrnnParams make_srnn(int state, int input, int out, Rng& rng) {
  SrnnParams p;
  p.f1 = make_perceptron(state, state + input, Activation::kSigmoid, rng);
  p.f2 = make_perceptron(out, state, Activation::kSigmoid, rng);
  return p;
}

void append_flat(const PerceptronParams& p, Vec& out) {
  out.insert(out.end(), p.weights.data.begin(), p.weights.data.end());
  out.insert(out.end(), p.biases.begin(), p.biases.end());
}

void append_flat(const MlpParams& m, Vec& out) {
  for (const auto& l : m.layers) append_flat(l, out);
}

void append_flat(const LstmParams& p, Vec& out) {
  append_flat(p.p1, out);
  append_flat(p.p2, out);
  append_flat(p.p3, out);
  append_flat(p.p4, out);
}

void append_flat(const SrnnParams& p, Vec& out) {
  append_flat(p.f1, out);
  append_flat(p.f2, out);
}

int read_flat(PerceptronParams& p, const Vec& theta, int offset) {
  const int nw = static_cast<int>(p.weights.data.size());
  const int nb = static_cast<int>(p.biases.size());
  if (offset + nw + nb > static_cast<int>(theta.size())) {
    throw DimensionError("read_flat: theta too short");
  }
  std::copy(theta.begin() + offset, theta.begin() + offset + nw, p.weights.data.begin());
  std::copy(theta.begin() + offset + nw, theta.begin() + offset + nw + nb, p.biases.begin());
  return offset + nw + nb;
}

int read_flat(MlpParams& m, const Vec& theta, int offset) {
  for (auto& l : m.layers) offset = read_flat(l, theta, offset);
  return offset;
}

int read_flat(LstmParams& p, const Vec& theta, int offset) {
  offset = read_flat(p.p1, theta, offset);
  offset = read_flat(p.p2, theta, offset);
  offset = read_flat(p.p3, theta, offset);
  return read_flat(p.p4, theta, offset);
}

int read_flat(SrnnParams& p, const Vec& theta, int offset) {
  offset = read_flat(p.f1, theta, offset);
  return read_flat(p.f2, theta, offset);
}

TapedPerceptron bind_params(Tape& tape, const PerceptronParams& p, int& offset, const Vec& theta) {
  TapedPerceptron t;
  t.out = p.out_size();
  t.in = p.in_size();
  t.activation = p.activation;
  t.w = tape.param_matrix(offset, t.out, t.in, theta);
  offset += t.out * t.in;
  t.b = tape.param(offset, t.out, theta);
  offset += t.out;
  return t;
}

TapedMlp bind_params(Tape& tape, const MlpParams& m, int& offset, const Vec& theta) {
  TapedMlp t;
  for (const auto& l : m.layers) t.layers.push_back(bind_params(tape, l, offset, theta));
  return t;
}

TapedLstm bind_params(Tape& tape, const LstmParams& p, int& offset, const Vec& theta) {
  TapedLstm t;
  t.p1 = bind_params(tape, p.p1, offset, theta);
  t.p2 = bind_params(tape, p.p2, offset, theta);
  t.p3 = bind_params(tape, p.p3, offset, theta);
  t.p4 = bind_params(tape, p.p4, offset, theta);
  t.state_activation = p.state_activation;
  return t;
}

TapedSrnn bind_params(Tape& tape, const SrnnParams& p, int& offset, const Vec& theta) {
  TapedSrnn t;
  t.f1 = bind_params(tape, p.f1, offset, theta);
  t.f2 = bind_params(tape, p.f2, offset, theta);
  return t;
}

namespace {

Var taped_activation(Tape& tape, Activation a, Var x) {
  switch (a) {
    case Activation::kSigmoid: return tape.sigmoid(x);
    case Activation::kTanh: return tape.tanh(x);
    case Activation::kIdentity: return x;
  }
  throw NumericalError("unknown activation");
}

}  // namespace

Var taped_forward(Tape& tape, const TapedPerceptron& p, Var x) {
  return taped_activation(tape, p.activation, tape.add(tape.matvec(p.w, x), p.b));
}

Var taped_forward(Tape& tape, const TapedMlp& m, Var x) {
  Var v = x;
  for (const auto& l : m.layers) v = taped_forward(tape, l, v);
  return v;
}

TapedLstmState taped_cell(Tape& tape, const TapedLstm& p, const TapedLstmState& state, Var x) {
  const Var hx = tape.concat(state.h, x);
  const Var g1 = taped_forward(tape, p.p1, hx);
  const Var g2 = taped_forward(tape, p.p2, hx);
  const Var g3 = taped_forward(tape, p.p3, hx);
  const Var g4 = taped_forward(tape, p.p4, hx);
  TapedLstmState next;
  next.c = tape.add(tape.mul(g1, state.c), tape.mul(g2, g3));
  next.h = tape.mul(g4, taped_activation(tape, p.state_activation, next.c));
  return next;
}

std::pair<Var, Var> taped_cell(Tape& tape, const TapedSrnn& p, Var s, Var x) {
  const Var next = taped_forward(tape, p.f1, tape.concat(s, x));
  const Var y = taped_forward(tape, p.f2, next);
  return {next, y};
}

std::vector<Matrix> tensors_of(const PerceptronParams& p) {
  Matrix b(static_cast<int>(p.biases.size()), 1);
  b.data = p.biases;
  return {p.weights, b};
}

std::vector<Matrix> tensors_of(const MlpParams& m) {
  std::vector<Matrix> out;
  for (const auto& l : m.layers) {
    for (auto& t : tensors_of(l)) out.push_back(std::move(t));
  }
  return out;
}

std::vector<Matrix> tensors_of(const LstmParams& p) {
  std::vector<Matrix> out;
  for (const PerceptronParams* g : {&p.p1, &p.p2, &p.p3, &p.p4}) {
    for (auto& t : tensors_of(*g)) out.push_back(std::move(t));
  }
  return out;
}

std::vector<Matrix> tensors_of(const SrnnParams& p) {
  std::vector<Matrix> out;
  for (const PerceptronParams* g : {&p.f1, &p.f2}) {
    for (auto& t : tensors_of(*g)) out.push_back(std::move(t));
  }
  return out;
}

namespace {

constexpr char kParamMagic[8] = {'T', 'R', 'M', 'W', '0', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("param file: truncated");
  return v;
}

}  // namespace

void write_param_blocks(std::ostream& os, std::uint64_t seed,
                        const std::vector<ParamBlock>& blocks) {
  os.write(kParamMagic, sizeof(kParamMagic));
  write_pod(os, seed);
  write_pod(os, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    write_pod(os, static_cast<std::uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_pod(os, static_cast<std::uint32_t>(b.tensors.size()));
    for (const auto& t : b.tensors) {
      write_pod(os, static_cast<std::uint32_t>(t.rows));
      write_pod(os, static_cast<std::uint32_t>(t.cols));
      os.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
  }
  if (!os) throw DataError("param file: write failed");
}

std::pair<std::uint64_t, std::vector<ParamBlock>> read_param_blocks(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kParamMagic, sizeof(magic)) != 0) {
    throw DataError("param file: bad magic");
  }
  const auto seed = read_pod<std::uint64_t>(is);
  const auto n_blocks = read_pod<std::uint32_t>(is);
  std::vector<ParamBlock> blocks;
  blocks.reserve(n_blocks);
  for (std::uint32_t bi = 0; bi < n_blocks; ++bi) {
    ParamBlock b;
    const auto name_len = read_pod<std::uint32_t>(is);
    b.name.resize(name_len);
    is.read(b.name.data(), name_len);
    const auto n_tensors = read_pod<std::uint32_t>(is);
    for (std::uint32_t ti = 0; ti < n_tensors; ++ti) {
      const auto rows = read_pod<std::uint32_t>(is);
      const auto cols = read_pod<std::uint32_t>(is);
      Matrix m(static_cast<int>(rows), static_cast<int>(cols));
      is.read(reinterpret_cast<char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
      if (!is) throw DataError("param file: truncated tensor");
      b.tensors.push_back(std::move(m));
    }
    blocks.push_back(std::move(b));
  }
  return {seed, std::move(blocks)};
}

}  // namespace trm
