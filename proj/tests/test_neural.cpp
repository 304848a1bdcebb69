#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <sstream>

#include "trmflow/neural.hpp"

using namespace trm;

namespace {

PerceptronParams zero_perceptron(int out, int in, Activation act) {
  PerceptronParams p;
  p.weights = Matrix(out, in);
  p.biases.assign(static_cast<std::size_t>(out), 0.0);
  p.activation = act;
  return p;
}

}  // namespace

TEST_CASE("perceptron forward") {
  SUBCASE("zero weights, sigmoid -> 0.5") {
    const PerceptronParams p = zero_perceptron(3, 2, Activation::kSigmoid);
    for (const double y : perceptron_forward(p, {0.7, -0.3})) CHECK(y == 0.5);
  }
  SUBCASE("identity activation with identity weights") {
    PerceptronParams p = zero_perceptron(2, 2, Activation::kIdentity);
    p.weights(0, 0) = 1.0;
    p.weights(1, 1) = 1.0;
    const Vec y = perceptron_forward(p, {0.25, -1.5});
    CHECK(y == Vec{0.25, -1.5});
  }
  SUBCASE("direct evaluation") {
    PerceptronParams p = zero_perceptron(1, 2, Activation::kSigmoid);
    p.weights(0, 0) = 1.0;
    p.weights(0, 1) = 2.0;
    p.biases[0] = -1.0;
    CHECK(perceptron_forward(p, {1.0, 1.0})[0] == doctest::Approx(0.8807970779778823));
  }
  SUBCASE("dimension mismatch") {
    const PerceptronParams p = zero_perceptron(1, 2, Activation::kSigmoid);
    CHECK_THROWS_AS(perceptron_forward(p, {1.0}), DimensionError);
  }
}

TEST_CASE("mlp forward") {
  SUBCASE("single layer equals perceptron") {
    Rng rng(1);
    MlpParams m;
    m.layers.push_back(make_perceptron(3, 4, Activation::kSigmoid, rng));
    const Vec x = {0.1, -0.2, 0.3, 0.4};
    CHECK(mlp_forward(m, x) == perceptron_forward(m.layers[0], x));
  }
  SUBCASE("two zero layers, sigmoid -> 0.5") {
    MlpParams m;
    m.layers.push_back(zero_perceptron(4, 2, Activation::kSigmoid));
    m.layers.push_back(zero_perceptron(3, 4, Activation::kSigmoid));
    for (const double y : mlp_forward(m, {0.9, 0.1})) CHECK(y == 0.5);
  }
  SUBCASE("random 2->3->1 against hand composition") {
    Rng rng(7);
    MlpParams m = make_mlp2(2, 3, 1, rng);
    const Vec x = {0.4, -0.8};
    const Vec hidden = perceptron_forward(m.layers[0], x);
    const Vec expected = perceptron_forward(m.layers[1], hidden);
    CHECK(mlp_forward(m, x) == expected);
  }
  SUBCASE("chain validation") {
    MlpParams m;
    m.layers.push_back(zero_perceptron(4, 2, Activation::kSigmoid));
    m.layers.push_back(zero_perceptron(3, 5, Activation::kSigmoid));
    CHECK_THROWS_AS(m.validate(), DimensionError);
  }
}

TEST_CASE("lstm cell") {
  SUBCASE("zero parameters from a zero state") {
    Rng rng(3);
    LstmParams p = make_lstm(2, 1, rng);
    for (PerceptronParams* g : {&p.p1, &p.p2, &p.p3, &p.p4}) {
      for (double& w : g->weights.data) w = 0.0;
    }
    const LstmState next = lstm_cell(p, {{0.0, 0.0}, {0.0, 0.0}}, {0.0});
    // c' = 0.5*0 + 0.5*0.5 = 0.25; h' = 0.5 * sigmoid(0.25).
    for (const double c : next.c) CHECK(c == doctest::Approx(0.25));
    for (const double h : next.h) CHECK(h == doctest::Approx(0.5 * sigmoid(0.25)).epsilon(1e-12));
    CHECK(next.h[0] == doctest::Approx(0.2811).epsilon(1e-3));
  }
  SUBCASE("saturated carry gate keeps the memory") {
    Rng rng(4);
    LstmParams p = make_lstm(2, 2, rng);
    for (double& b : p.p1.biases) b = 1e3;   // p1 -> 1
    for (double& b : p.p2.biases) b = -1e3;  // p2 -> 0
    for (double& w : p.p1.weights.data) w = 0.0;
    for (double& w : p.p2.weights.data) w = 0.0;
    const LstmState state{{0.37, -0.12}, {0.5, 0.5}};
    const LstmState next = lstm_cell(p, state, {0.2, 0.8});
    CHECK(next.c[0] == doctest::Approx(0.37));
    CHECK(next.c[1] == doctest::Approx(-0.12));
  }
  SUBCASE("closed output gate") {
    Rng rng(5);
    LstmParams p = make_lstm(2, 2, rng);
    for (double& b : p.p4.biases) b = -1e3;
    for (double& w : p.p4.weights.data) w = 0.0;
    const LstmState next = lstm_cell(p, {{0.3, 0.1}, {0.2, 0.9}}, {0.5, 0.5});
    for (const double h : next.h) CHECK(h == doctest::Approx(0.0).epsilon(1e-300));
  }
}

TEST_CASE("srnn cell") {
  SUBCASE("zero parameters") {
    Rng rng(6);
    SrnnParams p = make_srnn(3, 2, 3, rng);
    for (double& w : p.f1.weights.data) w = 0.0;
    for (double& w : p.f2.weights.data) w = 0.0;
    auto [s, y] = srnn_cell(p, {0.1, 0.2, 0.3}, {0.5, 0.5});
    for (const double v : s) CHECK(v == 0.5);
    for (const double v : y) CHECK(v == 0.5);
  }
  SUBCASE("zero input makes the step depend only on the state") {
    Rng rng(8);
    SrnnParams p = make_srnn(3, 2, 1, rng);
    const Vec s = {0.4, 0.6, 0.1};
    auto [s1, y1] = srnn_cell(p, s, {0.0, 0.0});
    // Rewriting the input-weight columns must not change the result.
    SrnnParams q = p;
    for (int i = 0; i < q.f1.out_size(); ++i) {
      for (int j = q.f1.out_size(); j < q.f1.in_size(); ++j) q.f1.weights(i, j) = 9.9;
    }
    auto [s2, y2] = srnn_cell(q, s, {0.0, 0.0});
    CHECK(s1 == s2);
    CHECK(y1 == y2);
  }
  SUBCASE("random instance against hand composition") {
    Rng rng(9);
    SrnnParams p = make_srnn(2, 3, 2, rng);
    const Vec s = {0.3, 0.7};
    const Vec x = {0.1, 0.2, 0.3};
    Vec sx = s;
    sx.insert(sx.end(), x.begin(), x.end());
    const Vec expected_s = perceptron_forward(p.f1, sx);
    const Vec expected_y = perceptron_forward(p.f2, expected_s);
    auto [s1, y1] = srnn_cell(p, s, x);
    CHECK(s1 == expected_s);
    CHECK(y1 == expected_y);
  }
}

TEST_CASE("parameter counts match closed forms") {
  SUBCASE("paper-scale geometry") {
    const ClosedFormCounts c = closed_form_counts(55, 15);
    CHECK(c.mlp1 == 13970);
    CHECK(c.extractor == 15620);
    CHECK(c.mlp2 == 3834);
    CHECK(c.predictor == 9185);
    CHECK(c.predictor_reference == 9240);
    CHECK(c.predictor_reference - c.predictor == 55);
  }
  SUBCASE("tiny geometry") {
    CHECK(closed_form_counts(2, 1).mlp1 == 28);
  }
  SUBCASE("empty mlp counts zero") {
    CHECK(MlpParams{}.param_count() == 0);
  }
  SUBCASE("enumeration equals closed form over the full size range") {
    Rng rng(10);
    for (int ni = 2; ni <= 64; ++ni) {
      for (int no = 1; no <= ni; no += (ni > 8 ? 7 : 1)) {
        const ClosedFormCounts c = closed_form_counts(ni, no);
        CHECK(make_mlp2(no, 2 * ni, 2 * ni, rng).param_count() == c.mlp1);
        CHECK(make_lstm(ni, no, rng).param_count() == c.extractor);
        CHECK(make_mlp2(no, ni - 1, ni - 1, rng).param_count() == c.mlp2);
        CHECK(make_srnn(ni, ni, ni, rng).param_count() == c.predictor);
      }
    }
  }
}

TEST_CASE("sigmoid cells stay strictly inside (0,1)") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    LstmParams lstm = make_lstm(3, 2, rng);
    LstmState st{{rng.uniform01(), rng.uniform01(), rng.uniform01()},
                 {rng.uniform01(), rng.uniform01(), rng.uniform01()}};
    const LstmState next = lstm_cell(lstm, st, {rng.uniform01(), rng.uniform01()});
    for (const double h : next.h) {
      CHECK(h > 0.0);
      CHECK(h < 1.0);
    }
    SrnnParams srnn = make_srnn(2, 2, 2, rng);
    auto [s, y] = srnn_cell(srnn, {rng.uniform01(), rng.uniform01()},
                            {rng.uniform01(), rng.uniform01()});
    for (const double v : y) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("taped blocks reproduce the plain forward bit-exactly") {
  Rng rng(12);
  const LstmParams lstm = make_lstm(3, 2, rng);
  const SrnnParams srnn = make_srnn(3, 2, 2, rng);
  const MlpParams mlp = make_mlp2(2, 4, 3, rng);

  Vec theta;
  append_flat(mlp, theta);
  append_flat(lstm, theta);
  append_flat(srnn, theta);

  Tape tape(static_cast<int>(theta.size()));
  int offset = 0;
  const TapedMlp tmlp = bind_params(tape, mlp, offset, theta);
  const TapedLstm tlstm = bind_params(tape, lstm, offset, theta);
  const TapedSrnn tsrnn = bind_params(tape, srnn, offset, theta);
  REQUIRE(offset == static_cast<int>(theta.size()));

  const Vec x = {0.3, -0.4};
  const Vec mlp_plain = mlp_forward(mlp, x);
  const Vec mlp_taped = tape.value(taped_forward(tape, tmlp, tape.constant(x)));
  CHECK(mlp_plain == mlp_taped);

  const LstmState st{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}};
  const LstmState plain_next = lstm_cell(lstm, st, x);
  const TapedLstmState taped_next = taped_cell(
      tape, tlstm, {tape.constant(st.c), tape.constant(st.h)}, tape.constant(x));
  CHECK(plain_next.c == tape.value(taped_next.c));
  CHECK(plain_next.h == tape.value(taped_next.h));

  auto [s_plain, y_plain] = srnn_cell(srnn, {0.7, 0.8, 0.9}, x);
  auto [s_taped, y_taped] = taped_cell(tape, tsrnn, tape.constant(Vec{0.7, 0.8, 0.9}),
                                       tape.constant(x));
  CHECK(s_plain == tape.value(s_taped));
  CHECK(y_plain == tape.value(y_taped));
}

TEST_CASE("lstm and srnn cells pass grad_check") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const LstmParams lstm = make_lstm(3, 2, rng);
    Vec theta;
    append_flat(lstm, theta);
    const Vec x = {rng.uniform01(), rng.uniform01()};
    const LstmState st{{rng.uniform01(), rng.uniform01(), rng.uniform01()},
                       {rng.uniform01(), rng.uniform01(), rng.uniform01()}};

    auto build = [&](Tape& tape, const Vec& th) {
      LstmParams shape = lstm;
      int offset = 0;
      const TapedLstm tl = bind_params(tape, shape, offset, th);
      const TapedLstmState next =
          taped_cell(tape, tl, {tape.constant(st.c), tape.constant(st.h)}, tape.constant(x));
      return tape.sum(tape.square(tape.concat(next.c, next.h)));
    };
    auto f = [&](const Vec& th) {
      Tape tape(static_cast<int>(th.size()));
      return tape.scalar(build(tape, th));
    };
    auto g = [&](const Vec& th) {
      Tape tape(static_cast<int>(th.size()));
      return tape.backward(build(tape, th));
    };
    CHECK(grad_check(f, g, theta, 1e-5).pass);
  }

  for (int trial = 0; trial < 5; ++trial) {
    const SrnnParams srnn = make_srnn(3, 2, 2, rng);
    Vec theta;
    append_flat(srnn, theta);
    const Vec x = {rng.uniform01(), rng.uniform01()};
    const Vec s0 = {rng.uniform01(), rng.uniform01(), rng.uniform01()};

    auto build = [&](Tape& tape, const Vec& th) {
      SrnnParams shape = srnn;
      int offset = 0;
      const TapedSrnn ts = bind_params(tape, shape, offset, th);
      auto [s, y] = taped_cell(tape, ts, tape.constant(s0), tape.constant(x));
      return tape.sum(tape.square(tape.concat(s, y)));
    };
    auto f = [&](const Vec& th) {
      Tape tape(static_cast<int>(th.size()));
      return tape.scalar(build(tape, th));
    };
    auto g = [&](const Vec& th) {
      Tape tape(static_cast<int>(th.size()));
      return tape.backward(build(tape, th));
    };
    CHECK(grad_check(f, g, theta, 1e-5).pass);
  }
}

TEST_CASE("flatten and read_flat round trip") {
  Rng rng(14);
  LstmParams lstm = make_lstm(4, 3, rng);
  Vec theta;
  append_flat(lstm, theta);
  LstmParams copy = make_lstm(4, 3, rng);  // different values, same shape
  read_flat(copy, theta, 0);
  Vec theta2;
  append_flat(copy, theta2);
  CHECK(theta == theta2);
}

TEST_CASE("binary parameter container round trips bit-exactly") {
  Rng rng(15);
  std::vector<ParamBlock> blocks;
  blocks.push_back({"mlp1", tensors_of(make_mlp2(3, 8, 8, rng))});
  blocks.push_back({"extractor", tensors_of(make_lstm(4, 3, rng))});
  blocks.push_back({"predictor", tensors_of(make_srnn(4, 4, 4, rng))});

  std::stringstream ss;
  write_param_blocks(ss, 0xDEADBEEFull, blocks);
  auto [seed, loaded] = read_param_blocks(ss);
  CHECK(seed == 0xDEADBEEFull);
  REQUIRE(loaded.size() == blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    CHECK(loaded[b].name == blocks[b].name);
    REQUIRE(loaded[b].tensors.size() == blocks[b].tensors.size());
    for (std::size_t t = 0; t < blocks[b].tensors.size(); ++t) {
      const Matrix& a = blocks[b].tensors[t];
      const Matrix& c = loaded[b].tensors[t];
      CHECK(a.rows == c.rows);
      CHECK(a.cols == c.cols);
      REQUIRE(a.data.size() == c.data.size());
      CHECK(std::memcmp(a.data.data(), c.data.data(), a.data.size() * sizeof(double)) == 0);
    }
  }

  std::stringstream bad("not a param file");
  CHECK_THROWS_AS(read_param_blocks(bad), DataError);
}
