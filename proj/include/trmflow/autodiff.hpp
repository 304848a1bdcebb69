#pragma once

#include <functional>
#include <vector>

#include "trmflow/errors.hpp"
#include "trmflow/linalg.hpp"

namespace trm {

// Gradient with respect to a flat parameter vector theta, index-aligned.
using GradientVector = Vec;

struct Var {
  int id = -1;
};

// Reverse-mode tape over vector-valued nodes. Nodes are recorded in
// topological order by construction; backward() walks them once in reverse
// with a fixed accumulation order, so gradients are reproducible to the bit.
//
// Elementwise primitives accept a scalar (length-1) operand on either side
// and broadcast it.
class Tape {
 public:
  explicit Tape(int n_params = 0) : n_params_(n_params) {}

  // Leaves. Parameters are bound to slices of a flat theta vector; their
  // adjoints land at the same offsets in the gradient.
  Var constant(Vec v);
  Var constant(double x);
  Var param(int offset, int len, const Vec& theta);
  // Row-major matrix leaf, usable as the left operand of matvec().
  Var param_matrix(int offset, int rows, int cols, const Vec& theta);

  // Elementwise.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var square(Var a);

  // Reductions and contractions.
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var matvec(Var w, Var x);

  // Structural.
  Var concat(Var a, Var b);
  Var slice(Var a, int offset, int len);
  Var gather(Var a, std::vector<int> indices);

  const Vec& value(Var v) const;
  double scalar(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }
  int n_params() const { return n_params_; }

  // d(loss)/d(theta) for every parameter leaf; loss must be scalar-valued.
  GradientVector backward(Var loss) const;

  // Recompute every node from its inputs and verify the recorded values are
  // reproduced bit-exactly. Diagnostic for the tape's replay invariant.
  bool replay_check() const;

 private:
  enum class Op : unsigned char {
    kConst,
    kParam,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kSigmoid,
    kTanh,
    kSquare,
    kSum,
    kDot,
    kMatVec,
    kConcat,
    kSlice,
    kGather,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    int aux0 = 0;  // param offset / slice offset
    int aux1 = 0;  // matrix cols / slice length
    Vec value;
    std::vector<int> gather_idx;
  };

  int push(Node n);
  const Node& node(Var v) const;
  Var binary_elementwise(Op op, Var a, Var b);
  static Vec eval(const Node& n, const std::vector<Node>& nodes);

  std::vector<Node> nodes_;
  int n_params_ = 0;
};

// Central finite differences (f(theta + h e_i) - f(theta - h e_i)) / (2h).
GradientVector finite_difference(const std::function<double(const Vec&)>& f, const Vec& theta,
                                 double h);

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  int worst_index = -1;
  double tolerance = 0.0;
};

// Compares an analytic gradient against central differences coordinate by
// coordinate: |g_ad - g_fd| / (|g_ad| + |g_fd| + eps), eps = 1e-6.
GradCheckReport grad_check(const std::function<double(const Vec&)>& f,
                           const std::function<GradientVector(const Vec&)>& grad_f,
                           const Vec& theta, double tolerance, double h = 1e-6);

}  // namespace trm
