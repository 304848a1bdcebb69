#include "trmflow/autodiff.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

namespace trm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw DimensionError("tape: invalid node id");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::constant(Vec v) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(v);
  return {push(std::move(n))};
}

Var Tape::constant(double x) { return constant(Vec{x}); }

Var Tape::param(int offset, int len, const Vec& theta) {
  require(offset >= 0 && len >= 1 && offset + len <= static_cast<int>(theta.size()),
          "tape: parameter slice out of range");
  require(offset + len <= n_params_, "tape: parameter slice exceeds declared size");
  Node n;
  n.op = Op::kParam;
  n.aux0 = offset;
  n.value.assign(theta.begin() + offset, theta.begin() + offset + len);
  return {push(std::move(n))};
}

Var Tape::param_matrix(int offset, int rows, int cols, const Vec& theta) {
  Var v = param(offset, rows * cols, theta);
  nodes_.back().aux1 = cols;
  return v;
}

Var Tape::binary_elementwise(Op op, Var a, Var b) {
  const Vec& va = node(a).value;
  const Vec& vb = node(b).value;
  require(va.size() == vb.size() || va.size() == 1 || vb.size() == 1,
          "tape: elementwise size mismatch");
  Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::add(Var a, Var b) { return binary_elementwise(Op::kAdd, a, b); }
Var Tape::sub(Var a, Var b) { return binary_elementwise(Op::kSub, a, b); }
Var Tape::mul(Var a, Var b) { return binary_elementwise(Op::kMul, a, b); }
Var Tape::div(Var a, Var b) { return binary_elementwise(Op::kDiv, a, b); }

Var Tape::neg(Var a) {
  Node n;
  n.op = Op::kNeg;
  n.a = a.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::kSquare;
  n.a = a.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::dot(Var a, Var b) {
  require(node(a).value.size() == node(b).value.size(), "tape: dot size mismatch");
  Node n;
  n.op = Op::kDot;
  n.a = a.id;
  n.b = b.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::matvec(Var w, Var x) {
  const Node& wn = node(w);
  require(wn.aux1 > 0, "tape: matvec left operand is not a matrix leaf");
  const int cols = wn.aux1;
  const int rows = static_cast<int>(wn.value.size()) / cols;
  require(rows * cols == static_cast<int>(wn.value.size()), "tape: matrix payload size mismatch");
  require(static_cast<int>(node(x).value.size()) == cols, "tape: matvec size mismatch");
  Node n;
  n.op = Op::kMatVec;
  n.a = w.id;
  n.b = x.id;
  n.aux1 = cols;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::concat(Var a, Var b) {
  Node n;
  n.op = Op::kConcat;
  n.a = a.id;
  n.b = b.id;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::slice(Var a, int offset, int len) {
  require(offset >= 0 && len >= 1 && offset + len <= static_cast<int>(node(a).value.size()),
          "tape: slice out of range");
  Node n;
  n.op = Op::kSlice;
  n.a = a.id;
  n.aux0 = offset;
  n.aux1 = len;
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

Var Tape::gather(Var a, std::vector<int> indices) {
  const int len = static_cast<int>(node(a).value.size());
  for (const int i : indices) require(i >= 0 && i < len, "tape: gather index out of range");
  Node n;
  n.op = Op::kGather;
  n.a = a.id;
  n.gather_idx = std::move(indices);
  n.value = eval(n, nodes_);
  return {push(std::move(n))};
}

const Vec& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Vec& val = node(v).value;
  require(val.size() == 1, "tape: node is not scalar-valued");
  return val[0];
}

Vec Tape::eval(const Node& n, const std::vector<Node>& nodes) {
  auto in = [&](int id) -> const Vec& { return nodes[static_cast<std::size_t>(id)].value; };
  switch (n.op) {
    case Op::kConst:
    case Op::kParam:
      return n.value;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv: {
      const Vec& a = in(n.a);
      const Vec& b = in(n.b);
      const std::size_t len = std::max(a.size(), b.size());
      Vec out(len);
      for (std::size_t i = 0; i < len; ++i) {
        const double x = a[a.size() == 1 ? 0 : i];
        const double y = b[b.size() == 1 ? 0 : i];
        switch (n.op) {
          case Op::kAdd: out[i] = x + y; break;
          case Op::kSub: out[i] = x - y; break;
          case Op::kMul: out[i] = x * y; break;
          default: out[i] = x / y; break;
        }
      }
      return out;
    }
    case Op::kNeg: {
      Vec out = in(n.a);
      for (double& x : out) x = -x;
      return out;
    }
    case Op::kSigmoid: {
      Vec out = in(n.a);
      for (double& x : out) x = trm::sigmoid(x);
      return out;
    }
    case Op::kTanh: {
      Vec out = in(n.a);
      for (double& x : out) x = std::tanh(x);
      return out;
    }
    case Op::kSquare: {
      Vec out = in(n.a);
      for (double& x : out) x = x * x;
      return out;
    }
    case Op::kSum: {
      double s = 0.0;
      for (const double x : in(n.a)) s += x;
      return Vec{s};
    }
    case Op::kDot: {
      const Vec& a = in(n.a);
      const Vec& b = in(n.b);
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return Vec{s};
    }
    case Op::kMatVec: {
      const Vec& w = in(n.a);
      const Vec& x = in(n.b);
      const int cols = n.aux1;
      const int rows = static_cast<int>(w.size()) / cols;
      Vec out(static_cast<std::size_t>(rows));
      for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += wr[c] * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
      }
      return out;
    }
    case Op::kConcat: {
      Vec out = in(n.a);
      const Vec& b = in(n.b);
      out.insert(out.end(), b.begin(), b.end());
      return out;
    }
    case Op::kSlice: {
      const Vec& a = in(n.a);
      return Vec(a.begin() + n.aux0, a.begin() + n.aux0 + n.aux1);
    }
    case Op::kGather: {
      const Vec& a = in(n.a);
      Vec out(n.gather_idx.size());
      for (std::size_t i = 0; i < n.gather_idx.size(); ++i) {
        out[i] = a[static_cast<std::size_t>(n.gather_idx[i])];
      }
      return out;
    }
  }
  throw NumericalError("tape: unknown op");
}

GradientVector Tape::backward(Var loss) const {
  const Node& ln = node(loss);
  if (ln.value.size() != 1) throw DimensionError("backward: loss node must be scalar-valued");

  std::vector<Vec> adj(nodes_.size());
  auto bump = [&](int id, std::size_t len) -> Vec& {
    Vec& a = adj[static_cast<std::size_t>(id)];
    if (a.empty()) a.assign(len, 0.0);
    return a;
  };
  // Adjoint accumulation into an operand, reducing over broadcast scalars.
  auto accum = [&](int id, const Vec& g, bool negate) {
    const std::size_t len = nodes_[static_cast<std::size_t>(id)].value.size();
    Vec& a = bump(id, len);
    if (len == 1 && g.size() > 1) {
      double s = 0.0;
      for (const double x : g) s += x;
      a[0] += negate ? -s : s;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) a[i] += negate ? -g[i] : g[i];
    }
  };

  adj[static_cast<std::size_t>(loss.id)] = Vec{1.0};
  GradientVector grad(static_cast<std::size_t>(n_params_), 0.0);

  for (int i = loss.id; i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    const Vec& g = adj[static_cast<std::size_t>(i)];
    if (g.empty()) continue;
    switch (n.op) {
      case Op::kConst:
        break;
      case Op::kParam:
        for (std::size_t k = 0; k < n.value.size(); ++k) {
          grad[static_cast<std::size_t>(n.aux0) + k] += g[k];
        }
        break;
      case Op::kAdd:
        accum(n.a, g, false);
        accum(n.b, g, false);
        break;
      case Op::kSub:
        accum(n.a, g, false);
        accum(n.b, g, true);
        break;
      case Op::kMul: {
        const Vec& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Vec& b = nodes_[static_cast<std::size_t>(n.b)].value;
        Vec ga(g.size()), gb(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
          ga[k] = g[k] * b[b.size() == 1 ? 0 : k];
          gb[k] = g[k] * a[a.size() == 1 ? 0 : k];
        }
        accum(n.a, ga, false);
        accum(n.b, gb, false);
        break;
      }
      case Op::kDiv: {
        const Vec& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Vec& b = nodes_[static_cast<std::size_t>(n.b)].value;
        Vec ga(g.size()), gb(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double bk = b[b.size() == 1 ? 0 : k];
          const double ak = a[a.size() == 1 ? 0 : k];
          ga[k] = g[k] / bk;
          gb[k] = -g[k] * ak / (bk * bk);
        }
        accum(n.a, ga, false);
        accum(n.b, gb, false);
        break;
      }
      case Op::kNeg:
        accum(n.a, g, true);
        break;
      case Op::kSigmoid: {
        Vec ga(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double s = n.value[k];
          ga[k] = g[k] * s * (1.0 - s);
        }
        accum(n.a, ga, false);
        break;
      }
      case Op::kTanh: {
        Vec ga(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double t = n.value[k];
          ga[k] = g[k] * (1.0 - t * t);
        }
        accum(n.a, ga, false);
        break;
      }
      case Op::kSquare: {
        const Vec& a = nodes_[static_cast<std::size_t>(n.a)].value;
        Vec ga(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] = 2.0 * a[k] * g[k];
        accum(n.a, ga, false);
        break;
      }
      case Op::kSum: {
        const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].value.size();
        Vec& a = bump(n.a, len);
        for (std::size_t k = 0; k < len; ++k) a[k] += g[0];
        break;
      }
      case Op::kDot: {
        const Vec& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Vec& b = nodes_[static_cast<std::size_t>(n.b)].value;
        Vec ga(a.size()), gb(b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
          ga[k] = g[0] * b[k];
          gb[k] = g[0] * a[k];
        }
        accum(n.a, ga, false);
        accum(n.b, gb, false);
        break;
      }
      case Op::kMatVec: {
        const Vec& w = nodes_[static_cast<std::size_t>(n.a)].value;
        const Vec& x = nodes_[static_cast<std::size_t>(n.b)].value;
        const int cols = n.aux1;
        const int rows = static_cast<int>(g.size());
        Vec gw(w.size(), 0.0), gx(x.size(), 0.0);
        for (int r = 0; r < rows; ++r) {
          const double gr = g[static_cast<std::size_t>(r)];
          double* gwr = gw.data() + static_cast<std::size_t>(r) * cols;
          const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            gwr[c] += gr * x[static_cast<std::size_t>(c)];
            gx[static_cast<std::size_t>(c)] += gr * wr[c];
          }
        }
        accum(n.a, gw, false);
        accum(n.b, gx, false);
        break;
      }
      case Op::kConcat: {
        const std::size_t la = nodes_[static_cast<std::size_t>(n.a)].value.size();
        accum(n.a, Vec(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(la)), false);
        accum(n.b, Vec(g.begin() + static_cast<std::ptrdiff_t>(la), g.end()), false);
        break;
      }
      case Op::kSlice: {
        const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].value.size();
        Vec& a = bump(n.a, len);
        for (int k = 0; k < n.aux1; ++k) {
          a[static_cast<std::size_t>(n.aux0 + k)] += g[static_cast<std::size_t>(k)];
        }
        break;
      }
      case Op::kGather: {
        const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].value.size();
        Vec& a = bump(n.a, len);
        for (std::size_t k = 0; k < n.gather_idx.size(); ++k) {
          a[static_cast<std::size_t>(n.gather_idx[k])] += g[k];
        }
        break;
      }
    }
  }
  return grad;
}

bool Tape::replay_check() const {
  for (const Node& n : nodes_) {
    if (n.op == Op::kConst || n.op == Op::kParam) continue;
    const Vec v = eval(n, nodes_);
    if (v.size() != n.value.size()) return false;
    if (std::memcmp(v.data(), n.value.data(), v.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

GradientVector finite_difference(const std::function<double(const Vec&)>& f, const Vec& theta,
                                 double h) {
  if (!(h > 0.0)) throw std::domain_error("finite_difference: h must be positive");
  GradientVector g(theta.size());
  Vec t = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = t[i];
    t[i] = saved + h;
    const double fp = f(t);
    t[i] = saved - h;
    const double fm = f(t);
    t[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

GradCheckReport grad_check(const std::function<double(const Vec&)>& f,
                           const std::function<GradientVector(const Vec&)>& grad_f,
                           const Vec& theta, double tolerance, double h) {
  if (!(tolerance > 0.0)) throw std::domain_error("grad_check: tolerance must be positive");
  constexpr double kDenomEps = 1e-6;
  const GradientVector g_ad = grad_f(theta);
  const GradientVector g_fd = finite_difference(f, theta, h);
  if (g_ad.size() != g_fd.size()) throw DimensionError("grad_check: gradient size mismatch");
  GradCheckReport r;
  r.tolerance = tolerance;
  for (std::size_t i = 0; i < g_ad.size(); ++i) {
    const double rel =
        std::abs(g_ad[i] - g_fd[i]) / (std::abs(g_ad[i]) + std::abs(g_fd[i]) + kDenomEps);
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_index = static_cast<int>(i);
    }
  }
  r.pass = r.max_rel_error <= tolerance;
  return r;
}

}  // namespace trm
