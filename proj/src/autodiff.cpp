#include "mofkit/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace mofkit::ad {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

const Tensor& Var::value() const { return tape_->node(id_).val; }
const Tensor& Var::grad() const { return tape_->node(id_).grad; }

Var Tape::make(Tensor v, const char* name, bool needs_grad,
               std::function<void(Tape&, int)> backfn) {
  Node n;
  n.needs_grad = needs_grad;
  n.name = name;
  if (first_bad_ < 0 && !v.all_finite()) first_bad_ = static_cast<int>(nodes_.size());
  if (needs_grad) n.grad = Tensor(v.rows, v.cols);
  n.val = std::move(v);
  if (needs_grad) n.backfn = std::move(backfn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor v, const char* name) {
  return make(std::move(v), name, false, {});
}

Var Tape::leaf(Tensor v, const char* name) { return make(std::move(v), name, true, {}); }

Var Tape::param(Parameter& p) {
  Var v = make(p.value, p.name.empty() ? "param" : p.name.c_str(), true, {});
  nodes_[v.id()].bound = &p;
  return v;
}

bool Tape::wants_grad(std::initializer_list<Var> parents) const {
  for (const Var& p : parents)
    if (p.valid() && nodes_[p.id()].needs_grad) return true;
  return false;
}

void Tape::backward(Var objective) {
  require(objective.valid() && objective.tape() == this, "backward: foreign var");
  require(objective.rows() == 1 && objective.cols() == 1, "backward: objective must be 1x1");
  if (first_bad_ >= 0) {
    throw NumericalError(std::string("non-finite value produced by node '") +
                         nodes_[first_bad_].name + "' (#" + std::to_string(first_bad_) + ")");
  }
  Node& top = nodes_[objective.id()];
  if (!top.needs_grad) return;  // objective independent of any leaf
  top.grad.fill(0.0);
  top.grad[0] = 1.0;
  for (int i = objective.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.backfn) n.backfn(*this, i);
  }
  for (auto& n : nodes_) {
    if (n.bound) {
      for (int k = 0; k < n.grad.size(); ++k) n.bound->grad[k] += n.grad[k];
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  first_bad_ = -1;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

Tape& tp(Var a) { return *a.tape(); }

// accumulate g into parent id
void acc(Tape& t, int pid, const Tensor& g) {
  Tape::Node& p = t.node(pid);
  if (!p.needs_grad) return;
  for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k];
}

using Map1 = double (*)(double);

Var unary_map(Var a, const char* name, Map1 f, Map1 dfdx_from_x) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.rows, av.cols);
  for (int k = 0; k < av.size(); ++k) out[k] = f(av[k]);
  const int aid = a.id();
  return t.make(std::move(out), name, t.wants_grad({a}), [aid, dfdx_from_x](Tape& t, int self) {
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    const Tensor& g = t.node(self).grad;
    const Tensor& x = p.val;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * dfdx_from_x(x[k]);
  });
}

double sigmoid_s(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// arithmetic

Var add(Var a, Var b) {
  Tape& t = tp(a);
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] += b.value()[k];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "add", t.wants_grad({a, b}), [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    acc(t, aid, g);
    acc(t, bid, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tp(a);
  require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] -= b.value()[k];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "sub", t.wants_grad({a, b}), [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    acc(t, aid, g);
    Tape::Node& pb = t.node(bid);
    if (pb.needs_grad)
      for (int k = 0; k < g.size(); ++k) pb.grad[k] -= g[k];
  });
}

Var mul(Var a, Var b) {
  Tape& t = tp(a);
  require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] *= b.value()[k];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "mul", t.wants_grad({a, b}), [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& pa = t.node(aid);
    Tape::Node& pb = t.node(bid);
    if (pa.needs_grad)
      for (int k = 0; k < g.size(); ++k) pa.grad[k] += g[k] * pb.val[k];
    if (pb.needs_grad)
      for (int k = 0; k < g.size(); ++k) pb.grad[k] += g[k] * pa.val[k];
  });
}

Var div(Var a, Var b) {
  Tape& t = tp(a);
  require(a.value().same_shape(b.value()), "div: shape mismatch");
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] /= b.value()[k];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "div", t.wants_grad({a, b}), [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& pa = t.node(aid);
    Tape::Node& pb = t.node(bid);
    if (pa.needs_grad)
      for (int k = 0; k < g.size(); ++k) pa.grad[k] += g[k] / pb.val[k];
    if (pb.needs_grad)
      for (int k = 0; k < g.size(); ++k) pb.grad[k] -= g[k] * y[k] / pb.val[k];
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var add_scalar(Var a, double s) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] += s;
  const int aid = a.id();
  return t.make(std::move(out), "add_scalar", t.wants_grad({a}),
                [aid](Tape& t, int self) { acc(t, aid, t.node(self).grad); });
}

Var scale(Var a, double s) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] *= s;
  const int aid = a.id();
  return t.make(std::move(out), "scale", t.wants_grad({a}), [aid, s](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * s;
  });
}

Var scale_var(Var a, Var s) {
  Tape& t = tp(a);
  require(s.rows() == 1 && s.cols() == 1, "scale_var: s must be 1x1");
  const double sv = s.item();
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] *= sv;
  const int aid = a.id(), sid = s.id();
  return t.make(std::move(out), "scale_var", t.wants_grad({a, s}),
                [aid, sid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& pa = t.node(aid);
                  Tape::Node& ps = t.node(sid);
                  const double sv = ps.val[0];
                  if (pa.needs_grad)
                    for (int k = 0; k < g.size(); ++k) pa.grad[k] += g[k] * sv;
                  if (ps.needs_grad) {
                    double acc_s = 0.0;
                    for (int k = 0; k < g.size(); ++k) acc_s += g[k] * pa.val[k];
                    ps.grad[0] += acc_s;
                  }
                });
}

Var add_scalar_var(Var a, Var s) {
  Tape& t = tp(a);
  require(s.rows() == 1 && s.cols() == 1, "add_scalar_var: s must be 1x1");
  const double sv = s.item();
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] += sv;
  const int aid = a.id(), sid = s.id();
  return t.make(std::move(out), "add_scalar_var", t.wants_grad({a, s}),
                [aid, sid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  acc(t, aid, g);
                  Tape::Node& ps = t.node(sid);
                  if (ps.needs_grad) {
                    double acc_s = 0.0;
                    for (int k = 0; k < g.size(); ++k) acc_s += g[k];
                    ps.grad[0] += acc_s;
                  }
                });
}

// ---------------------------------------------------------------------------
// broadcasts

Var add_rowvec(Var a, Var b) {
  Tape& t = tp(a);
  require(b.rows() == 1 && b.cols() == a.cols(), "add_rowvec: b must be 1 x cols(a)");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv[j];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "add_rowvec", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  acc(t, aid, g);
                  Tape::Node& pb = t.node(bid);
                  if (pb.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pb.grad[j] += g.at(i, j);
                });
}

Var add_colvec(Var a, Var b) {
  Tape& t = tp(a);
  require(b.cols() == 1 && b.rows() == a.rows(), "add_colvec: b must be rows(a) x 1");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv[i];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "add_colvec", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  acc(t, aid, g);
                  Tape::Node& pb = t.node(bid);
                  if (pb.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pb.grad[i] += g.at(i, j);
                });
}

Var mul_rowvec(Var a, Var b) {
  Tape& t = tp(a);
  require(b.rows() == 1 && b.cols() == a.cols(), "mul_rowvec: b must be 1 x cols(a)");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) *= bv[j];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "mul_rowvec", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& pa = t.node(aid);
                  Tape::Node& pb = t.node(bid);
                  if (pa.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pa.grad.at(i, j) += g.at(i, j) * pb.val[j];
                  if (pb.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pb.grad[j] += g.at(i, j) * pa.val.at(i, j);
                });
}

Var mul_colvec(Var a, Var b) {
  Tape& t = tp(a);
  require(b.cols() == 1 && b.rows() == a.rows(), "mul_colvec: b must be rows(a) x 1");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) *= bv[i];
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "mul_colvec", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& pa = t.node(aid);
                  Tape::Node& pb = t.node(bid);
                  if (pa.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pa.grad.at(i, j) += g.at(i, j) * pb.val[i];
                  if (pb.needs_grad)
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < g.cols; ++j) pb.grad[i] += g.at(i, j) * pa.val.at(i, j);
                });
}

// ---------------------------------------------------------------------------
// linear algebra

Var matmul(Var a, Var b) {
  Tape& t = tp(a);
  require(a.cols() == b.rows(), "matmul: inner dims mismatch");
  Tensor out(a.rows(), b.cols());
  matmul_acc(a.value(), b.value(), out);
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "matmul", t.wants_grad({a, b}), [aid, bid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& pa = t.node(aid);
    Tape::Node& pb = t.node(bid);
    if (pa.needs_grad) matmul_a_bt_acc(g, pb.val, pa.grad);
    if (pb.needs_grad) matmul_at_b_acc(pa.val, g, pb.grad);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tp(a);
  require(a.cols() == b.cols(), "matmul_nt: inner dims mismatch");
  Tensor out(a.rows(), b.rows());
  matmul_a_bt_acc(a.value(), b.value(), out);
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "matmul_nt", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& pa = t.node(aid);
                  Tape::Node& pb = t.node(bid);
                  if (pa.needs_grad) matmul_acc(g, pb.val, pa.grad);
                  if (pb.needs_grad) matmul_at_b_acc(g, pa.val, pb.grad);
                });
}

Var matmul_tn(Var a, Var b) {
  Tape& t = tp(a);
  require(a.rows() == b.rows(), "matmul_tn: inner dims mismatch");
  Tensor out(a.cols(), b.cols());
  matmul_at_b_acc(a.value(), b.value(), out);
  const int aid = a.id(), bid = b.id();
  return t.make(std::move(out), "matmul_tn", t.wants_grad({a, b}),
                [aid, bid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& pa = t.node(aid);
                  Tape::Node& pb = t.node(bid);
                  if (pa.needs_grad) matmul_a_bt_acc(pb.val, g, pa.grad);
                  if (pb.needs_grad) matmul_acc(pa.val, g, pb.grad);
                });
}

Var transpose(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.cols, av.rows);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(j, i) = av.at(i, j);
  const int aid = a.id();
  return t.make(std::move(out), "transpose", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) p.grad.at(j, i) += g.at(i, j);
  });
}

// ---------------------------------------------------------------------------
// nonlinearities

Var exp(Var a) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] = std::exp(out[k]);
  const int aid = a.id();
  return t.make(std::move(out), "exp", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * y[k];
  });
}

Var log(Var a) {
  return unary_map(a, "log", [](double x) { return std::log(x); },
                   [](double x) { return 1.0 / x; });
}

Var sqrt(Var a) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] = std::sqrt(out[k]);
  const int aid = a.id();
  return t.make(std::move(out), "sqrt", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * 0.5 / y[k];
  });
}

Var square(Var a) {
  return unary_map(a, "square", [](double x) { return x * x; },
                   [](double x) { return 2.0 * x; });
}

Var pow_const(Var a, double p) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] = std::pow(out[k], p);
  const int aid = a.id();
  return t.make(std::move(out), "pow_const", t.wants_grad({a}), [aid, p](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& pa = t.node(aid);
    if (!pa.needs_grad) return;
    for (int k = 0; k < g.size(); ++k)
      pa.grad[k] += g[k] * p * std::pow(pa.val[k], p - 1.0);
  });
}

Var abs(Var a) {
  return unary_map(a, "abs", [](double x) { return std::fabs(x); },
                   [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var tanh(Var a) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] = std::tanh(out[k]);
  const int aid = a.id();
  return t.make(std::move(out), "tanh", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * (1.0 - y[k] * y[k]);
  });
}

Var sigmoid(Var a) {
  Tape& t = tp(a);
  Tensor out = a.value();
  for (int k = 0; k < out.size(); ++k) out[k] = sigmoid_s(out[k]);
  const int aid = a.id();
  return t.make(std::move(out), "sigmoid", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k] * y[k] * (1.0 - y[k]);
  });
}

Var softplus(Var a) {
  return unary_map(a, "softplus",
                   [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
                   [](double x) { return sigmoid_s(x); });
}

Var relu(Var a) {
  return unary_map(a, "relu", [](double x) { return x > 0 ? x : 0.0; },
                   [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Var silu(Var a) {
  return unary_map(a, "silu", [](double x) { return x * sigmoid_s(x); },
                   [](double x) {
                     const double s = sigmoid_s(x);
                     return s * (1.0 + x * (1.0 - s));
                   });
}

Var sin(Var a) {
  return unary_map(a, "sin", [](double x) { return std::sin(x); },
                   [](double x) { return std::cos(x); });
}

Var cos(Var a) {
  return unary_map(a, "cos", [](double x) { return std::cos(x); },
                   [](double x) { return -std::sin(x); });
}

// ---------------------------------------------------------------------------
// reductions

Var sum(Var a) {
  Tape& t = tp(a);
  double s = 0.0;
  for (int k = 0; k < a.value().size(); ++k) s += a.value()[k];
  const int aid = a.id();
  return t.make(Tensor::scalar(s), "sum", t.wants_grad({a}), [aid](Tape& t, int self) {
    const double g = t.node(self).grad[0];
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < p.grad.size(); ++k) p.grad[k] += g;
  });
}

Var mean(Var a) {
  const int n = a.value().size();
  return scale(sum(a), 1.0 / n);
}

Var rowsum(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += av.at(i, j);
    out[i] = s;
  }
  const int aid = a.id();
  return t.make(std::move(out), "rowsum", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int i = 0; i < p.grad.rows; ++i)
      for (int j = 0; j < p.grad.cols; ++j) p.grad.at(i, j) += g[i];
  });
}

Var colsum(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(1, av.cols);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) out[j] += av.at(i, j);
  const int aid = a.id();
  return t.make(std::move(out), "colsum", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int i = 0; i < p.grad.rows; ++i)
      for (int j = 0; j < p.grad.cols; ++j) p.grad.at(i, j) += g[j];
  });
}

Var rowmean(Var a) { return scale(rowsum(a), 1.0 / a.cols()); }

Var rowmax(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.rows, 1);
  std::vector<int> arg(av.rows, 0);
  for (int i = 0; i < av.rows; ++i) {
    double best = av.at(i, 0);
    int bj = 0;
    for (int j = 1; j < av.cols; ++j)
      if (av.at(i, j) > best) {
        best = av.at(i, j);
        bj = j;
      }
    out[i] = best;
    arg[i] = bj;
  }
  const int aid = a.id();
  return t.make(std::move(out), "rowmax", t.wants_grad({a}),
                [aid, arg = std::move(arg)](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (int i = 0; i < g.rows; ++i) p.grad.at(i, arg[i]) += g[i];
                });
}

Var sum_sq(Var a) {
  Tape& t = tp(a);
  double s = 0.0;
  const Tensor& av = a.value();
  for (int k = 0; k < av.size(); ++k) s += av[k] * av[k];
  const int aid = a.id();
  return t.make(Tensor::scalar(s), "sum_sq", t.wants_grad({a}), [aid](Tape& t, int self) {
    const double g = t.node(self).grad[0];
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < p.grad.size(); ++k) p.grad[k] += 2.0 * g * p.val[k];
  });
}

// ---------------------------------------------------------------------------
// softmax

Var softmax_rows(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.rows, av.cols);
  for (int i = 0; i < av.rows; ++i) {
    double m = av.at(i, 0);
    for (int j = 1; j < av.cols; ++j) m = std::max(m, av.at(i, j));
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) {
      out.at(i, j) = std::exp(av.at(i, j) - m);
      s += out.at(i, j);
    }
    for (int j = 0; j < av.cols; ++j) out.at(i, j) /= s;
  }
  const int aid = a.id();
  return t.make(std::move(out), "softmax_rows", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    const Tensor& y = t.node(self).val;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int i = 0; i < g.rows; ++i) {
      double dotgy = 0.0;
      for (int j = 0; j < g.cols; ++j) dotgy += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < g.cols; ++j)
        p.grad.at(i, j) += y.at(i, j) * (g.at(i, j) - dotgy);
    }
  });
}

Var log_softmax_rows(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(av.rows, av.cols);
  for (int i = 0; i < av.rows; ++i) {
    double m = av.at(i, 0);
    for (int j = 1; j < av.cols; ++j) m = std::max(m, av.at(i, j));
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += std::exp(av.at(i, j) - m);
    const double lse = m + std::log(s);
    for (int j = 0; j < av.cols; ++j) out.at(i, j) = av.at(i, j) - lse;
  }
  const int aid = a.id();
  return t.make(std::move(out), "log_softmax_rows", t.wants_grad({a}),
                [aid](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  const Tensor& y = t.node(self).val;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (int i = 0; i < g.rows; ++i) {
                    double gs = 0.0;
                    for (int j = 0; j < g.cols; ++j) gs += g.at(i, j);
                    for (int j = 0; j < g.cols; ++j)
                      p.grad.at(i, j) += g.at(i, j) - gs * std::exp(y.at(i, j));
                  }
                });
}

// ---------------------------------------------------------------------------
// structure

Var gather_rows(Var a, std::vector<int> idx) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out(static_cast<int>(idx.size()), av.cols);
  for (size_t i = 0; i < idx.size(); ++i)
    for (int j = 0; j < av.cols; ++j) out.at(static_cast<int>(i), j) = av.at(idx[i], j);
  const int aid = a.id();
  return t.make(std::move(out), "gather_rows", t.wants_grad({a}),
                [aid, idx = std::move(idx)](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (size_t i = 0; i < idx.size(); ++i)
                    for (int j = 0; j < g.cols; ++j)
                      p.grad.at(idx[i], j) += g.at(static_cast<int>(i), j);
                });
}

Var scatter_add_rows(Var a, std::vector<int> idx, int out_rows) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  require(static_cast<int>(idx.size()) == av.rows, "scatter_add_rows: idx size mismatch");
  Tensor out(out_rows, av.cols);
  for (size_t i = 0; i < idx.size(); ++i)
    for (int j = 0; j < av.cols; ++j) out.at(idx[i], j) += av.at(static_cast<int>(i), j);
  const int aid = a.id();
  return t.make(std::move(out), "scatter_add_rows", t.wants_grad({a}),
                [aid, idx = std::move(idx)](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (size_t i = 0; i < idx.size(); ++i)
                    for (int j = 0; j < g.cols; ++j)
                      p.grad.at(static_cast<int>(i), j) += g.at(idx[i], j);
                });
}

Var concat_cols(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_cols: empty");
  Tape& t = tp(xs[0]);
  const int rows = xs[0].rows();
  int cols = 0;
  for (const Var& x : xs) {
    require(x.rows() == rows, "concat_cols: row mismatch");
    cols += x.cols();
  }
  Tensor out(rows, cols);
  int off = 0;
  std::vector<int> ids, offs, widths;
  bool ng = false;
  for (const Var& x : xs) {
    const Tensor& xv = x.value();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < xv.cols; ++j) out.at(i, off + j) = xv.at(i, j);
    ids.push_back(x.id());
    offs.push_back(off);
    widths.push_back(xv.cols);
    off += xv.cols;
    ng = ng || t.node(x.id()).needs_grad;
  }
  return t.make(std::move(out), "concat_cols", ng,
                [ids, offs, widths](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  for (size_t k = 0; k < ids.size(); ++k) {
                    Tape::Node& p = t.node(ids[k]);
                    if (!p.needs_grad) continue;
                    for (int i = 0; i < g.rows; ++i)
                      for (int j = 0; j < widths[k]; ++j)
                        p.grad.at(i, j) += g.at(i, offs[k] + j);
                  }
                });
}

Var concat_rows(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_rows: empty");
  Tape& t = tp(xs[0]);
  const int cols = xs[0].cols();
  int rows = 0;
  for (const Var& x : xs) {
    require(x.cols() == cols, "concat_rows: col mismatch");
    rows += x.rows();
  }
  Tensor out(rows, cols);
  int off = 0;
  std::vector<int> ids, offs, heights;
  bool ng = false;
  for (const Var& x : xs) {
    const Tensor& xv = x.value();
    for (int i = 0; i < xv.rows; ++i)
      for (int j = 0; j < cols; ++j) out.at(off + i, j) = xv.at(i, j);
    ids.push_back(x.id());
    offs.push_back(off);
    heights.push_back(xv.rows);
    off += xv.rows;
    ng = ng || t.node(x.id()).needs_grad;
  }
  return t.make(std::move(out), "concat_rows", ng,
                [ids, offs, heights](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  for (size_t k = 0; k < ids.size(); ++k) {
                    Tape::Node& p = t.node(ids[k]);
                    if (!p.needs_grad) continue;
                    for (int i = 0; i < heights[k]; ++i)
                      for (int j = 0; j < g.cols; ++j)
                        p.grad.at(i, j) += g.at(offs[k] + i, j);
                  }
                });
}

Var slice_cols(Var a, int c0, int c1) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  require(0 <= c0 && c0 < c1 && c1 <= av.cols, "slice_cols: bad range");
  Tensor out(av.rows, c1 - c0);
  for (int i = 0; i < av.rows; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = av.at(i, j);
  const int aid = a.id();
  return t.make(std::move(out), "slice_cols", t.wants_grad({a}),
                [aid, c0](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) p.grad.at(i, c0 + j) += g.at(i, j);
                });
}

Var slice_rows(Var a, int r0, int r1) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  require(0 <= r0 && r0 < r1 && r1 <= av.rows, "slice_rows: bad range");
  Tensor out(r1 - r0, av.cols);
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(i - r0, j) = av.at(i, j);
  const int aid = a.id();
  return t.make(std::move(out), "slice_rows", t.wants_grad({a}),
                [aid, r0](Tape& t, int self) {
                  const Tensor& g = t.node(self).grad;
                  Tape::Node& p = t.node(aid);
                  if (!p.needs_grad) return;
                  for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) p.grad.at(r0 + i, j) += g.at(i, j);
                });
}

Var reshape(Var a, int r, int c) {
  Tape& t = tp(a);
  require(r * c == a.value().size(), "reshape: size mismatch");
  Tensor out = a.value();
  out.rows = r;
  out.cols = c;
  const int aid = a.id();
  return t.make(std::move(out), "reshape", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int k = 0; k < g.size(); ++k) p.grad[k] += g[k];
  });
}

Var get(Var a, int i, int j) {
  Tape& t = tp(a);
  const double v = a.value().at(i, j);
  const int aid = a.id();
  return t.make(Tensor::scalar(v), "get", t.wants_grad({a}), [aid, i, j](Tape& t, int self) {
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    p.grad.at(i, j) += t.node(self).grad[0];
  });
}

Var pack(Tape& t, const std::vector<Var>& scalars, int r, int c) {
  require(static_cast<int>(scalars.size()) == r * c, "pack: count mismatch");
  Tensor out(r, c);
  std::vector<int> ids;
  bool ng = false;
  for (int k = 0; k < r * c; ++k) {
    require(scalars[k].rows() == 1 && scalars[k].cols() == 1, "pack: inputs must be 1x1");
    out[k] = scalars[k].item();
    ids.push_back(scalars[k].id());
    ng = ng || t.node(scalars[k].id()).needs_grad;
  }
  return t.make(std::move(out), "pack", ng, [ids](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    for (size_t k = 0; k < ids.size(); ++k) {
      Tape::Node& p = t.node(ids[k]);
      if (p.needs_grad) p.grad[0] += g[k];
    }
  });
}

Var center_cols(Var a) {
  Tape& t = tp(a);
  const Tensor& av = a.value();
  Tensor out = av;
  for (int j = 0; j < av.cols; ++j) {
    double m = 0.0;
    for (int i = 0; i < av.rows; ++i) m += av.at(i, j);
    m /= av.rows;
    for (int i = 0; i < av.rows; ++i) out.at(i, j) -= m;
  }
  const int aid = a.id();
  return t.make(std::move(out), "center_cols", t.wants_grad({a}), [aid](Tape& t, int self) {
    const Tensor& g = t.node(self).grad;
    Tape::Node& p = t.node(aid);
    if (!p.needs_grad) return;
    for (int j = 0; j < g.cols; ++j) {
      double m = 0.0;
      for (int i = 0; i < g.rows; ++i) m += g.at(i, j);
      m /= g.rows;
      for (int i = 0; i < g.rows; ++i) p.grad.at(i, j) += g.at(i, j) - m;
    }
  });
}

// ---------------------------------------------------------------------------
// composites

Var quat_to_rotmat(Var q) {
  Tape& t = tp(q);
  require(q.value().size() == 4, "quat_to_rotmat: q must have 4 entries");
  Var qn = scale_var(reshape(q, 4, 1), pow_const(sum_sq(q), -0.5));
  Var w = get(qn, 0, 0), x = get(qn, 1, 0), y = get(qn, 2, 0), z = get(qn, 3, 0);
  auto two = [&](Var u, Var v) { return scale(mul(u, v), 2.0); };
  Var one = t.constant(Tensor::scalar(1.0));
  std::vector<Var> e = {
      sub(one, add(two(y, y), two(z, z))), sub(two(x, y), two(w, z)), add(two(x, z), two(w, y)),
      add(two(x, y), two(w, z)), sub(one, add(two(x, x), two(z, z))), sub(two(y, z), two(w, x)),
      sub(two(x, z), two(w, y)), add(two(y, z), two(w, x)), sub(one, add(two(x, x), two(y, y)))};
  return pack(t, e, 3, 3);
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

Var norm2(Var a) { return sum_sq(a); }

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  Var m = rowmean(x);
  Var c = add_colvec(x, neg(m));
  Var v = rowmean(square(c));
  Var inv = pow_const(add_scalar(v, eps), -0.5);
  Var y = mul_colvec(c, inv);
  return add_rowvec(mul_rowvec(y, gain), bias);
}

}  // namespace mofkit::ad
