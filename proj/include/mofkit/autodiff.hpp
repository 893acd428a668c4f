#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mofkit/tensor.hpp"

namespace mofkit::ad {

class Tape;

// Named trainable array. Models own Parameters; tapes borrow them per
// objective evaluation and accumulate into grad on backward().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}

  void zero_grad() { grad.fill(0.0); }
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Handle into a Tape node. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  double item() const { return value().item(); }
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Dynamic computation graph for one objective evaluation. Nodes are
// appended in topological order, so backward() is a reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor v, const char* name = "const");
  // leaf that accumulates gradient, readable via Var::grad()
  Var leaf(Tensor v, const char* name = "leaf");
  // leaf bound to an external Parameter; backward adds into p.grad
  Var param(Parameter& p);

  // Propagates from a 1x1 objective. Throws NumericalError naming the first
  // non-finite node encountered during the forward recording, if any.
  void backward(Var objective);

  void clear();
  size_t num_nodes() const { return nodes_.size(); }

  // internal: used by op implementations
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    const char* name = "";
    Parameter* bound = nullptr;
    std::function<void(Tape&, int self)> backfn;  // empty for leaves/constants
  };

  Node& node(int id) { return nodes_[id]; }
  const Node& node(int id) const { return nodes_[id]; }

  Var make(Tensor v, const char* name, bool needs_grad,
           std::function<void(Tape&, int)> backfn);
  bool wants_grad(std::initializer_list<Var> parents) const;

 private:
  std::vector<Node> nodes_;
  int first_bad_ = -1;  // first node with non-finite values
};

// ---- elementwise / arithmetic ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var add_scalar(Var a, double s);
Var scale(Var a, double s);
Var scale_var(Var a, Var s);       // a * s with s 1x1
Var add_scalar_var(Var a, Var s);  // a + s with s 1x1

// ---- broadcasts ----
Var add_rowvec(Var a, Var b);  // [n,d] + [1,d]
Var add_colvec(Var a, Var b);  // [n,d] + [n,1]
Var mul_rowvec(Var a, Var b);  // [n,d] * [1,d]
Var mul_colvec(Var a, Var b);  // [n,d] * [n,1]

// ---- linear algebra ----
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T
Var matmul_tn(Var a, Var b);  // a^T * b
Var transpose(Var a);

// ---- nonlinearities ----
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var pow_const(Var a, double p);
Var abs(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var relu(Var a);
Var silu(Var a);
Var sin(Var a);
Var cos(Var a);

// ---- reductions ----
Var sum(Var a);
Var mean(Var a);
Var rowsum(Var a);  // [n,d] -> [n,1]
Var colsum(Var a);  // [n,d] -> [1,d]
Var rowmean(Var a);
Var rowmax(Var a);  // [n,d] -> [n,1]
Var sum_sq(Var a);  // sum of squares -> 1x1

// ---- softmax family (row-wise, numerically stable) ----
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

// ---- structure ----
Var gather_rows(Var a, std::vector<int> idx);
Var scatter_add_rows(Var a, std::vector<int> idx, int out_rows);
Var concat_cols(const std::vector<Var>& xs);
Var concat_rows(const std::vector<Var>& xs);
Var slice_cols(Var a, int c0, int c1);
Var slice_rows(Var a, int r0, int r1);
Var reshape(Var a, int r, int c);
Var get(Var a, int i, int j);                         // -> 1x1
Var pack(Tape& t, const std::vector<Var>& scalars, int r, int c);

// subtract each column's mean from the column: a - colmean(a), [n,d]
Var center_cols(Var a);

// ---- geometry helpers ----
// q: 4x1 quaternion (any nonzero norm; normalized internally) -> 3x3 rotation
Var quat_to_rotmat(Var q);

// convenience
Var dot(Var a, Var b);        // sum(a*b) -> 1x1
Var norm2(Var a);             // sum of squares -> 1x1
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);

}  // namespace mofkit::ad
