#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace mofkit::ad {

// Dense row-major matrix of doubles. Scalars are 1x1, vectors n x 1 or 1 x n.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
  Tensor(int r, int c, double fill)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v) { return Tensor(r, c, v); }
  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor from_rows(const std::vector<std::vector<double>>& m);

  int size() const { return rows * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
  double& operator[](size_t k) { return data[k]; }
  double operator[](size_t k) const { return data[k]; }

  double item() const {
    assert(rows == 1 && cols == 1);
    return data[0];
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  bool all_finite() const;
  double l2_norm() const;
};

// c += a * b  (row-major, no aliasing)
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c);
// c += a^T * b
void matmul_at_b_acc(const Tensor& a, const Tensor& b, Tensor& c);
// c += a * b^T
void matmul_a_bt_acc(const Tensor& a, const Tensor& b, Tensor& c);

}  // namespace mofkit::ad
