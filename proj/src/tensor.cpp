#include "mofkit/tensor.hpp"

#include <cmath>

namespace mofkit::ad {

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& m) {
  Tensor t(static_cast<int>(m.size()), m.empty() ? 0 : static_cast<int>(m[0].size()));
  for (int i = 0; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) t.at(i, j) = m[i][j];
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::l2_norm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * k];
    double* crow = &c.data[static_cast<size_t>(i) * m];
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &b.data[static_cast<size_t>(p) * m];
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int p = 0; p < n; ++p) {
    const double* arow = &a.data[static_cast<size_t>(p) * k];
    const double* brow = &b.data[static_cast<size_t>(p) * m];
    for (int i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = &c.data[static_cast<size_t>(i) * m];
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
  const int n = a.rows, k = a.cols, m = b.rows;
  for (int i = 0; i < n; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * k];
    double* crow = &c.data[static_cast<size_t>(i) * m];
    for (int j = 0; j < m; ++j) {
      const double* brow = &b.data[static_cast<size_t>(j) * k];
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  }
}

}  // namespace mofkit::ad
