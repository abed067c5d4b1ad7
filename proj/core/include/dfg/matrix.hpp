#pragma once

#include <initializer_list>
#include <vector>

namespace dfg {

/// Dense row-major matrix of doubles. The workhorse container for per-point
/// feature blocks (N x C), edge blocks (E x C), vectors (N x 1 / 1 x C) and
/// scalars (1 x 1).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::initializer_list<double> values);

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix filled(int r, int c, double v);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
};

bool approx_equal(const Matrix& a, const Matrix& b, double tol);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace dfg
