#include "dfg/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "dfg/error.hpp"

namespace dfg {

Matrix::Matrix(int r, int c, std::initializer_list<double> values) : Matrix(r, c) {
  if (values.size() != data.size()) {
    throw Error(ErrorCode::ShapeMismatch, "matrix initializer size does not match shape");
  }
  size_t i = 0;
  for (double v : values) data[i++] = v;
}

Matrix Matrix::filled(int r, int c, double v) {
  Matrix m(r, c);
  for (auto& x : m.data) x = v;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (!a.same_shape(b)) return false;
  return max_abs_diff(a, b) <= tol;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

}  // namespace dfg
