#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "trmflow/errors.hpp"

namespace trm {

using Vec = std::vector<double>;

// Dense row-major matrix, sized for road-scale problems (tens of columns).
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  Vec row(int r) const {
    return Vec(data.begin() + static_cast<std::ptrdiff_t>(r) * cols,
               data.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
  }

  void set_row(int r, const Vec& v) {
    if (static_cast<int>(v.size()) != cols) throw DimensionError("set_row: size mismatch");
    for (int c = 0; c < cols; ++c) (*this)(r, c) = v[c];
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Numerically stable logistic function; shared by the plain forward passes
// and the tape so both paths produce bit-identical values.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace trm
