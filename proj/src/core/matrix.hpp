#ifndef ORDMTL_CORE_MATRIX_HPP
#define ORDMTL_CORE_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace ordmtl {

// Dense row-major matrix of doubles. Activations are stored as one row per
// sample; image tensors flatten as ((y * width) + x) * channels + c.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }
};

}  // namespace ordmtl

#endif
