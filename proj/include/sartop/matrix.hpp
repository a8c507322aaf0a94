#ifndef SARTOP_MATRIX_HPP_
#define SARTOP_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sartop/error.hpp"

namespace sartop {

/// Dense row-major double matrix. Used for parameter arrays and for batches
/// of feature/score rows. Deliberately minimal; everything heavier lives in
/// the routines that consume it.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    if (r >= rows) fail(ErrorCode::kInvalidArgument, "Matrix::row out of range");
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    if (r >= rows) fail(ErrorCode::kInvalidArgument, "Matrix::row out of range");
    return {data.data() + r * cols, cols};
  }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

}  // namespace sartop

#endif  // SARTOP_MATRIX_HPP_
