#ifndef L2NAS_MATRIX_HPP
#define L2NAS_MATRIX_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace l2nas {

// Dense row-major matrix of doubles. Small and value-semantic; no view types.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Binary matrix used for discretized architectures.
struct BinaryMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  BinaryMatrix() = default;
  BinaryMatrix(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0) {}

  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  bool operator==(const BinaryMatrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }

  int row_sum(int r) const {
    int s = 0;
    for (int c = 0; c < cols; ++c) s += at(r, c);
    return s;
  }

  Matrix to_real() const {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = data[i];
    return m;
  }
};

}  // namespace l2nas

#endif  // L2NAS_MATRIX_HPP
