#pragma once

#include <cstddef>
#include <vector>

#include "pdelearn/errors.hpp"

namespace pdelearn {

/// Dense row-major matrix. Small helper sized for candidate matrices
/// (thousands of rows, a handful of columns).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = A x. Each output element is an independent serial dot product, so the
// OpenMP version is bit-identical to matvec_serial.
void matvec(const Matrix& a, const std::vector<double>& x, std::vector<double>& y);
void matvec_serial(const Matrix& a, const std::vector<double>& x, std::vector<double>& y);

// y = A^T x.
void matvec_transposed(const Matrix& a, const std::vector<double>& x, std::vector<double>& y);
void matvec_transposed_serial(const Matrix& a, const std::vector<double>& x, std::vector<double>& y);

/// A^T A for slim matrices (cols x cols output).
Matrix gram(const Matrix& a);

double dot(const std::vector<double>& a, const std::vector<double>& b);

/// Solves the dense square system in place by Gaussian elimination with
/// partial pivoting; used for the tiny moment-projection systems.
std::vector<double> solve_dense(Matrix a, std::vector<double> b);

}  // namespace pdelearn
