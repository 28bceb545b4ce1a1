#include "pdelearn/linalg.hpp"

#include <cmath>
#include <cstddef>

#include "pdelearn/parallel.hpp"

namespace pdelearn {

namespace {

inline double row_dot(const Matrix& a, std::size_t r, const std::vector<double>& x) {
  const double* row = a.row_ptr(r);
  double acc = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
  return acc;
}

inline double col_dot(const Matrix& a, std::size_t c, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) acc += a(r, c) * x[r];
  return acc;
}

}  // namespace

void matvec(const Matrix& a, const std::vector<double>& x, std::vector<double>& y) {
  if (x.size() != a.cols()) fail(ErrorKind::Shape, "matvec: size mismatch");
  y.resize(a.rows());
  par::parallel_for(a.rows(), [&](std::size_t r) { y[r] = row_dot(a, r, x); });
}

void matvec_serial(const Matrix& a, const std::vector<double>& x, std::vector<double>& y) {
  if (x.size() != a.cols()) fail(ErrorKind::Shape, "matvec: size mismatch");
  y.resize(a.rows());
  par::serial_for(a.rows(), [&](std::size_t r) { y[r] = row_dot(a, r, x); });
}

void matvec_transposed(const Matrix& a, const std::vector<double>& x, std::vector<double>& y) {
  if (x.size() != a.rows()) fail(ErrorKind::Shape, "matvec_transposed: size mismatch");
  y.resize(a.cols());
  par::parallel_for(a.cols(), [&](std::size_t c) { y[c] = col_dot(a, c, x); });
}

void matvec_transposed_serial(const Matrix& a, const std::vector<double>& x,
                              std::vector<double>& y) {
  if (x.size() != a.rows()) fail(ErrorKind::Shape, "matvec_transposed: size mismatch");
  y.resize(a.cols());
  par::serial_for(a.cols(), [&](std::size_t c) { y[c] = col_dot(a, c, x); });
}

Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  par::parallel_for(a.cols(), [&](std::size_t i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) acc += a(r, i) * a(r, j);
      g(i, j) = acc;
    }
  });
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) fail(ErrorKind::Shape, "solve_dense: not square");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::fabs(a(r, k)) > std::fabs(a(pivot, k))) pivot = r;
    }
    if (std::fabs(a(pivot, k)) < 1e-14) {
      fail(ErrorKind::Internal, "solve_dense: singular system");
    }
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(pivot, c));
      std::swap(b[k], b[pivot]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
    x[i] = acc / a(i, i);
  }
  return x;
}

}  // namespace pdelearn
