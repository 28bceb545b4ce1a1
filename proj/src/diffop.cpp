#include "pdelearn/diffop.hpp"

#include <cmath>

#include "pdelearn/errors.hpp"
#include "pdelearn/linalg.hpp"

namespace pdelearn {

namespace {

double factorial(int i) {
  double f = 1.0;
  for (int j = 2; j <= i; ++j) f *= j;
  return f;
}

}  // namespace

void ConvKernel::validate() const {
  const int n = size();
  if (n < 3 || n % 2 == 0) fail(ErrorKind::Shape, "kernel size must be odd and >= 3");
  if (derivative_order) {
    const int order = *derivative_order;
    if (order < 0 || order >= n) fail(ErrorKind::Config, "derivative order out of [0, N-1]");
    const auto v = moment_vector(*this);
    for (int j = 0; j < order; ++j) {
      if (std::fabs(v[j]) > 1e-9) fail(ErrorKind::Config, "low moment not zero");
    }
    if (std::fabs(v[order] - 1.0) > 1e-9) fail(ErrorKind::Config, "pinned moment not one");
  }
}

std::vector<double> moment_vector(const ConvKernel& kernel) {
  const int n = kernel.size();
  const int half = kernel.half_width();
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int g = -half; g <= half; ++g) {
      acc += std::pow(static_cast<double>(g), i) * kernel.weights[g + half];
    }
    v[i] = acc / factorial(i);
  }
  return v;
}

ConvKernel constrain_kernel(const ConvKernel& kernel, int order) {
  const int n = kernel.size();
  if (n < 3 || n % 2 == 0) fail(ErrorKind::Shape, "kernel size must be odd and >= 3");
  if (order < 0 || order > n - 1) fail(ErrorKind::Config, "order out of [0, N-1]");
  const int half = kernel.half_width();
  const int n_constraints = order + 1;

  // A q = c with A[j][g] = g^j / j!, c = e_order; minimum-norm correction
  // q' = q + A^T (A A^T)^-1 (c - A q).
  Matrix a(n_constraints, n);
  for (int j = 0; j < n_constraints; ++j) {
    for (int g = -half; g <= half; ++g) {
      a(j, g + half) = std::pow(static_cast<double>(g), j) / factorial(j);
    }
  }
  std::vector<double> residual(n_constraints);
  for (int j = 0; j < n_constraints; ++j) {
    double aq = 0.0;
    for (int g = 0; g < n; ++g) aq += a(j, g) * kernel.weights[g];
    residual[j] = (j == order ? 1.0 : 0.0) - aq;
  }
  Matrix aat(n_constraints, n_constraints);
  for (int i = 0; i < n_constraints; ++i) {
    for (int j = 0; j < n_constraints; ++j) {
      double acc = 0.0;
      for (int g = 0; g < n; ++g) acc += a(i, g) * a(j, g);
      aat(i, j) = acc;
    }
  }
  // distinct tap offsets make A full rank; solve_dense throws InternalError otherwise
  const std::vector<double> mu = solve_dense(aat, residual);

  ConvKernel out;
  out.weights = kernel.weights;
  for (int g = 0; g < n; ++g) {
    double corr = 0.0;
    for (int j = 0; j < n_constraints; ++j) corr += a(j, g) * mu[j];
    out.weights[g] += corr;
  }
  out.derivative_order = order;
  return out;
}

double convolve(const ConvKernel& kernel, std::span<const double> window) {
  const std::size_t n = kernel.weights.size();
  if (window.size() != n) fail(ErrorKind::Shape, "window length must equal kernel size");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += kernel.weights[i] * window[i];
  return acc;
}

std::vector<double> fd_oracle(const std::vector<double>& values,
                              const std::vector<double>& coords, int order) {
  if (order != 1 && order != 2) {
    fail(ErrorKind::UnsupportedOrder, "fd_oracle supports orders 1 and 2");
  }
  const std::size_t m = values.size();
  if (coords.size() != m) fail(ErrorKind::Shape, "values/coords length mismatch");
  if (m < static_cast<std::size_t>(order) + 1) fail(ErrorKind::TooShort, "too few points");
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (!(coords[i] < coords[i + 1]) && !(coords[i] > coords[i + 1])) {
      fail(ErrorKind::Ingest, "coords must be strictly monotone");
    }
  }

  std::vector<double> out(m);
  if (order == 1) {
    out[0] = (values[1] - values[0]) / (coords[1] - coords[0]);
    out[m - 1] = (values[m - 1] - values[m - 2]) / (coords[m - 1] - coords[m - 2]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      // three-point first derivative, exact for quadratics on non-uniform grids
      const double h1 = coords[i] - coords[i - 1];
      const double h2 = coords[i + 1] - coords[i];
      out[i] = (-h2 / (h1 * (h1 + h2))) * values[i - 1] +
               ((h2 - h1) / (h1 * h2)) * values[i] +
               (h1 / (h2 * (h1 + h2))) * values[i + 1];
    }
  } else {
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double h1 = coords[i] - coords[i - 1];
      const double h2 = coords[i + 1] - coords[i];
      out[i] = 2.0 * (h2 * values[i - 1] - (h1 + h2) * values[i] + h1 * values[i + 1]) /
               (h1 * h2 * (h1 + h2));
    }
    out[0] = out[1];
    out[m - 1] = out[m - 2];
  }
  return out;
}

}  // namespace pdelearn
