#include "pdelearn/sparsereg.hpp"

#include <cmath>

#include "pdelearn/errors.hpp"

namespace pdelearn {

void LassoProblem::validate() const {
  if (design.rows() != response.size()) {
    fail(ErrorKind::Shape, "design rows must match response length");
  }
  if (design.rows() == 0 || design.cols() == 0) fail(ErrorKind::Shape, "empty problem");
  if (lambda < 0) fail(ErrorKind::Config, "lambda must be nonnegative");
  for (double v : design.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "non-finite design entry");
  }
  if (max_iters <= 0) fail(ErrorKind::Config, "max_iters must be positive");
  if (tol <= 0) fail(ErrorKind::Config, "tol must be positive");
}

double soft_threshold(double value, double threshold) {
  if (threshold < 0) fail(ErrorKind::Config, "threshold must be nonnegative");
  const double mag = std::fabs(value) - threshold;
  if (mag <= 0) return 0.0;
  return value < 0 ? -mag : mag;
}

namespace {

double power_iteration_two_gram(const Matrix& gram_matrix) {
  const std::size_t n = gram_matrix.cols();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> gv(n);
  double eig = 0.0;
  for (int step = 0; step < 50; ++step) {
    matvec(gram_matrix, v, gv);
    const double rayleigh = dot(v, gv);  // v is unit length
    const double norm = std::sqrt(dot(gv, gv));
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = gv[i] / norm;
    if (std::fabs(rayleigh - eig) < 1e-8) {
      eig = rayleigh;
      break;
    }
    eig = rayleigh;
  }
  return 2.0 * eig;
}

}  // namespace

FistaResult fista(const LassoProblem& problem) {
  problem.validate();
  const Matrix& x = problem.design;
  const std::vector<double>& b = problem.response;
  const std::size_t n = x.cols();

  const Matrix g = gram(x);  // X^T X
  std::vector<double> xtb;
  matvec_transposed(x, b, xtb);

  double lipschitz = power_iteration_two_gram(g);
  if (!(lipschitz > 0.0)) lipschitz = 1.0;  // zero design: prox keeps w at 0

  auto objective = [&](const std::vector<double>& w) {
    std::vector<double> xw;
    matvec(x, w, xw);
    double quad = 0.0;
    for (std::size_t r = 0; r < xw.size(); ++r) {
      const double d = b[r] - xw[r];
      quad += d * d;
    }
    double l1 = 0.0;
    for (double v : w) l1 += std::fabs(v);
    return quad + problem.lambda * l1;
  };

  // gradient of ||b - Xw||^2 at z is 2 (X^T X z - X^T b)
  std::vector<double> gz(n);
  auto prox_step = [&](const std::vector<double>& z, std::vector<double>& out) {
    matvec(g, z, gz);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double grad = 2.0 * (gz[i] - xtb[i]);
      out[i] = soft_threshold(z[i] - grad / lipschitz, problem.lambda / lipschitz);
    }
  };

  std::vector<double> w(n, 0.0);
  std::vector<double> z = w;
  std::vector<double> cand;
  double momentum = 1.0;
  double best = objective(w);

  FistaResult result;
  result.objective_trace.push_back(best);

  int it = 0;
  for (; it < problem.max_iters; ++it) {
    prox_step(z, cand);
    double oc = objective(cand);
    if (!std::isfinite(oc)) fail(ErrorKind::Numeric, "fista: non-finite objective");
    if (oc > best) {
      // restart momentum and retry as a plain proximal step from w
      momentum = 1.0;
      prox_step(w, cand);
      oc = objective(cand);
      if (!std::isfinite(oc)) fail(ErrorKind::Numeric, "fista: non-finite objective");
      if (oc > best) {
        // cannot decrease further at this step size
        result.objective_trace.push_back(best);
        break;
      }
    }
    const double next_momentum = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = cand[i] + (momentum - 1.0) / next_momentum * (cand[i] - w[i]);
    }
    w = cand;
    momentum = next_momentum;
    const double decrease = best - oc;
    best = oc;
    result.objective_trace.push_back(best);
    if (decrease < problem.tol) {
      ++it;
      break;
    }
  }

  result.weights = w;
  result.objective = best;
  result.iterations = it;
  for (double v : w) {
    if (v != 0.0) ++result.nonzeros;
  }
  return result;
}

}  // namespace pdelearn
