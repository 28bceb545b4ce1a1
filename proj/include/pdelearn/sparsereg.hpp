#pragma once

#include <vector>

#include "pdelearn/linalg.hpp"

namespace pdelearn {

/// L1-regularized least squares, objective ||b - X w||_2^2 + lambda ||w||_1
/// (no 1/2 factor on the quadratic term).
struct LassoProblem {
  Matrix design;
  std::vector<double> response;
  double lambda = 0.0;
  int max_iters = 2000;
  double tol = 1e-10;

  void validate() const;
};

struct FistaResult {
  std::vector<double> weights;
  double objective = 0.0;
  int iterations = 0;
  int nonzeros = 0;
  std::vector<double> objective_trace;  // non-increasing by construction
};

double soft_threshold(double value, double threshold);

/// Accelerated proximal gradient with Nesterov momentum
/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2, step 1/L with L the largest
/// eigenvalue of 2 X^T X (power iteration, 50 steps, tol 1e-8). A monotone
/// safeguard restarts momentum whenever a candidate would increase the
/// objective.
FistaResult fista(const LassoProblem& problem);

}  // namespace pdelearn
