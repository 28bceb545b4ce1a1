#pragma once

#include <optional>
#include <span>
#include <vector>

namespace pdelearn {

/// Odd-length 1-D filter sliding along the time axis. The moment vector
/// v_i = (1/i!) sum_g g^i q[g] identifies which derivative order the kernel
/// approximates: a kernel labeled with order d satisfies v_j = 0 for j < d
/// and v_d = 1; higher moments stay free and are the learnable degrees of
/// freedom.
struct ConvKernel {
  std::vector<double> weights;
  std::optional<int> derivative_order;

  int size() const { return static_cast<int>(weights.size()); }
  int half_width() const { return (size() - 1) / 2; }

  /// Throws unless N is odd and >= 3 and any labeled order holds to 1e-9.
  void validate() const;
};

std::vector<double> moment_vector(const ConvKernel& kernel);

/// Minimum-norm projection of the weights onto {v_j = 0 for j < order,
/// v_order = 1}; the result carries `order` as its derivative label.
ConvKernel constrain_kernel(const ConvKernel& kernel, int order);

/// Correlation against an N-point window (no flip): sum_g q[g] window[c+g].
double convolve(const ConvKernel& kernel, std::span<const double> window);

/// Classical finite differences of `values` against `coords`, independent of
/// any kernel machinery; one-sided at the ends, centered three-point inside.
std::vector<double> fd_oracle(const std::vector<double>& values,
                              const std::vector<double>& coords, int order);

}  // namespace pdelearn
