#pragma once

#include <cstdint>
#include <optional>

#include "pdelearn/series.hpp"

namespace pdelearn {

struct WaveConfig {
  std::size_t n_points = 1000;
  double t_min = 0.0;
  double t_max = 10.0;
  int k_max = 40;
  std::optional<std::uint64_t> seed;  // enables Gaussian jitter when set
  double noise_std = 0.0;

  void validate() const;
};

/// Double sine series over odd (k, l) pairs evaluated at one point:
///   sum 16/pi^2 * [(-1)^k-1][(-1)^l-1]/(k^3 l^3)
///       * sin(k pi x1) sin(l pi x2) cos(pi t sqrt(k^2+l^2)).
double wave_value(double x1, double x2, double t, int k_max);

/// Uniform t grid on [t_min, t_max]; x1 = |cos t|^2, x2 = |sin t|^2,
/// y = wave_value(x1, x2, t). Columns named y, x1, x2.
TimeSeries generate_wave(const WaveConfig& config);

/// Serial reference for generate_wave; kept for testing and benchmarks.
TimeSeries generate_wave_serial(const WaveConfig& config);

}  // namespace pdelearn
