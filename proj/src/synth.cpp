#include "pdelearn/synth.hpp"

#include <cmath>
#include <random>

#include "pdelearn/errors.hpp"
#include "pdelearn/parallel.hpp"

namespace pdelearn {

void WaveConfig::validate() const {
  if (n_points < 2) fail(ErrorKind::Config, "n_points must be at least 2");
  if (!(t_min < t_max)) fail(ErrorKind::Config, "t_min must be below t_max");
  if (k_max < 1) fail(ErrorKind::Config, "k_max must be positive");
  if (noise_std < 0) fail(ErrorKind::Config, "noise_std must be nonnegative");
}

double wave_value(double x1, double x2, double t, int k_max) {
  const double pi = 3.14159265358979323846;
  double acc = 0.0;
  // even k or l vanish: [(-1)^k - 1] = 0
  for (int k = 1; k <= k_max; k += 2) {
    const double sk = std::sin(k * pi * x1);
    for (int l = 1; l <= k_max; l += 2) {
      const double coef = 16.0 / (pi * pi) * 4.0 /
                          (static_cast<double>(k) * k * k * static_cast<double>(l) * l * l);
      acc += coef * sk * std::sin(l * pi * x2) *
             std::cos(pi * t * std::sqrt(static_cast<double>(k) * k + static_cast<double>(l) * l));
    }
  }
  return acc;
}

namespace {

template <class ForFn>
TimeSeries generate_wave_impl(const WaveConfig& config, ForFn&& for_fn) {
  config.validate();
  const std::size_t n = config.n_points;
  TimeSeries out;
  out.names = {"y", "x1", "x2"};
  out.timestamps.resize(n);
  out.target.resize(n);
  out.covariates.assign(2, std::vector<double>(n));

  const double step = (config.t_max - config.t_min) / static_cast<double>(n - 1);
  for_fn(n, [&](std::size_t i) {
    const double t = config.t_min + step * static_cast<double>(i);
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double x1 = std::fabs(c) * std::fabs(c);
    const double x2 = std::fabs(s) * std::fabs(s);
    out.timestamps[i] = t;
    out.covariates[0][i] = x1;
    out.covariates[1][i] = x2;
    out.target[i] = wave_value(x1, x2, t, config.k_max);
  });

  if (config.seed && config.noise_std > 0.0) {
    std::mt19937_64 rng(*config.seed);
    std::normal_distribution<double> noise(0.0, config.noise_std);
    for (std::size_t i = 0; i < n; ++i) out.target[i] += noise(rng);
  }
  return out;
}

}  // namespace

TimeSeries generate_wave(const WaveConfig& config) {
  return generate_wave_impl(config,
                            [](std::size_t n, auto&& fn) { par::parallel_for(n, fn); });
}

TimeSeries generate_wave_serial(const WaveConfig& config) {
  return generate_wave_impl(config,
                            [](std::size_t n, auto&& fn) { par::serial_for(n, fn); });
}

}  // namespace pdelearn
