#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pdelearn/series.hpp"

namespace pdelearn::testing {

inline TimeSeries make_series(std::vector<double> t, std::vector<double> y,
                              std::vector<std::vector<double>> covs = {},
                              std::vector<std::string> names = {}) {
  TimeSeries s;
  s.timestamps = std::move(t);
  s.target = std::move(y);
  s.covariates = std::move(covs);
  if (names.empty()) {
    names.push_back("y");
    for (std::size_t j = 0; j < s.covariates.size(); ++j) {
      names.push_back("x" + std::to_string(j + 1));
    }
  }
  s.names = std::move(names);
  return s;
}

/// Uniform grid series with y = f(t) and covariates x_j = g_j(t).
template <class F, class... G>
TimeSeries sampled_series(std::size_t n, double t0, double t1, F f, G... g) {
  std::vector<double> t(n), y(n);
  const double dt = (t1 - t0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = t0 + dt * static_cast<double>(i);
    y[i] = f(t[i]);
  }
  std::vector<std::vector<double>> covs;
  (covs.push_back([&] {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = g(t[i]);
    return c;
  }()),
   ...);
  return make_series(std::move(t), std::move(y), std::move(covs));
}

/// Piecewise dynamics dy/dt = a(t) * x(t) with the coefficient flipping sign
/// every `regime_len` points; x = cos(omega t). y integrates exactly per
/// segment so the series is smooth within regimes and kinked at switches.
struct RegimeFixture {
  TimeSeries series;
  std::vector<double> coefficient;  // a(t) per sample
};

inline RegimeFixture make_regime_series(std::size_t n, std::size_t regime_len, double dt,
                                        double omega, double amplitude = 1.0,
                                        double noise_std = 0.0, std::uint64_t seed = 17,
                                        double x_offset = 0.0) {
  std::vector<double> t(n), y(n), x(n), a(n);
  std::mt19937_64 rng(seed);
  auto u01 = [&] { return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0); };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = dt * static_cast<double>(i);
    x[i] = std::cos(omega * t[i]) + x_offset;
    a[i] = ((i / regime_len) % 2 == 0) ? amplitude : -amplitude;
    if (i > 0) {
      // exact integral of a * (cos(omega t) + offset) over the step
      acc += a[i] * ((std::sin(omega * t[i]) - std::sin(omega * t[i - 1])) / omega +
                     x_offset * dt);
    }
    y[i] = acc;
    if (noise_std > 0.0) {
      const double u1 = u01(), u2 = u01();
      y[i] += noise_std * std::sqrt(-2.0 * std::log(u1 + 1e-300)) *
              std::cos(6.283185307179586 * u2);
    }
  }
  RegimeFixture out;
  out.series = make_series(std::move(t), std::move(y), {std::move(x)});
  out.coefficient = std::move(a);
  return out;
}

}  // namespace pdelearn::testing
