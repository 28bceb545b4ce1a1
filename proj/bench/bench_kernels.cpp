// Times the OpenMP kernels against their serial references and checks the
// outputs stay bit-identical. Not registered with ctest; run directly.

#include <cstdio>
#include <cmath>

#include "pdelearn/linalg.hpp"
#include "pdelearn/parallel.hpp"
#include "pdelearn/pblock.hpp"
#include "pdelearn/synth.hpp"

using namespace pdelearn;

namespace {

double now() { return par::wall_time(); }

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

void row(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-24s %10.4f s %10.4f s   x%-6.2f %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", par::max_threads());
  std::printf("%-24s %12s %12s   %-7s %s\n", "kernel", "serial", "openmp", "speedup",
              "output check");

  {
    const WaveConfig cfg{.n_points = 4000, .t_min = 0.0, .t_max = 10.0, .k_max = 40};
    TimeSeries a, b;
    const double ts = time_best_of(3, [&] { a = generate_wave_serial(cfg); });
    const double tp = time_best_of(3, [&] { b = generate_wave(cfg); });
    row("wave generation", ts, tp, a.target == b.target && a.covariates == b.covariates);
  }

  {
    TimeSeries s;
    {
      const std::size_t n = 20000;
      s.names = {"y", "x1", "x2"};
      s.timestamps.resize(n);
      s.target.resize(n);
      s.covariates.assign(2, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const double t = 0.01 * static_cast<double>(i);
        s.timestamps[i] = t;
        s.target[i] = std::sin(t) * (1.0 + 0.1 * t);
        s.covariates[0][i] = std::cos(0.7 * t) + 1.5;
        s.covariates[1][i] = t + 0.3 * std::sin(0.2 * t);
      }
    }
    PBlockConfig cfg;
    cfg.kernel_size = 5;
    cfg.term_specs = std::vector<TermSpec>{
        make_ratio_term(0, 2), make_ratio_term(1, 2), make_ratio_term(0, 1),
        make_ratio_term(1, 1), make_raw_target_term(true)};
    cfg.n_channels = 5;
    PBlock block(cfg, 2);
    CandidateMatrix a, b;
    const double ts = time_best_of(3, [&] { a = block.candidate_matrix_serial(s); });
    const double tp = time_best_of(3, [&] { b = block.candidate_matrix(s); });
    row("candidate matrix", ts, tp, a.values.data() == b.values.data());
  }

  {
    const std::size_t rows = 4000, cols = 600;
    Matrix m(rows, cols);
    std::vector<double> x(cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        m(r, c) = std::sin(0.001 * static_cast<double>(r * cols + c));
      }
    }
    for (std::size_t c = 0; c < cols; ++c) x[c] = std::cos(0.1 * static_cast<double>(c));
    std::vector<double> ya, yb;
    const double ts = time_best_of(5, [&] {
      for (int k = 0; k < 20; ++k) matvec_serial(m, x, ya);
    });
    const double tp = time_best_of(5, [&] {
      for (int k = 0; k < 20; ++k) matvec(m, x, yb);
    });
    row("matvec (x20)", ts, tp, ya == yb);
  }

  return 0;
}
