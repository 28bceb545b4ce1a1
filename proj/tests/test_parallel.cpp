#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdelearn/linalg.hpp"
#include "pdelearn/parallel.hpp"
#include "pdelearn/pblock.hpp"
#include "pdelearn/synth.hpp"

using namespace pdelearn;
using pdelearn::testing::sampled_series;

// The OpenMP kernels write disjoint output slots with the same per-element
// arithmetic as the serial references, so outputs must be bit-identical.

TEST_CASE("wave generation: parallel equals serial bitwise") {
  const WaveConfig cfg{.n_points = 400, .t_min = 0.0, .t_max = 10.0, .k_max = 17};
  const TimeSeries a = generate_wave(cfg);
  const TimeSeries b = generate_wave_serial(cfg);
  CHECK(a.timestamps == b.timestamps);
  CHECK(a.target == b.target);
  CHECK(a.covariates == b.covariates);
}

TEST_CASE("matvec kernels: parallel equals serial bitwise") {
  Matrix m(57, 13);
  std::vector<double> x(13);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      m(r, c) = std::sin(0.37 * static_cast<double>(r * 13 + c));
    }
  }
  for (std::size_t c = 0; c < x.size(); ++c) x[c] = std::cos(1.1 * static_cast<double>(c));

  std::vector<double> y1, y2;
  matvec(m, x, y1);
  matvec_serial(m, x, y2);
  CHECK(y1 == y2);

  std::vector<double> r(57);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sin(2.3 * static_cast<double>(i));
  std::vector<double> t1, t2;
  matvec_transposed(m, r, t1);
  matvec_transposed_serial(m, r, t2);
  CHECK(t1 == t2);
}

TEST_CASE("candidate matrix: parallel equals serial bitwise") {
  const TimeSeries s = sampled_series(
      200, 0.0, 9.0, [](double t) { return std::sin(t) * t; },
      [](double t) { return std::cos(0.7 * t); }, [](double t) { return t; });
  PBlockConfig cfg;
  cfg.kernel_size = 5;
  cfg.term_specs = std::vector<TermSpec>{make_ratio_term(0, 1), make_ratio_term(1, 2),
                                         make_raw_target_term(true)};
  cfg.n_channels = 3;
  PBlock block(cfg, 2);
  const CandidateMatrix a = block.candidate_matrix(s);
  const CandidateMatrix b = block.candidate_matrix_serial(s);
  CHECK(a.values.data() == b.values.data());
  CHECK(a.row_indices == b.row_indices);
  CHECK(a.degenerate == b.degenerate);
  CHECK(a.lhs == b.lhs);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  par::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}
