#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdelearn/diffop.hpp"
#include "pdelearn/errors.hpp"
#include "pdelearn/pblock.hpp"

using namespace pdelearn;
using pdelearn::testing::make_series;
using pdelearn::testing::sampled_series;

namespace {

PBlockConfig explicit_config(std::vector<TermSpec> specs, int kernel_size = 3,
                             int lhs_order = 1) {
  PBlockConfig cfg;
  cfg.kernel_size = kernel_size;
  cfg.lhs_order = lhs_order;
  cfg.term_specs = std::move(specs);
  cfg.n_channels = static_cast<int>(cfg.term_specs->size());
  return cfg;
}

}  // namespace

TEST_CASE("zero output weights evaluate to the bias") {
  const TimeSeries s = sampled_series(
      32, 0.0, 3.1, [](double t) { return std::sin(t); }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}), 1);
  block.set_output_weights({0.0}, 2.5);
  CHECK(block.evaluate(s, 10) == 2.5);
}

TEST_CASE("single ratio channel recovers dy/dx of a parabola") {
  // y = x^2 on a uniform grid; window center sits half a window back
  const std::size_t n = 101;
  const TimeSeries s = sampled_series(
      n, 0.0, 1.0, [](double t) { return t * t; }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}), 1);
  block.set_output_weights({1.0}, 0.0);

  const auto oracle = fd_oracle(s.target, s.covariates[0], 1);
  for (std::size_t i = 4; i < n; i += 7) {
    const double f = block.evaluate(s, i);
    const std::size_t center = i - 1;  // N=3 causal window centers one back
    CHECK(f == doctest::Approx(2.0 * s.covariates[0][center]).epsilon(1e-6));
    CHECK(f == doctest::Approx(oracle[center]).epsilon(1e-6));
  }
}

TEST_CASE("nested order-2 ratio recovers the second derivative of a cubic") {
  // y = x^3 along x = t: the min-norm N=5 kernel has vanishing second moment,
  // so the composed estimate is exact for cubics up to rounding
  const std::size_t n = 201;
  const TimeSeries s = sampled_series(
      n, 1.0, 3.0, [](double t) { return t * t * t; }, [](double t) { return t; });
  PBlockConfig cfg;
  cfg.kernel_size = 5;
  cfg.term_specs = std::vector<TermSpec>{make_ratio_term(0, 2)};
  cfg.n_channels = 1;
  PBlock block(cfg, 1);
  block.set_output_weights({1.0}, 0.0);
  CHECK(block.lookback() == 8);
  for (std::size_t i = 8; i < n; i += 13) {
    const double center = s.covariates[0][i - 4];  // both applications look back
    CHECK(block.evaluate(s, i) == doctest::Approx(6.0 * center).epsilon(1e-9));
  }
}

TEST_CASE("raw-factor channels reduce to a coded polynomial") {
  std::vector<TermSpec> specs;
  specs.push_back(make_raw_target_term());            // y
  specs.push_back(make_raw_covariate_term(0));        // x1
  {
    TermSpec yx;  // y * x2
    yx.factors.push_back({TermFactor::Kind::RawTarget, -1, 1});
    yx.factors.push_back({TermFactor::Kind::RawCovariate, 1, 1});
    yx.canonicalize();
    specs.push_back(yx);
  }
  PBlock block(explicit_config(specs), 2);
  block.set_output_weights({0.7, -1.2, 0.35}, 0.4);

  std::mt19937_64 rng(5);
  auto u = [&] { return static_cast<double>(rng() % 2000) / 1000.0 - 1.0; };
  std::vector<double> t(16), y(16);
  std::vector<std::vector<double>> covs(2, std::vector<double>(16));
  for (std::size_t i = 0; i < 16; ++i) {
    t[i] = static_cast<double>(i);
    y[i] = u();
    covs[0][i] = u();
    covs[1][i] = u();
  }
  const TimeSeries s = make_series(t, y, covs);
  for (std::size_t i = 2; i < 16; ++i) {
    const double direct = 0.7 * y[i] - 1.2 * covs[0][i] + 0.35 * y[i] * covs[1][i] + 0.4;
    CHECK(block.evaluate(s, i) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("delta kernels turn a ratio factor into a pointwise quotient") {
  const TimeSeries s = sampled_series(
      24, 1.0, 3.0, [](double t) { return t * t; }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}), 1);
  ConvKernel delta;
  delta.weights = {0.0, 1.0, 0.0};
  delta.derivative_order = 0;
  block.set_kernels({{{delta}}});
  block.set_output_weights({1.0}, 0.0);
  for (std::size_t i = 3; i < 24; i += 5) {
    // delta window centers one sample back for N=3
    CHECK(block.evaluate(s, i) ==
          doctest::Approx(s.target[i - 1] / s.covariates[0][i - 1]).epsilon(1e-12));
  }
}

TEST_CASE("candidate matrix rows and columns follow the window bookkeeping") {
  SUBCASE("m=20, N=5, lhs_order=1: 15 rows at indices 4..18") {
    const TimeSeries s = sampled_series(
        20, 0.0, 2.0, [](double t) { return std::sin(t); }, [](double t) { return t; });
    PBlock block(explicit_config({make_ratio_term(0, 1), make_raw_target_term()}, 5), 1);
    const CandidateMatrix cm = block.candidate_matrix(s);
    CHECK(cm.values.rows() == 15);
    CHECK(cm.values.cols() == 3);  // two channels plus bias
    CHECK(cm.row_indices.front() == 4);
    CHECK(cm.row_indices.back() == 18);
    for (std::size_t r = 0; r < cm.values.rows(); ++r) {
      CHECK(cm.values(r, 2) == 1.0);  // trailing ones column
    }
  }
  SUBCASE("constant target zeroes the ratio column and keeps raw y constant") {
    const TimeSeries s = sampled_series(
        16, 0.0, 1.5, [](double) { return 3.0; }, [](double t) { return t; });
    PBlock block(explicit_config({make_ratio_term(0, 1), make_raw_target_term()}), 1);
    const CandidateMatrix cm = block.candidate_matrix(s);
    for (std::size_t r = 0; r < cm.values.rows(); ++r) {
      CHECK(cm.values(r, 0) == 0.0);
      CHECK(cm.values(r, 1) == 3.0);
    }
  }
  SUBCASE("an open time gate multiplies the closed column by t") {
    const TimeSeries s = sampled_series(
        18, 0.5, 2.3, [](double t) { return t * t * t; }, [](double t) { return t; });
    PBlock closed(explicit_config({make_ratio_term(0, 1, false)}), 1);
    PBlock open(explicit_config({make_ratio_term(0, 1, true)}), 1);
    const CandidateMatrix a = closed.candidate_matrix(s);
    const CandidateMatrix b = open.candidate_matrix(s);
    REQUIRE(a.values.rows() == b.values.rows());
    for (std::size_t r = 0; r < a.values.rows(); ++r) {
      const double t = s.timestamps[a.row_indices[r]];
      CHECK(b.values(r, 0) == doctest::Approx(a.values(r, 0) * t).epsilon(1e-12));
    }
  }
}

TEST_CASE("evaluate agrees with the candidate matrix row exactly") {
  std::vector<TermSpec> specs = {make_ratio_term(0, 1), make_ratio_term(1, 2),
                                 make_raw_target_term(true)};
  PBlock block(explicit_config(specs, 5), 2);
  block.set_output_weights({0.3, -0.8, 1.7}, 0.25);

  const TimeSeries s = sampled_series(
      48, 0.1, 4.0, [](double t) { return std::sin(1.3 * t); },
      [](double t) { return std::cos(t); }, [](double t) { return t + 0.2 * t * t; });
  const CandidateMatrix cm = block.candidate_matrix(s);
  for (std::size_t r = 0; r < cm.values.rows(); ++r) {
    double dotted = block.bias();
    for (std::size_t c = 0; c < 3; ++c) dotted += block.output_weights()[c] * cm.values(r, c);
    const double direct = block.evaluate(s, cm.row_indices[r]);
    CHECK(direct == doctest::Approx(dotted).epsilon(1e-12));
  }
}

TEST_CASE("permuting channels with matching weights leaves evaluate unchanged") {
  const TimeSeries s = sampled_series(
      40, 0.0, 4.0, [](double t) { return std::exp(0.2 * t); },
      [](double t) { return std::sin(t) + 2.0; });
  std::vector<TermSpec> fwd = {make_ratio_term(0, 1), make_raw_target_term(),
                               make_raw_covariate_term(0)};
  std::vector<TermSpec> rev = {make_raw_covariate_term(0), make_raw_target_term(),
                               make_ratio_term(0, 1)};
  PBlock a(explicit_config(fwd), 1);
  PBlock b(explicit_config(rev), 1);
  a.set_output_weights({0.5, -1.0, 2.0}, 0.1);
  b.set_output_weights({2.0, -1.0, 0.5}, 0.1);
  for (std::size_t i = 2; i < 40; i += 3) {
    CHECK(a.evaluate(s, i) == doctest::Approx(b.evaluate(s, i)).epsilon(1e-12));
  }
}

TEST_CASE("guarded denominators zero the channel and set the flag") {
  const TimeSeries s = sampled_series(
      20, 0.0, 2.0, [](double t) { return std::sin(t); }, [](double) { return 1.0; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}), 1);
  block.set_output_weights({1.0}, 0.5);
  const PBlock::EvalDetail detail = block.evaluate_detail(s, 10);
  CHECK(detail.degenerate);
  CHECK(detail.channel_values[0] == 0.0);
  CHECK(detail.value == 0.5);  // bias only
}

TEST_CASE("training a linear fixture fits with tiny residual") {
  // y = 2x with x = t: dy/dt = 2 and the ratio column is the constant 2
  const TimeSeries s = sampled_series(
      120, 0.0, 6.0, [](double t) { return 2.0 * t; }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}), 1);
  TrainConfig cfg;
  cfg.lambda = 1e-4;
  cfg.epochs = 2;
  const FitReport fit = block.train(s, cfg);
  CHECK(fit.final_residual < 1e-3);
  CHECK(block.trained());
  // F reproduces dy/dt = 2 everywhere
  for (std::size_t i = 5; i < 120; i += 11) {
    CHECK(block.evaluate(s, i) == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("an overwhelming lambda zeroes every weight") {
  const TimeSeries s = sampled_series(
      60, 0.0, 3.0, [](double t) { return std::sin(t); }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1), make_raw_target_term()}), 1);
  TrainConfig cfg;
  cfg.lambda = 50.0;  // relative to the KKT threshold: far past zeroing
  cfg.epochs = 1;
  block.train(s, cfg);
  CHECK(block.output_weights()[0] == 0.0);
  CHECK(block.output_weights()[1] == 0.0);
  CHECK(block.bias() == 0.0);
  CHECK(block.evaluate(s, 30) == 0.0);  // F equals the (zero) bias
}

TEST_CASE("term_descriptions lists surviving terms and the bias") {
  PBlock block(explicit_config({make_ratio_term(0, 1), make_raw_target_term()}), 1);
  SUBCASE("untrained zero weights give an empty list") {
    CHECK(block.term_descriptions().empty());
  }
  SUBCASE("zero-coefficient terms are omitted") {
    block.set_output_weights({0.0, 1.5}, 0.25);
    const auto terms = block.term_descriptions();
    REQUIRE(terms.size() == 2);
    CHECK(terms[0].first == make_raw_target_term());
    CHECK(terms[0].second == 1.5);
    CHECK(terms[1].first.factors.empty());  // constant term
    CHECK(terms[1].second == 0.25);
  }
}

TEST_CASE("kernel finite-difference gradient predicts the residual drop") {
  // residual as a function of one kernel's taps, with output weights frozen
  const TimeSeries s = sampled_series(
      80, 0.0, 4.0, [](double t) { return std::sin(t) * t; },
      [](double t) { return t + 0.3 * std::sin(0.5 * t); });
  PBlock block(explicit_config({make_ratio_term(0, 1)}, 5), 1);
  block.set_output_weights({0.9}, 0.0);

  const auto lhs_of = [&](const CandidateMatrix& cm) {
    return cm.lhs;
  };
  auto residual = [&](const PBlock& b) {
    const CandidateMatrix cm = b.candidate_matrix(s);
    const auto lhs = lhs_of(cm);
    double acc = 0.0;
    for (std::size_t r = 0; r < cm.values.rows(); ++r) {
      const double d = lhs[r] - (0.9 * cm.values(r, 0) + 0.0);
      acc += d * d;
    }
    return acc;
  };

  auto kernels = block.kernels();
  const double h = 1e-5;
  std::vector<double> grad(kernels[0][0][0].weights.size());
  for (std::size_t tap = 0; tap < grad.size(); ++tap) {
    auto plus = kernels, minus = kernels;
    plus[0][0][0].weights[tap] += h;
    plus[0][0][0].derivative_order.reset();
    minus[0][0][0].weights[tap] -= h;
    minus[0][0][0].derivative_order.reset();
    PBlock bp = block, bm = block;
    bp.set_kernels(plus);
    bm.set_kernels(minus);
    grad[tap] = (residual(bp) - residual(bm)) / (2.0 * h);
  }

  // step along the negative gradient, re-project, compare predicted vs actual
  const double base = residual(block);
  double gnorm = 0.0;
  for (double g : grad) gnorm += g * g;
  gnorm = std::sqrt(gnorm);
  REQUIRE(gnorm > 1e-8);
  const double step = 1e-4 / gnorm;
  auto stepped = kernels;
  for (std::size_t tap = 0; tap < grad.size(); ++tap) {
    stepped[0][0][0].weights[tap] -= step * grad[tap];
  }
  stepped[0][0][0] = constrain_kernel(stepped[0][0][0], 1);
  PBlock after = block;
  after.set_kernels(stepped);

  double predicted = 0.0;  // g . (theta_projected - theta)
  for (std::size_t tap = 0; tap < grad.size(); ++tap) {
    predicted += grad[tap] * (stepped[0][0][0].weights[tap] - kernels[0][0][0].weights[tap]);
  }
  const double actual = residual(after) - base;
  REQUIRE(std::fabs(predicted) > 0.0);
  CHECK(std::fabs(actual - predicted) / std::fabs(predicted) < 0.10);
}

TEST_CASE("random structure is reproducible under a seed") {
  PBlockConfig cfg;
  cfg.kernel_size = 5;
  cfg.n_channels = 6;
  cfg.n_layers = 2;
  cfg.seed = 42;
  PBlock a(cfg, 3);
  PBlock b(cfg, 3);
  CHECK(a.term_specs() == b.term_specs());
  cfg.seed = 43;
  PBlock c(cfg, 3);
  CHECK(a.term_specs() != c.term_specs());
}

TEST_CASE("evaluate rejects indices without a full window") {
  const TimeSeries s = sampled_series(
      12, 0.0, 1.0, [](double t) { return t; }, [](double t) { return t; });
  PBlock block(explicit_config({make_ratio_term(0, 1)}, 5), 1);
  CHECK_THROWS_AS(block.evaluate(s, 3), Error);   // lookback is 4
  CHECK_THROWS_AS(block.evaluate(s, 12), Error);  // out of range
  CHECK_NOTHROW(block.evaluate(s, 4));
}
