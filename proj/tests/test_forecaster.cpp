#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdelearn/errors.hpp"
#include "pdelearn/forecaster.hpp"

using namespace pdelearn;
using pdelearn::testing::make_series;

namespace {

/// Test dynamics: F = fn(y_last), window of one sample.
template <class Fn>
class LambdaModel : public DynamicsModel {
 public:
  explicit LambdaModel(Fn fn, int order = 1) : fn_(fn), order_(order) {}
  double evaluate_at(const TimeSeries& s, std::size_t i) const override {
    return fn_(s.target[i]);
  }
  std::size_t min_history() const override { return 1; }
  int lhs_order() const override { return order_; }

 private:
  Fn fn_;
  int order_;
};

template <class Fn>
LambdaModel<Fn> make_model(Fn fn, int order = 1) {
  return LambdaModel<Fn>(fn, order);
}

TimeSeries two_points() { return make_series({0.0, 1.0}, {0.5, 1.0}); }

}  // namespace

TEST_CASE("euler_step arithmetic") {
  const TimeSeries s = two_points();
  SUBCASE("zero dynamics keep the value") {
    CHECK(euler_step(make_model([](double) { return 0.0; }), s, 0.3) == 1.0);
  }
  SUBCASE("constant dynamics add F dt") {
    CHECK(euler_step(make_model([](double) { return 2.0; }), s, 0.1) ==
          doctest::Approx(1.2).epsilon(1e-15));
  }
  SUBCASE("dt must be positive") {
    CHECK_THROWS_AS(euler_step(make_model([](double) { return 0.0; }), s, 0.0), Error);
  }
  SUBCASE("non-finite dynamics raise NumericError") {
    try {
      euler_step(make_model([](double) { return std::nan(""); }), s, 0.1);
      FAIL("expected NumericError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numeric);
    }
  }
}

TEST_CASE("decay fixture integrates to e^-1 within tolerance") {
  const auto model = make_model([](double y) { return -y; });
  TimeSeries s = make_series({-0.01, 0.0}, {1.0, 1.0});
  double y = 1.0;
  for (int i = 0; i < 100; ++i) {
    y = euler_step(model, s, 0.01);
    s.timestamps.push_back(s.timestamps.back() + 0.01);
    s.target.push_back(y);
  }
  CHECK(std::fabs(y - std::exp(-1.0)) < 0.01);
}

TEST_CASE("rollout modes") {
  SUBCASE("zero dynamics with hold-last repeat the anchor value") {
    const auto model = make_model([](double) { return 0.0; });
    const TimeSeries s = make_series({0, 1, 2}, {1.0, 2.0, 3.5});
    RolloutConfig rc;
    rc.horizon = 5;
    const RolloutResult rr = rollout(model, s, rc);
    REQUIRE(rr.predictions.size() == 5);
    for (double p : rr.predictions) CHECK(p == 3.5);
  }
  SUBCASE("horizon one coincides across modes") {
    const auto model = make_model([](double y) { return 0.5 * y; });
    const TimeSeries s = make_series({0, 1, 2, 3}, {1.0, 1.5, 2.25, 3.375});
    RolloutConfig multi;
    multi.horizon = 1;
    multi.anchor = 2;
    multi.covariate_policy = CovariatePolicy::ProvidedFutures;
    RolloutConfig single = multi;
    single.mode = ForecastMode::SingleStep;
    const RolloutResult a = rollout(model, s, multi);
    const RolloutResult b = rollout(model, s, single);
    REQUIRE(a.predictions.size() == 1);
    CHECK(a.predictions[0] == b.predictions[0]);
  }
  SUBCASE("multi-step decay tracks the exponential within 1% sup-norm") {
    const auto model = make_model([](double y) { return -y; });
    const double dt = 0.002;
    std::vector<double> t, y;
    for (int i = 0; i < 3; ++i) {
      t.push_back(dt * (i - 2));
      y.push_back(std::exp(-t.back()));
    }
    const TimeSeries s = make_series(t, y);
    RolloutConfig rc;
    rc.horizon = 500;  // integrate to t = 1
    const RolloutResult rr = rollout(model, s, rc);
    double sup = 0.0;
    for (std::size_t i = 0; i < rr.predictions.size(); ++i) {
      sup = std::max(sup, std::fabs(rr.predictions[i] - std::exp(-rr.times[i])));
    }
    CHECK(sup < 0.01);
  }
}

TEST_CASE("single-step rollout equals independent euler steps") {
  const auto model = make_model([](double y) { return std::sin(y) - 0.2 * y; });
  std::vector<double> t, y;
  for (int i = 0; i < 30; ++i) {
    t.push_back(0.1 * i);
    y.push_back(std::cos(0.3 * i));
  }
  const TimeSeries s = make_series(t, y);
  RolloutConfig rc;
  rc.horizon = 10;
  rc.anchor = 15;
  rc.mode = ForecastMode::SingleStep;
  const RolloutResult rr = rollout(model, s, rc);
  REQUIRE(rr.predictions.size() == 10);
  for (std::size_t step = 0; step < 10; ++step) {
    const TimeSeries prefix = s.prefix(16 + step);
    const double dt = s.timestamps[16 + step] - s.timestamps[15 + step];
    CHECK(rr.predictions[step] == euler_step(model, prefix, dt));
  }
}

TEST_CASE("single-step error never exceeds multi-step on the decay fixture") {
  const auto model = make_model([](double y) { return -y; });
  std::vector<double> t, y;
  for (int i = 0; i < 200; ++i) {
    t.push_back(0.01 * i);
    y.push_back(std::exp(-t.back()));
  }
  const TimeSeries s = make_series(t, y);
  RolloutConfig rc;
  rc.horizon = 80;
  rc.anchor = 100;
  rc.covariate_policy = CovariatePolicy::ProvidedFutures;
  const RolloutResult multi = rollout(model, s, rc);
  rc.mode = ForecastMode::SingleStep;
  const RolloutResult single = rollout(model, s, rc);

  std::vector<double> truth(s.target.begin() + 101, s.target.begin() + 181);
  CHECK(rmse(single.predictions, truth) <= rmse(multi.predictions, truth));
}

TEST_CASE("halving dt roughly halves the global rollout error") {
  const auto model = make_model([](double y) { return -y; });
  auto run = [&](double dt) {
    const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    TimeSeries s = make_series({-dt, 0.0}, {std::exp(dt), 1.0});
    RolloutConfig rc;
    rc.horizon = steps;
    const RolloutResult rr = rollout(model, s, rc);
    double sup = 0.0;
    for (std::size_t i = 0; i < rr.predictions.size(); ++i) {
      sup = std::max(sup, std::fabs(rr.predictions[i] - std::exp(-rr.times[i])));
    }
    return sup;
  };
  const double coarse = run(0.01);
  const double fine = run(0.005);
  const double ratio = coarse / fine;
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.5);
}

TEST_CASE("non-finite dynamics abort the rollout with partial results") {
  // dynamics blow up once y crosses a threshold
  const auto model = make_model([](double y) { return y > 2.0 ? std::nan("") : 1.0; });
  const TimeSeries s = make_series({0.0, 1.0}, {0.0, 1.0});
  RolloutConfig rc;
  rc.horizon = 10;
  const RolloutResult rr = rollout(model, s, rc);
  CHECK(rr.aborted);
  CHECK(rr.failed_step == 2);  // y walks 1 -> 2 -> 3, blows up evaluating at 3
  CHECK(rr.predictions.size() == rr.failed_step);
}

TEST_CASE("relative mse definition") {
  CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(rmse({0, 0}, {2, 1}) == doctest::Approx(1.0));
  CHECK(rmse({1, 1}, {1, 3}) == doctest::Approx(0.4));
  try {
    rmse({1.0}, {0.0});
    FAIL("expected DegenerateMetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMetric);
  }
}

TEST_CASE("second-order dynamics use the semi-implicit update") {
  // constant acceleration a: v' = v + a dt, y' = y + v' dt
  const auto model = make_model([](double) { return 2.0; }, 2);
  const TimeSeries s = make_series({0.0, 1.0}, {0.0, 1.0});  // trailing velocity 1
  const double y_next = euler_step(model, s, 0.5);
  // v_next = 1 + 2*0.5 = 2, y_next = 1 + 2*0.5 = 2
  CHECK(y_next == doctest::Approx(2.0).epsilon(1e-12));
}
