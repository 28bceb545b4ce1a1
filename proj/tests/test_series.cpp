#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pdelearn/errors.hpp"
#include "pdelearn/series.hpp"

using namespace pdelearn;
using pdelearn::testing::make_series;

namespace {

std::string write_temp_csv(const std::string& body) {
  static int counter = 0;
  std::string path = "series_test_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("load_csv transcribes a small file") {
  const auto path = write_temp_csv("time,y,x\n0,1,2\n1,2,3\n2,3,4\n");
  const TimeSeries s = load_csv(path, "y");
  CHECK(s.size() == 3);
  CHECK(s.covariate_count() == 1);
  CHECK(s.target == std::vector<double>{1, 2, 3});
  CHECK(s.covariates[0] == std::vector<double>{2, 3, 4});
  CHECK(s.names == std::vector<std::string>{"y", "x"});
  std::remove(path.c_str());
}

TEST_CASE("load_csv sorts shuffled rows by time") {
  const auto a = write_temp_csv("time,y,x\n0,1,2\n1,2,3\n2,3,4\n");
  const auto b = write_temp_csv("time,y,x\n2,3,4\n0,1,2\n1,2,3\n");
  const TimeSeries sa = load_csv(a, "y");
  const TimeSeries sb = load_csv(b, "y");
  CHECK(sa.timestamps == sb.timestamps);
  CHECK(sa.target == sb.target);
  CHECK(sa.covariates == sb.covariates);
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("load_csv rejects duplicates, bad cells, short files") {
  const auto dup = write_temp_csv("time,y\n1.0,1\n1.0,2\n2.0,3\n");
  CHECK_THROWS_WITH_AS(load_csv(dup, "y"), doctest::Contains("duplicate"), Error);
  std::remove(dup.c_str());

  const auto bad = write_temp_csv("time,y\n0,1\n1,abc\n");
  try {
    load_csv(bad, "y");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
  std::remove(bad.c_str());

  const auto tiny = write_temp_csv("time,y\n0,1\n");
  try {
    load_csv(tiny, "y");
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooShort);
  }
  std::remove(tiny.c_str());

  const auto no_time = write_temp_csv("stamp,y\n0,1\n1,2\n");
  try {
    load_csv(no_time, "y");
    FAIL("expected IngestError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ingest);
  }
  std::remove(no_time.c_str());

  const auto nan_file = write_temp_csv("time,y\n0,nan\n1,2\n");
  try {
    load_csv(nan_file, "y");
    FAIL("expected IngestError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ingest);
  }
  std::remove(nan_file.c_str());
}

TEST_CASE("resample keeps the trailing stride anchored at the newest point") {
  std::vector<double> t(10), y(10);
  for (int i = 0; i < 10; ++i) {
    t[i] = i;
    y[i] = 10 + i;
  }
  const TimeSeries s = make_series(t, y);

  SUBCASE("m=10 s=6 r=2 picks indices 5,7,9") {
    const TimeSeries r = resample(s, {6, 2});
    CHECK(r.timestamps == std::vector<double>{5, 7, 9});
    CHECK(r.target == std::vector<double>{15, 17, 19});
  }
  SUBCASE("full span rate 1 is the identity") {
    const TimeSeries r = resample(s, {10, 1});
    CHECK(r.timestamps == s.timestamps);
    CHECK(r.target == s.target);
  }
  SUBCASE("span/rate below 2 is rejected") {
    CHECK_THROWS_AS(resample(s, {3, 5}), Error);
    try {
      resample(s, {3, 5});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Plan);
    }
  }
}

TEST_CASE("split honors floor sizes with remainder to train") {
  auto grid = [](std::size_t m) {
    std::vector<double> t(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      t[i] = static_cast<double>(i);
      y[i] = static_cast<double>(i) * 0.5;
    }
    return make_series(t, y);
  };

  SUBCASE("m=100 gives 70/10/20") {
    const SeriesSplit parts = split(grid(100), {0.7, 0.1, 0.2});
    CHECK(parts.train.size() == 70);
    CHECK(parts.val.size() == 10);
    CHECK(parts.test.size() == 20);
  }
  SUBCASE("m=20 with 0.5/0.25/0.25 gives 10/5/5") {
    const SeriesSplit parts = split(grid(20), {0.5, 0.25, 0.25});
    CHECK(parts.train.size() == 10);
    CHECK(parts.val.size() == 5);
    CHECK(parts.test.size() == 5);
  }
  SUBCASE("m=10 degenerates: val would get a single point") {
    CHECK_THROWS_AS(split(grid(10), {0.7, 0.1, 0.2}), Error);
  }
  SUBCASE("segments concatenate back exactly") {
    const TimeSeries s = grid(100);
    const SeriesSplit parts = split(s, {0.7, 0.1, 0.2});
    std::vector<double> cat = parts.train.target;
    cat.insert(cat.end(), parts.val.target.begin(), parts.val.target.end());
    cat.insert(cat.end(), parts.test.target.begin(), parts.test.target.end());
    CHECK(cat == s.target);
  }
}

TEST_CASE("finite_diff_time forward and second differences") {
  SUBCASE("order 1 forward differences") {
    const TimeSeries s = make_series({0, 1, 2}, {0, 1, 4});
    CHECK(finite_diff_time(s, 1) == std::vector<double>{1, 3});
  }
  SUBCASE("constant series has zero derivative") {
    const TimeSeries s = make_series({0, 0.5, 1.7, 2}, {3, 3, 3, 3});
    for (double v : finite_diff_time(s, 1)) CHECK(v == 0.0);
  }
  SUBCASE("order 2 on y=t^2 gives exactly 2") {
    const TimeSeries s = make_series({0, 1, 2, 3}, {0, 1, 4, 9});
    const auto d2 = finite_diff_time(s, 2);
    REQUIRE(d2.size() == 2);
    CHECK(d2[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d2[1] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("order 2 exact on non-uniform grids too") {
    const TimeSeries s = make_series({0, 0.3, 1.1, 1.5}, {0, 0.09, 1.21, 2.25});
    for (double v : finite_diff_time(s, 2)) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("unsupported order") {
    const TimeSeries s = make_series({0, 1, 2}, {0, 1, 4});
    CHECK_THROWS_AS(finite_diff_time(s, 3), Error);
  }
}

TEST_CASE("order-1 differences of a linear series recover the slope") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = -3.0 + 0.3 * static_cast<double>(trial);
    const double b = 1.7;
    std::vector<double> t, y;
    double cur = 0.0;
    for (int i = 0; i < 50; ++i) {
      cur += 1e-3 + static_cast<double>(rng() % 1000) / 500.0;  // irregular spacing
      t.push_back(cur);
      y.push_back(a * cur + b);
    }
    const auto d = finite_diff_time(make_series(t, y), 1);
    for (double v : d) CHECK(v == doctest::Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("moving_average trailing windows") {
  const TimeSeries s = make_series({0, 1, 2, 3}, {1, 2, 3, 4});
  SUBCASE("window 2") {
    const TimeSeries r = moving_average(s, 2);
    CHECK(r.target == std::vector<double>{1.5, 2.5, 3.5});
    CHECK(r.timestamps == std::vector<double>{1, 2, 3});
  }
  SUBCASE("window 1 is the identity") {
    const TimeSeries r = moving_average(s, 1);
    CHECK(r.target == s.target);
    CHECK(r.timestamps == s.timestamps);
  }
  SUBCASE("full window leaves a single point") {
    const TimeSeries r = moving_average(s, 4);
    CHECK(r.target == std::vector<double>{2.5});
    CHECK(r.timestamps == std::vector<double>{3});
  }
  SUBCASE("window above m") {
    CHECK_THROWS_AS(moving_average(s, 5), Error);
  }
}

TEST_CASE("nearest-preceding alignment carries the last known sample forward") {
  const TimeSeries s = make_series({0.0, 1.0, 2.5, 4.0}, {10, 11, 12, 13});
  const TimeSeries a = align_nearest_preceding(s, {0.5, 1.0, 3.0, 5.0});
  CHECK(a.timestamps == std::vector<double>{0.5, 1.0, 3.0, 5.0});
  CHECK(a.target == std::vector<double>{10, 11, 12, 13});
  CHECK_THROWS_AS(align_nearest_preceding(s, {-1.0, 0.5}), Error);
}

TEST_CASE("resample is idempotent for the identity plan") {
  const TimeSeries s = make_series({0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  const TimeSeries once = resample(s, {5, 1});
  const TimeSeries twice = resample(once, {5, 1});
  CHECK(once.target == twice.target);
  CHECK(once.timestamps == twice.timestamps);
}
