#include "pdelearn/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pdelearn/errors.hpp"

namespace pdelearn {

void TimeSeries::validate() const {
  const std::size_t m = timestamps.size();
  if (m < 2) fail(ErrorKind::TooShort, "series needs at least 2 points");
  if (target.size() != m) fail(ErrorKind::Shape, "target length != timestamps length");
  if (names.size() != covariates.size() + 1) {
    fail(ErrorKind::Shape, "names must cover target plus covariates");
  }
  for (const auto& c : covariates) {
    if (c.size() != m) fail(ErrorKind::Shape, "covariate length != timestamps length");
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (!(timestamps[i] < timestamps[i + 1])) {
      fail(ErrorKind::Ingest, "timestamps must be strictly increasing");
    }
  }
  auto check_finite = [](const std::vector<double>& v, const char* what) {
    for (double x : v) {
      if (!std::isfinite(x)) fail(ErrorKind::Ingest, std::string("non-finite value in ") + what);
    }
  };
  check_finite(timestamps, "timestamps");
  check_finite(target, "target");
  for (const auto& c : covariates) check_finite(c, "covariates");
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) fail(ErrorKind::Index, "slice out of range");
  TimeSeries out;
  out.names = names;
  out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + end);
  out.target.assign(target.begin() + begin, target.begin() + end);
  out.covariates.reserve(covariates.size());
  for (const auto& c : covariates) {
    out.covariates.emplace_back(c.begin() + begin, c.begin() + end);
  }
  return out;
}

void ResamplePlan::validate(std::size_t series_length) const {
  if (span == 0 || rate == 0) fail(ErrorKind::Plan, "span and rate must be positive");
  if (span > series_length) fail(ErrorKind::Plan, "span exceeds series length");
  if (static_cast<double>(span) / static_cast<double>(rate) < 2.0) {
    fail(ErrorKind::Plan, "span/rate must be >= 2");
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t line_no) {
  const std::string s = trim(raw);
  if (s.empty()) {
    fail(ErrorKind::Parse, "empty cell at line " + std::to_string(line_no));
  }
  std::size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::Parse, "non-numeric cell '" + s + "' at line " + std::to_string(line_no));
  }
  if (pos != s.size()) {
    fail(ErrorKind::Parse, "non-numeric cell '" + s + "' at line " + std::to_string(line_no));
  }
  if (!std::isfinite(value)) {
    fail(ErrorKind::Ingest, "non-finite value at line " + std::to_string(line_no));
  }
  return value;
}

}  // namespace

TimeSeries load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Ingest, "cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Ingest, "empty file: " + path);
  if (!line.empty() && line.front() == '\xef') line = line.substr(3);  // UTF-8 BOM

  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  long time_col = -1, target_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "time") {
      if (time_col >= 0) fail(ErrorKind::Ingest, "duplicate 'time' column");
      time_col = static_cast<long>(i);
    }
    if (header[i] == target_column) target_col = static_cast<long>(i);
  }
  if (time_col < 0) fail(ErrorKind::Ingest, "missing 'time' column");
  if (target_col < 0) fail(ErrorKind::Ingest, "missing target column '" + target_column + "'");
  if (time_col == target_col) fail(ErrorKind::Ingest, "target column cannot be 'time'");

  std::vector<std::size_t> cov_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (static_cast<long>(i) != time_col && static_cast<long>(i) != target_col) {
      cov_cols.push_back(i);
    }
  }

  struct Row {
    double time;
    double target;
    std::vector<double> covs;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::Parse, "row width mismatch at line " + std::to_string(line_no));
    }
    Row row;
    row.time = parse_cell(cells[static_cast<std::size_t>(time_col)], line_no);
    row.target = parse_cell(cells[static_cast<std::size_t>(target_col)], line_no);
    row.covs.reserve(cov_cols.size());
    for (std::size_t c : cov_cols) row.covs.push_back(parse_cell(cells[c], line_no));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) fail(ErrorKind::TooShort, "need at least 2 data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.time < b.time; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].time == rows[i + 1].time) {
      fail(ErrorKind::Ingest, "duplicate time value " + std::to_string(rows[i].time));
    }
  }

  TimeSeries out;
  out.names.push_back(target_column);
  for (std::size_t c : cov_cols) out.names.push_back(header[c]);
  out.timestamps.reserve(rows.size());
  out.target.reserve(rows.size());
  out.covariates.assign(cov_cols.size(), {});
  for (auto& cov : out.covariates) cov.reserve(rows.size());
  for (const auto& row : rows) {
    out.timestamps.push_back(row.time);
    out.target.push_back(row.target);
    for (std::size_t j = 0; j < cov_cols.size(); ++j) out.covariates[j].push_back(row.covs[j]);
  }
  out.validate();
  return out;
}

void write_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Ingest, "cannot write file: " + path);
  out << "time";
  for (const auto& n : series.names) out << ',' << n;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < series.size(); ++i) {
    put(series.timestamps[i]);
    out << ',';
    put(series.target[i]);
    for (const auto& c : series.covariates) {
      out << ',';
      put(c[i]);
    }
    out << '\n';
  }
}

TimeSeries resample(const TimeSeries& series, const ResamplePlan& plan) {
  const std::size_t m = series.size();
  plan.validate(m);
  std::vector<std::size_t> indices;
  const std::size_t window_start = m - plan.span;
  for (std::size_t i = m - 1;; i -= plan.rate) {
    indices.push_back(i);
    if (i < window_start + plan.rate) break;
  }
  std::reverse(indices.begin(), indices.end());

  TimeSeries out;
  out.names = series.names;
  out.covariates.assign(series.covariate_count(), {});
  for (std::size_t i : indices) {
    out.timestamps.push_back(series.timestamps[i]);
    out.target.push_back(series.target[i]);
    for (std::size_t j = 0; j < series.covariate_count(); ++j) {
      out.covariates[j].push_back(series.covariates[j][i]);
    }
  }
  return out;
}

SeriesSplit split(const TimeSeries& series, const SplitRatios& ratios) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
    fail(ErrorKind::Config, "split ratios must be positive");
  }
  if (std::fabs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    fail(ErrorKind::Config, "split ratios must sum to 1");
  }
  const std::size_t m = series.size();
  std::size_t n_train = static_cast<std::size_t>(std::floor(m * ratios.train));
  const std::size_t n_val = static_cast<std::size_t>(std::floor(m * ratios.val));
  const std::size_t n_test = static_cast<std::size_t>(std::floor(m * ratios.test));
  n_train += m - (n_train + n_val + n_test);  // remainder goes to train
  if (n_train < 2 || n_val < 2 || n_test < 2) {
    fail(ErrorKind::TooShort, "split produces a segment with fewer than 2 points");
  }
  SeriesSplit out;
  out.train = series.slice(0, n_train);
  out.val = series.slice(n_train, n_train + n_val);
  out.test = series.slice(n_train + n_val, m);
  return out;
}

std::vector<double> finite_diff_time(const TimeSeries& series, int order) {
  if (order != 1 && order != 2) {
    fail(ErrorKind::UnsupportedOrder, "finite_diff_time supports orders 1 and 2");
  }
  const auto& t = series.timestamps;
  const auto& y = series.target;
  const std::size_t m = series.size();
  if (m < static_cast<std::size_t>(order) + 1) {
    fail(ErrorKind::TooShort, "series too short for requested order");
  }
  std::vector<double> out;
  if (order == 1) {
    out.resize(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      out[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
    }
  } else {
    out.resize(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double h1 = t[i] - t[i - 1];
      const double h2 = t[i + 1] - t[i];
      out[i - 1] = 2.0 * (h2 * y[i - 1] - (h1 + h2) * y[i] + h1 * y[i + 1]) /
                   (h1 * h2 * (h1 + h2));
    }
  }
  return out;
}

TimeSeries align_nearest_preceding(const TimeSeries& series,
                                   const std::vector<double>& reference_times) {
  if (reference_times.size() < 2) fail(ErrorKind::TooShort, "need at least 2 reference times");
  for (std::size_t i = 0; i + 1 < reference_times.size(); ++i) {
    if (!(reference_times[i] < reference_times[i + 1])) {
      fail(ErrorKind::Ingest, "reference times must be strictly increasing");
    }
  }
  if (reference_times.front() < series.timestamps.front()) {
    fail(ErrorKind::Index, "reference time precedes the first sample");
  }
  TimeSeries out;
  out.names = series.names;
  out.covariates.assign(series.covariate_count(), {});
  std::size_t cursor = 0;
  for (double rt : reference_times) {
    while (cursor + 1 < series.size() && series.timestamps[cursor + 1] <= rt) ++cursor;
    out.timestamps.push_back(rt);
    out.target.push_back(series.target[cursor]);
    for (std::size_t j = 0; j < series.covariate_count(); ++j) {
      out.covariates[j].push_back(series.covariates[j][cursor]);
    }
  }
  return out;
}

TimeSeries moving_average(const TimeSeries& series, std::size_t window) {
  const std::size_t m = series.size();
  if (window == 0) fail(ErrorKind::Config, "window must be positive");
  if (window > m) fail(ErrorKind::TooShort, "window exceeds series length");

  auto smooth = [&](const std::vector<double>& v) {
    std::vector<double> out(m - window + 1);
    for (std::size_t i = 0; i + window <= m; ++i) {
      out[i] = std::accumulate(v.begin() + i, v.begin() + i + window, 0.0) / window;
    }
    return out;
  };

  TimeSeries out;
  out.names = series.names;
  out.timestamps.assign(series.timestamps.begin() + window - 1, series.timestamps.end());
  out.target = smooth(series.target);
  for (const auto& c : series.covariates) out.covariates.push_back(smooth(c));
  return out;
}

}  // namespace pdelearn
