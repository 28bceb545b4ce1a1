#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pdelearn {

/// Immutable-after-construction multivariate series: one target channel plus
/// k covariate channels over a strictly increasing time grid.
struct TimeSeries {
  std::vector<double> timestamps;
  std::vector<double> target;
  std::vector<std::vector<double>> covariates;
  std::vector<std::string> names;  // target name followed by covariate names

  std::size_t size() const { return timestamps.size(); }
  std::size_t covariate_count() const { return covariates.size(); }

  /// Throws on violated invariants (monotone time, equal lengths, finite values).
  void validate() const;

  /// Rows [begin, end) as a new series.
  TimeSeries slice(std::size_t begin, std::size_t end) const;

  /// Rows [0, end) as a new series.
  TimeSeries prefix(std::size_t end) const { return slice(0, end); }
};

/// Trailing-window subsampling plan: keep `span` most recent points, stride `rate`.
struct ResamplePlan {
  std::size_t span = 0;
  std::size_t rate = 1;

  void validate(std::size_t series_length) const;
  bool operator==(const ResamplePlan&) const = default;
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct SeriesSplit {
  TimeSeries train;
  TimeSeries val;
  TimeSeries test;
};

TimeSeries load_csv(const std::string& path, const std::string& target_column);
void write_csv(const TimeSeries& series, const std::string& path);

/// Indices {m-1, m-1-r, m-1-2r, ...} within the trailing span, ascending.
/// The most recent point is always kept.
TimeSeries resample(const TimeSeries& series, const ResamplePlan& plan);

/// Contiguous chronological split; floor sizes, remainder assigned to train.
SeriesSplit split(const TimeSeries& series, const SplitRatios& ratios);

/// Order 1: forward differences, length m-1, indexed to the left endpoint.
/// Order 2: three-point second differences on interior points, length m-2,
/// valid for non-uniform spacing.
std::vector<double> finite_diff_time(const TimeSeries& series, int order);

/// Trailing mean over `window` points on every channel; output timestamps are
/// the newest point of each window.
TimeSeries moving_average(const TimeSeries& series, std::size_t window);

/// Re-times the series onto `reference_times`, carrying forward the most
/// recent sample at or before each reference time. Used to join channels
/// recorded on mismatched clocks; reference times before the first sample
/// are rejected.
TimeSeries align_nearest_preceding(const TimeSeries& series,
                                   const std::vector<double>& reference_times);

}  // namespace pdelearn
