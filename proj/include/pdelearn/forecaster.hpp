#pragma once

#include <cstddef>
#include <vector>

#include "pdelearn/series.hpp"

namespace pdelearn {

/// Anything that evaluates the dynamics F (or hybrid H) from a causal window
/// ending at `index`.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual double evaluate_at(const TimeSeries& series, std::size_t index) const = 0;
  /// Smallest prefix length that admits one evaluation at its last index.
  virtual std::size_t min_history() const = 0;
  /// 1: F approximates dy/dt; 2: F approximates d2y/dt2.
  virtual int lhs_order() const { return 1; }
};

enum class CovariatePolicy {
  HoldLast,          // repeat the last observed covariate row, extend time by mean dt
  ProvidedFutures,   // read future covariate rows and timestamps from the series
};

enum class ForecastMode {
  SingleStep,  // re-anchor on the true history before every step
  MultiStep,   // feed predictions back into the working series
};

struct RolloutConfig {
  std::size_t horizon = 1;
  CovariatePolicy covariate_policy = CovariatePolicy::HoldLast;
  ForecastMode mode = ForecastMode::MultiStep;
  /// Forecast starts after this sample; defaults to the last sample.
  std::size_t anchor = static_cast<std::size_t>(-1);

  void validate() const;
};

struct RolloutResult {
  std::vector<double> predictions;       // exactly horizon values on success
  std::vector<double> times;             // timestamps of the predictions
  bool aborted = false;                  // non-finite dynamics encountered
  std::size_t failed_step = 0;           // first failing step when aborted
};

/// One forward Euler step from the last sample of `series`:
/// order 1: y + F dt; order 2: v' = v + F dt, y' = y + v' dt (semi-implicit),
/// with v taken from the trailing forward difference.
double euler_step(const DynamicsModel& model, const TimeSeries& series, double dt);

RolloutResult rollout(const DynamicsModel& model, const TimeSeries& series,
                      const RolloutConfig& config);

/// Relative mean squared error: sum (pred-truth)^2 / sum truth^2.
double rmse(const std::vector<double>& predictions, const std::vector<double>& truth);

/// Plain mean squared error, reported alongside for transparency.
double absolute_mse(const std::vector<double>& predictions, const std::vector<double>& truth);

/// Mean of the last up-to-five observed intervals.
double trailing_mean_dt(const TimeSeries& series);

}  // namespace pdelearn
