#include "pdelearn/forecaster.hpp"

#include <algorithm>
#include <cmath>

#include "pdelearn/errors.hpp"

namespace pdelearn {

void RolloutConfig::validate() const {
  if (horizon == 0) fail(ErrorKind::Config, "horizon must be at least 1");
}

double trailing_mean_dt(const TimeSeries& series) {
  const std::size_t m = series.size();
  if (m < 2) fail(ErrorKind::TooShort, "need two points for an interval");
  const std::size_t count = std::min<std::size_t>(5, m - 1);
  double acc = 0.0;
  for (std::size_t i = m - count; i < m; ++i) {
    acc += series.timestamps[i] - series.timestamps[i - 1];
  }
  return acc / static_cast<double>(count);
}

namespace {

double trailing_velocity(const TimeSeries& series) {
  const std::size_t m = series.size();
  return (series.target[m - 1] - series.target[m - 2]) /
         (series.timestamps[m - 1] - series.timestamps[m - 2]);
}

void append_row(TimeSeries& series, double t, double y, const std::vector<double>& covs) {
  series.timestamps.push_back(t);
  series.target.push_back(y);
  for (std::size_t j = 0; j < series.covariates.size(); ++j) {
    series.covariates[j].push_back(covs[j]);
  }
}

std::vector<double> last_covariates(const TimeSeries& series) {
  std::vector<double> covs(series.covariate_count());
  for (std::size_t j = 0; j < covs.size(); ++j) covs[j] = series.covariates[j].back();
  return covs;
}

}  // namespace

double euler_step(const DynamicsModel& model, const TimeSeries& series, double dt) {
  if (dt <= 0) fail(ErrorKind::Config, "dt must be positive");
  const std::size_t last = series.size() - 1;
  const double f = model.evaluate_at(series, last);
  if (!std::isfinite(f)) {
    fail(ErrorKind::Numeric, "non-finite dynamics at sample " + std::to_string(last));
  }
  if (model.lhs_order() == 1) {
    return series.target[last] + f * dt;
  }
  const double v_next = trailing_velocity(series) + f * dt;
  return series.target[last] + v_next * dt;
}

RolloutResult rollout(const DynamicsModel& model, const TimeSeries& series,
                      const RolloutConfig& config) {
  config.validate();
  const std::size_t m = series.size();
  std::size_t anchor = config.anchor;
  if (anchor == static_cast<std::size_t>(-1)) anchor = m - 1;
  if (anchor >= m) fail(ErrorKind::Index, "anchor out of range");
  if (anchor + 1 < model.min_history()) {
    fail(ErrorKind::Index, "anchor prefix shorter than the model window");
  }
  const bool needs_futures = config.covariate_policy == CovariatePolicy::ProvidedFutures ||
                             config.mode == ForecastMode::SingleStep;
  if (needs_futures && anchor + config.horizon >= m) {
    fail(ErrorKind::Index, "horizon reaches past the available series rows");
  }

  RolloutResult result;
  result.predictions.reserve(config.horizon);
  result.times.reserve(config.horizon);

  if (config.mode == ForecastMode::SingleStep) {
    // independent one-step predictions from the true history prefix
    for (std::size_t s = 0; s < config.horizon; ++s) {
      const TimeSeries prefix = series.prefix(anchor + 1 + s);
      const double dt = series.timestamps[anchor + 1 + s] - series.timestamps[anchor + s];
      double next = 0.0;
      try {
        next = euler_step(model, prefix, dt);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        result.aborted = true;
        result.failed_step = s;
        return result;
      }
      result.predictions.push_back(next);
      result.times.push_back(series.timestamps[anchor + 1 + s]);
    }
    return result;
  }

  TimeSeries working = series.prefix(anchor + 1);
  // second-order dynamics carry (y, dy/dt); the velocity starts from the
  // trailing observed difference
  double velocity = (model.lhs_order() == 2) ? trailing_velocity(working) : 0.0;

  for (std::size_t s = 0; s < config.horizon; ++s) {
    const std::size_t last = working.size() - 1;
    double f = 0.0;
    try {
      f = model.evaluate_at(working, last);
      if (!std::isfinite(f)) {
        fail(ErrorKind::Numeric, "non-finite dynamics at step " + std::to_string(s));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numeric) throw;
      result.aborted = true;
      result.failed_step = s;
      return result;
    }

    double t_next;
    std::vector<double> covs;
    if (config.covariate_policy == CovariatePolicy::ProvidedFutures) {
      const std::size_t src = anchor + 1 + s;
      t_next = series.timestamps[src];
      covs.resize(series.covariate_count());
      for (std::size_t j = 0; j < covs.size(); ++j) covs[j] = series.covariates[j][src];
    } else {
      t_next = working.timestamps.back() + trailing_mean_dt(working);
      covs = last_covariates(working);
    }
    const double dt = t_next - working.timestamps.back();

    double y_next;
    if (model.lhs_order() == 1) {
      y_next = working.target[last] + f * dt;
    } else {
      velocity += f * dt;
      y_next = working.target[last] + velocity * dt;
    }
    if (!std::isfinite(y_next)) {
      result.aborted = true;
      result.failed_step = s;
      return result;
    }
    append_row(working, t_next, y_next, covs);
    result.predictions.push_back(y_next);
    result.times.push_back(t_next);
  }
  return result;
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& truth) {
  if (predictions.size() != truth.size() || truth.empty()) {
    fail(ErrorKind::Shape, "rmse needs equal non-empty vectors");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = predictions[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) fail(ErrorKind::DegenerateMetric, "truth is identically zero");
  return num / den;
}

double absolute_mse(const std::vector<double>& predictions, const std::vector<double>& truth) {
  if (predictions.size() != truth.size() || truth.empty()) {
    fail(ErrorKind::Shape, "mse needs equal non-empty vectors");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = predictions[i] - truth[i];
    num += d * d;
  }
  return num / static_cast<double>(truth.size());
}

}  // namespace pdelearn
