#pragma once

#include <functional>
#include <memory>

#include "pdelearn/forecaster.hpp"
#include "pdelearn/hybrid.hpp"
#include "pdelearn/metactrl.hpp"
#include "pdelearn/series.hpp"

namespace pdelearn {

/// Rolling-origin evaluation: anchors stride through the region, each anchor
/// forecasts `horizon` steps, squared errors pool across all forecast points.
struct EvalProtocol {
  std::size_t horizon = 10;
  std::size_t anchor_stride = 10;
  ForecastMode mode = ForecastMode::MultiStep;
  CovariatePolicy covariate_policy = CovariatePolicy::ProvidedFutures;
};

struct EvalOutcome {
  double relative_mse = 0.0;
  double absolute_mse = 0.0;
  std::size_t anchors = 0;
  std::size_t points = 0;
};

/// Models may differ per anchor (rolling refit / meta selection); the
/// provider is called once per anchor with the anchor index.
using ModelProvider =
    std::function<std::shared_ptr<const DynamicsModel>(std::size_t anchor)>;

/// Evaluates over target region [region_begin, region_end): anchors start at
/// region_begin - 1 so the first prediction lands on region_begin.
EvalOutcome evaluate_rolling(const ModelProvider& provider, const TimeSeries& series,
                             std::size_t region_begin, std::size_t region_end,
                             const EvalProtocol& protocol);

EvalOutcome evaluate_rolling_fixed(const DynamicsModel& model, const TimeSeries& series,
                                   std::size_t region_begin, std::size_t region_end,
                                   const EvalProtocol& protocol);

struct AblationConfig {
  PBlockConfig block;
  TrainConfig train;
  MetaConfig meta;
  std::vector<PlanSpec> plan_specs;
  std::vector<std::vector<double>> extra_eps;  // appended to the default grid
  EvalProtocol protocol;
  SplitRatios ratios;
  std::size_t refit_bucket = 0;  // 0: refit at every anchor prefix
};

struct AblationResult {
  EvalOutcome single;
  EvalOutcome hybrid;
  EvalOutcome meta;
  EvalOutcome uniform;  // the uniform-weights grid point, scored on test
  std::size_t hybrid_point = 0;           // fixed grid point chosen on validation
  std::vector<double> hybrid_val_scores;  // validation relative MSE per grid point
  std::vector<std::size_t> meta_selections;  // grid point picked at each test anchor
};

/// Table-3 style comparison: a single full-span block, the best fixed hybrid
/// grid point chosen on the validation region, and the meta-controlled
/// hybrid, all scored on the test region with the same protocol.
AblationResult run_ablation(const TimeSeries& series, const AblationConfig& config);

/// Chooses a fixed grid point by validation relative MSE (rolling refit),
/// reusing `factory` for component training.
std::size_t select_fixed_point(const TimeSeries& series, const HyperGrid& grid,
                               HybridFactory& factory, std::size_t val_begin,
                               std::size_t val_end, const EvalProtocol& protocol,
                               std::vector<double>* scores = nullptr);

}  // namespace pdelearn
