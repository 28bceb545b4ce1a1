#include "pdelearn/experiment.hpp"

#include <cmath>

#include "pdelearn/errors.hpp"

namespace pdelearn {

EvalOutcome evaluate_rolling(const ModelProvider& provider, const TimeSeries& series,
                             std::size_t region_begin, std::size_t region_end,
                             const EvalProtocol& protocol) {
  const std::size_t m = series.size();
  if (region_begin == 0 || region_end > m || region_begin >= region_end) {
    fail(ErrorKind::Index, "bad evaluation region");
  }
  if (protocol.horizon == 0 || protocol.anchor_stride == 0) {
    fail(ErrorKind::Config, "horizon and stride must be positive");
  }

  double num = 0.0, den = 0.0, abs_acc = 0.0;
  std::size_t points = 0, anchors = 0;

  for (std::size_t a = region_begin - 1;
       a + protocol.horizon <= region_end - 1; a += protocol.anchor_stride) {
    const std::shared_ptr<const DynamicsModel> model = provider(a);
    RolloutConfig rc;
    rc.horizon = protocol.horizon;
    rc.mode = protocol.mode;
    rc.covariate_policy = protocol.covariate_policy;
    rc.anchor = a;
    const RolloutResult rr = rollout(*model, series, rc);
    if (rr.aborted) {
      fail(ErrorKind::Numeric, "rollout aborted at anchor " + std::to_string(a) + ", step " +
                                   std::to_string(rr.failed_step));
    }
    for (std::size_t s = 0; s < rr.predictions.size(); ++s) {
      const double truth = series.target[a + 1 + s];
      const double diff = rr.predictions[s] - truth;
      num += diff * diff;
      den += truth * truth;
      abs_acc += diff * diff;
      ++points;
    }
    ++anchors;
  }
  if (points == 0) fail(ErrorKind::TooShort, "evaluation region admits no anchors");
  if (den == 0.0) fail(ErrorKind::DegenerateMetric, "truth is identically zero");

  EvalOutcome out;
  out.relative_mse = num / den;
  out.absolute_mse = abs_acc / static_cast<double>(points);
  out.points = points;
  out.anchors = anchors;
  return out;
}

EvalOutcome evaluate_rolling_fixed(const DynamicsModel& model, const TimeSeries& series,
                                   std::size_t region_begin, std::size_t region_end,
                                   const EvalProtocol& protocol) {
  struct Borrowed : DynamicsModel {
    const DynamicsModel* inner;
    double evaluate_at(const TimeSeries& s, std::size_t i) const override {
      return inner->evaluate_at(s, i);
    }
    std::size_t min_history() const override { return inner->min_history(); }
    int lhs_order() const override { return inner->lhs_order(); }
  };
  auto borrowed = std::make_shared<Borrowed>();
  borrowed->inner = &model;
  return evaluate_rolling([&](std::size_t) { return borrowed; }, series, region_begin,
                          region_end, protocol);
}

std::size_t select_fixed_point(const TimeSeries& series, const HyperGrid& grid,
                               HybridFactory& factory, std::size_t val_begin,
                               std::size_t val_end, const EvalProtocol& protocol,
                               std::vector<double>* scores) {
  std::vector<double> val_scores(grid.points.size(), 0.0);
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    auto provider = [&](std::size_t anchor) {
      return std::make_shared<const HybridPde>(
          factory.build(series, anchor + 1, grid.points[p]));
    };
    val_scores[p] =
        evaluate_rolling(provider, series, val_begin, val_end, protocol).relative_mse;
  }
  if (scores) *scores = val_scores;
  return MetaController::argmin_lowest_tie(val_scores);
}

AblationResult run_ablation(const TimeSeries& series, const AblationConfig& config) {
  series.validate();
  const SeriesSplit parts = split(series, config.ratios);
  const std::size_t n_train = parts.train.size();
  const std::size_t n_val = parts.val.size();
  const std::size_t test_begin = n_train + n_val;
  const std::size_t m = series.size();

  AblationResult result;

  // Single: one full-span block trained once on the training split.
  {
    PBlock single(config.block, series.covariate_count());
    single.train(parts.train, config.train);
    PBlockModel model(single);
    result.single = evaluate_rolling_fixed(model, series, test_begin, m, config.protocol);
  }

  HyperGrid grid = build_default_grid(config.plan_specs);
  for (const auto& eps : config.extra_eps) {
    if (eps.size() != grid.component_count()) {
      fail(ErrorKind::Config, "eps vector length must match the plan grid");
    }
    grid.points.push_back({grid.points.front().plan_indices, eps});
  }
  HybridFactory factory(config.plan_specs, config.block, config.train, config.refit_bucket);

  // Hybrid: fixed grid point chosen on the validation region, rolling refit.
  result.hybrid_point = select_fixed_point(series, grid, factory, n_train, test_begin,
                                           config.protocol, &result.hybrid_val_scores);
  {
    const HyperparamPoint& point = grid.points[result.hybrid_point];
    auto provider = [&](std::size_t anchor) {
      return std::make_shared<const HybridPde>(factory.build(series, anchor + 1, point));
    };
    result.hybrid = evaluate_rolling(provider, series, test_begin, m, config.protocol);
  }

  // Uniform-weights baseline on the same protocol.
  {
    std::size_t uniform_point = 0;
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      const auto& eps = grid.points[p].eps;
      const double want = 1.0 / static_cast<double>(eps.size());
      bool all_equal = true;
      for (double e : eps) all_equal = all_equal && std::fabs(e - want) < 1e-12;
      if (all_equal) {
        uniform_point = p;
        break;
      }
    }
    const HyperparamPoint& point = grid.points[uniform_point];
    auto provider = [&](std::size_t anchor) {
      return std::make_shared<const HybridPde>(factory.build(series, anchor + 1, point));
    };
    result.uniform = evaluate_rolling(provider, series, test_begin, m, config.protocol);
  }

  // Meta: controller trained on the training split, per-anchor selection.
  {
    const MetaController controller =
        MetaController::train_controller(parts.train, grid, factory, config.meta);
    auto provider = [&](std::size_t anchor) {
      const TimeSeries prefix = series.prefix(anchor + 1);
      const std::size_t chosen = controller.search_hyperparams(prefix, grid);
      result.meta_selections.push_back(chosen);
      return std::make_shared<const HybridPde>(
          factory.build(series, anchor + 1, grid.points[chosen]));
    };
    result.meta = evaluate_rolling(provider, series, test_begin, m, config.protocol);
  }
  return result;
}

}  // namespace pdelearn
