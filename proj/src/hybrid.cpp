#include "pdelearn/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "pdelearn/parallel.hpp"

namespace pdelearn {

HybridPde::HybridPde(std::vector<PBlock> components, std::vector<ResamplePlan> plans,
                     std::vector<double> weights)
    : components_(std::move(components)), plans_(std::move(plans)), weights_(std::move(weights)) {
  if (components_.empty()) fail(ErrorKind::Config, "hybrid needs at least one component");
  if (plans_.size() != components_.size() || weights_.size() != components_.size()) {
    fail(ErrorKind::Shape, "components, plans, and weights must align");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (w < 0 || !std::isfinite(w)) fail(ErrorKind::Weight, "weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) fail(ErrorKind::Weight, "weights must sum to 1");
  for (std::size_t i = 1; i < components_.size(); ++i) {
    if (components_[i].lhs_order() != components_[0].lhs_order()) {
      fail(ErrorKind::Config, "components must share the LHS order");
    }
  }
}

HybridPde HybridPde::train(const TimeSeries& series, const std::vector<ResamplePlan>& plans,
                           const PBlockConfig& block_config, const TrainConfig& train_config) {
  if (plans.empty()) fail(ErrorKind::Config, "at least one resample plan required");
  for (const auto& plan : plans) plan.validate(series.size());

  std::vector<std::optional<PBlock>> blocks(plans.size());
  std::vector<std::string> failures(plans.size());

  par::parallel_for(plans.size(), [&](std::size_t i) {
    try {
      TimeSeries view = resample(series, plans[i]);
      PBlock block(block_config, series.covariate_count());
      block.train(view, train_config);
      blocks[i] = std::move(block);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!blocks[i]) {
      fail(ErrorKind::TrainingData,
           "component " + std::to_string(i) + " (span=" + std::to_string(plans[i].span) +
               ", rate=" + std::to_string(plans[i].rate) + ") failed: " + failures[i]);
    }
  }

  std::vector<PBlock> components;
  components.reserve(plans.size());
  for (auto& b : blocks) components.push_back(std::move(*b));
  std::vector<double> weights(plans.size(), 1.0 / static_cast<double>(plans.size()));
  return HybridPde(std::move(components), plans, std::move(weights));
}

double HybridPde::evaluate_at(const TimeSeries& series, std::size_t index) const {
  if (index >= series.size()) fail(ErrorKind::Index, "index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const ResamplePlan& plan = plans_[i];
    const std::size_t prefix_len = index + 1;
    if (plan.span > prefix_len || plan.span < components_[i].window_size() * plan.rate - plan.rate + 1) {
      fail(ErrorKind::Index, "component " + std::to_string(i) + ": window shortfall");
    }
    double value;
    if (plan.rate == 1) {
      // the resampled view's trailing window is the series' own trailing
      // window, so evaluate in place
      value = components_[i].evaluate(series, index);
    } else {
      const TimeSeries view = resample(series.prefix(prefix_len), plan);
      if (view.size() < components_[i].window_size()) {
        fail(ErrorKind::Index, "component " + std::to_string(i) + ": window shortfall");
      }
      value = components_[i].evaluate(view, view.size() - 1);
    }
    acc += weights_[i] * value;
  }
  return acc;
}

std::size_t HybridPde::min_history() const {
  std::size_t need = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    need = std::max(need, plans_[i].span);
  }
  return need;
}

int HybridPde::lhs_order() const { return components_[0].lhs_order(); }

HybridPde HybridPde::with_weights(std::vector<double> eps) const {
  if (eps.size() != components_.size()) fail(ErrorKind::Shape, "weight count mismatch");
  double sum = 0.0;
  for (double w : eps) {
    if (w < 0 || !std::isfinite(w)) fail(ErrorKind::Weight, "weights must be nonnegative");
    sum += w;
  }
  if (sum <= 0.0) fail(ErrorKind::Weight, "weights must not all be zero");
  for (double& w : eps) w /= sum;
  return HybridPde(components_, plans_, std::move(eps));
}

std::size_t HybridPde::dominant_component() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < weights_.size(); ++i) {
    if (weights_[i] > weights_[best]) best = i;
  }
  return best;
}

}  // namespace pdelearn
