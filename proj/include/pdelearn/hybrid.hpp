#pragma once

#include <vector>

#include "pdelearn/forecaster.hpp"
#include "pdelearn/pblock.hpp"
#include "pdelearn/series.hpp"

namespace pdelearn {

/// Weighted ensemble of independently trained PBlocks, each reading the
/// series through its own trailing-anchored resample plan.
class HybridPde : public DynamicsModel {
 public:
  HybridPde(std::vector<PBlock> components, std::vector<ResamplePlan> plans,
            std::vector<double> weights);

  /// Trains one component per plan on its reorganized series; components are
  /// independent and train concurrently. Weights start uniform.
  static HybridPde train(const TimeSeries& series, const std::vector<ResamplePlan>& plans,
                         const PBlockConfig& block_config, const TrainConfig& train_config);

  double evaluate_at(const TimeSeries& series, std::size_t index) const override;
  std::size_t min_history() const override;
  int lhs_order() const override;

  /// Returns a copy with weights eps / sum(eps).
  HybridPde with_weights(std::vector<double> eps) const;

  std::size_t component_count() const { return components_.size(); }
  const std::vector<PBlock>& components() const { return components_; }
  const std::vector<ResamplePlan>& plans() const { return plans_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Component carrying the largest weight (lowest index on ties).
  std::size_t dominant_component() const;

 private:
  std::vector<PBlock> components_;
  std::vector<ResamplePlan> plans_;
  std::vector<double> weights_;
};

/// Adapter so a bare PBlock rolls out through the DynamicsModel interface.
class PBlockModel : public DynamicsModel {
 public:
  explicit PBlockModel(const PBlock& block) : block_(block) {}
  double evaluate_at(const TimeSeries& series, std::size_t index) const override {
    return block_.evaluate(series, index);
  }
  std::size_t min_history() const override { return block_.window_size(); }
  int lhs_order() const override { return block_.lhs_order(); }

 private:
  const PBlock& block_;
};

}  // namespace pdelearn
