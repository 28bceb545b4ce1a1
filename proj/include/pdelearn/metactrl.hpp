#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pdelearn/hybrid.hpp"
#include "pdelearn/pblock.hpp"
#include "pdelearn/series.hpp"

namespace pdelearn {

/// Resample plan expressed relative to the data at hand: the span is a
/// fraction of the available prefix, the rate a fixed stride.
struct PlanSpec {
  double span_fraction = 1.0;
  std::size_t rate = 1;

  bool operator==(const PlanSpec&) const = default;
};

/// One candidate hyperparameter assignment: a plan per hybrid component plus
/// the mixing weights.
struct HyperparamPoint {
  std::vector<int> plan_indices;
  std::vector<double> eps;
};

struct HyperGrid {
  std::vector<PlanSpec> plan_specs;
  std::vector<HyperparamPoint> points;

  std::size_t component_count() const { return plan_specs.size(); }
};

/// One component per plan spec; points enumerate eps over the unit vectors,
/// the uniform mix, and each adjacent 0.5/0.5 pair.
HyperGrid build_default_grid(const std::vector<PlanSpec>& plan_specs);

/// Resolves a PlanSpec against a prefix length so the resampled view leaves
/// enough rows for candidate windows of `window_size` points.
ResamplePlan resolve_plan(const PlanSpec& spec, std::size_t prefix_len,
                          std::size_t window_size, int lhs_order);

std::size_t min_span_for(const PlanSpec& spec, std::size_t window_size, int lhs_order);

/// Trains hybrid components on demand, cached per (plan, prefix bucket) so
/// meta-training across anchors stays tractable. bucket_size 0 keys the cache
/// on the exact prefix length (verbatim per-anchor retraining).
class HybridFactory {
 public:
  HybridFactory(std::vector<PlanSpec> plan_specs, PBlockConfig block_config,
                TrainConfig train_config, std::size_t bucket_size);

  /// Hybrid for `point`, components trained on series[0, prefix_len).
  HybridPde build(const TimeSeries& series, std::size_t prefix_len, const HyperparamPoint& point);

  /// Populates the cache for every plan at this prefix (parallel, deterministic).
  void warm(const TimeSeries& series, std::size_t prefix_len);

  std::size_t smallest_usable_prefix() const;
  const std::vector<PlanSpec>& plan_specs() const { return plan_specs_; }
  const PBlockConfig& block_config() const { return block_config_; }

 private:
  std::size_t bucket(std::size_t prefix_len) const;
  const PBlock& component(const TimeSeries& series, std::size_t prefix_len, int plan_index);

  std::vector<PlanSpec> plan_specs_;
  PBlockConfig block_config_;
  TrainConfig train_config_;
  std::size_t bucket_size_;
  std::size_t probe_window_size_;
  std::map<std::pair<int, std::size_t>, PBlock> cache_;
};

struct MetaConfig {
  int hidden_dim = 16;
  std::size_t window = 64;        // encoder input length
  std::size_t eval_window = 16;   // forward window for the realized residual
  std::size_t anchor_stride = 10;
  int epochs = 400;
  double learning_rate = 3e-3;  // the searched grid is {1e-2, 3e-3, 1e-3}
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gated-recurrent series encoder plus a two-layer feedforward scorer that
/// predicts the hybrid model's residual error for a hyperparameter point.
///
/// Encoder update, per step with input x_t and state h:
///   z = sigmoid(Wz x_t + Uz h + bz)
///   r = sigmoid(Wr x_t + Ur h + br)
///   c = tanh(Wh x_t + Uh (r * h) + bh)
///   h <- (1 - z) * h + z * c
/// Scorer: score = W2 tanh(W1 [h ; enc(point)] + b1) + b2, mapped back
/// through the stored target normalization.
class MetaController {
 public:
  MetaController(std::size_t covariate_count, const HyperGrid& grid, const MetaConfig& config);

  /// Runs the encoder over the trailing window and scores the point; the
  /// returned value approximates the mean squared residual of the hybrid on
  /// the upcoming stretch.
  double predict_loss(const TimeSeries& series, const HyperparamPoint& point) const;

  /// Index into grid.points minimizing predict_loss; ties break low.
  std::size_t search_hyperparams(const TimeSeries& series, const HyperGrid& grid) const;

  static std::size_t argmin_lowest_tie(const std::vector<double>& losses);

  static MetaController train_controller(const TimeSeries& train_series, const HyperGrid& grid,
                                         HybridFactory& factory, const MetaConfig& config);

  // ---- parameters, normalization, and training hooks ----
  struct Params {
    std::vector<double> wz, uz, bz, wr, ur, br, wh, uh, bh;  // encoder
    std::vector<double> w1, b1, w2, b2;                      // scorer
    std::vector<std::vector<double>*> all();
    std::vector<const std::vector<double>*> all() const;
    void zero_like(const Params& shape);
  };

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const MetaConfig& config() const { return config_; }
  std::size_t covariate_count() const { return covariate_count_; }
  std::size_t component_count() const { return component_count_; }
  const std::vector<PlanSpec>& plan_specs() const { return plan_specs_; }

  struct Normalization {
    std::vector<double> input_mean, input_std;  // per encoder input channel
    double target_mean = 0.0;
    double target_std = 1.0;
    // residuals span orders of magnitude, so training regresses
    // log(residual + floor); the transform is monotone and leaves the argmin
    // selection unchanged
    bool log_target = false;
    static constexpr double kLogFloor = 1e-12;
  };
  Normalization& normalization() { return norm_; }
  const Normalization& normalization() const { return norm_; }

  /// Squared prediction error in normalized target space for one triple,
  /// accumulating parameter gradients; exposed for the finite-difference
  /// gradient check.
  double loss_and_gradients(const TimeSeries& series, const HyperparamPoint& point,
                            double target, Params* grads) const;

  std::vector<double> encode_point(const HyperparamPoint& point) const;
  std::vector<std::vector<double>> window_features(const TimeSeries& series) const;

 private:
  double forward(const std::vector<std::vector<double>>& inputs,
                 const std::vector<double>& point_enc) const;
  double loss_on_features(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& point_enc, double target_norm,
                          Params* grads) const;
  double score_features(const std::vector<std::vector<double>>& inputs,
                        const std::vector<double>& point_enc, std::optional<double> target_norm,
                        Params* grads) const;

  std::size_t covariate_count_ = 0;
  std::size_t component_count_ = 0;
  std::size_t input_dim_ = 0;
  std::size_t point_dim_ = 0;
  std::vector<PlanSpec> plan_specs_;
  MetaConfig config_;
  Params params_;
  Normalization norm_;

  friend class MetaTrainer;
};

}  // namespace pdelearn
