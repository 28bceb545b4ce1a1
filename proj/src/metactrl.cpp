#include "pdelearn/metactrl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdelearn/parallel.hpp"

namespace pdelearn {

namespace {

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += M x, M is rows x cols row-major
void gemv_acc(const std::vector<double>& m, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T x
void gemv_t_acc(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * x[r];
  }
}

// M += a b^T
void outer_acc(std::vector<double>& m, std::size_t rows, std::size_t cols, const double* a,
               const double* b) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += a[r] * b[c];
  }
}

}  // namespace

HyperGrid build_default_grid(const std::vector<PlanSpec>& plan_specs) {
  if (plan_specs.empty()) fail(ErrorKind::Config, "plan grid must be non-empty");
  HyperGrid grid;
  grid.plan_specs = plan_specs;
  const std::size_t h = plan_specs.size();
  std::vector<int> identity(h);
  for (std::size_t i = 0; i < h; ++i) identity[i] = static_cast<int>(i);

  auto add = [&](std::vector<double> eps) {
    grid.points.push_back({identity, std::move(eps)});
  };
  for (std::size_t i = 0; i < h; ++i) {
    std::vector<double> eps(h, 0.0);
    eps[i] = 1.0;
    add(std::move(eps));
  }
  if (h > 1) {
    add(std::vector<double>(h, 1.0 / static_cast<double>(h)));
    for (std::size_t i = 0; i + 1 < h; ++i) {
      std::vector<double> eps(h, 0.0);
      eps[i] = 0.5;
      eps[i + 1] = 0.5;
      add(std::move(eps));
    }
  }
  return grid;
}

std::size_t min_span_for(const PlanSpec& spec, std::size_t window_size, int lhs_order) {
  // enough resampled rows for a candidate matrix plus a small regression margin
  const std::size_t min_view = window_size + static_cast<std::size_t>(lhs_order) + 4;
  return (min_view - 1) * spec.rate + 1;
}

ResamplePlan resolve_plan(const PlanSpec& spec, std::size_t prefix_len,
                          std::size_t window_size, int lhs_order) {
  if (spec.span_fraction <= 0.0 || spec.span_fraction > 1.0) {
    fail(ErrorKind::Plan, "span fraction must lie in (0, 1]");
  }
  if (spec.rate == 0) fail(ErrorKind::Plan, "rate must be positive");
  const std::size_t lo = min_span_for(spec, window_size, lhs_order);
  if (lo > prefix_len) fail(ErrorKind::Plan, "prefix too short for plan");
  std::size_t span = static_cast<std::size_t>(std::floor(spec.span_fraction *
                                                         static_cast<double>(prefix_len)));
  span = std::clamp(span, lo, prefix_len);
  return ResamplePlan{span, spec.rate};
}

// ---------------------------------------------------------------------------
// HybridFactory

HybridFactory::HybridFactory(std::vector<PlanSpec> plan_specs, PBlockConfig block_config,
                             TrainConfig train_config, std::size_t bucket_size)
    : plan_specs_(std::move(plan_specs)),
      block_config_(block_config),
      train_config_(train_config),
      bucket_size_(bucket_size) {
  if (plan_specs_.empty()) fail(ErrorKind::Config, "plan grid must be non-empty");
  probe_window_size_ = max_window_size(block_config_);
}

std::size_t HybridFactory::bucket(std::size_t prefix_len) const {
  if (bucket_size_ == 0) return prefix_len;
  const std::size_t floor_len = prefix_len - (prefix_len % bucket_size_);
  return std::max(floor_len, smallest_usable_prefix());
}

std::size_t HybridFactory::smallest_usable_prefix() const {
  std::size_t need = 0;
  for (const auto& spec : plan_specs_) {
    need = std::max(need, min_span_for(spec, probe_window_size_, block_config_.lhs_order));
  }
  return need;
}

const PBlock& HybridFactory::component(const TimeSeries& series, std::size_t prefix_len,
                                       int plan_index) {
  if (plan_index < 0 || plan_index >= static_cast<int>(plan_specs_.size())) {
    fail(ErrorKind::Config, "plan index out of range");
  }
  const std::size_t key_len = std::min(bucket(prefix_len), prefix_len);
  const auto key = std::make_pair(plan_index, key_len);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  const ResamplePlan plan = resolve_plan(plan_specs_[static_cast<std::size_t>(plan_index)],
                                         key_len, probe_window_size_, block_config_.lhs_order);
  TimeSeries view = resample(series.prefix(key_len), plan);
  PBlock block(block_config_, series.covariate_count());
  block.train(view, train_config_);
  return cache_.emplace(key, std::move(block)).first->second;
}

void HybridFactory::warm(const TimeSeries& series, std::size_t prefix_len) {
  std::vector<int> missing;
  const std::size_t key_len = std::min(bucket(prefix_len), prefix_len);
  for (std::size_t p = 0; p < plan_specs_.size(); ++p) {
    if (!cache_.count({static_cast<int>(p), key_len})) missing.push_back(static_cast<int>(p));
  }
  if (missing.empty()) return;
  std::vector<PBlock> built;
  built.reserve(missing.size());
  for (std::size_t i = 0; i < missing.size(); ++i) {
    built.emplace_back(block_config_, series.covariate_count());
  }
  std::vector<std::string> failures(missing.size());
  par::parallel_for(missing.size(), [&](std::size_t i) {
    try {
      const auto& spec = plan_specs_[static_cast<std::size_t>(missing[i])];
      const ResamplePlan plan =
          resolve_plan(spec, key_len, probe_window_size_, block_config_.lhs_order);
      TimeSeries view = resample(series.prefix(key_len), plan);
      built[i].train(view, train_config_);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (!failures[i].empty()) {
      fail(ErrorKind::TrainingData,
           "plan " + std::to_string(missing[i]) + " failed at prefix " +
               std::to_string(key_len) + ": " + failures[i]);
    }
    cache_.emplace(std::make_pair(missing[i], key_len), std::move(built[i]));
  }
}

HybridPde HybridFactory::build(const TimeSeries& series, std::size_t prefix_len,
                               const HyperparamPoint& point) {
  if (point.plan_indices.empty() || point.plan_indices.size() != point.eps.size()) {
    fail(ErrorKind::Config, "malformed hyperparameter point");
  }
  const std::size_t key_len = std::min(bucket(prefix_len), prefix_len);
  std::vector<PBlock> components;
  std::vector<ResamplePlan> plans;
  components.reserve(point.plan_indices.size());
  for (int idx : point.plan_indices) {
    components.push_back(component(series, prefix_len, idx));
    plans.push_back(resolve_plan(plan_specs_[static_cast<std::size_t>(idx)], key_len,
                                 probe_window_size_, block_config_.lhs_order));
  }
  double sum = 0.0;
  for (double e : point.eps) {
    if (e < 0 || !std::isfinite(e)) fail(ErrorKind::Weight, "eps must be nonnegative");
    sum += e;
  }
  if (sum <= 0.0) fail(ErrorKind::Weight, "eps must not all be zero");
  std::vector<double> eps = point.eps;
  for (double& e : eps) e /= sum;
  return HybridPde(std::move(components), std::move(plans), std::move(eps));
}

// ---------------------------------------------------------------------------
// MetaController

void MetaConfig::validate() const {
  if (hidden_dim < 1) fail(ErrorKind::Config, "hidden_dim must be positive");
  if (window < 2) fail(ErrorKind::Config, "window must be at least 2");
  if (eval_window < 1) fail(ErrorKind::Config, "eval_window must be positive");
  if (anchor_stride < 1) fail(ErrorKind::Config, "anchor_stride must be positive");
  if (epochs < 0) fail(ErrorKind::Config, "epochs must be nonnegative");
  if (learning_rate <= 0) fail(ErrorKind::Config, "learning_rate must be positive");
  if (momentum < 0 || momentum >= 1) fail(ErrorKind::Config, "momentum out of [0,1)");
}

std::vector<std::vector<double>*> MetaController::Params::all() {
  return {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh, &w1, &b1, &w2, &b2};
}

std::vector<const std::vector<double>*> MetaController::Params::all() const {
  return {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh, &w1, &b1, &w2, &b2};
}

void MetaController::Params::zero_like(const Params& shape) {
  auto dst = all();
  auto src = shape.all();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->assign(src[i]->size(), 0.0);
}

MetaController::MetaController(std::size_t covariate_count, const HyperGrid& grid,
                               const MetaConfig& config)
    : covariate_count_(covariate_count),
      component_count_(grid.component_count()),
      plan_specs_(grid.plan_specs),
      config_(config) {
  config_.validate();
  if (component_count_ == 0) fail(ErrorKind::Config, "grid must have at least one plan");
  input_dim_ = covariate_count_ + 2;  // y, covariates, time gap
  point_dim_ = 3 * component_count_;
  const std::size_t d = static_cast<std::size_t>(config_.hidden_dim);

  params_.wz.assign(d * input_dim_, 0.0);
  params_.uz.assign(d * d, 0.0);
  params_.bz.assign(d, 0.0);
  params_.wr.assign(d * input_dim_, 0.0);
  params_.ur.assign(d * d, 0.0);
  params_.br.assign(d, 0.0);
  params_.wh.assign(d * input_dim_, 0.0);
  params_.uh.assign(d * d, 0.0);
  params_.bh.assign(d, 0.0);
  params_.w1.assign(d * (d + point_dim_), 0.0);
  params_.b1.assign(d, 0.0);
  params_.w2.assign(d, 0.0);
  params_.b2.assign(1, 0.0);

  norm_.input_mean.assign(input_dim_, 0.0);
  norm_.input_std.assign(input_dim_, 1.0);
}

std::vector<double> MetaController::encode_point(const HyperparamPoint& point) const {
  if (point.plan_indices.size() != component_count_ || point.eps.size() != component_count_) {
    fail(ErrorKind::Config, "point does not match the grid's component count");
  }
  std::vector<double> enc;
  enc.reserve(point_dim_);
  for (std::size_t i = 0; i < component_count_; ++i) {
    const int idx = point.plan_indices[i];
    if (idx < 0 || idx >= static_cast<int>(plan_specs_.size())) {
      fail(ErrorKind::Config, "plan index out of range");
    }
    const PlanSpec& spec = plan_specs_[static_cast<std::size_t>(idx)];
    enc.push_back(spec.span_fraction);
    enc.push_back((static_cast<double>(spec.rate) - 1.0) / 8.0);
    enc.push_back(point.eps[i]);
  }
  return enc;
}

std::vector<std::vector<double>> MetaController::window_features(const TimeSeries& series) const {
  const std::size_t m = series.size();
  if (m < 2) fail(ErrorKind::TooShort, "window needs at least 2 points");
  if (series.covariate_count() != covariate_count_) {
    fail(ErrorKind::Schema, "series covariate count does not match the controller");
  }
  const std::size_t len = std::min(config_.window, m);
  const std::size_t start = m - len;
  std::vector<std::vector<double>> features(len, std::vector<double>(input_dim_));
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t idx = start + i;
    std::vector<double>& f = features[i];
    f[0] = (series.target[idx] - norm_.input_mean[0]) / norm_.input_std[0];
    for (std::size_t j = 0; j < covariate_count_; ++j) {
      f[1 + j] = (series.covariates[j][idx] - norm_.input_mean[1 + j]) / norm_.input_std[1 + j];
    }
    const double gap = idx > 0 ? series.timestamps[idx] - series.timestamps[idx - 1]
                               : series.timestamps[1] - series.timestamps[0];
    f[input_dim_ - 1] =
        (gap - norm_.input_mean[input_dim_ - 1]) / norm_.input_std[input_dim_ - 1];
  }
  return features;
}

double MetaController::forward(const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>& point_enc) const {
  return score_features(inputs, point_enc, std::nullopt, nullptr);
}

double MetaController::loss_on_features(const std::vector<std::vector<double>>& inputs,
                                        const std::vector<double>& point_enc, double target_norm,
                                        Params* grads) const {
  const double out = score_features(inputs, point_enc, target_norm, grads);
  if (grads) return out;  // score_features returned the loss on the grad path
  const double diff = out - target_norm;
  return diff * diff;
}

// Returns the raw scorer output, or, when grads is set, runs the backward
// pass against target_norm and returns the squared error.
double MetaController::score_features(const std::vector<std::vector<double>>& inputs,
                                      const std::vector<double>& point_enc,
                                      std::optional<double> target_norm, Params* grads) const {
  const std::size_t d = static_cast<std::size_t>(config_.hidden_dim);
  const std::size_t steps = inputs.size();

  struct StepCache {
    std::vector<double> z, r, c, h_prev;
  };
  std::vector<StepCache> cache(grads ? steps : 0);

  std::vector<double> h(d, 0.0);
  std::vector<double> az(d), ar(d), ah(d), rh(d);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* x = inputs[t].data();
    std::fill(az.begin(), az.end(), 0.0);
    std::fill(ar.begin(), ar.end(), 0.0);
    std::fill(ah.begin(), ah.end(), 0.0);
    gemv_acc(params_.wz, d, input_dim_, x, az.data());
    gemv_acc(params_.uz, d, d, h.data(), az.data());
    gemv_acc(params_.wr, d, input_dim_, x, ar.data());
    gemv_acc(params_.ur, d, d, h.data(), ar.data());
    std::vector<double> z(d), r(d), c(d);
    for (std::size_t i = 0; i < d; ++i) {
      z[i] = sigmoid(az[i] + params_.bz[i]);
      r[i] = sigmoid(ar[i] + params_.br[i]);
    }
    for (std::size_t i = 0; i < d; ++i) rh[i] = r[i] * h[i];
    gemv_acc(params_.wh, d, input_dim_, x, ah.data());
    gemv_acc(params_.uh, d, d, rh.data(), ah.data());
    for (std::size_t i = 0; i < d; ++i) c[i] = std::tanh(ah[i] + params_.bh[i]);
    if (grads) {
      cache[t].z = z;
      cache[t].r = r;
      cache[t].c = c;
      cache[t].h_prev = h;
    }
    for (std::size_t i = 0; i < d; ++i) h[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
  }

  std::vector<double> u(d + point_dim_);
  std::copy(h.begin(), h.end(), u.begin());
  std::copy(point_enc.begin(), point_enc.end(), u.begin() + static_cast<long>(d));
  std::vector<double> a1(d, 0.0), s(d);
  gemv_acc(params_.w1, d, d + point_dim_, u.data(), a1.data());
  for (std::size_t i = 0; i < d; ++i) s[i] = std::tanh(a1[i] + params_.b1[i]);
  double out = params_.b2[0];
  for (std::size_t i = 0; i < d; ++i) out += params_.w2[i] * s[i];

  if (!grads) return out;

  const double diff = out - *target_norm;
  const double loss = diff * diff;
  const double dout = 2.0 * diff;

  std::vector<double> ds(d), da1(d), du(d + point_dim_, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    grads->w2[i] += dout * s[i];
    ds[i] = dout * params_.w2[i];
    da1[i] = ds[i] * (1.0 - s[i] * s[i]);
    grads->b1[i] += da1[i];
  }
  grads->b2[0] += dout;
  outer_acc(grads->w1, d, d + point_dim_, da1.data(), u.data());
  gemv_t_acc(params_.w1, d, d + point_dim_, da1.data(), du.data());

  std::vector<double> g(du.begin(), du.begin() + static_cast<long>(d));
  std::vector<double> dc(d), dah(d), dz(d), daz(d), dh_prev(d), drh(d), dr(d), dar(d);
  for (std::size_t t = steps; t-- > 0;) {
    const StepCache& sc = cache[t];
    const double* x = inputs[t].data();
    for (std::size_t i = 0; i < d; ++i) {
      dc[i] = g[i] * sc.z[i];
      dah[i] = dc[i] * (1.0 - sc.c[i] * sc.c[i]);
      dz[i] = g[i] * (sc.c[i] - sc.h_prev[i]);
      daz[i] = dz[i] * sc.z[i] * (1.0 - sc.z[i]);
      dh_prev[i] = g[i] * (1.0 - sc.z[i]);
      rh[i] = sc.r[i] * sc.h_prev[i];
    }
    outer_acc(grads->wh, d, input_dim_, dah.data(), x);
    outer_acc(grads->uh, d, d, dah.data(), rh.data());
    for (std::size_t i = 0; i < d; ++i) grads->bh[i] += dah[i];

    std::fill(drh.begin(), drh.end(), 0.0);
    gemv_t_acc(params_.uh, d, d, dah.data(), drh.data());
    for (std::size_t i = 0; i < d; ++i) {
      dr[i] = drh[i] * sc.h_prev[i];
      dar[i] = dr[i] * sc.r[i] * (1.0 - sc.r[i]);
      dh_prev[i] += drh[i] * sc.r[i];
    }
    outer_acc(grads->wz, d, input_dim_, daz.data(), x);
    outer_acc(grads->uz, d, d, daz.data(), sc.h_prev.data());
    outer_acc(grads->wr, d, input_dim_, dar.data(), x);
    outer_acc(grads->ur, d, d, dar.data(), sc.h_prev.data());
    for (std::size_t i = 0; i < d; ++i) {
      grads->bz[i] += daz[i];
      grads->br[i] += dar[i];
    }
    gemv_t_acc(params_.uz, d, d, daz.data(), dh_prev.data());
    gemv_t_acc(params_.ur, d, d, dar.data(), dh_prev.data());
    g = dh_prev;
  }
  return loss;
}

double MetaController::predict_loss(const TimeSeries& series, const HyperparamPoint& point) const {
  const auto features = window_features(series);
  const auto enc = encode_point(point);
  const double out = forward(features, enc);
  double value = out * norm_.target_std + norm_.target_mean;
  if (norm_.log_target) {
    value = std::exp(std::min(value, 700.0)) - Normalization::kLogFloor;
  }
  if (!std::isfinite(value)) fail(ErrorKind::Numeric, "non-finite controller output");
  return value;
}

double MetaController::loss_and_gradients(const TimeSeries& series, const HyperparamPoint& point,
                                          double target, Params* grads) const {
  const auto features = window_features(series);
  const auto enc = encode_point(point);
  double t = target;
  if (norm_.log_target) t = std::log(t + Normalization::kLogFloor);
  const double target_norm = (t - norm_.target_mean) / norm_.target_std;
  return loss_on_features(features, enc, target_norm, grads);
}

std::size_t MetaController::argmin_lowest_tie(const std::vector<double>& losses) {
  if (losses.empty()) fail(ErrorKind::Config, "empty loss list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i] < losses[best]) best = i;
  }
  return best;
}

std::size_t MetaController::search_hyperparams(const TimeSeries& series,
                                               const HyperGrid& grid) const {
  if (grid.points.empty()) fail(ErrorKind::Config, "grid must have at least one point");
  std::vector<double> losses(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    losses[i] = predict_loss(series, grid.points[i]);
  }
  return argmin_lowest_tie(losses);
}

MetaController MetaController::train_controller(const TimeSeries& train_series,
                                                const HyperGrid& grid, HybridFactory& factory,
                                                const MetaConfig& config) {
  config.validate();
  if (grid.points.empty()) fail(ErrorKind::Config, "grid must have at least one point");
  train_series.validate();
  const std::size_t m = train_series.size();
  const int lhs_order = factory.block_config().lhs_order;

  const std::vector<double> dydt = finite_diff_time(train_series, lhs_order);
  auto lhs_at = [&](std::size_t w) {
    return lhs_order == 2 ? dydt[w - 1] : dydt[w];
  };
  // forward residual window needs the LHS defined at every w in (a, a+W]
  const std::size_t w_last_ok = m - 2;

  MetaController ctrl(train_series.covariate_count(), grid, config);

  // input normalization from the training series
  {
    auto stats = [&](auto&& getter) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += getter(i);
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = getter(i) - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var / static_cast<double>(m));
      return std::make_pair(mean, std::max(sd, 1e-12));
    };
    auto [my, sy] = stats([&](std::size_t i) { return train_series.target[i]; });
    ctrl.norm_.input_mean[0] = my;
    ctrl.norm_.input_std[0] = sy;
    for (std::size_t j = 0; j < train_series.covariate_count(); ++j) {
      auto [mc, sc] = stats([&](std::size_t i) { return train_series.covariates[j][i]; });
      ctrl.norm_.input_mean[1 + j] = mc;
      ctrl.norm_.input_std[1 + j] = sc;
    }
    auto [mg, sg] = stats([&](std::size_t i) {
      return i > 0 ? train_series.timestamps[i] - train_series.timestamps[i - 1]
                   : train_series.timestamps[1] - train_series.timestamps[0];
    });
    ctrl.norm_.input_mean[ctrl.input_dim_ - 1] = mg;
    ctrl.norm_.input_std[ctrl.input_dim_ - 1] = sg;
  }

  // ---- Phase 1: realized residual errors over anchors x grid points ----
  struct Sample {
    std::size_t anchor;
    std::size_t point;
    double target;
  };
  std::vector<Sample> samples;
  std::vector<std::vector<std::vector<double>>> anchor_features;

  const std::size_t a_min = std::max<std::size_t>(factory.smallest_usable_prefix(), 2) - 1;
  for (std::size_t a = a_min; a + config.eval_window <= w_last_ok; a += config.anchor_stride) {
    factory.warm(train_series, a + 1);
    std::vector<double> realized(grid.points.size(), 0.0);
    std::vector<std::string> failures(grid.points.size());
    par::parallel_for(grid.points.size(), [&](std::size_t p) {
      try {
        const HybridPde hybrid = factory.build(train_series, a + 1, grid.points[p]);
        double acc = 0.0;
        for (std::size_t w = a + 1; w <= a + config.eval_window; ++w) {
          const double r = lhs_at(w) - hybrid.evaluate_at(train_series, w);
          acc += r * r;
        }
        realized[p] = acc / static_cast<double>(config.eval_window);
      } catch (const std::exception& e) {
        failures[p] = e.what();
      }
    });
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      if (!failures[p].empty()) {
        fail(ErrorKind::TrainingData, "grid point " + std::to_string(p) +
                                          " failed at anchor " + std::to_string(a) + ": " +
                                          failures[p]);
      }
    }
    const std::size_t feature_idx = anchor_features.size();
    anchor_features.push_back(ctrl.window_features(train_series.prefix(a + 1)));
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      samples.push_back({feature_idx, p, realized[p]});
    }
  }
  if (samples.empty()) fail(ErrorKind::TrainingData, "no anchors produced training samples");

  // log-residual targets, standardized
  {
    ctrl.norm_.log_target = true;
    for (auto& s : samples) s.target = std::log(s.target + Normalization::kLogFloor);
    double mean = 0.0;
    for (const auto& s : samples) mean += s.target;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const auto& s : samples) {
      const double d = s.target - mean;
      var += d * d;
    }
    ctrl.norm_.target_mean = mean;
    ctrl.norm_.target_std = std::max(std::sqrt(var / static_cast<double>(samples.size())), 1e-12);
  }

  // ---- Phase 2: fit the controller by SGD with momentum ----
  std::mt19937_64 rng(config.seed);
  for (auto* vec : ctrl.params_.all()) {
    for (double& v : *vec) v = 0.2 * (2.0 * u01(rng) - 1.0);
  }

  std::vector<std::vector<double>> point_encodings;
  point_encodings.reserve(grid.points.size());
  for (const auto& p : grid.points) point_encodings.push_back(ctrl.encode_point(p));

  Params grads, velocity;
  grads.zero_like(ctrl.params_);
  velocity.zero_like(ctrl.params_);

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t idx : order) {
      const Sample& s = samples[idx];
      const double target_norm = (s.target - ctrl.norm_.target_mean) / ctrl.norm_.target_std;
      for (auto* g : grads.all()) std::fill(g->begin(), g->end(), 0.0);
      ctrl.loss_on_features(anchor_features[s.anchor], point_encodings[s.point], target_norm,
                            &grads);
      auto pvecs = ctrl.params_.all();
      auto gvecs = grads.all();
      auto vvecs = velocity.all();
      for (std::size_t k = 0; k < pvecs.size(); ++k) {
        for (std::size_t j = 0; j < pvecs[k]->size(); ++j) {
          (*vvecs[k])[j] = config.momentum * (*vvecs[k])[j] -
                           config.learning_rate * (*gvecs[k])[j];
          (*pvecs[k])[j] += (*vvecs[k])[j];
        }
      }
    }
  }
  return ctrl;
}

}  // namespace pdelearn
