#include "pdelearn/pblock.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdelearn/parallel.hpp"
#include "pdelearn/sparsereg.hpp"

namespace pdelearn {

namespace {

// deterministic helpers independent of distribution implementations
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::size_t next_below(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

ConvKernel initial_first_derivative_kernel(int size) {
  ConvKernel zero;
  zero.weights.assign(static_cast<std::size_t>(size), 0.0);
  return constrain_kernel(zero, 1);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
  }
  return hi;
}

}  // namespace

bool TermFactor::operator<(const TermFactor& other) const {
  if (kind != other.kind) return static_cast<int>(kind) < static_cast<int>(other.kind);
  if (covariate != other.covariate) return covariate < other.covariate;
  return order < other.order;
}

void TermSpec::canonicalize() { std::sort(factors.begin(), factors.end()); }

int TermSpec::layer_usage() const {
  int used = 0;
  for (const auto& f : factors) {
    used += (f.kind == TermFactor::Kind::DerivativeRatio) ? f.order : 1;
  }
  return used;
}

TermSpec make_ratio_term(int covariate, int order, bool gate) {
  TermSpec spec;
  spec.factors.push_back({TermFactor::Kind::DerivativeRatio, covariate, order});
  spec.time_gate = gate;
  return spec;
}

TermSpec make_raw_target_term(bool gate) {
  TermSpec spec;
  spec.factors.push_back({TermFactor::Kind::RawTarget, -1, 1});
  spec.time_gate = gate;
  return spec;
}

TermSpec make_raw_covariate_term(int covariate, bool gate) {
  TermSpec spec;
  spec.factors.push_back({TermFactor::Kind::RawCovariate, covariate, 1});
  spec.time_gate = gate;
  return spec;
}

void PBlockConfig::validate() const {
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    fail(ErrorKind::Config, "kernel_size must be odd and >= 3");
  }
  if (n_channels < 1) fail(ErrorKind::Config, "n_channels must be positive");
  if (n_layers < 1) fail(ErrorKind::Config, "n_layers must be positive");
  if (lhs_order != 1 && lhs_order != 2) {
    fail(ErrorKind::UnsupportedOrder, "lhs_order must be 1 or 2");
  }
  if (gate_prob < 0.0 || gate_prob > 1.0) fail(ErrorKind::Config, "gate_prob out of [0,1]");
  if (term_specs && term_specs->empty()) fail(ErrorKind::Config, "term_specs must be non-empty");
}

PBlock::PBlock(const PBlockConfig& config, std::size_t covariate_count)
    : config_(config), covariate_count_(covariate_count) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);

  if (config_.term_specs) {
    specs_ = *config_.term_specs;
    for (auto& spec : specs_) {
      spec.canonicalize();
      for (const auto& f : spec.factors) {
        if (f.kind != TermFactor::Kind::RawTarget &&
            (f.covariate < 0 || f.covariate >= static_cast<int>(covariate_count_))) {
          fail(ErrorKind::Config, "term spec references a covariate out of range");
        }
        if (f.kind == TermFactor::Kind::DerivativeRatio && f.order < 1) {
          fail(ErrorKind::Config, "derivative order must be >= 1");
        }
      }
      if (spec.factors.empty() && !spec.time_gate) {
        fail(ErrorKind::Config, "term spec needs at least one factor or an open gate");
      }
    }
  } else {
    if (covariate_count_ == 0) {
      fail(ErrorKind::Config, "random term structure needs at least one covariate");
    }
    for (int c = 0; c < config_.n_channels; ++c) {
      TermSpec spec;
      for (int attempt = 0; attempt < 20; ++attempt) {
        spec = TermSpec{};
        int budget = config_.n_layers;
        const int wanted = 1 + static_cast<int>(next_below(rng, config_.n_layers));
        while (budget > 0 && static_cast<int>(spec.factors.size()) < wanted) {
          const double roll = u01(rng);
          TermFactor f;
          if (roll < 0.5) {
            f.kind = TermFactor::Kind::DerivativeRatio;
            f.covariate = static_cast<int>(next_below(rng, covariate_count_));
            f.order = (budget >= 2 && u01(rng) < 0.25) ? 2 : 1;
            budget -= f.order;
          } else if (roll < 0.75) {
            f.kind = TermFactor::Kind::RawTarget;
            budget -= 1;
          } else {
            f.kind = TermFactor::Kind::RawCovariate;
            f.covariate = static_cast<int>(next_below(rng, covariate_count_));
            budget -= 1;
          }
          spec.factors.push_back(f);
        }
        spec.time_gate = u01(rng) < config_.gate_prob;
        spec.canonicalize();
        const bool duplicate =
            std::find(specs_.begin(), specs_.end(), spec) != specs_.end();
        if (!duplicate) break;
      }
      specs_.push_back(spec);
    }
  }

  kernels_.resize(specs_.size());
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    kernels_[c].resize(specs_[c].factors.size());
    for (std::size_t f = 0; f < specs_[c].factors.size(); ++f) {
      if (specs_[c].factors[f].kind == TermFactor::Kind::DerivativeRatio) {
        for (int a = 0; a < specs_[c].factors[f].order; ++a) {
          kernels_[c][f].push_back(initial_first_derivative_kernel(config_.kernel_size));
        }
      }
    }
  }
  weights_.assign(specs_.size(), 0.0);
  recompute_lookback();
}

void PBlock::recompute_lookback() {
  const std::size_t step = static_cast<std::size_t>(config_.kernel_size - 1);
  lookback_ = 0;
  for (const auto& spec : specs_) {
    for (const auto& f : spec.factors) {
      if (f.kind == TermFactor::Kind::DerivativeRatio) {
        lookback_ = std::max(lookback_, step * static_cast<std::size_t>(f.order));
      }
    }
  }
}

PBlock::FactorValue PBlock::factor_value(const TimeSeries& series, std::size_t channel,
                                         std::size_t factor, std::size_t index,
                                         double guard) const {
  const TermFactor& f = specs_[channel].factors[factor];
  switch (f.kind) {
    case TermFactor::Kind::RawTarget:
      return {series.target[index], false};
    case TermFactor::Kind::RawCovariate:
      return {series.covariates[static_cast<std::size_t>(f.covariate)][index], false};
    case TermFactor::Kind::DerivativeRatio:
      break;
  }

  const int n = config_.kernel_size;
  const std::size_t step = static_cast<std::size_t>(n - 1);
  const int depth = f.order;
  const auto& x = series.covariates[static_cast<std::size_t>(f.covariate)];
  const std::size_t base = index - step * static_cast<std::size_t>(depth);

  // u^0 = y on [base, index]; each application shortens the buffer by N-1,
  // dividing by the covariate convolution over the same window positions.
  std::vector<double> buf(series.target.begin() + base, series.target.begin() + index + 1);
  bool degenerate = false;
  for (int level = 0; level < depth; ++level) {
    const ConvKernel& kernel = kernels_[channel][factor][static_cast<std::size_t>(level)];
    const std::size_t out_len = buf.size() - step;
    std::vector<double> next(out_len);
    const std::size_t level_base = base + step * static_cast<std::size_t>(level);
    for (std::size_t q = 0; q < out_len; ++q) {
      const std::size_t pos = level_base + step + q;  // sample index of this output
      const double num = convolve(kernel, std::span<const double>(buf.data() + q,
                                                                  static_cast<std::size_t>(n)));
      const double den = convolve(kernel, std::span<const double>(x.data() + pos - step,
                                                                  static_cast<std::size_t>(n)));
      if (std::fabs(den) < guard) {
        next[q] = 0.0;
        degenerate = true;
      } else {
        next[q] = num / den;
      }
    }
    buf = std::move(next);
  }
  return {buf[0], degenerate};
}

PBlock::FactorValue PBlock::channel_value(const TimeSeries& series, std::size_t channel,
                                          std::size_t index, double guard) const {
  const TermSpec& spec = specs_[channel];
  double value = 1.0;
  bool degenerate = false;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    const FactorValue fv = factor_value(series, channel, f, index, guard);
    degenerate = degenerate || fv.degenerate;
    value *= fv.value;
  }
  if (spec.time_gate) value *= series.timestamps[index];
  if (degenerate) value = 0.0;
  return {value, degenerate};
}

double PBlock::evaluate(const TimeSeries& series, std::size_t index) const {
  return evaluate_detail(series, index).value;
}

PBlock::EvalDetail PBlock::evaluate_detail(const TimeSeries& series, std::size_t index) const {
  if (index >= series.size() || index < lookback_) {
    fail(ErrorKind::Index, "evaluate: index does not admit a full causal window");
  }
  EvalDetail detail;
  detail.channel_values.resize(specs_.size());
  double acc = bias_;
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    const FactorValue cv = channel_value(series, c, index, eval_guard_);
    detail.channel_values[c] = cv.value;
    detail.degenerate = detail.degenerate || cv.degenerate;
    acc += weights_[c] * cv.value;
  }
  detail.value = acc;
  return detail;
}

CandidateMatrix PBlock::build_matrix(const TimeSeries& series, bool parallel) const {
  const std::size_t m = series.size();
  const std::size_t min_window = std::max<std::size_t>(window_size(),
                                                       static_cast<std::size_t>(config_.lhs_order) + 1);
  if (m < min_window + 1) fail(ErrorKind::TooShort, "series too short for candidate matrix");

  const std::vector<double> lhs_all = finite_diff_time(series, config_.lhs_order);
  // order 1: forward difference defined on [0, m-2], aligned to the left endpoint;
  // order 2: interior second difference on [1, m-2].
  const std::size_t lhs_min = (config_.lhs_order == 2) ? 1 : 0;
  const std::size_t first = std::max(lookback_, lhs_min);
  const std::size_t last = m - 2;
  if (first > last) fail(ErrorKind::TooShort, "no valid rows");

  const std::size_t n_rows = last - first + 1;
  const std::size_t n_cols = specs_.size() + 1;

  CandidateMatrix out;
  out.values = Matrix(n_rows, n_cols);
  out.row_indices.resize(n_rows);
  out.degenerate.assign(n_rows, 0);
  out.lhs.resize(n_rows);

  auto fill_row = [&](std::size_t r) {
    const std::size_t i = first + r;
    out.row_indices[r] = i;
    bool deg = false;
    for (std::size_t c = 0; c < specs_.size(); ++c) {
      const FactorValue cv = channel_value(series, c, i, eval_guard_);
      out.values(r, c) = cv.value;
      deg = deg || cv.degenerate;
    }
    out.values(r, specs_.size()) = 1.0;
    out.degenerate[r] = deg ? 1 : 0;
    out.lhs[r] = (config_.lhs_order == 2) ? lhs_all[i - 1] : lhs_all[i];
  };
  if (parallel) {
    par::parallel_for(n_rows, fill_row);
  } else {
    par::serial_for(n_rows, fill_row);
  }
  return out;
}

CandidateMatrix PBlock::candidate_matrix(const TimeSeries& series) const {
  return build_matrix(series, true);
}

CandidateMatrix PBlock::candidate_matrix_serial(const TimeSeries& series) const {
  return build_matrix(series, false);
}

namespace {

struct SolveOutcome {
  std::vector<double> weights;  // raw units, channel count entries
  double bias = 0.0;
  double relative_residual = 0.0;
  double objective = 0.0;
  double lambda_abs = 0.0;
  int nonzeros = 0;
  std::vector<std::size_t> kept_rows;  // indices into the candidate matrix rows
};

std::vector<std::size_t> filter_rows(const CandidateMatrix& cm, double trim) {
  const std::size_t n_rows = cm.values.rows();
  const std::size_t n_terms = cm.values.cols() - 1;
  std::vector<std::size_t> usable;
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!cm.degenerate[r]) usable.push_back(r);
  }
  if (usable.empty() || n_terms == 0) return usable;

  std::vector<double> med(n_terms, 0.0);
  for (std::size_t c = 0; c < n_terms; ++c) {
    std::vector<double> col;
    col.reserve(usable.size());
    for (std::size_t r : usable) col.push_back(std::fabs(cm.values(r, c)));
    med[c] = median_of(std::move(col));
    if (med[c] == 0.0) med[c] = 1.0;
  }
  std::vector<double> score(usable.size(), 0.0);
  for (std::size_t u = 0; u < usable.size(); ++u) {
    for (std::size_t c = 0; c < n_terms; ++c) {
      score[u] = std::max(score[u], std::fabs(cm.values(usable[u], c)) / med[c]);
    }
  }
  const double med_score = median_of(score);
  const double cutoff = trim * std::max(med_score, 1e-300);
  std::vector<std::size_t> kept;
  for (std::size_t u = 0; u < usable.size(); ++u) {
    if (score[u] <= cutoff) kept.push_back(usable[u]);
  }
  return kept;
}

SolveOutcome solve_weights(const CandidateMatrix& cm, const TrainConfig& cfg) {
  SolveOutcome out;
  out.kept_rows = filter_rows(cm, cfg.outlier_trim);
  if (out.kept_rows.size() < cm.values.cols()) {
    fail(ErrorKind::TooShort, "too few usable rows after filtering");
  }
  const std::size_t n_cols = cm.values.cols();
  const std::size_t n_terms = n_cols - 1;

  Matrix x(out.kept_rows.size(), n_cols);
  std::vector<double> b(out.kept_rows.size());
  for (std::size_t r = 0; r < out.kept_rows.size(); ++r) {
    const std::size_t src = out.kept_rows[r];
    for (std::size_t c = 0; c < n_cols; ++c) x(r, c) = cm.values(src, c);
    b[r] = cm.lhs[src];
  }

  // columns standardized to unit RMS; the bias column is already unit RMS
  std::vector<double> scale(n_cols, 1.0);
  for (std::size_t c = 0; c < n_terms; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) acc += x(r, c) * x(r, c);
    const double rms = std::sqrt(acc / static_cast<double>(x.rows()));
    if (rms > 0.0) {
      scale[c] = rms;
      for (std::size_t r = 0; r < x.rows(); ++r) x(r, c) /= rms;
    }
  }

  double lambda_abs = cfg.lambda;
  if (cfg.lambda_is_relative) {
    std::vector<double> xtb;
    matvec_transposed(x, b, xtb);
    double kkt = 0.0;
    for (double v : xtb) kkt = std::max(kkt, 2.0 * std::fabs(v));
    lambda_abs = cfg.lambda * kkt;
  }

  LassoProblem problem;
  problem.design = std::move(x);
  problem.response = b;
  problem.lambda = lambda_abs;
  problem.max_iters = cfg.fista_iters;
  problem.tol = cfg.fista_tol;
  const FistaResult fit = fista(problem);

  out.weights.resize(n_terms);
  for (std::size_t c = 0; c < n_terms; ++c) out.weights[c] = fit.weights[c] / scale[c];
  out.bias = fit.weights[n_terms];
  out.objective = fit.objective;
  out.lambda_abs = lambda_abs;
  out.nonzeros = fit.nonzeros;

  double ss_res = 0.0, ss_tot = 0.0;
  std::vector<double> xw;
  matvec(problem.design, fit.weights, xw);
  for (std::size_t r = 0; r < xw.size(); ++r) {
    const double d = problem.response[r] - xw[r];
    ss_res += d * d;
    ss_tot += problem.response[r] * problem.response[r];
  }
  out.relative_residual = (ss_tot > 0.0) ? ss_res / ss_tot : ss_res;
  return out;
}

}  // namespace

FitReport PBlock::train(const TimeSeries& series, const TrainConfig& config) {
  series.validate();
  if (config.guard > 0) eval_guard_ = config.guard;

  CandidateMatrix cm = build_matrix(series, true);
  SolveOutcome fit = solve_weights(cm, config);
  weights_ = fit.weights;
  bias_ = fit.bias;

  const double initial_residual = fit.relative_residual;
  auto best_kernels = kernels_;
  SolveOutcome best_fit = fit;
  double best_residual = fit.relative_residual;
  int epochs_run = 0;

  const double h = 1e-5;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // (b) gradient descent on the squared residual over the free kernel
    // moments, gradients by central finite differences on each tap
    const std::vector<std::size_t>& rows = fit.kept_rows;
    std::vector<double> base_residual(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double pred = bias_;
      for (std::size_t c = 0; c < specs_.size(); ++c) {
        pred += weights_[c] * cm.values(rows[r], c);
      }
      base_residual[r] = cm.lhs[rows[r]] - pred;
    }

    for (std::size_t c = 0; c < specs_.size(); ++c) {
      if (weights_[c] == 0.0) continue;  // column absent from the fit
      for (std::size_t f = 0; f < kernels_[c].size(); ++f) {
        for (std::size_t a = 0; a < kernels_[c][f].size(); ++a) {
          std::vector<double> grad(kernels_[c][f][a].weights.size(), 0.0);
          for (std::size_t tap = 0; tap < grad.size(); ++tap) {
            double r_plus = 0.0, r_minus = 0.0;
            for (int sign = 0; sign < 2; ++sign) {
              const double delta = (sign == 0) ? h : -h;
              kernels_[c][f][a].weights[tap] += delta;
              double acc = 0.0;
              for (std::size_t r = 0; r < rows.size(); ++r) {
                const std::size_t i = cm.row_indices[rows[r]];
                const FactorValue cv = channel_value(series, c, i, eval_guard_);
                const double res =
                    base_residual[r] - weights_[c] * (cv.value - cm.values(rows[r], c));
                acc += res * res;
              }
              kernels_[c][f][a].weights[tap] -= delta;
              if (sign == 0) {
                r_plus = acc;
              } else {
                r_minus = acc;
              }
            }
            grad[tap] = (r_plus - r_minus) / (2.0 * h);
          }
          for (std::size_t tap = 0; tap < grad.size(); ++tap) {
            kernels_[c][f][a].weights[tap] -= config.learning_rate * grad[tap];
          }
          kernels_[c][f][a] = constrain_kernel(kernels_[c][f][a], 1);
        }
      }
    }

    // (a) rebuild the candidate matrix and re-solve the sparse regression
    cm = build_matrix(series, true);
    fit = solve_weights(cm, config);
    weights_ = fit.weights;
    bias_ = fit.bias;
    ++epochs_run;

    if (fit.relative_residual < best_residual) {
      best_residual = fit.relative_residual;
      best_kernels = kernels_;
      best_fit = fit;
    }
    if (initial_residual > 0.0 && fit.relative_residual > 10.0 * initial_residual) {
      kernels_ = best_kernels;
      weights_ = best_fit.weights;
      bias_ = best_fit.bias;
      trained_ = true;
      PBlock snapshot = *this;
      FitReport report;
      report.initial_residual = initial_residual;
      report.final_residual = best_residual;
      report.epochs_run = epochs_run;
      throw DivergenceError("training residual grew past 10x the initial residual",
                            std::move(snapshot), std::move(report));
    }
  }

  kernels_ = best_kernels;
  weights_ = best_fit.weights;
  bias_ = best_fit.bias;
  trained_ = true;
  if (config.epochs > 0) {
    cm = build_matrix(series, true);  // report contributions against the kept kernels
  }

  FitReport report;
  report.initial_residual = initial_residual;
  report.final_residual = best_residual;
  report.final_objective = best_fit.objective;
  report.lambda = best_fit.lambda_abs;
  report.epochs_run = epochs_run;
  report.rows_total = cm.values.rows();
  report.rows_used = best_fit.kept_rows.size();
  report.nonzeros = best_fit.nonzeros;
  report.bias = bias_;
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    TermReport tr;
    tr.spec = specs_[c];
    tr.coefficient = weights_[c];
    double acc = 0.0;
    for (std::size_t r : best_fit.kept_rows) {
      acc += std::fabs(weights_[c] * cm.values(r, c));
    }
    tr.mean_abs_contribution =
        best_fit.kept_rows.empty() ? 0.0 : acc / static_cast<double>(best_fit.kept_rows.size());
    report.terms.push_back(std::move(tr));
  }
  return report;
}

std::size_t max_window_size(const PBlockConfig& config) {
  config.validate();
  const std::size_t step = static_cast<std::size_t>(config.kernel_size - 1);
  int max_order = 0;
  if (config.term_specs) {
    for (const auto& spec : *config.term_specs) {
      for (const auto& f : spec.factors) {
        if (f.kind == TermFactor::Kind::DerivativeRatio) {
          max_order = std::max(max_order, f.order);
        }
      }
    }
  } else {
    max_order = config.n_layers >= 2 ? 2 : 1;  // random draws cap ratio order at 2
  }
  return step * static_cast<std::size_t>(max_order) + 1;
}

std::vector<std::pair<TermSpec, double>> PBlock::term_descriptions() const {
  std::vector<std::pair<TermSpec, double>> out;
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (weights_[c] != 0.0) out.emplace_back(specs_[c], weights_[c]);
  }
  if (bias_ != 0.0) {
    TermSpec constant;  // empty factor list renders as the constant term
    out.emplace_back(constant, bias_);
  }
  return out;
}

void PBlock::set_output_weights(std::vector<double> weights, double bias, bool mark_trained) {
  if (weights.size() != specs_.size()) {
    fail(ErrorKind::Shape, "weight count must match channel count");
  }
  weights_ = std::move(weights);
  bias_ = bias;
  trained_ = mark_trained;
}

void PBlock::set_kernels(std::vector<std::vector<std::vector<ConvKernel>>> kernels) {
  if (kernels.size() != specs_.size()) fail(ErrorKind::Shape, "kernel bank shape mismatch");
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    if (kernels[c].size() != specs_[c].factors.size()) {
      fail(ErrorKind::Shape, "kernel bank shape mismatch");
    }
    for (std::size_t f = 0; f < kernels[c].size(); ++f) {
      const auto& factor = specs_[c].factors[f];
      const std::size_t want =
          factor.kind == TermFactor::Kind::DerivativeRatio ? static_cast<std::size_t>(factor.order)
                                                           : 0;
      if (kernels[c][f].size() != want) fail(ErrorKind::Shape, "kernel bank shape mismatch");
      for (const auto& k : kernels[c][f]) k.validate();
    }
  }
  kernels_ = std::move(kernels);
  recompute_lookback();
}

}  // namespace pdelearn
