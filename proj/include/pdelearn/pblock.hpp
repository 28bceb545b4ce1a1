#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdelearn/diffop.hpp"
#include "pdelearn/errors.hpp"
#include "pdelearn/linalg.hpp"
#include "pdelearn/series.hpp"

namespace pdelearn {

/// One multiplicative factor of a candidate monomial.
struct TermFactor {
  enum class Kind { DerivativeRatio, RawTarget, RawCovariate };

  Kind kind = Kind::RawTarget;
  int covariate = -1;  // denominator variable for DerivativeRatio, channel for RawCovariate
  int order = 1;       // derivative order for DerivativeRatio

  bool operator==(const TermFactor&) const = default;
  bool operator<(const TermFactor& other) const;
};

/// Canonical description of one channel's monomial: product of factors,
/// optionally multiplied by t when the channel's time gate is open.
struct TermSpec {
  std::vector<TermFactor> factors;  // kept canonically sorted
  bool time_gate = false;

  void canonicalize();
  bool operator==(const TermSpec&) const = default;

  /// Number of kernel applications this spec consumes (its layer usage).
  int layer_usage() const;
};

TermSpec make_ratio_term(int covariate, int order, bool gate = false);
TermSpec make_raw_target_term(bool gate = false);
TermSpec make_raw_covariate_term(int covariate, bool gate = false);

struct PBlockConfig {
  int kernel_size = 5;   // N, odd
  int n_channels = 4;    // N_c when term specs are drawn randomly
  int n_layers = 2;      // N_l, layer budget per channel
  int lhs_order = 1;     // time-derivative order of the left-hand side
  double gate_prob = 0.5;
  std::uint64_t seed = 0;
  std::optional<std::vector<TermSpec>> term_specs;  // explicit term library

  void validate() const;
};

struct TrainConfig {
  double lambda = 1e-3;       // relative to the KKT zero threshold 2 max|X^T b|
  bool lambda_is_relative = true;
  int epochs = 10;
  double learning_rate = 1e-2;
  int fista_iters = 2000;
  double fista_tol = 1e-10;
  double guard = 1e-8;         // denominator magnitude guard
  double outlier_trim = 25.0;  // drop rows whose column score exceeds trim * median
  std::uint64_t seed = 0;
};

struct TermReport {
  TermSpec spec;
  double coefficient = 0.0;
  double mean_abs_contribution = 0.0;
};

struct FitReport {
  double initial_residual = 0.0;  // relative: ||b - Xw||^2 / ||b||^2
  double final_residual = 0.0;
  double final_objective = 0.0;
  double lambda = 0.0;  // absolute value used
  int epochs_run = 0;
  std::size_t rows_total = 0;
  std::size_t rows_used = 0;
  int nonzeros = 0;
  double bias = 0.0;
  std::vector<TermReport> terms;
};

/// Candidate matrix: one row per usable sample, one column per channel
/// monomial plus a trailing all-ones bias column.
struct CandidateMatrix {
  Matrix values;
  std::vector<std::size_t> row_indices;   // sample index of each row
  std::vector<std::uint8_t> degenerate;   // any guarded denominator in the row
  std::vector<double> lhs;                // time derivative aligned to rows
};

/// The learnable differential block: a bank of moment-constrained kernels
/// per channel evaluating products of derivative ratios, raw channels, and
/// gated time, linearly combined into F(x, t, y).
class PBlock {
 public:
  PBlock(const PBlockConfig& config, std::size_t covariate_count);

  double evaluate(const TimeSeries& series, std::size_t index) const;

  struct EvalDetail {
    double value = 0.0;
    bool degenerate = false;
    std::vector<double> channel_values;
  };
  EvalDetail evaluate_detail(const TimeSeries& series, std::size_t index) const;

  CandidateMatrix candidate_matrix(const TimeSeries& series) const;
  CandidateMatrix candidate_matrix_serial(const TimeSeries& series) const;

  FitReport train(const TimeSeries& series, const TrainConfig& config);

  std::vector<std::pair<TermSpec, double>> term_descriptions() const;

  // window bookkeeping: evaluate(i) reads samples [i - lookback, i]
  std::size_t lookback() const { return lookback_; }
  std::size_t window_size() const { return lookback_ + 1; }

  int kernel_size() const { return config_.kernel_size; }
  int lhs_order() const { return config_.lhs_order; }
  std::size_t covariate_count() const { return covariate_count_; }
  std::size_t channel_count() const { return specs_.size(); }
  bool trained() const { return trained_; }

  const std::vector<TermSpec>& term_specs() const { return specs_; }
  const std::vector<double>& output_weights() const { return weights_; }
  double bias() const { return bias_; }
  /// kernels()[channel][factor] lists one kernel per nested application.
  const std::vector<std::vector<std::vector<ConvKernel>>>& kernels() const { return kernels_; }

  // used by deserialization and tests
  void set_output_weights(std::vector<double> weights, double bias, bool mark_trained = true);
  void set_kernels(std::vector<std::vector<std::vector<ConvKernel>>> kernels);

  const PBlockConfig& config() const { return config_; }

 private:
  struct FactorValue {
    double value = 0.0;
    bool degenerate = false;
  };
  FactorValue factor_value(const TimeSeries& series, std::size_t channel, std::size_t factor,
                           std::size_t index, double guard) const;
  FactorValue channel_value(const TimeSeries& series, std::size_t channel, std::size_t index,
                            double guard) const;
  CandidateMatrix build_matrix(const TimeSeries& series, bool parallel) const;
  void recompute_lookback();

  PBlockConfig config_;
  std::size_t covariate_count_ = 0;
  std::vector<TermSpec> specs_;
  std::vector<std::vector<std::vector<ConvKernel>>> kernels_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  std::size_t lookback_ = 0;
  bool trained_ = false;
  double eval_guard_ = 1e-8;
};

/// Upper bound on the causal window of any block built from this config,
/// independent of the covariate count (exact for explicit term specs).
std::size_t max_window_size(const PBlockConfig& config);

class DivergenceError : public Error {
 public:
  DivergenceError(std::string message, PBlock best, FitReport report)
      : Error(ErrorKind::Divergence, message),
        best_block(std::move(best)),
        best_report(std::move(report)) {}

  PBlock best_block;
  FitReport best_report;
};

}  // namespace pdelearn
