// Command-line front end: generate | train | predict | discover | eval.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdelearn/errors.hpp"
#include "pdelearn/experiment.hpp"
#include "pdelearn/model_io.hpp"
#include "pdelearn/render.hpp"
#include "pdelearn/synth.hpp"

namespace {

using nlohmann::json;
using namespace pdelearn;

int log_level() {
  const char* env = std::getenv("PDELEARN_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << "\n";
}

// term grammar: factors joined by '*'; each factor is one of
//   y | x<idx> | d<order>y/dx<idx>; a trailing '*t' opens the time gate.
TermSpec parse_term(const std::string& text) {
  TermSpec spec;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '*')) {
    if (tok.empty()) fail(ErrorKind::Config, "empty factor in term: " + text);
    if (tok == "t") {
      spec.time_gate = true;
    } else if (tok == "y") {
      spec.factors.push_back({TermFactor::Kind::RawTarget, -1, 1});
    } else if (tok[0] == 'x') {
      const int idx = std::stoi(tok.substr(1));
      if (idx < 1) fail(ErrorKind::Config, "covariate indices are 1-based: " + tok);
      spec.factors.push_back({TermFactor::Kind::RawCovariate, idx - 1, 1});
    } else if (tok[0] == 'd') {
      // d1y/dx2 or d2y/dx1
      const auto slash = tok.find('/');
      if (slash == std::string::npos || tok.substr(slash + 1, 2) != "dx" ||
          tok.find("y") == std::string::npos) {
        fail(ErrorKind::Config, "bad derivative factor: " + tok);
      }
      const int order = std::stoi(tok.substr(1, tok.find('y') - 1));
      const int idx = std::stoi(tok.substr(slash + 3));
      if (order < 1 || idx < 1) fail(ErrorKind::Config, "bad derivative factor: " + tok);
      spec.factors.push_back({TermFactor::Kind::DerivativeRatio, idx - 1, order});
    } else {
      fail(ErrorKind::Config, "unknown factor: " + tok);
    }
  }
  if (spec.factors.empty() && !spec.time_gate) {
    fail(ErrorKind::Config, "term needs at least one factor: " + text);
  }
  spec.canonicalize();
  return spec;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

struct CommonOptions {
  std::string data_path;
  std::string target = "y";
  std::uint64_t seed = 0;
  double ratio_train = 0.7, ratio_val = 0.1, ratio_test = 0.2;

  SplitRatios ratios() const { return {ratio_train, ratio_val, ratio_test}; }
};

struct TrainOptions {
  int kernel_size = 5;
  int n_channels = 4;
  int n_layers = 2;
  int lhs_order = 1;
  double gate_prob = 0.5;
  std::vector<std::string> terms;
  std::string lambdas = "1e-3";
  bool lambda_absolute = false;
  int epochs = 10;
  double learning_rate = 1e-2;
  int fista_iters = 2000;
  double outlier_trim = 25.0;
  std::string spans = "1.0,0.5,0.25";
  std::string rates = "1,2";
  std::vector<std::string> eps_points;
  int meta_hidden = 16;
  std::size_t meta_window = 64;
  std::size_t meta_eval_window = 16;
  std::size_t anchor_stride = 10;
  int meta_epochs = 200;
  double meta_lr = 1e-2;
  bool verbatim_alg1 = false;
  std::size_t refit_bucket = 0;

  PBlockConfig block_config(std::uint64_t seed) const {
    PBlockConfig cfg;
    cfg.kernel_size = kernel_size;
    cfg.n_channels = n_channels;
    cfg.n_layers = n_layers;
    cfg.lhs_order = lhs_order;
    cfg.gate_prob = gate_prob;
    cfg.seed = seed;
    if (!terms.empty()) {
      std::vector<TermSpec> specs;
      for (const auto& t : terms) specs.push_back(parse_term(t));
      cfg.term_specs = std::move(specs);
      cfg.n_channels = static_cast<int>(cfg.term_specs->size());
    }
    return cfg;
  }

  TrainConfig train_config(double lambda, std::uint64_t seed) const {
    TrainConfig cfg;
    cfg.lambda = lambda;
    cfg.lambda_is_relative = !lambda_absolute;
    cfg.epochs = epochs;
    cfg.learning_rate = learning_rate;
    cfg.fista_iters = fista_iters;
    cfg.outlier_trim = outlier_trim;
    cfg.seed = seed;
    return cfg;
  }

  MetaConfig meta_config(std::uint64_t seed) const {
    MetaConfig cfg;
    cfg.hidden_dim = meta_hidden;
    cfg.window = meta_window;
    cfg.eval_window = meta_eval_window;
    cfg.anchor_stride = anchor_stride;
    cfg.epochs = meta_epochs;
    cfg.learning_rate = meta_lr;
    cfg.seed = seed;
    return cfg;
  }

  HyperGrid grid() const {
    HyperGrid g = build_default_grid(plan_specs());
    for (const auto& txt : eps_points) {
      const auto eps = parse_double_list(txt);
      if (eps.size() != g.component_count()) {
        fail(ErrorKind::Config, "--eps length must match the plan grid size");
      }
      g.points.push_back({g.points.front().plan_indices, eps});
    }
    return g;
  }

  std::vector<PlanSpec> plan_specs() const {
    std::vector<PlanSpec> specs;
    for (double frac : parse_double_list(spans)) {
      for (double rate : parse_double_list(rates)) {
        specs.push_back({frac, static_cast<std::size_t>(rate)});
      }
    }
    if (specs.empty()) fail(ErrorKind::Config, "empty plan grid");
    return specs;
  }
};

struct EvalOptions {
  std::size_t horizon = 10;
  std::size_t stride = 10;
  std::string mode = "multi";
  std::string covariates = "provided";

  EvalProtocol protocol() const {
    EvalProtocol p;
    p.horizon = horizon;
    p.anchor_stride = stride;
    if (mode == "multi") {
      p.mode = ForecastMode::MultiStep;
    } else if (mode == "single") {
      p.mode = ForecastMode::SingleStep;
    } else {
      fail(ErrorKind::Config, "mode must be single or multi");
    }
    if (covariates == "provided") {
      p.covariate_policy = CovariatePolicy::ProvidedFutures;
    } else if (covariates == "hold-last") {
      p.covariate_policy = CovariatePolicy::HoldLast;
    } else {
      fail(ErrorKind::Config, "covariates must be provided or hold-last");
    }
    return p;
  }
};

json outcome_to_json(const EvalOutcome& o) {
  return {{"relative_mse", o.relative_mse},
          {"absolute_mse", o.absolute_mse},
          {"anchors", o.anchors},
          {"points", o.points}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Ingest, "cannot write file: " + path);
  out << text;
}

json report_from_fit(const FitReport& fit, const std::vector<std::string>& names) {
  json terms = json::array();
  for (const auto& t : fit.terms) {
    terms.push_back({{"symbol", term_symbol(t.spec, names, RenderStyle::Ascii)},
                     {"coefficient", t.coefficient},
                     {"contribution", t.mean_abs_contribution}});
  }
  return {{"initial_residual", fit.initial_residual},
          {"final_residual", fit.final_residual},
          {"objective", fit.final_objective},
          {"lambda", fit.lambda},
          {"epochs", fit.epochs_run},
          {"rows_total", fit.rows_total},
          {"rows_used", fit.rows_used},
          {"nonzeros", fit.nonzeros},
          {"bias", fit.bias},
          {"terms", terms}};
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& out_path, const WaveConfig& config) {
  const TimeSeries series = generate_wave(config);
  write_csv(series, out_path);
  info("wrote " + std::to_string(series.size()) + " rows to " + out_path);
  return 0;
}

int cmd_train(const CommonOptions& common, const TrainOptions& opts, const std::string& variant,
              bool grid_search, const EvalOptions& eopts, const std::string& model_out,
              const std::string& report_out) {
  const TimeSeries series = load_csv(common.data_path, common.target);
  const SeriesSplit parts = split(series, common.ratios());
  const std::size_t n_train = parts.train.size();
  const std::size_t val_end = n_train + parts.val.size();

  const std::vector<double> lambdas = parse_double_list(opts.lambdas);
  if (lambdas.empty()) fail(ErrorKind::Config, "no lambda values given");
  const PBlockConfig bcfg = opts.block_config(common.seed);
  const EvalProtocol protocol = eopts.protocol();

  ModelFile model;
  json report;
  report["variant"] = variant;
  report["seed"] = common.seed;

  if (variant == "single") {
    double best_score = 0.0;
    std::optional<PBlock> best;
    json grid_results = json::array();
    for (double lambda : lambdas) {
      PBlock block(bcfg, series.covariate_count());
      const FitReport fit = block.train(parts.train, opts.train_config(lambda, common.seed));
      double score = fit.final_residual;
      if (lambdas.size() > 1 || grid_search) {
        PBlockModel m(block);
        score = evaluate_rolling_fixed(m, series, n_train, val_end, protocol).relative_mse;
      }
      grid_results.push_back({{"lambda", lambda},
                              {"val_relative_mse", score},
                              {"fit", report_from_fit(fit, series.names)}});
      if (!best || score < best_score) {
        best_score = score;
        best = std::move(block);
      }
    }
    model.kind = ModelFile::Kind::Single;
    model.single = std::move(best);
    report["grid"] = grid_results;
  } else if (variant == "hybrid") {
    const std::vector<PlanSpec> specs = opts.plan_specs();
    const HyperGrid grid = opts.grid();
    HybridFactory factory(specs, bcfg, opts.train_config(lambdas[0], common.seed),
                          opts.refit_bucket == 0 ? opts.anchor_stride : opts.refit_bucket);
    std::size_t chosen = 0;
    std::vector<double> scores;
    if (grid_search || grid.points.size() > 1) {
      chosen = select_fixed_point(series, grid, factory, n_train, val_end, protocol, &scores);
    }
    model.kind = ModelFile::Kind::Hybrid;
    model.hybrid = factory.build(series, val_end, grid.points[chosen]);
    report["grid"] = {{"selected_point", chosen}, {"val_relative_mse", scores}};
  } else {  // meta
    const std::vector<PlanSpec> specs = opts.plan_specs();
    const HyperGrid grid = opts.grid();
    HybridFactory factory(specs, bcfg, opts.train_config(lambdas[0], common.seed),
                          opts.verbatim_alg1 ? 0
                                             : (opts.refit_bucket == 0 ? opts.anchor_stride
                                                                       : opts.refit_bucket));
    MetaController controller =
        MetaController::train_controller(parts.train, grid, factory, opts.meta_config(common.seed));
    const TimeSeries prefix = series.prefix(val_end);
    const std::size_t chosen = controller.search_hyperparams(prefix, grid);
    model.kind = ModelFile::Kind::Meta;
    model.hybrid = factory.build(series, val_end, grid.points[chosen]);
    model.controller = std::move(controller);
    model.grid = grid;
    report["selected_point"] = chosen;
  }

  save_model(model, model_out);
  if (!report_out.empty()) write_text(report_out, report.dump(2) + "\n");
  info("wrote model to " + model_out);
  return 0;
}

struct LoadedModel {
  ModelFile file;
  std::optional<PBlockModel> adapter;

  explicit LoadedModel(const std::string& path) : file(load_model(path)) {
    if (file.kind == ModelFile::Kind::Single) adapter.emplace(*file.single);
  }
  const DynamicsModel& dynamics() const {
    return adapter ? static_cast<const DynamicsModel&>(*adapter)
                   : static_cast<const DynamicsModel&>(*file.hybrid);
  }
  std::size_t covariate_count() const {
    return file.kind == ModelFile::Kind::Single
               ? file.single->covariate_count()
               : file.hybrid->components()[0].covariate_count();
  }
};

int cmd_predict(const CommonOptions& common, const std::string& model_path,
                const EvalOptions& eopts, std::size_t anchor, const std::string& out_path) {
  const TimeSeries series = load_csv(common.data_path, common.target);
  const LoadedModel model(model_path);
  const DynamicsModel& dyn = model.dynamics();

  RolloutConfig rc;
  rc.horizon = eopts.horizon;
  const EvalProtocol protocol = eopts.protocol();
  rc.mode = protocol.mode;
  rc.covariate_policy = protocol.covariate_policy;
  rc.anchor = (anchor == 0) ? static_cast<std::size_t>(-1) : anchor - 1;
  const RolloutResult rr = rollout(dyn, series, rc);
  if (rr.aborted) fail(ErrorKind::Numeric, "rollout aborted at step " + std::to_string(rr.failed_step));

  const std::size_t a = (rc.anchor == static_cast<std::size_t>(-1)) ? series.size() - 1 : rc.anchor;
  const bool have_truth = a + rr.predictions.size() < series.size();

  std::ofstream out(out_path);
  if (!out) fail(ErrorKind::Ingest, "cannot write file: " + out_path);
  out << (have_truth ? "time,prediction,truth,abs_error\n" : "time,prediction\n");
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  std::vector<double> truth;
  for (std::size_t s = 0; s < rr.predictions.size(); ++s) {
    put(rr.times[s]);
    out << ',';
    put(rr.predictions[s]);
    if (have_truth) {
      const double t = series.target[a + 1 + s];
      truth.push_back(t);
      out << ',';
      put(t);
      out << ',';
      put(std::fabs(rr.predictions[s] - t));
    }
    out << '\n';
  }
  if (have_truth) {
    std::cout << "relative_mse " << rmse(rr.predictions, truth) << "\n";
  }
  info("wrote predictions to " + out_path);
  return 0;
}

int cmd_discover(const CommonOptions& common, const std::string& model_path, int precision,
                 const std::string& style_name, const std::string& out_path) {
  const TimeSeries series = load_csv(common.data_path, common.target);
  const SeriesSplit parts = split(series, common.ratios());
  const ModelFile model = load_model(model_path);

  RenderStyle style = RenderStyle::Unicode;
  if (style_name == "ascii") style = RenderStyle::Ascii;
  if (style_name == "latex") style = RenderStyle::Latex;

  EquationDoc doc;
  if (model.kind == ModelFile::Kind::Single) {
    doc = build_equation_doc(*model.single, parts.val);
  } else {
    doc = build_equation_doc(*model.hybrid, parts.val);
  }
  const std::string equation = render_equation(doc, precision, style);
  std::cout << equation << "\n";

  if (!out_path.empty()) {
    json terms = json::array();
    for (const auto& t : doc.terms) {
      terms.push_back({{"symbol", term_symbol(t.spec, doc.channel_names, RenderStyle::Ascii)},
                       {"coefficient", t.coefficient},
                       {"mean_contribution", t.mean_contribution}});
    }
    json j = {{"schema_version", kSchemaVersion},
              {"lhs_order", doc.lhs_order},
              {"truncation", doc.truncation},
              {"dominant_weight", doc.dominant_weight},
              {"equation", equation},
              {"terms", terms}};
    write_text(out_path, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_eval(const CommonOptions& common, const TrainOptions& topts, const EvalOptions& eopts,
             const std::string& model_path, bool ablate, const std::string& report_out) {
  const TimeSeries series = load_csv(common.data_path, common.target);
  const SeriesSplit parts = split(series, common.ratios());
  const std::size_t test_begin = parts.train.size() + parts.val.size();
  json report;
  report["horizon"] = eopts.horizon;
  report["mode"] = eopts.mode;

  if (ablate) {
    AblationConfig cfg;
    cfg.block = topts.block_config(common.seed);
    cfg.train = topts.train_config(parse_double_list(topts.lambdas)[0], common.seed);
    cfg.meta = topts.meta_config(common.seed);
    cfg.plan_specs = topts.plan_specs();
    for (const auto& txt : topts.eps_points) cfg.extra_eps.push_back(parse_double_list(txt));
    cfg.protocol = eopts.protocol();
    cfg.ratios = common.ratios();
    cfg.refit_bucket = topts.verbatim_alg1
                           ? 0
                           : (topts.refit_bucket == 0 ? topts.anchor_stride : topts.refit_bucket);
    const AblationResult r = run_ablation(series, cfg);
    report["meta"] = outcome_to_json(r.meta);
    report["hybrid"] = outcome_to_json(r.hybrid);
    report["single"] = outcome_to_json(r.single);
    report["hybrid_point"] = r.hybrid_point;
    std::cout << "meta    relative_mse " << r.meta.relative_mse << "\n"
              << "hybrid  relative_mse " << r.hybrid.relative_mse << "\n"
              << "single  relative_mse " << r.single.relative_mse << "\n";
  } else {
    if (model_path.empty()) fail(ErrorKind::Config, "eval needs --model or --ablate");
    const LoadedModel model(model_path);
    if (model.covariate_count() != series.covariate_count()) {
      fail(ErrorKind::Schema, "model and series covariate counts differ");
    }
    const EvalOutcome outcome = evaluate_rolling_fixed(model.dynamics(), series, test_begin,
                                                       series.size(), eopts.protocol());
    report["test"] = outcome_to_json(outcome);
    std::cout << "relative_mse " << outcome.relative_mse << "\n"
              << "absolute_mse " << outcome.absolute_mse << "\n";
  }
  if (!report_out.empty()) write_text(report_out, report.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn explicit PDE dynamics from multivariate time series and forecast with them"};
  app.set_config("--config", "", "key=value config file supplying flag defaults");
  app.require_subcommand(1);

  CommonOptions common;
  TrainOptions topts;
  EvalOptions eopts;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    if (needs_data) {
      cmd->add_option("--data", common.data_path, "input CSV path")->required();
      cmd->add_option("--target", common.target, "target column name");
      cmd->add_option("--ratios", [&common](const std::vector<std::string>& vals) {
            const auto parts = parse_double_list(vals[0]);
            if (parts.size() != 3) return false;
            common.ratio_train = parts[0];
            common.ratio_val = parts[1];
            common.ratio_test = parts[2];
            return true;
          },
          "train,val,test split ratios");
    }
    cmd->add_option("--seed", common.seed, "seed fixing every stochastic draw");
  };
  auto add_train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--kernel-size", topts.kernel_size, "kernel taps N (odd)");
    cmd->add_option("--channels", topts.n_channels, "candidate channels N_c");
    cmd->add_option("--layers", topts.n_layers, "layer budget N_l");
    cmd->add_option("--lhs-order", topts.lhs_order, "time-derivative order of the LHS");
    cmd->add_option("--gate-prob", topts.gate_prob, "per-channel time gate probability");
    cmd->add_option("--term", topts.terms, "explicit term, e.g. d2y/dx1 or y*x2 (repeatable)");
    cmd->add_option("--lambda", topts.lambdas, "sparsity weight(s), comma separated");
    cmd->add_flag("--lambda-absolute", topts.lambda_absolute,
                  "treat lambda as absolute rather than relative to the KKT threshold");
    cmd->add_option("--epochs", topts.epochs, "alternating optimization epochs");
    cmd->add_option("--learning-rate", topts.learning_rate, "kernel update step size");
    cmd->add_option("--fista-iters", topts.fista_iters, "FISTA iteration cap");
    cmd->add_option("--outlier-trim", topts.outlier_trim, "row trim factor (x median score)");
    cmd->add_option("--spans", topts.spans, "plan span fractions, comma separated");
    cmd->add_option("--rates", topts.rates, "plan sampling rates, comma separated");
    cmd->add_option("--eps", topts.eps_points,
                    "extra mixing-weight vector, comma separated (repeatable)");
    cmd->add_option("--meta-hidden", topts.meta_hidden, "controller hidden width");
    cmd->add_option("--meta-window", topts.meta_window, "controller encoder window");
    cmd->add_option("--meta-eval-window", topts.meta_eval_window,
                    "forward window for realized residuals");
    cmd->add_option("--anchor-stride", topts.anchor_stride, "meta training anchor stride");
    cmd->add_option("--meta-epochs", topts.meta_epochs, "controller SGD epochs");
    cmd->add_option("--meta-lr", topts.meta_lr, "controller learning rate");
    cmd->add_flag("--verbatim-alg1", topts.verbatim_alg1,
                  "retrain hybrids at every anchor (no caching)");
    cmd->add_option("--refit-bucket", topts.refit_bucket, "prefix bucket for component reuse");
  };
  auto add_eval_opts = [&](CLI::App* cmd) {
    cmd->add_option("--horizon", eopts.horizon, "forecast steps per anchor");
    cmd->add_option("--stride", eopts.stride, "anchor stride for rolling evaluation");
    cmd->add_option("--mode", eopts.mode, "single or multi");
    cmd->add_option("--covariates", eopts.covariates, "provided or hold-last");
  };

  // generate
  WaveConfig wave;
  std::string gen_out = "wave.csv";
  std::uint64_t gen_seed = 0;
  double gen_noise = 0.0;
  CLI::App* gen = app.add_subcommand("generate", "write the synthetic wave dataset");
  gen->add_option("--out", gen_out, "output CSV path");
  gen->add_option("--n", wave.n_points, "number of points");
  gen->add_option("--t-min", wave.t_min, "grid start");
  gen->add_option("--t-max", wave.t_max, "grid end");
  gen->add_option("--k-max", wave.k_max, "series truncation");
  gen->add_option("--noise-std", gen_noise, "observation noise (requires --seed)");
  gen->add_option("--seed", gen_seed, "jitter seed");

  // train
  std::string variant = "single";
  bool flag_single = false, flag_hybrid = false, flag_meta = false, flag_grid = false;
  std::string model_out = "model.json", report_out;
  CLI::App* train_cmd = app.add_subcommand("train", "fit a model and write it as JSON");
  add_common(train_cmd, true);
  add_train_opts(train_cmd);
  add_eval_opts(train_cmd);
  train_cmd->add_flag("--single", flag_single, "train one PBlock");
  train_cmd->add_flag("--hybrid", flag_hybrid, "train the hybrid ensemble");
  train_cmd->add_flag("--meta", flag_meta, "train hybrid plus meta controller");
  train_cmd->add_flag("--grid", flag_grid, "grid-search by validation relative MSE");
  train_cmd->add_option("--out", model_out, "model output path");
  train_cmd->add_option("--report", report_out, "fit report JSON path");

  // predict
  std::string model_path;
  std::size_t anchor_1based = 0;
  std::string pred_out = "predictions.csv";
  CLI::App* predict_cmd = app.add_subcommand("predict", "roll a trained model forward");
  add_common(predict_cmd, true);
  add_eval_opts(predict_cmd);
  predict_cmd->add_option("--model", model_path, "model JSON path")->required();
  predict_cmd->add_option("--anchor", anchor_1based,
                          "1-based anchor row (default: last row)");
  predict_cmd->add_option("--out", pred_out, "predictions CSV path");

  // discover
  int precision = 2;
  std::string style = "unicode", eq_out;
  bool flag_ascii = false, flag_latex = false;
  CLI::App* discover_cmd = app.add_subcommand("discover", "print the learned equation");
  add_common(discover_cmd, true);
  discover_cmd->add_option("--model", model_path, "model JSON path")->required();
  discover_cmd->add_option("--precision", precision, "coefficient digits");
  discover_cmd->add_flag("--ascii", flag_ascii, "plain ASCII output");
  discover_cmd->add_flag("--latex", flag_latex, "LaTeX output");
  discover_cmd->add_option("--out", eq_out, "equation document JSON path");

  // eval
  bool flag_ablate = false;
  std::string eval_report;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a model on the test split");
  add_common(eval_cmd, true);
  add_train_opts(eval_cmd);
  add_eval_opts(eval_cmd);
  eval_cmd->add_option("--model", model_path, "model JSON path");
  eval_cmd->add_flag("--ablate", flag_ablate, "compare single vs hybrid vs meta");
  eval_cmd->add_option("--report", eval_report, "metrics report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_noise > 0.0) {
        wave.noise_std = gen_noise;
        wave.seed = gen_seed;
      }
      return cmd_generate(gen_out, wave);
    }
    if (train_cmd->parsed()) {
      const int picked = int(flag_single) + int(flag_hybrid) + int(flag_meta);
      if (picked > 1) fail(ErrorKind::Config, "pick one of --single/--hybrid/--meta");
      variant = flag_meta ? "meta" : (flag_hybrid ? "hybrid" : "single");
      return cmd_train(common, topts, variant, flag_grid, eopts, model_out, report_out);
    }
    if (predict_cmd->parsed()) {
      return cmd_predict(common, model_path, eopts, anchor_1based, pred_out);
    }
    if (discover_cmd->parsed()) {
      if (flag_ascii) style = "ascii";
      if (flag_latex) style = "latex";
      return cmd_discover(common, model_path, precision, style, eq_out);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(common, topts, eopts, model_path, flag_ablate, eval_report);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
