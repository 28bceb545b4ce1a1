#include "pdelearn/model_io.hpp"

#include <fstream>

#include "pdelearn/errors.hpp"

namespace pdelearn {

using nlohmann::json;

namespace {

const char* factor_kind_name(TermFactor::Kind kind) {
  switch (kind) {
    case TermFactor::Kind::DerivativeRatio: return "ratio";
    case TermFactor::Kind::RawTarget: return "y";
    case TermFactor::Kind::RawCovariate: return "x";
  }
  return "?";
}

TermFactor::Kind factor_kind_from(const std::string& name) {
  if (name == "ratio") return TermFactor::Kind::DerivativeRatio;
  if (name == "y") return TermFactor::Kind::RawTarget;
  if (name == "x") return TermFactor::Kind::RawCovariate;
  fail(ErrorKind::Schema, "unknown factor kind: " + name);
}

json require(const json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::Schema, std::string("missing field: ") + key);
  return j.at(key);
}

}  // namespace

json term_spec_to_json(const TermSpec& spec) {
  json factors = json::array();
  for (const auto& f : spec.factors) {
    factors.push_back({{"kind", factor_kind_name(f.kind)},
                       {"covariate", f.covariate},
                       {"order", f.order}});
  }
  return {{"factors", factors}, {"time_gate", spec.time_gate}};
}

TermSpec term_spec_from_json(const json& j) {
  TermSpec spec;
  for (const auto& f : require(j, "factors")) {
    TermFactor factor;
    factor.kind = factor_kind_from(require(f, "kind").get<std::string>());
    factor.covariate = require(f, "covariate").get<int>();
    factor.order = require(f, "order").get<int>();
    spec.factors.push_back(factor);
  }
  spec.time_gate = require(j, "time_gate").get<bool>();
  spec.canonicalize();
  return spec;
}

json pblock_to_json(const PBlock& block) {
  json specs = json::array();
  for (const auto& s : block.term_specs()) specs.push_back(term_spec_to_json(s));

  json kernels = json::array();
  for (const auto& per_channel : block.kernels()) {
    json channel = json::array();
    for (const auto& per_factor : per_channel) {
      json factor = json::array();
      for (const auto& k : per_factor) factor.push_back(k.weights);
      channel.push_back(factor);
    }
    kernels.push_back(channel);
  }

  return {{"kernel_size", block.kernel_size()},
          {"lhs_order", block.lhs_order()},
          {"covariate_count", block.covariate_count()},
          {"seed", block.config().seed},
          {"term_specs", specs},
          {"kernels", kernels},
          {"weights", block.output_weights()},
          {"bias", block.bias()},
          {"trained", block.trained()}};
}

PBlock pblock_from_json(const json& j) {
  PBlockConfig config;
  config.kernel_size = require(j, "kernel_size").get<int>();
  config.lhs_order = require(j, "lhs_order").get<int>();
  config.seed = require(j, "seed").get<std::uint64_t>();
  std::vector<TermSpec> specs;
  for (const auto& s : require(j, "term_specs")) specs.push_back(term_spec_from_json(s));
  config.term_specs = specs;
  config.n_channels = static_cast<int>(specs.size());

  const std::size_t covariate_count = require(j, "covariate_count").get<std::size_t>();
  PBlock block(config, covariate_count);

  std::vector<std::vector<std::vector<ConvKernel>>> kernels;
  const json all_kernels = require(j, "kernels");
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const json& channel = all_kernels.at(c);
    std::vector<std::vector<ConvKernel>> per_channel;
    for (std::size_t f = 0; f < specs[c].factors.size(); ++f) {
      std::vector<ConvKernel> per_factor;
      for (const auto& weights : channel.at(f)) {
        ConvKernel k;
        k.weights = weights.get<std::vector<double>>();
        k.derivative_order = 1;
        per_factor.push_back(std::move(k));
      }
      per_channel.push_back(std::move(per_factor));
    }
    kernels.push_back(std::move(per_channel));
  }
  block.set_kernels(std::move(kernels));
  block.set_output_weights(require(j, "weights").get<std::vector<double>>(),
                           require(j, "bias").get<double>(),
                           require(j, "trained").get<bool>());
  return block;
}

json hybrid_to_json(const HybridPde& hybrid) {
  json components = json::array();
  for (const auto& c : hybrid.components()) components.push_back(pblock_to_json(c));
  json plans = json::array();
  for (const auto& p : hybrid.plans()) {
    plans.push_back({{"span", p.span}, {"rate", p.rate}});
  }
  return {{"components", components}, {"plans", plans}, {"weights", hybrid.weights()}};
}

HybridPde hybrid_from_json(const json& j) {
  std::vector<PBlock> components;
  for (const auto& c : require(j, "components")) components.push_back(pblock_from_json(c));
  std::vector<ResamplePlan> plans;
  for (const auto& p : require(j, "plans")) {
    plans.push_back({require(p, "span").get<std::size_t>(), require(p, "rate").get<std::size_t>()});
  }
  return HybridPde(std::move(components), std::move(plans),
                   require(j, "weights").get<std::vector<double>>());
}

json hyper_grid_to_json(const HyperGrid& grid) {
  json specs = json::array();
  for (const auto& s : grid.plan_specs) {
    specs.push_back({{"span_fraction", s.span_fraction}, {"rate", s.rate}});
  }
  json points = json::array();
  for (const auto& p : grid.points) {
    points.push_back({{"plan_indices", p.plan_indices}, {"eps", p.eps}});
  }
  return {{"plan_specs", specs}, {"points", points}};
}

HyperGrid hyper_grid_from_json(const json& j) {
  HyperGrid grid;
  for (const auto& s : require(j, "plan_specs")) {
    grid.plan_specs.push_back(
        {require(s, "span_fraction").get<double>(), require(s, "rate").get<std::size_t>()});
  }
  for (const auto& p : require(j, "points")) {
    grid.points.push_back({require(p, "plan_indices").get<std::vector<int>>(),
                           require(p, "eps").get<std::vector<double>>()});
  }
  return grid;
}

json controller_to_json(const MetaController& controller) {
  const auto& cfg = controller.config();
  json params;
  const char* names[] = {"wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh",
                         "w1", "b1", "w2", "b2"};
  auto vecs = controller.params().all();
  for (std::size_t i = 0; i < vecs.size(); ++i) params[names[i]] = *vecs[i];

  json specs = json::array();
  for (const auto& s : controller.plan_specs()) {
    specs.push_back({{"span_fraction", s.span_fraction}, {"rate", s.rate}});
  }

  return {{"covariate_count", controller.covariate_count()},
          {"plan_specs", specs},
          {"config",
           {{"hidden_dim", cfg.hidden_dim},
            {"window", cfg.window},
            {"eval_window", cfg.eval_window},
            {"anchor_stride", cfg.anchor_stride},
            {"epochs", cfg.epochs},
            {"learning_rate", cfg.learning_rate},
            {"momentum", cfg.momentum},
            {"seed", cfg.seed}}},
          {"params", params},
          {"normalization",
           {{"input_mean", controller.normalization().input_mean},
            {"input_std", controller.normalization().input_std},
            {"target_mean", controller.normalization().target_mean},
            {"target_std", controller.normalization().target_std},
            {"log_target", controller.normalization().log_target}}}};
}

MetaController controller_from_json(const json& j) {
  MetaConfig cfg;
  const json jc = require(j, "config");
  cfg.hidden_dim = require(jc, "hidden_dim").get<int>();
  cfg.window = require(jc, "window").get<std::size_t>();
  cfg.eval_window = require(jc, "eval_window").get<std::size_t>();
  cfg.anchor_stride = require(jc, "anchor_stride").get<std::size_t>();
  cfg.epochs = require(jc, "epochs").get<int>();
  cfg.learning_rate = require(jc, "learning_rate").get<double>();
  cfg.momentum = require(jc, "momentum").get<double>();
  cfg.seed = require(jc, "seed").get<std::uint64_t>();

  HyperGrid grid;
  for (const auto& s : require(j, "plan_specs")) {
    grid.plan_specs.push_back(
        {require(s, "span_fraction").get<double>(), require(s, "rate").get<std::size_t>()});
  }

  MetaController ctrl(require(j, "covariate_count").get<std::size_t>(), grid, cfg);
  const json params = require(j, "params");
  const char* names[] = {"wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh",
                         "w1", "b1", "w2", "b2"};
  auto vecs = ctrl.params().all();
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    auto values = require(params, names[i]).get<std::vector<double>>();
    if (values.size() != vecs[i]->size()) fail(ErrorKind::Schema, "parameter shape mismatch");
    *vecs[i] = std::move(values);
  }
  const json norm = require(j, "normalization");
  ctrl.normalization().input_mean = require(norm, "input_mean").get<std::vector<double>>();
  ctrl.normalization().input_std = require(norm, "input_std").get<std::vector<double>>();
  ctrl.normalization().target_mean = require(norm, "target_mean").get<double>();
  ctrl.normalization().target_std = require(norm, "target_std").get<double>();
  ctrl.normalization().log_target = require(norm, "log_target").get<bool>();
  return ctrl;
}

std::string model_to_string(const ModelFile& model) {
  json j;
  j["schema_version"] = kSchemaVersion;
  switch (model.kind) {
    case ModelFile::Kind::Single:
      j["kind"] = "pblock";
      if (!model.single) fail(ErrorKind::Schema, "missing single block");
      j["model"] = pblock_to_json(*model.single);
      break;
    case ModelFile::Kind::Hybrid:
      j["kind"] = "hybrid";
      if (!model.hybrid) fail(ErrorKind::Schema, "missing hybrid model");
      j["model"] = hybrid_to_json(*model.hybrid);
      break;
    case ModelFile::Kind::Meta:
      j["kind"] = "meta";
      if (!model.hybrid || !model.controller || !model.grid) {
        fail(ErrorKind::Schema, "meta model needs hybrid, controller, and grid");
      }
      j["model"] = hybrid_to_json(*model.hybrid);
      j["controller"] = controller_to_json(*model.controller);
      j["grid"] = hyper_grid_to_json(*model.grid);
      break;
  }
  return j.dump(2) + "\n";
}

void save_model(const ModelFile& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Ingest, "cannot write file: " + path);
  out << model_to_string(model);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Ingest, "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::Schema, std::string("invalid model JSON: ") + e.what());
  }
  if (require(j, "schema_version").get<int>() != kSchemaVersion) {
    fail(ErrorKind::Schema, "unsupported schema version");
  }
  ModelFile model;
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "pblock") {
    model.kind = ModelFile::Kind::Single;
    model.single = pblock_from_json(require(j, "model"));
  } else if (kind == "hybrid") {
    model.kind = ModelFile::Kind::Hybrid;
    model.hybrid = hybrid_from_json(require(j, "model"));
  } else if (kind == "meta") {
    model.kind = ModelFile::Kind::Meta;
    model.hybrid = hybrid_from_json(require(j, "model"));
    model.controller = controller_from_json(require(j, "controller"));
    model.grid = hyper_grid_from_json(require(j, "grid"));
  } else {
    fail(ErrorKind::Schema, "unknown model kind: " + kind);
  }
  return model;
}

}  // namespace pdelearn
