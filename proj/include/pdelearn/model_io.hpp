#pragma once

#include <string>

#include "json.hpp"
#include "pdelearn/hybrid.hpp"
#include "pdelearn/metactrl.hpp"
#include "pdelearn/pblock.hpp"

namespace pdelearn {

inline constexpr int kSchemaVersion = 1;

nlohmann::json term_spec_to_json(const TermSpec& spec);
TermSpec term_spec_from_json(const nlohmann::json& j);

nlohmann::json pblock_to_json(const PBlock& block);
PBlock pblock_from_json(const nlohmann::json& j);

nlohmann::json hybrid_to_json(const HybridPde& hybrid);
HybridPde hybrid_from_json(const nlohmann::json& j);

nlohmann::json controller_to_json(const MetaController& controller);
MetaController controller_from_json(const nlohmann::json& j);

/// Model container: {"schema_version":1, "kind":"pblock"|"hybrid"|"meta", ...}.
struct ModelFile {
  enum class Kind { Single, Hybrid, Meta };
  Kind kind = Kind::Single;
  std::optional<PBlock> single;
  std::optional<HybridPde> hybrid;
  std::optional<MetaController> controller;  // meta carries controller + grid
  std::optional<HyperGrid> grid;
};

nlohmann::json hyper_grid_to_json(const HyperGrid& grid);
HyperGrid hyper_grid_from_json(const nlohmann::json& j);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

/// Serializes with sorted keys and fixed layout so identical models produce
/// byte-identical files.
std::string model_to_string(const ModelFile& model);

}  // namespace pdelearn
