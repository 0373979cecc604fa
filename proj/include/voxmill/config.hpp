#pragma once

#include <string>
#include <vector>

#include "voxmill/accessibility.hpp"
#include "voxmill/fea.hpp"
#include "voxmill/scene.hpp"
#include "voxmill/topopt.hpp"

namespace voxmill {

/// Fully validated problem setup loaded from a JSON scene config. `resolved`
/// is the canonical config echo with every default filled in, used for run
/// manifests.
struct SceneConfig {
  Scene scene;
  std::vector<ToolAssembly> tools;
  LoadCase load;
  MaterialModel material;
  TOConfig to;
  std::string resolved;
};

/// Parses and validates a scene config file. Every failure throws a
/// ConfigError whose key() names the offending entry. Referenced field files
/// resolve relative to the config file's directory.
SceneConfig load_config(const std::string& path);

/// Same, from an in-memory JSON document.
SceneConfig load_config_from_string(const std::string& json_text,
                                    const std::string& base_dir = ".");

/// FNV-1a hash of the resolved config text, printed in run manifests.
std::string config_hash(const SceneConfig& cfg);

}  // namespace voxmill
