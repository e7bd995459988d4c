#pragma once

#include <string>
#include <vector>

namespace evilab {

struct Preset {
    std::string name;
    std::string yaml;
};

/// Shipped experiment configurations, sorted by name.
const std::vector<Preset>& presets();

/// Preset by name; throws ConfigError when unknown.
const Preset& find_preset(const std::string& name);

}  // namespace evilab
