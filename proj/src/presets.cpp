#include "evilab/presets.hpp"

#include "evilab/error.hpp"

namespace evilab {

const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace evilab
