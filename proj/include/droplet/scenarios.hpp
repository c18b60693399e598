#pragma once

#include <string>
#include <utility>
#include <vector>

#include "droplet/config.hpp"

namespace droplet {

struct ScenarioPreset {
  std::string name;
  std::string summary;
  std::string text;  // dotted-key config
};

inline const std::vector<ScenarioPreset>& scenario_presets() {
  static const std::vector<ScenarioPreset> presets = {
      {"radial-cycle", "disk droplet around a disk solid, up-down-up forcing through both thresholds",
       R"(scenario = radial-cycle
scheme = relaxation
grid.box = -4, -4, 4, 4
grid.h = 1/64
solid = disk(0, 0, 1)
initial = disk(0, 0, 2)
# F(0) = 2 ln 2 puts the initial slope at 1
forcing = 0:1.38629436112, 1:1.55, 2:1.30, 4:2.75, 6:1.25, 8:2.0
pinning.mu_plus = 0.44
pinning.mu_minus = 0.19
output.times = 0:0.25:8
verify.star = true
)"},
      {"two-annuli", "two separate droplets around two disk solids, advancing until they merge",
       R"(scenario = two-annuli
scheme = relaxation
grid.box = -4.5, -3.5, 4.5, 3.5
grid.h = 1/32
solid = union(disk(-1.5, 0, 0.5), disk(1.5, 0, 0.5))
initial = union(disk(-1.5, 0, 0.9), disk(1.5, 0, 0.9))
forcing = 0:0.529002945, 1:2.1
pinning.mu_plus = 0.44
pinning.mu_minus = 0.19
output.times = 0:0.05:1
)"},
      {"two-annuli-receding", "the two-annuli merge followed by a recession that splits the droplet again",
       R"(scenario = two-annuli-receding
scheme = relaxation
grid.box = -4.5, -3.5, 4.5, 3.5
grid.h = 1/32
solid = union(disk(-1.5, 0, 0.5), disk(1.5, 0, 0.5))
initial = union(disk(-1.5, 0, 0.9), disk(1.5, 0, 0.9))
forcing = 0:0.529002945, 1:2.1, 3:0.3
pinning.mu_plus = 0.44
pinning.mu_minus = 0.19
output.times = 0:0.05:3
)"},
      {"unequal-annuli", "droplets around solids of different radii; after merging the boundary leaves the larger one",
       R"(scenario = unequal-annuli
scheme = relaxation
grid.box = -4.5, -3.5, 4.5, 3.5
grid.h = 1/32
solid = union(disk(-1.4, 0, 0.4), disk(1.3, 0, 0.7))
initial = union(disk(-1.4, 0, 0.75), disk(1.3, 0, 1.2))
forcing = 0:0.5, 1:1.6
pinning.mu_plus = 0.3
pinning.mu_minus = 0.5
output.times = 0:0.05:1
)"},
      {"stadium", "stadium droplet around a disk solid; the flat sides bulge first and convexity is lost",
       R"(scenario = stadium
scheme = relaxation
grid.box = -4.5, -3.5, 4.5, 3.5
grid.h = 1/32
solid = disk(0, 0, 1)
initial = stadium(0, 0, 1.5, 2)
forcing = 0:1, 1:1.4
# widest band that keeps the initial stadium stable
pinning.from_initial = true
output.times = 0:0.05:1
verify.star = true
)"},
      {"nested-ordering", "two nested elliptical droplets with ordered forcings; containment persists",
       R"(scenario = nested-ordering
scheme = relaxation
grid.box = -4.5, -3.5, 4.5, 3.5
grid.h = 1/32
solid = disk(0, 0, 1)
initial = ellipse(0, 0, 1.6, 1.3)
forcing = 0:0.7, 1:1.26, 3:0.35
companion.initial = ellipse(0, 0, 1.9, 1.5)
companion.forcing = 0:1, 1:1.8, 3:0.5
pinning.mu_plus = 4.0
pinning.mu_minus = 0.52
output.times = 0:0.1:3
verify.star = true
)"},
  };
  return presets;
}

inline const ScenarioPreset& find_scenario(const std::string& name) {
  for (const auto& p : scenario_presets())
    if (p.name == name) return p;
  throw ConfigError("unknown scenario '" + name + "'");
}

inline KeyValues scenario_keys(const std::string& name) { return cfg::parse(find_scenario(name).text); }

inline RunConfig scenario_config(const std::string& name) { return make_run_config(scenario_keys(name)); }

}  // namespace droplet
