#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffnav/sim.hpp"
#include "ffnav/world.hpp"

namespace ffnav
{

/// A procedurally generated world together with a matching scenario.
///
/// The scenario's `world_file` is left empty; callers that serialize the
/// bundle are expected to save the world first and then point the scenario
/// at the resulting file.
struct PresetBundle
{
  std::string name;
  World world;
  Scenario scenario;
};

/// Names accepted by `make_preset`, in a stable order:
///   straight          10 m straight corridor, no obstacles
///   corridor          42 m corridor with two 90-degree bends, no obstacles
///   scurve            20 m-span S-shaped sweep, no obstacles
///   corridor_dynamic  the corridor plus a disc that crosses the route while
///                     the repeat run is underway
std::vector<std::string> preset_names();

/// Builds the named world/scenario pair. The seed drives landmark jitter and
/// becomes the scenario's base RNG seed, so equal (name, seed) pairs produce
/// identical bundles. Throws ConfigError for unknown names.
PresetBundle make_preset(const std::string & name, std::uint64_t seed);

}  // namespace ffnav
