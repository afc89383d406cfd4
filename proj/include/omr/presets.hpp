#pragma once

#include "omr/topology.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace omr {

/// Names accepted by make_preset; "chain-k" stands for chain-2, chain-3, ...
std::vector<std::string> preset_names();

/// True for presets whose graph depends on the seed (paper-random).
bool preset_is_random(const std::string& name);

/// Builds a named topology. The seed is ignored by the fixed presets.
///
/// fig1 is the six-node worked example with sink 6 and explicit upstream
/// sets; diamond is 1-2, 1-3, 2-4, 3-4 with sink 4; chain-k is 1-2-...-k
/// with sink k; paper-random draws a connected ten-node scenario.
TopologyGraph make_preset(const std::string& name, std::uint64_t seed = 0);

}  // namespace omr
