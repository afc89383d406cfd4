#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace omr {

struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::int64_t capacity = 0;
};

/// Maximum s-t flow (Edmonds-Karp). Vertices are 0..node_count-1.
/// Throws std::invalid_argument for source == target, out-of-range vertices or
/// negative capacities.
std::int64_t max_flow(std::size_t node_count, std::span<const FlowEdge> edges, std::size_t source,
                      std::size_t target);

}  // namespace omr
