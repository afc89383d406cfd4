#include "omr/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace omr {

namespace {

struct Residual {
  std::size_t to;
  std::size_t reverse;  // index of the paired edge in adjacency[to]
  std::int64_t capacity;
};

}  // namespace

std::int64_t max_flow(std::size_t node_count, std::span<const FlowEdge> edges, std::size_t source,
                      std::size_t target) {
  if (source == target) throw std::invalid_argument("max_flow: source equals target");
  if (source >= node_count || target >= node_count)
    throw std::invalid_argument("max_flow: terminal out of range");

  std::vector<std::vector<Residual>> adjacency(node_count);
  for (const auto& e : edges) {
    if (e.from >= node_count || e.to >= node_count)
      throw std::invalid_argument("max_flow: edge endpoint out of range");
    if (e.capacity < 0) throw std::invalid_argument("max_flow: negative capacity");
    if (e.from == e.to) continue;
    adjacency[e.from].push_back({e.to, adjacency[e.to].size(), e.capacity});
    adjacency[e.to].push_back({e.from, adjacency[e.from].size() - 1, 0});
  }

  std::int64_t flow = 0;
  std::vector<std::pair<std::size_t, std::size_t>> parent(node_count);  // (vertex, edge index)
  std::vector<bool> seen(node_count);
  for (;;) {
    std::fill(seen.begin(), seen.end(), false);
    std::queue<std::size_t> frontier;
    frontier.push(source);
    seen[source] = true;
    while (!frontier.empty() && !seen[target]) {
      const auto v = frontier.front();
      frontier.pop();
      for (std::size_t k = 0; k < adjacency[v].size(); ++k) {
        const auto& r = adjacency[v][k];
        if (r.capacity > 0 && !seen[r.to]) {
          seen[r.to] = true;
          parent[r.to] = {v, k};
          frontier.push(r.to);
        }
      }
    }
    if (!seen[target]) break;

    auto bottleneck = std::numeric_limits<std::int64_t>::max();
    for (auto v = target; v != source; v = parent[v].first)
      bottleneck = std::min(bottleneck, adjacency[parent[v].first][parent[v].second].capacity);
    for (auto v = target; v != source; v = parent[v].first) {
      auto& fwd = adjacency[parent[v].first][parent[v].second];
      fwd.capacity -= bottleneck;
      adjacency[v][fwd.reverse].capacity += bottleneck;
    }
    flow += bottleneck;
  }
  return flow;
}

}  // namespace omr
