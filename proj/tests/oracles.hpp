#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. Nothing here calls into the library's solvers.

#include "omr/allocator.hpp"
#include "omr/random.hpp"
#include "omr/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using omr::Bits;
using omr::NodeId;

/// All-LF graph over nodes 1..n with the given undirected edges.
inline omr::TopologyGraph line_graph(int n, const std::vector<std::pair<NodeId, NodeId>>& edges, NodeId sink,
                                     std::optional<omr::NeighborMap> upstream = std::nullopt) {
  std::vector<omr::NodeSpec> nodes;
  for (int k = 1; k <= n; ++k) nodes.push_back({static_cast<NodeId>(k), omr::Vec3(100.0 * k, 0, 50), {0}});
  std::vector<omr::Link> links;
  for (auto [a, b] : edges) links.push_back({std::min(a, b), std::max(a, b), 0});
  return omr::build_graph(omr::default_catalog(), std::move(nodes), sink, {}, links, std::move(upstream));
}

/// Random connected graph on 2..max_nodes nodes, sink = last node: a random
/// spanning tree plus extra edges with probability `density`.
inline omr::TopologyGraph random_connected_graph(omr::Rng& rng, int max_nodes, double density) {
  const int n = static_cast<int>(rng.uniform_int(2, max_nodes));
  std::set<std::pair<NodeId, NodeId>> edges;
  for (int k = 2; k <= n; ++k) {
    const auto parent = static_cast<NodeId>(rng.uniform_int(1, k - 1));
    edges.insert({parent, static_cast<NodeId>(k)});
  }
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      if (rng.bernoulli(density)) edges.insert({static_cast<NodeId>(a), static_cast<NodeId>(b)});
  return line_graph(n, {edges.begin(), edges.end()}, static_cast<NodeId>(n));
}

/// Hop counts by repeated relaxation (Bellman-Ford with unit weights).
inline std::map<NodeId, int> hop_counts(const omr::TopologyGraph& g) {
  std::map<NodeId, int> hop;
  for (const auto& n : g.nodes) hop[n.id] = n.id == g.sink ? 0 : 1 << 20;
  for (std::size_t round = 0; round < g.size(); ++round)
    for (const auto& l : g.links) {
      hop[l.a] = std::min(hop[l.a], hop[l.b] + 1);
      hop[l.b] = std::min(hop[l.b], hop[l.a] + 1);
    }
  return hop;
}

/// Every simple path i -> sink following upstream edges.
inline std::vector<std::vector<NodeId>> upstream_paths(const omr::TopologyGraph& g, NodeId i) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> path{i};
  std::function<void(NodeId)> walk = [&](NodeId v) {
    if (v == g.sink) {
      out.push_back(path);
      return;
    }
    for (auto w : g.upstream_of(v)) {
      if (std::find(path.begin(), path.end(), w) != path.end()) continue;
      path.push_back(w);
      walk(w);
      path.pop_back();
    }
  };
  walk(i);
  return out;
}

/// Largest set of upstream paths i -> sink that share no intermediate node,
/// by exhaustive search over path subsets.
inline int disjoint_route_count(const omr::TopologyGraph& g, NodeId i) {
  const auto paths = upstream_paths(g, i);
  int best = 0;
  std::set<NodeId> used;
  bool direct_used = false;
  std::function<void(std::size_t, int)> search = [&](std::size_t k, int taken) {
    best = std::max(best, taken);
    if (taken + static_cast<int>(paths.size() - k) <= best) return;
    for (std::size_t p = k; p < paths.size(); ++p) {
      const auto& path = paths[p];
      const bool direct = path.size() == 2;
      if (direct && direct_used) continue;
      bool clash = false;
      for (std::size_t v = 1; v + 1 < path.size(); ++v) clash = clash || used.count(path[v]);
      if (clash) continue;
      for (std::size_t v = 1; v + 1 < path.size(); ++v) used.insert(path[v]);
      if (direct) direct_used = true;
      search(p + 1, taken + 1);
      for (std::size_t v = 1; v + 1 < path.size(); ++v) used.erase(path[v]);
      if (direct) direct_used = false;
    }
  };
  search(0, 0);
  return best;
}

struct Edge {
  int from, to;
  std::int64_t capacity;
};

/// Minimum s-t cut by enumerating every vertex bipartition.
inline std::int64_t min_cut(int n, const std::vector<Edge>& edges, int s, int t) {
  std::int64_t best = -1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    std::int64_t cut = 0;
    for (const auto& e : edges)
      if ((mask >> e.from & 1u) && !(mask >> e.to & 1u)) cut += e.capacity;
    if (best < 0 || cut < best) best = cut;
  }
  return best;
}

/// Best total on the byte grid: every slot a multiple of 8 bits within its
/// cap, the sum within the backlog and each neighbour within its limit.
inline Bits grid_optimum(const omr::AllocationProblem& p) {
  const Bits budget = p.backlog / 8;
  std::vector<Bits> caps;
  for (const auto& s : p.slots) caps.push_back(std::max<Bits>(0, s.cap) / 8);
  std::map<NodeId, Bits> used;
  Bits best = 0;
  std::function<void(std::size_t, Bits)> walk = [&](std::size_t k, Bits total) {
    if (k == caps.size()) {
      best = std::max(best, total);
      return;
    }
    const auto j = p.slots[k].neighbor;
    for (Bits x = 0; x <= caps[k]; ++x) {
      if (total + x > budget) break;
      if (auto lim = p.neighbor_limits.find(j); lim != p.neighbor_limits.end() && used[j] + x > lim->second / 8) break;
      used[j] += x;
      walk(k + 1, total + x);
      used[j] -= x;
    }
  };
  walk(0, 0);
  return best * 8;
}

/// Empty string when `a` satisfies every constraint of `p` exactly.
inline std::string violations(const omr::AllocationProblem& p, const omr::Allocation& a) {
  std::string err;
  Bits total = 0;
  std::map<NodeId, Bits> per;
  for (const auto& e : a.entries) {
    if (e.bits < 0 || e.bits % 8) err += "fractional byte; ";
    const auto s = std::find_if(p.slots.begin(), p.slots.end(),
                                [&](const auto& s) { return s.neighbor == e.neighbor && s.tech == e.tech; });
    if (s == p.slots.end() ? e.bits != 0 : e.bits > s->cap) err += "cap; ";
    total += e.bits;
    per[e.neighbor] += e.bits;
  }
  if (total > p.backlog) err += "backlog; ";
  for (const auto& [j, lim] : p.neighbor_limits)
    if (per[j] > lim) err += "neighbour limit; ";
  return err;
}

/// Gaussian upper tail by composite Simpson integration of the density.
inline double q_tail(double x) {
  if (x < 0) return 1.0 - q_tail(-x);
  const double upper = x + 40.0;
  const int steps = 200000;
  const double h = (upper - x) / steps;
  auto f = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
  double sum = f(x) + f(upper);
  for (int k = 1; k < steps; ++k) sum += f(x + k * h) * (k % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace oracle
