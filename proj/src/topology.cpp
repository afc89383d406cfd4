#include "omr/topology.hpp"

#include "omr/channel.hpp"
#include "omr/maxflow.hpp"
#include "omr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>

namespace omr {

namespace {

const std::vector<NodeId> kEmpty;

Technology make_technology(std::string name, double rate, double range, double noise, double bandwidth,
                           Bits max_datagram) {
  Technology t;
  t.name = std::move(name);
  t.bit_rate = rate;
  t.max_range = range;
  t.noise_level_db = noise;
  t.source_level_db = 170.0;
  t.bandwidth_hz = bandwidth;
  t.spreading_exponent = 1.5;
  t.max_datagram_bits = max_datagram;
  t.absorption_db_per_m = calibrate_absorption(t, max_datagram);
  return t;
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  const double v = cross(q - p, r - p);
  const double scale = std::max({1.0, (q - p).norm(), (r - p).norm()});
  if (std::abs(v) <= 1e-12 * scale * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  // r collinear with p-q: inside the bounding box?
  return r.x() <= std::max(p.x(), q.x()) + 1e-12 && r.x() >= std::min(p.x(), q.x()) - 1e-12 &&
         r.y() <= std::max(p.y(), q.y()) + 1e-12 && r.y() >= std::min(p.y(), q.y()) - 1e-12;
}

Eigen::Vector2d project(const Vec3& v, ObstacleOrientation o) {
  return o == ObstacleOrientation::Horizontal ? Eigen::Vector2d(v.x(), v.y()) : Eigen::Vector2d(v.x(), v.z());
}

void validate_nodes(const TechnologyCatalog& technologies, const std::vector<NodeSpec>& nodes) {
  std::set<std::string> names;
  for (const auto& t : technologies) {
    if (!(t.bit_rate > 0) || !(t.max_range > 0))
      throw TopologyError("technology '" + t.name + "' needs positive bit rate and range");
    if (!names.insert(t.name).second) throw TopologyError("duplicate technology id '" + t.name + "'");
  }
  std::set<NodeId> ids;
  for (const auto& n : nodes) {
    if (n.id == kBroadcast) throw TopologyError("node id 0 is reserved");
    if (!ids.insert(n.id).second) throw TopologyError("duplicate node id " + std::to_string(n.id));
    if (n.technologies.empty()) throw TopologyError("node " + std::to_string(n.id) + " has no technology");
    for (auto t : n.technologies)
      if (t >= technologies.size())
        throw TopologyError("node " + std::to_string(n.id) + " references unknown technology");
  }
}

}  // namespace

bool NodeSpec::has(TechId t) const { return std::binary_search(technologies.begin(), technologies.end(), t); }

std::size_t TopologyGraph::index_of(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeSpec& n, NodeId v) { return n.id < v; });
  if (it == nodes.end() || it->id != id) throw TopologyError("unknown node " + std::to_string(id));
  return static_cast<std::size_t>(it - nodes.begin());
}

bool TopologyGraph::contains(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeSpec& n, NodeId v) { return n.id < v; });
  return it != nodes.end() && it->id == id;
}

const std::vector<NodeId>& TopologyGraph::upstream_of(NodeId id) const {
  auto it = upstream.find(id);
  return it == upstream.end() ? kEmpty : it->second;
}

const std::vector<NodeId>& TopologyGraph::neighbors_of(NodeId id) const {
  auto it = all_neighbors.find(id);
  return it == all_neighbors.end() ? kEmpty : it->second;
}

bool TopologyGraph::is_upstream(NodeId i, NodeId j) const {
  const auto& y = upstream_of(i);
  return std::binary_search(y.begin(), y.end(), j);
}

std::vector<NodeId> TopologyGraph::downstream_of(NodeId j) const {
  std::vector<NodeId> out;
  for (const auto& [l, y] : upstream)
    if (std::binary_search(y.begin(), y.end(), j)) out.push_back(l);
  return out;
}

bool TopologyGraph::has_link(NodeId a, NodeId b, TechId t) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(links.begin(), links.end(), Link{a, b, t});
}

std::vector<TechId> TopologyGraph::link_technologies(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  std::vector<TechId> out;
  auto it = std::lower_bound(links.begin(), links.end(), Link{a, b, 0});
  for (; it != links.end() && it->a == a && it->b == b; ++it) out.push_back(it->tech);
  return out;
}

std::vector<NodeId> TopologyGraph::tech_neighbors(NodeId n, TechId t) const {
  std::vector<NodeId> out;
  for (const auto& l : links) {
    if (l.tech != t) continue;
    if (l.a == n) out.push_back(l.b);
    if (l.b == n) out.push_back(l.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double TopologyGraph::distance(NodeId a, NodeId b) const {
  return (node(a).position - node(b).position).norm();
}

std::map<NodeId, int> TopologyGraph::hop_counts() const {
  std::map<NodeId, int> hops{{sink, 0}};
  std::queue<NodeId> frontier;
  frontier.push(sink);
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto w : neighbors_of(v))
      if (hops.emplace(w, hops[v] + 1).second) frontier.push(w);
  }
  return hops;
}

std::optional<TechId> TopologyGraph::find_technology(const std::string& name) const {
  for (std::size_t k = 0; k < technologies.size(); ++k)
    if (technologies[k].name == name) return static_cast<TechId>(k);
  return std::nullopt;
}

TechnologyCatalog default_catalog() {
  return {
      make_technology("LF", 1000.0, 3000.0, 40.0, 16000.0, 9600),
      make_technology("MF", 32000.0, 300.0, 30.0, 30000.0, 30000),
      make_technology("HF", 64000.0, 100.0, 10.0, 80000.0, 30000),
  };
}

bool segments_intersect_2d(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                           const Eigen::Vector2d& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool line_of_sight_blocked(const Vec3& a, const Vec3& b, const ObstacleSegment& obstacle) {
  const auto o = obstacle.orientation;
  return segments_intersect_2d(project(a, o), project(b, o), project(obstacle.a, o), project(obstacle.b, o));
}

std::vector<Link> derive_links(std::span<const NodeSpec> nodes, const TechnologyCatalog& technologies,
                               const ObstacleField& obstacles) {
  std::vector<Link> links;
  for (std::size_t x = 0; x < nodes.size(); ++x) {
    for (std::size_t y = x + 1; y < nodes.size(); ++y) {
      const auto& p = nodes[x];
      const auto& q = nodes[y];
      const double d = (p.position - q.position).norm();
      const bool blocked = std::any_of(obstacles.begin(), obstacles.end(), [&](const ObstacleSegment& o) {
        return line_of_sight_blocked(p.position, q.position, o);
      });
      if (blocked) continue;
      for (auto t : p.technologies) {
        if (!q.has(t) || d > technologies.at(t).max_range) continue;
        links.push_back({std::min(p.id, q.id), std::max(p.id, q.id), t});
      }
    }
  }
  std::sort(links.begin(), links.end());
  return links;
}

NeighborMap neighbors_from_links(std::span<const NodeSpec> nodes, std::span<const Link> links) {
  NeighborMap out;
  for (const auto& n : nodes) out[n.id];
  for (const auto& l : links) {
    out[l.a].push_back(l.b);
    out[l.b].push_back(l.a);
  }
  for (auto& [id, v] : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

NeighborMap discover_routes(std::span<const NodeSpec> nodes, std::span<const Link> links, NodeId sink) {
  const auto neighbors = neighbors_from_links(nodes, links);
  if (!neighbors.contains(sink)) throw TopologyError("sink " + std::to_string(sink) + " is not a node");
  std::map<NodeId, int> hop{{sink, 0}};
  std::queue<NodeId> frontier;
  frontier.push(sink);
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto w : neighbors.at(v))
      if (hop.emplace(w, hop[v] + 1).second) frontier.push(w);
  }
  NeighborMap upstream;
  for (const auto& [id, adj] : neighbors) {
    if (!hop.contains(id)) throw TopologyError("node " + std::to_string(id) + " has no route to the sink");
    auto& y = upstream[id];
    for (auto j : adj) {
      if (hop[j] < hop[id] || (hop[j] == hop[id] && j > id)) y.push_back(j);
    }
  }
  upstream[sink].clear();
  return upstream;
}

bool is_acyclic(const NeighborMap& upstream) {
  std::map<NodeId, int> indegree;
  for (const auto& [i, y] : upstream) {
    indegree.try_emplace(i, 0);
    for (auto j : y) ++indegree[j];
  }
  std::queue<NodeId> ready;
  for (const auto& [v, d] : indegree)
    if (d == 0) ready.push(v);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto v = ready.front();
    ready.pop();
    ++visited;
    auto it = upstream.find(v);
    if (it == upstream.end()) continue;
    for (auto j : it->second)
      if (--indegree[j] == 0) ready.push(j);
  }
  return visited == indegree.size();
}

TopologyGraph build_graph(TechnologyCatalog technologies, std::vector<NodeSpec> nodes, NodeId sink,
                          ObstacleField obstacles, std::optional<std::vector<Link>> links,
                          std::optional<NeighborMap> upstream) {
  for (auto& n : nodes) {
    std::sort(n.technologies.begin(), n.technologies.end());
    n.technologies.erase(std::unique(n.technologies.begin(), n.technologies.end()), n.technologies.end());
  }
  std::sort(nodes.begin(), nodes.end(), [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  validate_nodes(technologies, nodes);
  for (const auto& o : obstacles)
    if ((o.a - o.b).norm() <= 0.0) throw TopologyError("obstacle segment has zero length");

  TopologyGraph g;
  g.technologies = std::move(technologies);
  g.nodes = std::move(nodes);
  g.obstacles = std::move(obstacles);
  g.sink = sink;
  if (!g.contains(sink)) throw TopologyError("sink " + std::to_string(sink) + " is not a node");

  if (links) {
    for (auto& l : *links) {
      if (l.a > l.b) std::swap(l.a, l.b);
      if (l.a == l.b) throw TopologyError("self link at node " + std::to_string(l.a));
      if (!g.contains(l.a) || !g.contains(l.b)) throw TopologyError("link references an unknown node");
      if (!g.node(l.a).has(l.tech) || !g.node(l.b).has(l.tech))
        throw TopologyError("link " + std::to_string(l.a) + "-" + std::to_string(l.b) +
                            " uses a technology one endpoint lacks");
    }
    std::sort(links->begin(), links->end());
    links->erase(std::unique(links->begin(), links->end()), links->end());
    g.links = std::move(*links);
  } else {
    g.links = derive_links(g.nodes, g.technologies, g.obstacles);
  }
  g.all_neighbors = neighbors_from_links(g.nodes, g.links);

  if (upstream) {
    for (const auto& n : g.nodes) (*upstream)[n.id];
    for (auto& [i, y] : *upstream) {
      if (!g.contains(i)) throw TopologyError("upstream set for unknown node " + std::to_string(i));
      std::sort(y.begin(), y.end());
      y.erase(std::unique(y.begin(), y.end()), y.end());
      const auto& adj = g.all_neighbors.at(i);
      for (auto j : y)
        if (!std::binary_search(adj.begin(), adj.end(), j))
          throw TopologyError("upstream " + std::to_string(j) + " of node " + std::to_string(i) +
                              " is not a one-hop neighbour");
    }
    if (!(*upstream)[sink].empty()) throw TopologyError("sink must have an empty upstream set");
    g.upstream = std::move(*upstream);
  } else {
    g.upstream = discover_routes(g.nodes, g.links, sink);
  }
  if (!is_acyclic(g.upstream)) throw TopologyError("upstream sets contain a routing cycle");
  return g;
}

GenerationResult generate_random_topology(const ScenarioParams& params, std::uint64_t seed) {
  if (params.node_count < 2) throw TopologyError("node_count must be at least 2");
  if (!(params.width > 0) || !(params.length > 0) || !(params.depth > 0))
    throw TopologyError("area and depth must be positive");
  if (params.technologies.empty()) throw TopologyError("technology catalog is empty");

  Rng rng(seed);
  const auto tech_count = params.technologies.size();
  std::vector<NodeSpec> nodes;
  for (int k = 1; k <= params.node_count; ++k) {
    NodeSpec n;
    n.id = static_cast<NodeId>(k);
    n.position = Vec3(rng.uniform(0, params.width), rng.uniform(0, params.length), rng.uniform(0, params.depth));
    const bool all = params.assignment == TechAssignment::All ||
                     (k == params.node_count && params.sink_has_all_technologies);
    if (all) {
      for (std::size_t t = 0; t < tech_count; ++t) n.technologies.push_back(static_cast<TechId>(t));
    } else {
      while (n.technologies.empty())
        for (std::size_t t = 0; t < tech_count; ++t)
          if (rng.bernoulli(0.5)) n.technologies.push_back(static_cast<TechId>(t));
    }
    nodes.push_back(std::move(n));
  }

  ObstacleField obstacles;
  auto place = [&](ObstacleOrientation o) {
    const Vec3 centre(rng.uniform(0, params.width), rng.uniform(0, params.length), rng.uniform(0, params.depth));
    const double len = rng.uniform(params.obstacle_min_length, params.obstacle_max_length);
    const double angle = rng.uniform(0, std::numbers::pi);
    const Vec3 dir = o == ObstacleOrientation::Horizontal ? Vec3(std::cos(angle), std::sin(angle), 0)
                                                          : Vec3(std::cos(angle), 0, std::sin(angle));
    obstacles.push_back({centre - 0.5 * len * dir, centre + 0.5 * len * dir, o});
  };
  for (int k = 0; k < params.horizontal_obstacles; ++k) place(ObstacleOrientation::Horizontal);
  for (int k = 0; k < params.vertical_obstacles; ++k) place(ObstacleOrientation::Vertical);

  const auto sink = static_cast<NodeId>(params.node_count);
  try {
    return {build_graph(params.technologies, std::move(nodes), sink, std::move(obstacles)), {}};
  } catch (const TopologyError& e) {
    return {std::nullopt, e.what()};
  }
}

TopologyGraph generate_connected_topology(const ScenarioParams& params, std::uint64_t seed) {
  std::string last;
  for (int attempt = 0; attempt < std::max(1, params.max_attempts); ++attempt) {
    auto r = generate_random_topology(params, attempt == 0 ? seed : derive_seed(seed, {0x70706f, std::uint64_t(attempt)}));
    if (r.graph) return std::move(*r.graph);
    last = r.diagnostic;
  }
  throw TopologyError("no connected topology after " + std::to_string(params.max_attempts) +
                      " attempts: " + last);
}

int count_disjoint_routes_full(const TopologyGraph& graph, NodeId i) {
  if (i == graph.sink) throw TopologyError("disjoint routes requested for the sink itself");
  if (graph.upstream_of(i).empty()) return 0;
  const auto n = graph.size();
  // vertex 2k = k_in, 2k+1 = k_out
  std::vector<FlowEdge> edges;
  for (std::size_t k = 0; k < n; ++k) edges.push_back({2 * k, 2 * k + 1, 1});
  for (const auto& [l, y] : graph.upstream)
    for (auto m : y) edges.push_back({2 * graph.index_of(l) + 1, 2 * graph.index_of(m), 1});
  return static_cast<int>(max_flow(2 * n, edges, 2 * graph.index_of(i) + 1, 2 * graph.index_of(graph.sink)));
}

int estimate_disjoint_routes_onehop(NodeId i, NodeId j, std::span<const NodeId> upstream_j,
                                    std::span<const NodeId> neighbors_i, const NeighborMap& upstream) {
  std::set<NodeId> candidates(neighbors_i.begin(), neighbors_i.end());
  candidates.insert(upstream_j.begin(), upstream_j.end());
  const std::vector<NodeId> only_i{i}, only_j{j};
  const std::vector<NodeId> both{std::min(i, j), std::max(i, j)};
  int correction = 0;
  for (auto w : candidates) {
    auto it = upstream.find(w);
    if (it == upstream.end()) continue;
    const auto& y = it->second;
    if (y == only_i || y == only_j || y == both) ++correction;
  }
  return std::max(0, static_cast<int>(upstream_j.size()) - correction);
}

}  // namespace omr
