#pragma once

#include "omr/types.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace omr {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ObstacleOrientation { Horizontal, Vertical };

/// A straight wall segment. Horizontal walls block in the x-y projection,
/// vertical walls in the x-z projection.
struct ObstacleSegment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  ObstacleOrientation orientation = ObstacleOrientation::Horizontal;
};

using ObstacleField = std::vector<ObstacleSegment>;

struct NodeSpec {
  NodeId id = 0;
  Vec3 position = Vec3::Zero();
  std::vector<TechId> technologies;  // sorted, unique

  bool has(TechId t) const;
};

/// Undirected link, stored with a < b.
struct Link {
  NodeId a = 0;
  NodeId b = 0;
  TechId tech = 0;
  auto operator<=>(const Link&) const = default;
};

using NeighborMap = std::map<NodeId, std::vector<NodeId>>;

struct TopologyGraph {
  TechnologyCatalog technologies;
  std::vector<NodeSpec> nodes;  // sorted by id
  std::vector<Link> links;      // sorted
  ObstacleField obstacles;
  NodeId sink = 0;
  NeighborMap upstream;       // Y_i, ascending ids
  NeighborMap all_neighbors;  // one-hop neighbours over any technology

  std::size_t size() const { return nodes.size(); }
  std::size_t index_of(NodeId id) const;
  const NodeSpec& node(NodeId id) const { return nodes[index_of(id)]; }
  bool contains(NodeId id) const;

  const std::vector<NodeId>& upstream_of(NodeId id) const;
  const std::vector<NodeId>& neighbors_of(NodeId id) const;
  bool is_upstream(NodeId i, NodeId j) const;  // j in Y_i
  std::vector<NodeId> downstream_of(NodeId j) const;
  bool has_link(NodeId a, NodeId b, TechId t) const;
  /// Technologies usable on the link a-b, ascending id.
  std::vector<TechId> link_technologies(NodeId a, NodeId b) const;
  /// Nodes sharing a link with `n` on technology `t`.
  std::vector<NodeId> tech_neighbors(NodeId n, TechId t) const;
  double distance(NodeId a, NodeId b) const;
  /// Hop count to the sink over the union of all links.
  std::map<NodeId, int> hop_counts() const;
  std::optional<TechId> find_technology(const std::string& name) const;
};

/// Low/mid/high-frequency acoustic modems, with absorption calibrated by
/// calibrate_absorption().
TechnologyCatalog default_catalog();

/// 2-D closed-segment intersection test.
bool segments_intersect_2d(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                           const Eigen::Vector2d& q1, const Eigen::Vector2d& q2);

bool line_of_sight_blocked(const Vec3& a, const Vec3& b, const ObstacleSegment& obstacle);

/// Link (a,b,t) iff both hold t, distance <= max_range(t), and no obstacle
/// cuts the straight segment a-b.
std::vector<Link> derive_links(std::span<const NodeSpec> nodes, const TechnologyCatalog& technologies,
                               const ObstacleField& obstacles);

NeighborMap neighbors_from_links(std::span<const NodeSpec> nodes, std::span<const Link> links);

/// Upstream sets from a breadth-first hop count rooted at the sink: strictly
/// closer neighbours, plus equal-hop neighbours with a larger id.
NeighborMap discover_routes(std::span<const NodeSpec> nodes, std::span<const Link> links, NodeId sink);

/// True when the orientation i -> Y_i admits a topological order.
bool is_acyclic(const NeighborMap& upstream);

/// Assembles and validates a graph. Links and upstream sets are derived when
/// not supplied.
TopologyGraph build_graph(TechnologyCatalog technologies, std::vector<NodeSpec> nodes, NodeId sink,
                          ObstacleField obstacles = {},
                          std::optional<std::vector<Link>> links = std::nullopt,
                          std::optional<NeighborMap> upstream = std::nullopt);

enum class TechAssignment {
  UniformSubset,  // uniformly random non-empty subset of the catalog
  All,
};

struct ScenarioParams {
  int node_count = 10;
  double width = 500.0;   // m
  double length = 500.0;  // m
  double depth = 100.0;   // m
  int horizontal_obstacles = 4;
  int vertical_obstacles = 1;
  double obstacle_min_length = 10.0;
  double obstacle_max_length = 50.0;
  TechnologyCatalog technologies = default_catalog();
  TechAssignment assignment = TechAssignment::UniformSubset;
  bool sink_has_all_technologies = true;
  int max_attempts = 100;
};

struct GenerationResult {
  std::optional<TopologyGraph> graph;
  std::string diagnostic;  // set when graph is empty
};

/// One draw of the random scenario. The last node is the sink.
GenerationResult generate_random_topology(const ScenarioParams& params, std::uint64_t seed);

/// Resamples (with derived seeds) until every node reaches the sink; throws
/// TopologyError after params.max_attempts draws.
TopologyGraph generate_connected_topology(const ScenarioParams& params, std::uint64_t seed);

/// Number of node-disjoint upstream routes from i to the sink, by max-flow on
/// the node-split graph.
int count_disjoint_routes_full(const TopologyGraph& graph, NodeId i);

/// One-hop estimate: |Y_j| minus one for every w in (neighbours(i) u Y_j) whose
/// upstream set is {i}, {j} or {i,j}; clamped at zero.
int estimate_disjoint_routes_onehop(NodeId i, NodeId j, std::span<const NodeId> upstream_j,
                                    std::span<const NodeId> neighbors_i, const NeighborMap& upstream);

}  // namespace omr
