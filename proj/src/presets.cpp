#include "omr/presets.hpp"

#include <charconv>

namespace omr {

namespace {

constexpr TechId kLF = 0;
constexpr TechId kMF = 1;

NodeSpec spec(NodeId id, double x, double y, std::vector<TechId> techs) {
  NodeSpec n;
  n.id = id;
  n.position = Vec3(x, y, 50.0);
  n.technologies = std::move(techs);
  return n;
}

TopologyGraph fig1() {
  std::vector<NodeSpec> nodes = {
      spec(1, 200, 600, {kLF}),      spec(2, -150, 200, {kLF, kMF}), spec(3, 150, 200, {kLF, kMF}),
      spec(4, -300, 500, {kLF}),     spec(5, 0, 400, {kLF, kMF}),    spec(6, 0, 0, {kLF, kMF}),
  };
  std::vector<Link> links = {
      {1, 5, kLF}, {4, 5, kLF}, {2, 4, kLF}, {2, 5, kMF}, {3, 5, kLF},
      {3, 5, kMF}, {3, 6, kLF}, {3, 6, kMF}, {2, 6, kLF},
  };
  NeighborMap y = {{1, {5}}, {4, {2, 5}}, {5, {2, 3}}, {2, {6}}, {3, {6}}, {6, {}}};
  return build_graph(default_catalog(), std::move(nodes), 6, {}, std::move(links), std::move(y));
}

TopologyGraph diamond() {
  std::vector<NodeSpec> nodes = {
      spec(1, 0, 0, {kLF}), spec(2, 500, 500, {kLF}), spec(3, 500, -500, {kLF}), spec(4, 1000, 0, {kLF})};
  std::vector<Link> links = {{1, 2, kLF}, {1, 3, kLF}, {2, 4, kLF}, {3, 4, kLF}};
  return build_graph(default_catalog(), std::move(nodes), 4, {}, std::move(links));
}

TopologyGraph chain(int k) {
  std::vector<NodeSpec> nodes;
  std::vector<Link> links;
  for (int n = 1; n <= k; ++n) {
    nodes.push_back(spec(static_cast<NodeId>(n), 1000.0 * (n - 1), 0, {kLF}));
    if (n > 1) links.push_back({static_cast<NodeId>(n - 1), static_cast<NodeId>(n), kLF});
  }
  return build_graph(default_catalog(), std::move(nodes), static_cast<NodeId>(k), {}, std::move(links));
}

std::string unknown(const std::string& name) {
  std::string msg = "unknown preset '" + name + "' (valid:";
  for (const auto& p : preset_names()) msg += " " + p;
  return msg + ")";
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "diamond", "chain-k", "paper-random"}; }

bool preset_is_random(const std::string& name) { return name == "paper-random"; }

TopologyGraph make_preset(const std::string& name, std::uint64_t seed) {
  if (name == "fig1") return fig1();
  if (name == "diamond") return diamond();
  if (name == "paper-random") return generate_connected_topology(ScenarioParams{}, seed);
  if (name.rfind("chain-", 0) == 0) {
    int k = 0;
    const char* first = name.data() + 6;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc() || ptr != last || k < 2 || k > 255) throw ConfigError(unknown(name));
    return chain(k);
  }
  throw ConfigError(unknown(name));
}

}  // namespace omr
