#pragma once

#include "omr/allocator.hpp"
#include "omr/simulator.hpp"
#include "omr/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace omr {

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;

  std::size_t size() const { return static_cast<std::size_t>(last - first + 1); }
};

/// "n" or "a..b" with a <= b.
SeedRange parse_seed_range(const std::string& text);

struct PresetSource {
  std::string name;
};
struct GenerateSource {
  ScenarioParams params;
};
struct GraphSource {
  TopologyGraph graph;
};
using TopologySource = std::variant<PresetSource, GenerateSource, GraphSource>;

struct RunConfig {
  int version = 1;
  TopologySource topology = PresetSource{"fig1"};
  std::vector<Protocol> protocols = {Protocol::OmrFF};
  std::vector<Mac> macs = {Mac::Ideal};
  double lambda_per_min = 3.0;
  double t_net = 600.0;
  double period_u = 60.0;
  Bits max_message_bits = 64000;
  double sound_speed = 1500.0;
  double ack_timeout_factor = 2.0;
  double backoff_frames = 1.0;
  int retry_cap = -1;
  FairShareIndex fair_share_index = FairShareIndex::Downstream;
  bool flood_dedup = false;
  bool flood_acks = false;
  std::map<std::string, Bits> max_datagram_bits;  // per technology name
  SeedRange seeds;
  std::string out = "out";
  int workers = 1;

  /// Canonical JSON of every field that influences results (out and workers
  /// excluded) and its FNV-1a hash.
  std::string canonical;
  std::uint64_t hash = 0;
};

/// Parses and validates a JSON document. Errors carry the offending field
/// path, e.g. "topology.generate.node_count: expected an integer".
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Recomputes canonical and hash after programmatic edits.
void refresh_hash(RunConfig& cfg);

/// The topology used by one seed. Fixed sources ignore the seed.
TopologyGraph topology_for_seed(const RunConfig& cfg, std::uint64_t seed);

/// The graph as a document accepted under topology.graph.
std::string dump_graph(const TopologyGraph& graph);

SimConfig make_sim_config(const RunConfig& cfg, TopologyGraph graph, Protocol protocol, Mac mac);

}  // namespace omr
