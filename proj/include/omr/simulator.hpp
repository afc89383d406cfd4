#pragma once

#include "omr/allocator.hpp"
#include "omr/fragment.hpp"
#include "omr/topology.hpp"
#include "omr/trace.hpp"

#include <cstdint>
#include <vector>

namespace omr {

/// Poisson arrivals with mean inter-arrival 60/lambda seconds and sizes
/// uniform on whole bytes in (0, max_bits]. Empty for the sink or a
/// non-positive horizon.
std::vector<Message> generate_traffic(NodeId node, double lambda_per_min, double horizon, Bits max_bits,
                                      std::uint64_t seed);

struct SimConfig {
  TopologyGraph graph;
  Protocol protocol = Protocol::OmrFF;
  Mac mac = Mac::Ideal;
  double lambda_per_min = 3.0;
  double t_net = 600.0;
  double period_u = 60.0;
  Bits max_message_bits = 64000;
  double sound_speed = 1500.0;
  Bits ack_bits = 64;
  double ack_timeout_factor = 2.0;
  int retry_cap = -1;
  double serve_retry = 1.0;  // s, after an all-zero allocation
  /// Immediate MAC: a node that finds a band busy waits U[0, w] with w this
  /// many maximum-datagram airtimes of the band. Zero waits for the band to
  /// clear and sends at once.
  double backoff_frames = 1.0;
  FairShareIndex fair_share_index = FairShareIndex::Downstream;
  /// Flooding relays also drop copies of byte ranges they already forwarded.
  bool flood_dedup = false;
  /// Flooding broadcasts wait for an ack from any receiver and are requeued on
  /// timeout. Off: a broadcast is done once it leaves the radio.
  bool flood_acks = false;
  std::uint64_t config_hash = 0;
};

struct SimStats {
  std::uint64_t events = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t collisions = 0;
};

struct SimResult {
  TraceLog trace;
  SimStats stats;
};

/// Runs the event loop to cfg.t_net. A pure function of (cfg, seed).
SimResult run_simulation(const SimConfig& cfg, std::uint64_t seed);

}  // namespace omr
