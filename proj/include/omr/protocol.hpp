#pragma once

#include "omr/allocator.hpp"
#include "omr/fragment.hpp"
#include "omr/queue.hpp"
#include "omr/topology.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace omr {

/// Run-wide, read-only protocol knowledge shared by all nodes.
struct ProtocolContext {
  const TopologyGraph* graph = nullptr;
  Protocol protocol = Protocol::OmrFF;
  double period_u = 60.0;
  int retry_cap = -1;  // negative: retry forever
  bool flood_dedup = false;
  FairShareTable shares;          // F_j(i) for every i and j in Y_i, as node i computes it
  std::map<NodeId, int> hops;     // tie-break rank
  std::map<TechId, double> bit_rates;

  Mode mode() const { return protocol == Protocol::OmrPF ? Mode::PF : Mode::FF; }
  bool omr() const { return protocol != Protocol::Flooding; }
  Bits max_datagram(TechId t) const { return graph->technologies[t].max_datagram_bits; }
};

ProtocolContext make_protocol_context(const TopologyGraph& graph, Protocol protocol, double period_u,
                                      FairShareIndex index = FairShareIndex::Downstream);

/// Last state decoded from a neighbour's transmissions.
struct NeighborReport {
  bool has_backlog = false;
  Bits backlog = 0;
  double time = 0.0;
  std::optional<std::map<NodeId, double>> shares;  // F_k(neighbour)
};

struct NodeState {
  NodeId id = 0;
  bool is_sink = false;
  NodeQueue queue;                          // OMR service queue
  std::map<TechId, NodeQueue> flood_queues;  // flooding: one broadcast queue per technology
  Bits in_flight = 0;
  std::map<TechId, Bits> budget;  // remaining C_i(t,u) in the current period
  std::map<NodeId, NeighborReport> reports;
  std::optional<std::vector<std::pair<NodeId, std::uint8_t>>> last_shares_sent;
  ReassemblyBuffer reassembly;
  std::map<std::pair<NodeId, std::uint32_t>, IntervalSet> flood_seen;

  /// P_i: queued plus unacknowledged bits.
  Bits backlog() const;
};

NodeState make_node_state(const ProtocolContext& ctx, NodeId id);
void reset_budgets(const ProtocolContext& ctx, NodeState& node);

struct Datagram {
  NodeId sender = 0;
  NodeId receiver = kBroadcast;
  TechId tech = 0;
  std::vector<Fragment> fragments;

  Bits payload_bits() const;
  Bits wire_bits() const;
};

struct ProblemAudit {
  double time = 0.0;
  NodeId node = 0;
  NodeId neighbor = 0;  // estimates only
  AllocationProblem problem;
  Allocation allocation;
};

struct ServeResult {
  std::vector<Datagram> datagrams;  // grouped by technology, tie-break order within
  std::optional<ProblemAudit> allocation;
  std::vector<ProblemAudit> estimates;
};

/// Builds what node `node` knows about upstream neighbour j at time `now`.
NeighborView neighbor_view(const ProtocolContext& ctx, const NodeState& node, NodeId j);

/// Backlog of j extrapolated to `now` from its last report.
Bits extrapolate_backlog(const ProtocolContext& ctx, const NeighborView& view, double now);

/// Solves the allocation and slices the queue head-first into datagrams.
ServeResult omr_serve(const ProtocolContext& ctx, NodeState& node, double now);

/// Next broadcast datagram on technology t, if any.
std::optional<Datagram> flooding_serve(const ProtocolContext& ctx, NodeState& node, TechId t);

void enqueue_message(const ProtocolContext& ctx, NodeState& node, const Message& m);

enum class ReceiveKind { Enqueued, AtSink, SuppressedLoop, SuppressedCovered, SuppressedDuplicate };

struct ReceiveOutcome {
  ReceiveKind kind = ReceiveKind::Enqueued;
  Bits queued_bits = 0;
  bool completed = false;  // sink only
};

ReceiveOutcome on_receive(const ProtocolContext& ctx, NodeState& node, const Fragment& f, double now);

/// Decodes piggybacked state sent by `from` into the node's report table.
void absorb_piggyback(const ProtocolContext& ctx, NodeState& node, NodeId from, const Piggyback& pb, double now);

struct AckOutcome {
  Bits acked_bits = 0;
  Bits requeued_bits = 0;
  Bits dropped_bits = 0;
};

AckOutcome on_ack(const ProtocolContext& ctx, NodeState& node, const Datagram& d, const std::vector<bool>& ok);
AckOutcome on_ack_timeout(const ProtocolContext& ctx, NodeState& node, const Datagram& d);

}  // namespace omr
