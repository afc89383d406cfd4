#pragma once

#include "omr/lp.hpp"
#include "omr/topology.hpp"
#include "omr/types.hpp"

#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace omr {

/// C_i(t,u): bits node i can push through technology t in one period u.
struct CapacityTable {
  double period_u = 60.0;
  std::map<std::pair<NodeId, TechId>, Bits> entries;

  Bits capacity(NodeId node, TechId tech) const;
  static CapacityTable from_graph(const TopologyGraph& graph, double period_u);
};

/// F_j(i), keyed by (relay j, downstream node i).
struct FairShareTable {
  std::map<std::pair<NodeId, NodeId>, double> entries;

  double get(NodeId relay, NodeId downstream) const;
  void set(NodeId relay, NodeId downstream, double share) { entries[{relay, downstream}] = share; }
};

struct AllocationEntry {
  NodeId neighbor = 0;
  TechId tech = 0;
  Bits bits = 0;
};

/// R-hat_i(j,t,tau) for one scheduling decision; entries follow the tie-break order.
struct Allocation {
  double timestamp = 0.0;
  std::vector<AllocationEntry> entries;

  Bits total() const;
  Bits to(NodeId neighbor) const;
  Bits get(NodeId neighbor, TechId tech) const;
  bool empty() const { return total() == 0; }
};

/// Which neighbour set the fair-share sums run over.
enum class FairShareIndex {
  Downstream,       // j's downstream neighbours with pending traffic (default)
  UpstreamLiteral,  // Y_j, taken literally
};

using PendingPredicate = std::function<bool(NodeId)>;

/// F_j(i) from route counts: `own_routes` is L_{i,j}, `index_routes` holds
/// L_{l,j} for every l in the summation set. `sole_relay` is Y_i == {j}.
double fair_share_from_routes(double own_routes, std::span<const double> index_routes, bool sole_relay);

/// F_j(i) for one (relay, downstream) pair. Route counts are cached per graph.
class FairShareCalculator {
 public:
  FairShareCalculator(const TopologyGraph& graph, Mode mode,
                      FairShareIndex index = FairShareIndex::Downstream);

  double share(NodeId relay, NodeId downstream, const PendingPredicate& pending) const;
  /// L_{l,j} as used for relay j.
  double route_count(NodeId l, NodeId relay) const;

  Mode mode() const { return mode_; }
  const TopologyGraph& graph() const { return *graph_; }

 private:
  const TopologyGraph* graph_;
  Mode mode_;
  FairShareIndex index_;
  std::map<NodeId, int> full_routes_;                      // FF: L_l (first hop unconstrained)
  std::map<std::pair<NodeId, NodeId>, int> onehop_routes_;  // PF: (l, j)
};

double compute_fair_share(const TopologyGraph& graph, NodeId relay, NodeId downstream, Mode mode,
                          const PendingPredicate& pending,
                          FairShareIndex index = FairShareIndex::Downstream);

/// Everything node i knows about upstream neighbour j.
struct NeighborView {
  NodeId neighbor = 0;
  Bits reported_backlog = 0;  // P_j(tau')
  double report_time = 0.0;   // tau'
  bool has_report = false;
  std::vector<NodeId> upstream;                        // Y_j
  std::map<NodeId, double> fair_shares;                // F_k(j), k in Y_j
  std::map<TechId, Bits> capacities;                   // C_j(t,u)
  std::map<NodeId, std::vector<TechId>> technologies;  // T_j(k,tau)
  bool is_sink = false;
};

/// Neighbour ranking used after bit rate in the tie-break (lower first).
using NeighborRank = std::map<NodeId, int>;

/// One decision variable of an allocation LP.
struct AllocationSlot {
  NodeId neighbor = 0;
  TechId tech = 0;
  double bit_rate = 0.0;
  Bits cap = 0;
};

/// Node or neighbour allocation in generic form: maximise total bits subject to a backlog
/// budget, per-neighbour aggregate limits and per-slot caps.
struct AllocationProblem {
  Bits backlog = 0;
  std::vector<AllocationSlot> slots;
  std::map<NodeId, Bits> neighbor_limits;  // absent = unbounded
  NeighborRank rank;
};

/// Slots in tie-break order: descending bit rate, then rank, then neighbour id.
std::vector<AllocationSlot> tie_break_order(const AllocationProblem& problem);

LinearProgram<double> to_linear_program(const AllocationProblem& problem,
                                        std::span<const AllocationSlot> ordered, bool weighted);

/// Solves through the simplex with strictly decreasing tie-break weights and
/// quantises to whole bytes. Throws std::logic_error if the result violates
/// a constraint.
Allocation solve_allocation_problem(const AllocationProblem& problem, double timestamp = 0.0);

/// The problem behind solve_allocation(), exposed for auditing.
AllocationProblem build_allocation_problem(NodeId i, Bits backlog, std::span<const NodeId> upstream,
                                           const std::map<NodeId, std::vector<TechId>>& technologies,
                                           const CapacityTable& capacities, const FairShareTable& fair_shares,
                                           const std::map<NodeId, Bits>& delta, const NeighborRank& rank = {},
                                           const std::map<TechId, double>& bit_rates = {});

/// Node i's split of its backlog over (upstream neighbour, technology).
Allocation solve_allocation(NodeId i, Bits backlog, std::span<const NodeId> upstream,
                            const std::map<NodeId, std::vector<TechId>>& technologies,
                            const CapacityTable& capacities, const FairShareTable& fair_shares,
                            const std::map<NodeId, Bits>& delta, double timestamp = 0.0,
                            const NeighborRank& rank = {}, const std::map<TechId, double>& bit_rates = {});

AllocationProblem build_neighbor_problem(const NeighborView& view, Bits backlog,
                                         const std::map<TechId, double>& bit_rates = {});

/// Node i's estimate of what j sends to its own upstream neighbours.
Allocation estimate_neighbor_allocation(const NeighborView& view, Bits backlog,
                                        const std::map<TechId, double>& bit_rates = {});

/// Delta_j: j's spare upstream capacity after the estimate. Returns kUnbounded for the sink (empty Y_j).
Bits compute_delta(const NeighborView& view, const Allocation& estimate);

/// P_j extrapolated from the last report minus estimated sends, clamped at zero.
Bits update_neighbor_backlog(Bits last_report, Bits estimated_sends);

/// Per-run topology/state signalling cost in bits.
double control_overhead_bits(Mode mode, int node_count);

/// Checks the allocation constraints: returns an empty string when satisfied.
std::string check_allocation(const AllocationProblem& problem, const Allocation& allocation);

}  // namespace omr
