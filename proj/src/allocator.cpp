#include "omr/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace omr {

Bits CapacityTable::capacity(NodeId node, TechId tech) const {
  auto it = entries.find({node, tech});
  return it == entries.end() ? 0 : it->second;
}

CapacityTable CapacityTable::from_graph(const TopologyGraph& graph, double period_u) {
  CapacityTable table;
  table.period_u = period_u;
  for (const auto& n : graph.nodes)
    for (auto t : n.technologies)
      table.entries[{n.id, t}] = floor_to_bytes(static_cast<Bits>(graph.technologies[t].bit_rate * period_u));
  return table;
}

double FairShareTable::get(NodeId relay, NodeId downstream) const {
  auto it = entries.find({relay, downstream});
  return it == entries.end() ? 0.0 : it->second;
}

Bits Allocation::total() const {
  Bits sum = 0;
  for (const auto& e : entries) sum += e.bits;
  return sum;
}

Bits Allocation::to(NodeId neighbor) const {
  Bits sum = 0;
  for (const auto& e : entries)
    if (e.neighbor == neighbor) sum += e.bits;
  return sum;
}

Bits Allocation::get(NodeId neighbor, TechId tech) const {
  for (const auto& e : entries)
    if (e.neighbor == neighbor && e.tech == tech) return e.bits;
  return 0;
}

double fair_share_from_routes(double own_routes, std::span<const double> index_routes, bool sole_relay) {
  if (sole_relay) return 1.0;
  const double sum = std::accumulate(index_routes.begin(), index_routes.end(), 0.0);
  const double own_tilde = sum - own_routes;
  if (own_tilde == 0.0) return 1.0;
  double denom = 0.0;
  for (double l : index_routes) denom += sum - l;
  if (denom <= 0.0) return 1.0;
  return std::clamp(own_tilde / denom, 0.0, 1.0);
}

FairShareCalculator::FairShareCalculator(const TopologyGraph& graph, Mode mode, FairShareIndex index)
    : graph_(&graph), mode_(mode), index_(index) {
  for (const auto& n : graph.nodes) {
    if (n.id == graph.sink) continue;
    if (mode == Mode::FF) {
      full_routes_[n.id] = count_disjoint_routes_full(graph, n.id);
    } else {
      for (auto j : graph.neighbors_of(n.id)) {
        const auto& yj = graph.upstream_of(j);
        onehop_routes_[{n.id, j}] =
            estimate_disjoint_routes_onehop(n.id, j, yj, graph.neighbors_of(n.id), graph.upstream);
      }
    }
  }
}

double FairShareCalculator::route_count(NodeId l, NodeId relay) const {
  const auto& g = *graph_;
  if (l == g.sink) return 1.0;
  if (mode_ == Mode::FF) return full_routes_.at(l);
  const auto& yj = g.upstream_of(relay);
  if (std::binary_search(yj.begin(), yj.end(), g.sink)) return 1.0;
  auto it = onehop_routes_.find({l, relay});
  if (it != onehop_routes_.end()) return it->second;
  return estimate_disjoint_routes_onehop(l, relay, yj, g.neighbors_of(l), g.upstream);
}

double FairShareCalculator::share(NodeId relay, NodeId downstream, const PendingPredicate& pending) const {
  const auto& g = *graph_;
  if (relay == g.sink) return 1.0;
  if (!pending(downstream)) return 0.0;
  const auto& yi = g.upstream_of(downstream);
  if (yi.size() == 1 && yi.front() == relay) return 1.0;

  std::vector<double> routes;
  if (index_ == FairShareIndex::Downstream) {
    for (auto l : g.downstream_of(relay))
      if (pending(l)) routes.push_back(route_count(l, relay));
  } else {
    for (auto l : g.upstream_of(relay)) routes.push_back(route_count(l, relay));
  }
  if (routes.empty()) return 0.0;
  return fair_share_from_routes(route_count(downstream, relay), routes, false);
}

double compute_fair_share(const TopologyGraph& graph, NodeId relay, NodeId downstream, Mode mode,
                          const PendingPredicate& pending, FairShareIndex index) {
  return FairShareCalculator(graph, mode, index).share(relay, downstream, pending);
}

std::vector<AllocationSlot> tie_break_order(const AllocationProblem& problem) {
  auto ordered = problem.slots;
  auto rank_of = [&](NodeId n) {
    auto it = problem.rank.find(n);
    return it == problem.rank.end() ? 0 : it->second;
  };
  std::stable_sort(ordered.begin(), ordered.end(), [&](const AllocationSlot& a, const AllocationSlot& b) {
    if (a.bit_rate != b.bit_rate) return a.bit_rate > b.bit_rate;
    if (rank_of(a.neighbor) != rank_of(b.neighbor)) return rank_of(a.neighbor) < rank_of(b.neighbor);
    if (a.neighbor != b.neighbor) return a.neighbor < b.neighbor;
    return a.tech < b.tech;
  });
  return ordered;
}

LinearProgram<double> to_linear_program(const AllocationProblem& problem, std::span<const AllocationSlot> ordered,
                                        bool weighted) {
  const auto n = static_cast<Eigen::Index>(ordered.size());
  std::vector<NodeId> limited;
  for (const auto& [j, limit] : problem.neighbor_limits)
    if (limit < kUnbounded) limited.push_back(j);
  const auto m = 1 + static_cast<Eigen::Index>(limited.size()) + n;

  LinearProgram<double> lp;
  lp.objective.resize(n);
  lp.constraints = Eigen::MatrixXd::Zero(m, n);
  lp.bounds.resize(m);
  for (Eigen::Index v = 0; v < n; ++v)
    lp.objective(v) = weighted ? 1.0 + 1e-3 * static_cast<double>(n - v) : 1.0;

  lp.constraints.row(0).setOnes();
  lp.bounds(0) = static_cast<double>(floor_to_bytes(problem.backlog));
  for (std::size_t r = 0; r < limited.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(1 + r);
    for (Eigen::Index v = 0; v < n; ++v)
      if (ordered[std::size_t(v)].neighbor == limited[r]) lp.constraints(row, v) = 1.0;
    lp.bounds(row) = static_cast<double>(floor_to_bytes(problem.neighbor_limits.at(limited[r])));
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto row = 1 + static_cast<Eigen::Index>(limited.size()) + v;
    lp.constraints(row, v) = 1.0;
    lp.bounds(row) = static_cast<double>(floor_to_bytes(ordered[std::size_t(v)].cap));
  }
  return lp;
}

std::string check_allocation(const AllocationProblem& problem, const Allocation& allocation) {
  std::ostringstream err;
  if (allocation.total() > problem.backlog) err << "total " << allocation.total() << " exceeds backlog " << problem.backlog << "; ";
  for (const auto& [j, limit] : problem.neighbor_limits)
    if (allocation.to(j) > limit) err << "neighbour " << j << " gets " << allocation.to(j) << " > limit " << limit << "; ";
  for (const auto& e : allocation.entries) {
    if (e.bits < 0) err << "negative entry; ";
    auto it = std::find_if(problem.slots.begin(), problem.slots.end(), [&](const AllocationSlot& s) {
      return s.neighbor == e.neighbor && s.tech == e.tech;
    });
    if (it == problem.slots.end()) {
      if (e.bits > 0) err << "unknown slot (" << e.neighbor << "," << int(e.tech) << "); ";
    } else if (e.bits > it->cap) {
      err << "slot (" << e.neighbor << "," << int(e.tech) << ") " << e.bits << " > cap " << it->cap << "; ";
    }
  }
  return err.str();
}

Allocation solve_allocation_problem(const AllocationProblem& problem, double timestamp) {
  Allocation out;
  out.timestamp = timestamp;
  const auto ordered = tie_break_order(problem);
  for (const auto& s : ordered) out.entries.push_back({s.neighbor, s.tech, 0});
  if (floor_to_bytes(problem.backlog) == 0 || ordered.empty()) return out;

  const auto lp = to_linear_program(problem, ordered, true);
  const auto solution = solve_lp(lp);
  for (std::size_t v = 0; v < ordered.size(); ++v) {
    const double x = solution.x(static_cast<Eigen::Index>(v));
    out.entries[v].bits = std::max<Bits>(0, std::llround(x / 8.0) * 8);
  }
  if (auto err = check_allocation(problem, out); !err.empty())
    throw std::logic_error("allocation violates its constraints: " + err);
  return out;
}

AllocationProblem build_allocation_problem(NodeId i, Bits backlog, std::span<const NodeId> upstream,
                                           const std::map<NodeId, std::vector<TechId>>& technologies,
                                           const CapacityTable& capacities, const FairShareTable& fair_shares,
                                           const std::map<NodeId, Bits>& delta, const NeighborRank& rank,
                                           const std::map<TechId, double>& bit_rates) {
  AllocationProblem problem;
  problem.backlog = std::max<Bits>(0, backlog);
  problem.rank = rank;
  for (auto j : upstream) {
    auto techs = technologies.find(j);
    if (techs == technologies.end()) continue;
    const double share = fair_shares.get(j, i);
    for (auto t : techs->second) {
      const Bits c = capacities.capacity(i, t);
      auto rate = bit_rates.find(t);
      const double r = rate != bit_rates.end() ? rate->second : static_cast<double>(c) / capacities.period_u;
      problem.slots.push_back({j, t, r, floor_to_bytes(static_cast<Bits>(std::floor(static_cast<double>(c) * share)))});
    }
    if (auto d = delta.find(j); d != delta.end() && d->second < kUnbounded)
      problem.neighbor_limits[j] = std::max<Bits>(0, d->second);
  }
  return problem;
}

Allocation solve_allocation(NodeId i, Bits backlog, std::span<const NodeId> upstream,
                            const std::map<NodeId, std::vector<TechId>>& technologies,
                            const CapacityTable& capacities, const FairShareTable& fair_shares,
                            const std::map<NodeId, Bits>& delta, double timestamp, const NeighborRank& rank,
                            const std::map<TechId, double>& bit_rates) {
  return solve_allocation_problem(
      build_allocation_problem(i, backlog, upstream, technologies, capacities, fair_shares, delta, rank, bit_rates),
      timestamp);
}

AllocationProblem build_neighbor_problem(const NeighborView& view, Bits backlog,
                                         const std::map<TechId, double>& bit_rates) {
  AllocationProblem problem;
  problem.backlog = std::max<Bits>(0, backlog);
  for (auto k : view.upstream) {
    auto techs = view.technologies.find(k);
    if (techs == view.technologies.end()) continue;
    auto f = view.fair_shares.find(k);
    const double share = f == view.fair_shares.end() ? 0.0 : f->second;
    for (auto t : techs->second) {
      auto c = view.capacities.find(t);
      const Bits cap = c == view.capacities.end() ? 0 : c->second;
      auto rate = bit_rates.find(t);
      const double r = rate != bit_rates.end() ? rate->second : static_cast<double>(cap);
      problem.slots.push_back({k, t, r, floor_to_bytes(static_cast<Bits>(std::floor(static_cast<double>(cap) * share)))});
    }
  }
  return problem;
}

Allocation estimate_neighbor_allocation(const NeighborView& view, Bits backlog,
                                        const std::map<TechId, double>& bit_rates) {
  return solve_allocation_problem(build_neighbor_problem(view, backlog, bit_rates), view.report_time);
}

Bits compute_delta(const NeighborView& view, const Allocation& estimate) {
  if (view.is_sink || view.upstream.empty()) return kUnbounded;
  Bits delta = 0;
  for (auto k : view.upstream) {
    auto techs = view.technologies.find(k);
    if (techs == view.technologies.end()) continue;
    for (auto t : techs->second) {
      auto c = view.capacities.find(t);
      const Bits cap = c == view.capacities.end() ? 0 : c->second;
      delta += std::max<Bits>(0, cap - estimate.get(k, t));
    }
  }
  return delta;
}

Bits update_neighbor_backlog(Bits last_report, Bits estimated_sends) {
  return std::max<Bits>(0, last_report - std::max<Bits>(0, estimated_sends));
}

double control_overhead_bits(Mode mode, int node_count) {
  const double n = node_count;
  if (mode == Mode::PF) return 8.0 * n;
  return n * n + n * n * std::log2(n) + 8.0 * n;
}

}  // namespace omr
