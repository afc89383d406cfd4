#include "omr/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace omr {

namespace {

bool on_path(const Fragment& f, NodeId id) { return std::find(f.path.begin(), f.path.end(), id) != f.path.end(); }

Fragment forwarded_copy(const Fragment& f, NodeId self) {
  Fragment copy = f;
  copy.path.push_back(self);
  copy.piggyback = {};
  copy.attempts = 0;
  return copy;
}

Bits period_capacity(const ProtocolContext& ctx, TechId t) {
  return floor_to_bytes(static_cast<Bits>(ctx.graph->technologies[t].bit_rate * ctx.period_u));
}

}  // namespace

ProtocolContext make_protocol_context(const TopologyGraph& graph, Protocol protocol, double period_u,
                                      FairShareIndex index) {
  ProtocolContext ctx;
  ctx.graph = &graph;
  ctx.protocol = protocol;
  ctx.period_u = period_u;
  ctx.hops = graph.hop_counts();
  for (std::size_t t = 0; t < graph.technologies.size(); ++t)
    ctx.bit_rates[static_cast<TechId>(t)] = graph.technologies[t].bit_rate;
  if (ctx.omr()) {
    FairShareCalculator calc(graph, ctx.mode(), index);
    auto everyone = [](NodeId) { return true; };
    for (const auto& n : graph.nodes) {
      if (n.id == graph.sink) continue;
      for (auto j : graph.upstream_of(n.id)) ctx.shares.set(j, n.id, calc.share(j, n.id, everyone));
    }
  }
  return ctx;
}

Bits NodeState::backlog() const {
  Bits b = queue.backlog() + in_flight;
  for (const auto& [t, q] : flood_queues) b += q.backlog();
  return b;
}

NodeState make_node_state(const ProtocolContext& ctx, NodeId id) {
  NodeState node;
  node.id = id;
  node.is_sink = id == ctx.graph->sink;
  if (!ctx.omr() && !node.is_sink)
    for (auto t : ctx.graph->node(id).technologies)
      if (!ctx.graph->tech_neighbors(id, t).empty()) node.flood_queues[t];
  reset_budgets(ctx, node);
  return node;
}

void reset_budgets(const ProtocolContext& ctx, NodeState& node) {
  for (auto t : ctx.graph->node(node.id).technologies) node.budget[t] = period_capacity(ctx, t);
}

Bits Datagram::payload_bits() const {
  Bits b = 0;
  for (const auto& f : fragments) b += f.length;
  return b;
}

Bits Datagram::wire_bits() const {
  Bits b = 0;
  for (const auto& f : fragments) b += omr::wire_bits(f);
  return b;
}

NeighborView neighbor_view(const ProtocolContext& ctx, const NodeState& node, NodeId j) {
  const auto& g = *ctx.graph;
  NeighborView view;
  view.neighbor = j;
  view.is_sink = j == g.sink;
  view.upstream = g.upstream_of(j);
  for (auto k : view.upstream) view.technologies[k] = g.link_technologies(j, k);
  for (auto t : g.node(j).technologies) view.capacities[t] = period_capacity(ctx, t);

  const NeighborReport* report = nullptr;
  if (auto it = node.reports.find(j); it != node.reports.end()) report = &it->second;
  if (report && report->has_backlog) {
    view.has_report = true;
    view.reported_backlog = report->backlog;
    view.report_time = report->time;
  }
  const double equal_split = view.upstream.empty() ? 0.0 : 1.0 / static_cast<double>(view.upstream.size());
  for (auto k : view.upstream) {
    double f = equal_split;
    if (ctx.mode() == Mode::FF) {
      f = ctx.shares.get(k, j);
    } else if (report && report->shares) {
      if (auto s = report->shares->find(k); s != report->shares->end()) f = s->second;
    }
    view.fair_shares[k] = f;
  }
  return view;
}

Bits extrapolate_backlog(const ProtocolContext& ctx, const NeighborView& view, double now) {
  if (!view.has_report) return 0;
  const double elapsed = std::max(0.0, now - view.report_time);
  const auto est = estimate_neighbor_allocation(view, view.reported_backlog, ctx.bit_rates);
  Bits sends = 0;
  for (const auto& e : est.entries) {
    const double rate = ctx.bit_rates.at(e.tech);
    sends += std::min<Bits>(e.bits, static_cast<Bits>(std::floor(rate * elapsed)));
  }
  return update_neighbor_backlog(view.reported_backlog, sends);
}

ServeResult omr_serve(const ProtocolContext& ctx, NodeState& node, double now) {
  ServeResult out;
  const auto& g = *ctx.graph;
  const Bits backlog = node.queue.backlog();
  if (node.is_sink || backlog <= 0) return out;

  const auto& upstream = g.upstream_of(node.id);
  std::map<NodeId, Bits> delta;
  std::map<NodeId, std::vector<TechId>> technologies;
  for (auto j : upstream) {
    technologies[j] = g.link_technologies(node.id, j);
    if (j == g.sink) {
      delta[j] = kUnbounded;
      continue;
    }
    const auto view = neighbor_view(ctx, node, j);
    const Bits pj = extrapolate_backlog(ctx, view, now);
    ProblemAudit est;
    est.time = now;
    est.node = node.id;
    est.neighbor = j;
    est.problem = build_neighbor_problem(view, pj, ctx.bit_rates);
    est.allocation = solve_allocation_problem(est.problem, now);
    delta[j] = compute_delta(view, est.allocation);
    out.estimates.push_back(std::move(est));
  }

  CapacityTable caps;
  caps.period_u = ctx.period_u;
  for (const auto& [t, b] : node.budget) caps.entries[{node.id, t}] = std::max<Bits>(0, b);

  ProblemAudit audit;
  audit.time = now;
  audit.node = node.id;
  audit.problem = build_allocation_problem(node.id, backlog, upstream, technologies, caps, ctx.shares, delta,
                                           ctx.hops, ctx.bit_rates);
  audit.allocation = solve_allocation_problem(audit.problem, now);

  Piggyback pb;
  pb.backlog = quantize_backlog(node.backlog());
  if (ctx.mode() == Mode::PF) {
    std::vector<std::pair<NodeId, std::uint8_t>> shares;
    for (auto k : upstream) shares.emplace_back(k, quantize_share(ctx.shares.get(k, node.id)));
    if (node.last_shares_sent != shares) {
      pb.fair_shares = shares;
      node.last_shares_sent = std::move(shares);
    }
  }

  for (const auto& e : audit.allocation.entries) {
    if (e.bits <= 0) continue;
    auto taken = node.queue.take(e.bits);
    const Bits cap = ctx.max_datagram(e.tech);
    Datagram d{node.id, e.neighbor, e.tech, {}};
    Bits room = cap;
    auto flush = [&] {
      if (d.fragments.empty()) return;
      d.fragments.front().piggyback = pb;
      out.datagrams.push_back(std::move(d));
      d = Datagram{node.id, e.neighbor, e.tech, {}};
      room = cap;
    };
    for (auto& f : taken) {
      f.piggyback = {};
      node.in_flight += f.length;
      node.budget[e.tech] -= f.length;
      while (f.length > 0) {
        if (room < 8) flush();
        if (f.length <= room) {
          room -= f.length;
          d.fragments.push_back(std::move(f));
          break;
        }
        auto [head, rest] = split_fragment(f, room);
        room -= head.length;
        d.fragments.push_back(std::move(head));
        f = std::move(rest);
      }
    }
    flush();
  }
  std::stable_sort(out.datagrams.begin(), out.datagrams.end(),
                   [](const Datagram& a, const Datagram& b) { return a.tech < b.tech; });
  out.allocation = std::move(audit);
  return out;
}

std::optional<Datagram> flooding_serve(const ProtocolContext& ctx, NodeState& node, TechId t) {
  auto it = node.flood_queues.find(t);
  if (it == node.flood_queues.end() || it->second.empty()) return std::nullopt;
  auto& q = it->second;
  const Bits n = std::min(q.front().length, ctx.max_datagram(t));
  auto taken = q.take(n);
  node.in_flight += n;
  Datagram d{node.id, kBroadcast, t, std::move(taken)};
  return d;
}

void enqueue_message(const ProtocolContext& ctx, NodeState& node, const Message& m) {
  if (node.is_sink) return;
  auto f = make_origin_fragment(m);
  if (ctx.omr()) {
    node.queue.push_back(std::move(f));
    return;
  }
  node.flood_seen[{m.origin, m.msg_id}].insert(0, m.payload_bits);
  for (auto& [t, q] : node.flood_queues) q.push_back(f);
}

ReceiveOutcome on_receive(const ProtocolContext& ctx, NodeState& node, const Fragment& f, double now) {
  ReceiveOutcome out;
  if (node.is_sink) {
    out.kind = ReceiveKind::AtSink;
    out.completed = node.reassembly.add(f, now).completed_now;
    return out;
  }
  if (on_path(f, node.id)) {
    out.kind = ReceiveKind::SuppressedLoop;
    return out;
  }
  if (ctx.omr()) {
    node.queue.push_back(forwarded_copy(f, node.id));
    out.queued_bits = f.length;
    return out;
  }
  const auto& neighbors = ctx.graph->neighbors_of(node.id);
  if (std::all_of(neighbors.begin(), neighbors.end(), [&](NodeId n) { return on_path(f, n); })) {
    out.kind = ReceiveKind::SuppressedCovered;
    return out;
  }
  if (ctx.flood_dedup) {
    auto& seen = node.flood_seen[{f.origin, f.msg_id}];
    if (seen.covers(f.offset, f.end())) {
      out.kind = ReceiveKind::SuppressedDuplicate;
      return out;
    }
    seen.insert(f.offset, f.end());
  }
  const auto copy = forwarded_copy(f, node.id);
  for (auto& [t, q] : node.flood_queues) {
    q.push_back(copy);
    out.queued_bits += f.length;
  }
  return out;
}

void absorb_piggyback(const ProtocolContext& ctx, NodeState& node, NodeId from, const Piggyback& pb, double now) {
  if (!ctx.omr() || !ctx.graph->is_upstream(node.id, from)) return;
  auto& r = node.reports[from];
  if (pb.backlog) {
    r.has_backlog = true;
    r.backlog = dequantize_backlog(*pb.backlog);
    r.time = now;
  }
  if (pb.fair_shares) {
    std::map<NodeId, double> shares;
    for (const auto& [k, q] : *pb.fair_shares) shares[k] = dequantize_share(q);
    r.shares = std::move(shares);
  }
}

namespace {

void requeue(const ProtocolContext& ctx, NodeState& node, TechId t, const Fragment& f, AckOutcome& out) {
  Fragment again = f;
  again.piggyback = {};
  again.attempts += 1;
  if (ctx.retry_cap >= 0 && again.attempts > ctx.retry_cap) {
    out.dropped_bits += f.length;
    return;
  }
  out.requeued_bits += f.length;
  if (ctx.omr())
    node.queue.push_back(std::move(again));
  else
    node.flood_queues[t].push_back(std::move(again));
}

}  // namespace

AckOutcome on_ack(const ProtocolContext& ctx, NodeState& node, const Datagram& d, const std::vector<bool>& ok) {
  AckOutcome out;
  for (std::size_t k = 0; k < d.fragments.size(); ++k) {
    const auto& f = d.fragments[k];
    node.in_flight -= f.length;
    if (k < ok.size() && ok[k])
      out.acked_bits += f.length;
    else
      requeue(ctx, node, d.tech, f, out);
  }
  return out;
}

AckOutcome on_ack_timeout(const ProtocolContext& ctx, NodeState& node, const Datagram& d) {
  return on_ack(ctx, node, d, {});
}

}  // namespace omr
