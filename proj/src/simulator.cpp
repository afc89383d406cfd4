#include "omr/simulator.hpp"

#include "omr/channel.hpp"
#include "omr/protocol.hpp"
#include "omr/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <unordered_map>

namespace omr {

std::vector<Message> generate_traffic(NodeId node, double lambda_per_min, double horizon, Bits max_bits,
                                      std::uint64_t seed) {
  std::vector<Message> out;
  if (lambda_per_min <= 0.0 || horizon <= 0.0 || max_bits < 8) return out;
  Rng rng(derive_seed(seed, {node, 0x7472616666ULL}));
  const double mean = 60.0 / lambda_per_min;
  double t = 0.0;
  for (std::uint32_t id = 0;; ++id) {
    t += rng.exponential(mean);
    if (t >= horizon) break;
    const Bits bytes = rng.uniform_int(1, max_bits / 8);
    out.push_back({node, id, bytes * 8, t});
  }
  return out;
}

namespace {

enum class EventKind { Arrival, TxEnd, RxEnd, AckArrive, Timeout, Epoch, Serve };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t a;
  std::uint64_t b;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return x.time > y.time || (x.time == y.time && x.seq > y.seq);
  }
};

struct RxSlot {
  NodeId receiver = 0;
  double start = 0, end = 0;
  char cause = 'O';  // 'C' collision, 'H' half-duplex
};

struct Transmission {
  TxKind kind = TxKind::Data;
  NodeId sender = 0, receiver = 0;
  TechId tech = 0;
  double start = 0, end = 0;
  Datagram datagram;
  std::uint64_t acked_tx = 0;
  std::vector<bool> ack_mask;
  std::vector<RxSlot> rx;
  int refs = 0;
};

struct Interval {
  double start, end;
  std::uint64_t tx;
  std::size_t slot;  // npos for the node's own transmissions
};

struct Medium {
  std::vector<Interval> rx;
  std::vector<Interval> tx;
};

struct Radio {
  enum class State { Idle, Sending, Awaiting } state = State::Idle;
  std::uint64_t tx = 0;
  double ack_busy_until = -1.0;
  double backoff_until = -1.0;
  std::deque<Datagram> pending;
};

struct SimNode {
  NodeState state;
  std::map<TechId, Radio> radios;
  std::map<TechId, Medium> medium;
  bool retry_scheduled = false;
  double serve_backoff_until = -1.0;
  std::uint64_t backoff_draws = 0;
};

constexpr std::size_t kOwn = std::numeric_limits<std::size_t>::max();

FragmentRecord fragment_record(const Fragment& f) {
  return {f.origin, f.msg_id, f.offset, f.length, f.total_length, header_bits(f), f.digest, f.path};
}

std::uint64_t path_hash(const std::vector<NodeId>& path) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto id : path) h = splitmix64(h ^ id);
  return h;
}

class Simulation {
 public:
  Simulation(const SimConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), ctx_(make_protocol_context(cfg.graph, cfg.protocol, cfg.period_u, cfg.fair_share_index)) {
    ctx_.retry_cap = cfg.retry_cap;
    ctx_.flood_dedup = cfg.flood_dedup;
    channel_.sound_speed = cfg.sound_speed;
    for (const auto& n : cfg.graph.nodes) {
      SimNode sn;
      sn.state = make_node_state(ctx_, n.id);
      for (auto t : n.technologies) {
        sn.radios[t];
        sn.medium[t];
      }
      nodes_.emplace(n.id, std::move(sn));
    }
  }

  SimResult run() {
    write_header();
    for (const auto& n : cfg_.graph.nodes) {
      if (n.id == cfg_.graph.sink) continue;
      auto msgs = generate_traffic(n.id, cfg_.lambda_per_min, cfg_.t_net, cfg_.max_message_bits, seed_);
      for (auto& m : msgs) {
        const auto idx = messages_.size();
        messages_.push_back(m);
        schedule(m.created_at, EventKind::Arrival, idx);
      }
    }
    if (cfg_.period_u > 0 && cfg_.period_u < cfg_.t_net) schedule(cfg_.period_u, EventKind::Epoch);

    while (!events_.empty()) {
      const Event e = events_.top();
      if (e.time > cfg_.t_net) break;
      events_.pop();
      now_ = e.time;
      ++result_.stats.events;
      dispatch(e);
    }
    return std::move(result_);
  }

 private:
  void schedule(double time, EventKind kind, std::uint64_t a = 0, std::uint64_t b = 0) {
    events_.push({time, seq_++, kind, a, b});
  }

  TraceLog& trace() { return result_.trace; }

  void write_header() {
    const auto& g = cfg_.graph;
    HeaderRecord h;
    h.seed = seed_;
    h.config_hash = cfg_.config_hash;
    h.protocol = to_string(cfg_.protocol);
    h.mac = to_string(cfg_.mac);
    h.t_net = cfg_.t_net;
    h.period_u = cfg_.period_u;
    h.sink = g.sink;
    h.node_count = static_cast<int>(g.size());
    for (const auto& t : g.technologies) h.technologies.push_back(t.name);
    trace().add(std::move(h));
    for (const auto& n : g.nodes) trace().add(NodeRecord{n.id, n.position.x(), n.position.y(), n.position.z(), n.technologies});
    for (const auto& l : g.links) trace().add(LinkRecord{l.a, l.b, l.tech});
    for (const auto& n : g.nodes) trace().add(UpstreamRecord{n.id, g.upstream_of(n.id)});
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::Arrival: on_arrival(messages_[e.a]); break;
      case EventKind::TxEnd: on_tx_end(e.a); break;
      case EventKind::RxEnd: on_rx_end(e.a, static_cast<std::size_t>(e.b)); break;
      case EventKind::AckArrive: deliver_virtual_ack(static_cast<std::size_t>(e.a)); break;
      case EventKind::Timeout: on_timeout(e.a); break;
      case EventKind::Epoch: on_epoch(); break;
      case EventKind::Serve: {
        auto& n = nodes_.at(static_cast<NodeId>(e.a));
        if (e.b == 1) n.retry_scheduled = false;
        service(static_cast<NodeId>(e.a));
        break;
      }
    }
  }

  void queue_record(NodeId id, char reason, Bits delta) {
    trace().add(QueueRecord{now_, id, reason, delta, nodes_.at(id).state.backlog()});
  }

  void on_arrival(const Message& m) {
    auto& n = nodes_.at(m.origin);
    trace().add(MessageRecord{now_, m.origin, m.msg_id, m.payload_bits});
    const Bits before = n.state.backlog();
    enqueue_message(ctx_, n.state, m);
    queue_record(m.origin, 'G', n.state.backlog() - before);
    service(m.origin);
  }

  void on_epoch() {
    for (auto& [id, n] : nodes_) reset_budgets(ctx_, n.state);
    for (auto& [id, n] : nodes_) service(id);
    if (now_ + cfg_.period_u < cfg_.t_net) schedule(now_ + cfg_.period_u, EventKind::Epoch);
  }

  // Medium bookkeeping (Immediate MAC only).

  void prune(std::vector<Interval>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [&](const Interval& i) { return i.end < now_; }), v.end());
  }

  void corrupt(const Interval& i, char cause) {
    auto it = txs_.find(i.tx);
    if (it == txs_.end() || i.slot == kOwn) return;
    auto& slot = it->second.rx[i.slot];
    if (slot.cause == 'O') {
      slot.cause = cause;
      ++result_.stats.collisions;
    }
  }

  bool sensing(NodeId id, TechId t) {
    auto& m = nodes_.at(id).medium.at(t);
    prune(m.rx);
    return std::any_of(m.rx.begin(), m.rx.end(), [&](const Interval& i) { return i.start <= now_ && now_ < i.end; });
  }

  /// Longest backoff window among the technologies `id` is currently
  /// receiving on; negative when the node hears nothing.
  double busy_window(NodeId id) {
    double w = -1.0;
    for (auto& [t, m] : nodes_.at(id).medium)
      if (sensing(id, t)) w = std::max(w, backoff_window(t));
    return w;
  }

  double backoff_window(TechId t) const {
    const auto& tech = cfg_.graph.technologies[t];
    return cfg_.backoff_frames * static_cast<double>(tech.max_datagram_bits) / tech.bit_rate;
  }

  double draw_backoff(SimNode& n, NodeId id, double window) {
    return window * unit_interval(derive_seed(seed_, {3, id, n.backoff_draws++}));
  }

  /// Non-persistent carrier sense: a radio that finds its band busy retries
  /// after a random wait instead of at the end of the busy period.
  void defer_radio(NodeId id, TechId t, Radio& radio) {
    const double w = backoff_window(t);
    if (w <= 0) return;
    radio.backoff_until = now_ + draw_backoff(nodes_.at(id), id, w);
    schedule(radio.backoff_until, EventKind::Serve, id, 0);
  }

  bool backing_off(const Radio& r) const { return cfg_.mac == Mac::Immediate && now_ < r.backoff_until; }

  bool radio_idle(const Radio& r) const { return r.state == Radio::State::Idle && r.ack_busy_until <= now_; }

  std::uint64_t start_tx(NodeId sender, TechId tech, TxKind kind, Datagram datagram, std::uint64_t acked_tx = 0,
                         std::vector<bool> ack_mask = {}) {
    const auto id = next_tx_++;
    const auto& g = cfg_.graph;
    const Bits bits = kind == TxKind::Ack ? cfg_.ack_bits : datagram.wire_bits();
    const double duration = static_cast<double>(bits) / g.technologies[tech].bit_rate;

    Transmission tx;
    tx.kind = kind;
    tx.sender = sender;
    tx.receiver = kind == TxKind::Broadcast ? kBroadcast : datagram.receiver;
    tx.tech = tech;
    tx.start = now_;
    tx.end = now_ + duration;
    tx.acked_tx = acked_tx;
    tx.ack_mask = std::move(ack_mask);
    if (kind == TxKind::Ack) tx.receiver = txs_.at(acked_tx).sender;

    TxRecord rec;
    rec.time = now_;
    rec.tx = id;
    rec.sender = sender;
    rec.receiver = tx.receiver;
    rec.tech = tech;
    rec.kind = kind;
    rec.wire_bits = bits;
    rec.duration = duration;
    rec.acked_tx = acked_tx;
    for (const auto& f : datagram.fragments) rec.fragments.push_back(fragment_record(f));
    trace().add(std::move(rec));
    ++result_.stats.transmissions;
    tx.datagram = std::move(datagram);

    const bool immediate = cfg_.mac == Mac::Immediate;
    for (auto r : g.tech_neighbors(sender, tech)) {
      const double prop = channel_.propagation_delay(g.distance(sender, r));
      RxSlot slot{r, tx.start + prop, tx.end + prop, 'O'};
      const auto index = tx.rx.size();
      if (immediate) {
        auto& m = nodes_.at(r).medium.at(tech);
        prune(m.rx);
        prune(m.tx);
        for (const auto& other : m.rx)
          if (other.start < slot.end && slot.start < other.end) {
            corrupt(other, 'C');
            if (slot.cause == 'O') {
              slot.cause = 'C';
              ++result_.stats.collisions;
            }
          }
        for (const auto& own : m.tx)
          if (own.start < slot.end && slot.start < own.end && slot.cause == 'O') {
            slot.cause = 'H';
            ++result_.stats.collisions;
          }
        m.rx.push_back({slot.start, slot.end, id, index});
      }
      tx.rx.push_back(slot);
      schedule(slot.end, EventKind::RxEnd, id, index);
    }
    // one reference per reception, plus the end of transmission and the ack/timeout outcome
    tx.refs = static_cast<int>(tx.rx.size()) + (kind == TxKind::Ack ? 0 : awaits_ack(kind) ? 2 : 1);

    if (immediate) {
      auto& m = nodes_.at(sender).medium.at(tech);
      prune(m.rx);
      for (const auto& i : m.rx)
        if (i.start < tx.end && tx.start < i.end) corrupt(i, 'H');
      m.tx.push_back({tx.start, tx.end, id, kOwn});
    }

    const double end = tx.end;
    const bool keep = tx.refs > 0;
    if (keep) txs_.emplace(id, std::move(tx));
    if (kind != TxKind::Ack) schedule(end, EventKind::TxEnd, id);
    return id;
  }

  void release(std::uint64_t id) {
    auto it = txs_.find(id);
    if (it != txs_.end() && --it->second.refs <= 0) txs_.erase(it);
  }

  bool awaits_ack(TxKind kind) const { return kind != TxKind::Broadcast || cfg_.flood_acks; }

  double ack_duration(TechId t) const {
    return static_cast<double>(cfg_.ack_bits) / cfg_.graph.technologies[t].bit_rate;
  }

  void on_tx_end(std::uint64_t id) {
    auto it = txs_.find(id);
    if (it == txs_.end()) return;
    const auto& tx = it->second;
    auto& node = nodes_.at(tx.sender);
    auto& radio = node.radios.at(tx.tech);
    if (!awaits_ack(tx.kind)) {
      Bits bits = 0;
      for (const auto& f : tx.datagram.fragments) bits += f.length;
      node.state.in_flight -= bits;
      queue_record(tx.sender, 'B', -bits);
      radio.state = Radio::State::Idle;
      const NodeId sender = tx.sender;
      release(id);
      service(sender);
      return;
    }
    radio.state = Radio::State::Awaiting;
    double prop = 0.0;
    for (const auto& slot : tx.rx)
      if (tx.kind == TxKind::Broadcast || slot.receiver == tx.receiver) prop = std::max(prop, slot.start - tx.start);
    schedule(now_ + cfg_.ack_timeout_factor * (prop + ack_duration(tx.tech)), EventKind::Timeout, id);
    release(id);
  }

  double draw(std::uint64_t tag, NodeId sender, NodeId receiver, TechId tech, const Fragment& f) const {
    return unit_interval(derive_seed(seed_, {tag, sender, receiver, tech, f.origin, f.msg_id,
                                             static_cast<std::uint64_t>(f.offset),
                                             static_cast<std::uint64_t>(f.length),
                                             static_cast<std::uint64_t>(f.attempts), path_hash(f.path)}));
  }

  bool survives(const Transmission& tx, NodeId receiver, const Fragment& f, Bits bits, std::uint64_t tag) const {
    const auto& tech = cfg_.graph.technologies[tx.tech];
    const double per = per_of_link(cfg_.graph.distance(tx.sender, receiver), tech, bits);
    return draw(tag, tx.sender, receiver, tx.tech, f) >= per;
  }

  void on_rx_end(std::uint64_t id, std::size_t index) {
    auto it = txs_.find(id);
    if (it == txs_.end()) return;
    Transmission& tx = it->second;
    const RxSlot slot = tx.rx[index];
    const NodeId r = slot.receiver;
    const bool clean = slot.cause == 'O';

    if (tx.kind == TxKind::Ack) {
      if (auto data = txs_.find(tx.acked_tx); r == tx.receiver && clean && data != txs_.end()) {
        if (survives(tx, r, data->second.datagram.fragments.front(), cfg_.ack_bits, 2))
          deliver_ack(tx.acked_tx, tx.ack_mask);
      }
      release(id);
      service(r);
      return;
    }

    const auto& frags = tx.datagram.fragments;
    std::vector<bool> mask(frags.size(), false);
    if (clean)
      for (std::size_t k = 0; k < frags.size(); ++k) mask[k] = survives(tx, r, frags[k], wire_bits(frags[k]), 1);

    auto& node = nodes_.at(r);
    if (!frags.empty() && mask[0]) absorb_piggyback(ctx_, node.state, tx.sender, frags.front().piggyback, now_);

    const bool addressed = tx.kind == TxKind::Broadcast || r == tx.receiver;
    if (addressed) {
      RxRecord rec{now_, id, r, slot.cause, {}};
      if (clean)
        for (bool b : mask) rec.mask.push_back(b ? '1' : '0');
      trace().add(std::move(rec));
      bool any = false;
      for (std::size_t k = 0; k < frags.size(); ++k) {
        if (!mask[k]) continue;
        any = true;
        deliver_fragment(r, frags[k]);
      }
      if (any && awaits_ack(tx.kind)) send_ack(id, r, mask);
    }
    release(id);
    service(r);
  }

  void deliver_fragment(NodeId r, const Fragment& f) {
    auto& node = nodes_.at(r);
    const auto out = on_receive(ctx_, node.state, f, now_);
    switch (out.kind) {
      case ReceiveKind::Enqueued:
        queue_record(r, 'R', out.queued_bits);
        break;
      case ReceiveKind::AtSink:
        if (out.completed)
          trace().add(CompleteRecord{now_, f.origin, f.msg_id, node.state.reassembly.content_matches(f.origin, f.msg_id)});
        break;
      case ReceiveKind::SuppressedLoop:
        trace().add(SuppressRecord{now_, r, 'L', f.origin, f.msg_id, f.offset, f.length});
        break;
      case ReceiveKind::SuppressedCovered:
        trace().add(SuppressRecord{now_, r, 'C', f.origin, f.msg_id, f.offset, f.length});
        break;
      case ReceiveKind::SuppressedDuplicate:
        trace().add(SuppressRecord{now_, r, 'D', f.origin, f.msg_id, f.offset, f.length});
        break;
    }
  }

  void send_ack(std::uint64_t data_id, NodeId r, const std::vector<bool>& mask) {
    auto& data = txs_.at(data_id);
    const TechId t = data.tech;
    if (cfg_.mac == Mac::Ideal) {
      const double prop = channel_.propagation_delay(cfg_.graph.distance(data.sender, r));
      virtual_acks_.push_back({data_id, mask});
      schedule(now_ + ack_duration(t) + prop, EventKind::AckArrive, virtual_acks_.size() - 1);
      return;
    }
    auto& radio = nodes_.at(r).radios.at(t);
    radio.ack_busy_until = std::max(radio.ack_busy_until, now_ + ack_duration(t));
    start_tx(r, t, TxKind::Ack, Datagram{r, data.sender, t, {}}, data_id, mask);
    schedule(radio.ack_busy_until, EventKind::Serve, r, 0);
  }

  void deliver_virtual_ack(std::size_t index) {
    auto ack = std::move(virtual_acks_[index]);
    deliver_ack(ack.first, ack.second);
  }

  void deliver_ack(std::uint64_t data_id, const std::vector<bool>& mask) {
    auto it = txs_.find(data_id);
    if (it == txs_.end()) return;
    const Transmission& data = it->second;
    auto& node = nodes_.at(data.sender);
    auto& radio = node.radios.at(data.tech);
    if (radio.state != Radio::State::Awaiting || radio.tx != data_id) return;
    AckRecord rec{now_, data_id, {}};
    for (bool b : mask) rec.mask.push_back(b ? '1' : '0');
    trace().add(std::move(rec));
    const auto out = on_ack(ctx_, node.state, data.datagram, mask);
    if (out.acked_bits) queue_record(data.sender, 'A', -out.acked_bits);
    if (out.dropped_bits) queue_record(data.sender, 'X', -out.dropped_bits);
    radio.state = Radio::State::Idle;
    const NodeId sender = data.sender;
    release(data_id);
    service(sender);
  }

  void on_timeout(std::uint64_t id) {
    auto it = txs_.find(id);
    if (it == txs_.end()) return;
    const Transmission& data = it->second;
    auto& node = nodes_.at(data.sender);
    auto& radio = node.radios.at(data.tech);
    if (radio.state != Radio::State::Awaiting || radio.tx != id) return;
    trace().add(TimeoutRecord{now_, id});
    const auto out = on_ack_timeout(ctx_, node.state, data.datagram);
    if (out.dropped_bits) queue_record(data.sender, 'X', -out.dropped_bits);
    radio.state = Radio::State::Idle;
    const NodeId sender = data.sender;
    release(id);
    service(sender);
  }

  void service(NodeId id) {
    auto& node = nodes_.at(id);
    if (node.state.is_sink) return;
    const bool immediate = cfg_.mac == Mac::Immediate;

    if (!ctx_.omr()) {
      for (auto& [t, radio] : node.radios) {
        if (!radio_idle(radio) || backing_off(radio)) continue;
        auto q = node.state.flood_queues.find(t);
        if (q == node.state.flood_queues.end() || q->second.empty()) continue;
        if (immediate && sensing(id, t)) {
          defer_radio(id, t, radio);
          continue;
        }
        auto d = flooding_serve(ctx_, node.state, t);
        if (!d) continue;
        radio.state = Radio::State::Sending;
        radio.tx = start_tx(id, t, TxKind::Broadcast, std::move(*d));
      }
      return;
    }

    for (int round = 0; round < 2; ++round) {
      bool all_idle = true;
      for (auto& [t, radio] : node.radios) {
        if (radio_idle(radio) && !radio.pending.empty() && !backing_off(radio)) {
          if (immediate && sensing(id, t)) {
            defer_radio(id, t, radio);
            all_idle = false;
            continue;
          }
          Datagram d = std::move(radio.pending.front());
          radio.pending.pop_front();
          radio.state = Radio::State::Sending;
          radio.tx = start_tx(id, t, TxKind::Data, std::move(d));
        }
        if (!radio_idle(radio) || !radio.pending.empty()) all_idle = false;
      }
      if (round == 1 || !all_idle || node.state.queue.backlog() <= 0) return;
      if (immediate) {
        if (now_ < node.serve_backoff_until) return;
        const double w = busy_window(id);
        if (w > 0) {
          node.serve_backoff_until = now_ + draw_backoff(node, id, w);
          schedule(node.serve_backoff_until, EventKind::Serve, id, 0);
        }
        if (w >= 0) return;
      }

      auto served = omr_serve(ctx_, node.state, now_);
      for (const auto& est : served.estimates) trace().add(problem_record('E', est));
      if (served.allocation) trace().add(problem_record('A', *served.allocation));
      if (served.datagrams.empty()) {
        if (!node.retry_scheduled) {
          node.retry_scheduled = true;
          schedule(now_ + cfg_.serve_retry, EventKind::Serve, id, 1);
        }
        return;
      }
      for (auto& d : served.datagrams) node.radios.at(d.tech).pending.push_back(std::move(d));
    }
  }

  static ProblemRecord problem_record(char kind, const ProblemAudit& a) {
    ProblemRecord r;
    r.kind = kind;
    r.time = a.time;
    r.node = a.node;
    r.neighbor = kind == 'E' ? a.neighbor : 0;
    r.backlog = a.problem.backlog;
    for (const auto& s : a.problem.slots)
      r.slots.push_back({s.neighbor, s.tech, s.cap, a.allocation.get(s.neighbor, s.tech)});
    for (const auto& [j, limit] : a.problem.neighbor_limits) r.limits.emplace_back(j, limit);
    return r;
  }

  const SimConfig& cfg_;
  std::uint64_t seed_;
  ProtocolContext ctx_;
  ChannelModel channel_;
  std::map<NodeId, SimNode> nodes_;
  std::vector<Message> messages_;
  std::unordered_map<std::uint64_t, Transmission> txs_;
  std::vector<std::pair<std::uint64_t, std::vector<bool>>> virtual_acks_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_tx_ = 1;
  double now_ = 0.0;
  SimResult result_;
};

}  // namespace

SimResult run_simulation(const SimConfig& cfg, std::uint64_t seed) {
  for (const auto& n : cfg.graph.nodes)
    if (n.id > 0xff) throw ConfigError("node ids must fit in 8 bits for the datagram header");
  if (cfg.t_net <= 0) throw ConfigError("t_net must be positive");
  if (cfg.period_u <= 0) throw ConfigError("u must be positive");
  return Simulation(cfg, seed).run();
}

}  // namespace omr
