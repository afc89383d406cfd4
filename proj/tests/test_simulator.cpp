#include "omr/metrics.hpp"
#include "omr/presets.hpp"
#include "omr/simulator.hpp"
#include "omr/verify.hpp"

#include <doctest.h>

#include <map>
#include <unordered_map>

using namespace omr;

namespace {

SimConfig config(const std::string& preset, Protocol p, Mac m, std::uint64_t seed = 1) {
  SimConfig c;
  c.graph = make_preset(preset, seed);
  c.protocol = p;
  c.mac = m;
  return c;
}

template <typename R>
std::vector<const R*> records(const TraceLog& log) {
  std::vector<const R*> out;
  for (const auto& r : log.records)
    if (auto p = std::get_if<R>(&r)) out.push_back(p);
  return out;
}

}  // namespace

TEST_CASE("traffic generation") {
  CHECK(generate_traffic(1, 3.0, 0.0, 64000, 5).empty());
  const auto a = generate_traffic(1, 3.0, 600.0, 64000, 5);
  const auto b = generate_traffic(1, 3.0, 600.0, 64000, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].created_at == b[k].created_at);
    CHECK(a[k].payload_bits == b[k].payload_bits);
    CHECK(a[k].payload_bits > 0);
    CHECK(a[k].payload_bits <= 64000);
    CHECK(a[k].payload_bits % 8 == 0);
    CHECK(a[k].created_at < 600.0);
    if (k) CHECK(a[k].created_at >= a[k - 1].created_at);
  }
}

TEST_CASE("traffic matches the Poisson rate and uniform sizes") {
  double count = 0, bits = 0;
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) {
    const auto m = generate_traffic(3, 3.0, 600.0, 64000, std::uint64_t(s));
    count += double(m.size());
    for (const auto& x : m) bits += double(x.payload_bits);
  }
  CHECK(count / runs == doctest::Approx(30.0).epsilon(0.01));
  CHECK(bits / count == doctest::Approx(32004.0).epsilon(0.01));
}

TEST_CASE("runs are a pure function of config and seed") {
  for (auto p : {Protocol::OmrFF, Protocol::OmrPF, Protocol::Flooding})
    for (auto m : {Mac::Ideal, Mac::Immediate}) {
      const auto c = config("paper-random", p, m, 3);
      CHECK(trace_hash(run_simulation(c, 3).trace) == trace_hash(run_simulation(c, 3).trace));
    }
  const auto c = config("fig1", Protocol::OmrFF, Mac::Ideal);
  CHECK(trace_hash(run_simulation(c, 1).trace) != trace_hash(run_simulation(c, 2).trace));
}

TEST_CASE("light traffic over two nodes is delivered in full") {
  auto c = config("chain-2", Protocol::OmrPF, Mac::Ideal);
  c.lambda_per_min = 1.0;
  c.max_message_bits = 8000;
  const auto r = run_simulation(c, 9);
  const auto d = digest_trace(r.trace);
  int late = 0;
  for (const auto& [key, row] : d.messages) {
    if (row.created > c.t_net - 30.0) {
      ++late;
      continue;
    }
    CHECK(row.completed.has_value());
  }
  CHECK(d.messages.size() > std::size_t(late));
}

TEST_CASE("receptions land one propagation delay after the frame ends") {
  for (auto m : {Mac::Ideal, Mac::Immediate}) {
    const auto c = config("paper-random", Protocol::OmrFF, m, 4);
    const auto r = run_simulation(c, 4);
    std::unordered_map<std::uint64_t, const TxRecord*> txs;
    for (auto x : records<TxRecord>(r.trace)) txs[x->tx] = x;
    for (auto rx : records<RxRecord>(r.trace)) {
      const auto& x = *txs.at(rx->tx);
      const double expect = x.time + x.duration + c.graph.distance(x.sender, rx->receiver) / c.sound_speed;
      CHECK(rx->time == doctest::Approx(expect).epsilon(1e-12));
      CHECK(x.duration == doctest::Approx(double(x.wire_bits) / c.graph.technologies[x.tech].bit_rate));
    }
  }
}

TEST_CASE("OMR never sends downstream and flooding only broadcasts") {
  for (auto p : {Protocol::OmrFF, Protocol::OmrPF, Protocol::Flooding}) {
    const auto c = config("paper-random", p, Mac::Immediate, 6);
    const auto r = run_simulation(c, 6);
    for (auto x : records<TxRecord>(r.trace)) {
      if (x->kind == TxKind::Ack) continue;
      if (p == Protocol::Flooding) {
        CHECK(x->kind == TxKind::Broadcast);
      } else {
        CHECK(x->kind == TxKind::Data);
        CHECK(c.graph.is_upstream(x->sender, x->receiver));
      }
    }
  }
}

TEST_CASE("flooding broadcasts are not acknowledged unless asked") {
  auto c = config("fig1", Protocol::Flooding, Mac::Ideal);
  auto r = run_simulation(c, 2);
  CHECK(records<AckRecord>(r.trace).empty());
  CHECK(records<TimeoutRecord>(r.trace).empty());
  c.flood_acks = true;
  r = run_simulation(c, 2);
  CHECK_FALSE(records<AckRecord>(r.trace).empty());
}

TEST_CASE("Ideal MAC never loses a frame to collisions") {
  for (auto p : {Protocol::OmrFF, Protocol::Flooding}) {
    const auto r = run_simulation(config("paper-random", p, Mac::Ideal, 8), 8);
    CHECK(r.stats.collisions == 0);
    for (auto rx : records<RxRecord>(r.trace)) CHECK(rx->outcome == 'O');
  }
  const auto busy = run_simulation(config("paper-random", Protocol::Flooding, Mac::Immediate, 8), 8);
  CHECK(busy.stats.collisions > 0);
}

TEST_CASE("every simulated trace passes the audit") {
  for (auto p : {Protocol::OmrFF, Protocol::OmrPF, Protocol::Flooding})
    for (auto m : {Mac::Ideal, Mac::Immediate})
      for (std::uint64_t seed : {1, 2}) {
        const auto r = run_simulation(config("paper-random", p, m, seed), seed);
        const auto audit = audit_trace(r.trace);
        for (const auto& check : audit.checks) {
          CAPTURE(check.name);
          CAPTURE(check.detail);
          CHECK(check.passed);
        }
      }
}

TEST_CASE("the retry cap drops traffic instead of retrying forever") {
  auto c = config("paper-random", Protocol::OmrFF, Mac::Immediate, 5);
  c.retry_cap = 0;
  const auto r = run_simulation(c, 5);
  bool dropped = false;
  for (auto q : records<QueueRecord>(r.trace)) dropped = dropped || q->reason == 'X';
  CHECK(dropped);
  CHECK(audit_trace(r.trace).passed());
}
