#include "omr/metrics.hpp"
#include "omr/presets.hpp"
#include "omr/simulator.hpp"

#include <doctest.h>

using namespace omr;

namespace {

/// Hand-built traces: node n of `nodes` (the last is the sink), all LF.
struct TraceBuilder {
  TraceLog log;
  std::uint64_t next_tx = 1;

  explicit TraceBuilder(int nodes, double t_net = 600.0) {
    HeaderRecord h;
    h.protocol = "omr-ff";
    h.mac = "ideal";
    h.t_net = t_net;
    h.period_u = 60;
    h.sink = NodeId(nodes);
    h.node_count = nodes;
    h.technologies = {"LF", "MF", "HF"};
    log.add(h);
    for (int n = 1; n <= nodes; ++n) log.add(NodeRecord{NodeId(n), 0, 0, 0, {0}});
  }
  NodeId sink() const { return log.header().sink; }

  void link(NodeId a, NodeId b) { log.add(LinkRecord{a, b, 0}); }
  void message(double t, NodeId origin, std::uint32_t id, Bits bits) { log.add(MessageRecord{t, origin, id, bits}); }

  /// One frame from `sender` to `receiver` carrying [offset, offset+length).
  std::uint64_t send(double t, NodeId sender, NodeId receiver, NodeId origin, std::uint32_t id, Bits total,
                     Bits offset, Bits length, bool decoded = true, Bits header = 0) {
    TxRecord x;
    x.time = t;
    x.tx = next_tx++;
    x.sender = sender;
    x.receiver = receiver;
    x.wire_bits = length + header;
    x.fragments.push_back({origin, id, offset, length, total, header, 0, {origin}});
    log.add(x);
    log.add(RxRecord{t + 1, x.tx, receiver, decoded ? 'O' : 'C', decoded ? "1" : ""});
    return x.tx;
  }
  void complete(double t, NodeId origin, std::uint32_t id) { log.add(CompleteRecord{t, origin, id, true}); }
};

}  // namespace

TEST_CASE("delay") {
  TraceBuilder one(2);
  one.message(10, 1, 0, 800);
  one.send(20, 1, 2, 1, 0, 800, 0, 800);
  one.complete(25, 1, 0);
  CHECK(compute_metrics(one.log).rho_d == doctest::Approx(15.0));

  TraceBuilder two(3);
  two.message(0, 1, 0, 800);
  two.complete(10, 1, 0);
  two.message(0, 2, 0, 800);
  two.message(0, 2, 1, 800);
  two.complete(10, 2, 0);
  two.complete(30, 2, 1);
  CHECK(compute_delay(digest_trace(two.log)) == doctest::Approx(15.0));

  TraceBuilder idle(3);
  idle.message(0, 1, 0, 800);
  idle.message(0, 2, 0, 800);
  idle.complete(12, 2, 0);
  CHECK(compute_delay(digest_trace(idle.log)) == doctest::Approx(12.0));

  TraceBuilder none(2);
  none.message(0, 1, 0, 800);
  CHECK_FALSE(compute_delay(digest_trace(none.log)).has_value());
}

TEST_CASE("goodput counts duplicates") {
  TraceBuilder once(2);
  once.message(0, 1, 0, 48000);
  once.send(1, 1, 2, 1, 0, 48000, 0, 48000);
  once.complete(2, 1, 0);
  CHECK(compute_goodput(digest_trace(once.log)) == doctest::Approx(10.0));

  auto twice = once;
  twice.send(3, 1, 2, 1, 0, 48000, 0, 48000);
  CHECK(compute_goodput(digest_trace(twice.log)) == doctest::Approx(20.0));

  TraceBuilder lost(2);
  lost.message(0, 1, 0, 48000);
  lost.send(1, 1, 2, 1, 0, 48000, 0, 48000, false);
  CHECK(compute_goodput(digest_trace(lost.log)) == 0.0);
}

TEST_CASE("success rate") {
  TraceBuilder b(3);
  for (std::uint32_t k = 0; k < 4; ++k) b.message(0, 1, k, 8);
  for (std::uint32_t k = 0; k < 3; ++k) b.complete(1, 1, k);
  b.message(0, 2, 0, 8);
  b.message(0, 2, 1, 8);
  b.complete(1, 2, 0);
  CHECK(compute_success_rate(digest_trace(b.log)) == doctest::Approx(0.625));

  TraceBuilder all(2);
  all.message(0, 1, 0, 8);
  all.complete(1, 1, 0);
  CHECK(compute_success_rate(digest_trace(all.log)) == 1.0);

  TraceBuilder nothing(2);
  nothing.message(0, 1, 0, 8);
  CHECK(compute_success_rate(digest_trace(nothing.log)) == 0.0);
}

TEST_CASE("overhead counts messages with surplus sink copies") {
  TraceBuilder b(4);  // three sources
  b.message(0, 1, 0, 800);
  b.message(0, 1, 1, 800);
  b.message(0, 1, 2, 800);
  for (std::uint32_t k = 0; k < 2; ++k) {
    b.send(1, 1, 4, 1, k, 800, 0, 800);
    b.send(2, 1, 4, 1, k, 800, 0, 800);
  }
  // a doubled half of an otherwise missing message is not overhead
  b.send(3, 1, 4, 1, 2, 800, 0, 400);
  b.send(4, 1, 4, 1, 2, 800, 0, 400);
  b.message(0, 2, 0, 800);
  const auto [count, fraction] = compute_overhead(digest_trace(b.log));
  CHECK(count == doctest::Approx(2.0 / 3.0));
  CHECK(fraction == doctest::Approx((2.0 / 3.0 + 0.0) / 2.0));

  TraceBuilder clean(2);
  clean.message(0, 1, 0, 800);
  clean.send(1, 1, 2, 1, 0, 800, 0, 800);
  CHECK(compute_overhead(digest_trace(clean.log)).first == 0.0);
}

TEST_CASE("total transmitted bytes include headers and retransmissions") {
  TraceBuilder b(2);
  b.message(0, 1, 0, 8000);
  b.send(1, 1, 2, 1, 0, 8000, 0, 8000, true, 200);
  CHECK(compute_total_tx(digest_trace(b.log)) == doctest::Approx(1025.0 / (1 * 1 * 600.0)));
  b.send(2, 1, 2, 1, 0, 8000, 0, 8000, true, 200);
  CHECK(compute_total_tx(digest_trace(b.log)) == doctest::Approx(2050.0 / 600.0));

  TraceBuilder quiet(2);
  CHECK(compute_total_tx(digest_trace(quiet.log)) == 0.0);
}

TEST_CASE("link throughput averages per link then per node") {
  TraceBuilder b(2);
  b.link(1, 2);
  b.message(0, 1, 0, 48000);
  b.send(1, 1, 2, 1, 0, 48000, 0, 48000);
  const auto d = digest_trace(b.log);
  CHECK(compute_link_throughput(d, 0) == doctest::Approx(5.0));  // node 1: 10; node 2: 0
  CHECK_FALSE(compute_link_throughput(d, 1).has_value());

  TraceBuilder two(3);
  two.link(1, 2);
  two.link(1, 3);
  two.message(0, 1, 0, 48000);
  two.send(1, 1, 3, 1, 0, 48000, 0, 48000);
  two.send(2, 1, 2, 1, 0, 48000, 0, 48000, false);  // collided bytes do not count
  const auto d2 = digest_trace(two.log);
  // node 1: (10 + 0) / 2, nodes 2 and 3: 0
  CHECK(compute_link_throughput(d2, 0) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("distributions") {
  const auto cdf = empirical_cdf({3, 1, 2});
  REQUIRE(cdf.size() == 3);
  CHECK(cdf[0] == std::pair<double, double>{1, 1.0 / 3.0});
  CHECK(cdf[1].second == doctest::Approx(2.0 / 3.0));
  CHECK(cdf[2] == std::pair<double, double>{3, 1.0});
  const auto single = empirical_cdf({4});
  CHECK(single == std::vector<std::pair<double, double>>{{4, 1.0}});
  CHECK(ccdf_at({1, 2, 3}, 1.5) == doctest::Approx(2.0 / 3.0));
  CHECK(empirical_ccdf({1, 2, 3}).back().second == 0.0);
  CHECK(empirical_cdf({2, 2, 5}) == std::vector<std::pair<double, double>>{{2, 2.0 / 3.0}, {5, 1.0}});
}

TEST_CASE("CSV layout") {
  MetricsReport r;
  r.rho_d = 1.5;
  r.rho_u["LF"] = 2.0;
  const auto rows = metrics_csv_rows(0xabc, 7, "omr-ff", "ideal", r);
  CHECK(metrics_csv_header() == "config_hash,seed,protocol,mac,metric,value\n");
  CHECK(rows.rfind("abc,7,omr-ff,ideal,rho_d,1.5\n", 0) == 0);
  CHECK(rows.find("abc,7,omr-ff,ideal,rho_s,\n") != std::string::npos);
  CHECK(rows.find("rho_u_LF,2\n") != std::string::npos);
  CHECK(distribution_csv({{1, 0.5}}) == "value,probability\n1,0.5\n");
}

TEST_CASE("metrics on simulated traces") {
  SimConfig c;
  c.graph = make_preset("paper-random", 2);
  for (auto p : {Protocol::OmrFF, Protocol::Flooding}) {
    c.protocol = p;
    const auto log = run_simulation(c, 2).trace;
    const auto r = compute_metrics(log);
    CHECK(compute_metrics(parse_trace(serialize_trace(log))).rho_g == r.rho_g);
    REQUIRE(r.rho_s);
    CHECK(*r.rho_s >= 0.0);
    CHECK(*r.rho_s <= 1.0);

    // goodput over unique bytes never exceeds the duplicate-inclusive figure
    const auto d = digest_trace(log);
    double unique = 0;
    for (const auto& [key, row] : d.messages) unique += double(std::min(row.received_bits, row.bits)) / 8.0;
    unique /= c.t_net * double(d.node_count - 1);
    CHECK(r.rho_g >= unique - 1e-9);
    if (r.rho_o == 0.0) CHECK(r.rho_g == doctest::Approx(unique));
  }
}
