#include "omr/fragment.hpp"
#include "omr/queue.hpp"
#include "omr/random.hpp"

#include <doctest.h>

using namespace omr;

namespace {

Fragment origin_fragment(NodeId origin, std::uint32_t id, Bits bits) {
  return make_origin_fragment(Message{origin, id, bits, 0.0});
}

std::vector<std::uint8_t> bytes_of(const Fragment& f) { return *f.payload; }

}  // namespace

TEST_CASE("origin fragment carries the whole message") {
  const auto f = origin_fragment(3, 7, 4000);
  CHECK(f.offset == 0);
  CHECK(f.length == 4000);
  CHECK(f.total_length == 4000);
  CHECK(f.path == std::vector<NodeId>{3});
  CHECK(bytes_of(f) == message_content(3, 7, 4000));
  CHECK(f.digest == fnv1a64(message_content(3, 7, 4000)));
  CHECK(message_content(3, 7, 4000) != message_content(3, 8, 4000));
}

TEST_CASE("header size follows the wire layout") {
  auto f = origin_fragment(1, 1, 800);
  // 1 + 2 + 4 + 4 + 4 + 1 bytes of fixed fields, one path id, one flag byte
  CHECK(header_bits(f) == 8 * (1 + 2 + 4 + 4 + 4 + 1 + 1 + 1));
  f.piggyback.backlog = 12;
  f.piggyback.fair_shares = std::vector<std::pair<NodeId, std::uint8_t>>{{5, 10}, {6, 20}};
  CHECK(header_bits(f) == 8 * (18 + 1 + 1 + 2 * 2));
  CHECK(wire_bits(f) == header_bits(f) + 800);
}

TEST_CASE("split keeps bytes and offsets") {
  const auto f = origin_fragment(2, 4, 5000);
  auto [head, tail] = split_fragment(f, 1500);  // rounds down to 1496
  CHECK(head.offset == 0);
  CHECK(head.length == 1496);
  CHECK(tail.offset == 1496);
  CHECK(tail.length == 5000 - 1496);
  auto joined = bytes_of(head);
  const auto rest = bytes_of(tail);
  joined.insert(joined.end(), rest.begin(), rest.end());
  CHECK(joined == message_content(2, 4, 5000));
  CHECK(head.digest == fnv1a64(bytes_of(head)));
}

TEST_CASE("wire encoding round trip") {
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    auto f = origin_fragment(NodeId(rng.uniform_int(1, 200)), std::uint32_t(rng.uniform_int(0, 60000)),
                             8 * rng.uniform_int(1, 500));
    if (f.length > 16) f = split_fragment(f, 8 * rng.uniform_int(1, f.length / 8 - 1)).second;
    for (int h = 0; h < rng.uniform_int(0, 4); ++h) f.path.push_back(NodeId(rng.uniform_int(1, 200)));
    if (rng.bernoulli(0.5)) f.piggyback.backlog = std::uint8_t(rng.uniform_int(0, 255));
    if (rng.bernoulli(0.5))
      f.piggyback.fair_shares = std::vector<std::pair<NodeId, std::uint8_t>>{{NodeId(rng.uniform_int(1, 200)), 77}};
    const auto wire = encode_fragment(f);
    CHECK(static_cast<Bits>(wire.size()) * 8 == wire_bits(f));
    const auto g = decode_fragment(wire);
    CHECK(g.origin == f.origin);
    CHECK(g.msg_id == f.msg_id);
    CHECK(g.offset == f.offset);
    CHECK(g.length == f.length);
    CHECK(g.total_length == f.total_length);
    CHECK(g.path == f.path);
    CHECK(g.piggyback.backlog == f.piggyback.backlog);
    CHECK(g.piggyback.fair_shares == f.piggyback.fair_shares);
    CHECK(bytes_of(g) == bytes_of(f));
  }
}

TEST_CASE("wire encoding is big-endian") {
  auto f = origin_fragment(0x12, 0x3456, 16);
  const auto wire = encode_fragment(f);
  CHECK(wire[0] == 0x12);
  CHECK(wire[1] == 0x34);
  CHECK(wire[2] == 0x56);
  CHECK(wire[14] == 0x10);  // total_length low byte
}

TEST_CASE("malformed wire buffers are rejected") {
  const auto wire = encode_fragment(origin_fragment(1, 1, 64));
  CHECK_THROWS_AS(decode_fragment(std::span(wire).first(5)), std::invalid_argument);
  CHECK_THROWS_AS(decode_fragment(std::span(wire).first(wire.size() - 1)), std::invalid_argument);
}

TEST_CASE("quantisation") {
  CHECK(quantize_backlog(0) == 0);
  CHECK(quantize_backlog(-5) == 0);
  CHECK(quantize_backlog(Bits(1) << 40) == 255);
  for (Bits b : {1, 7, 100, 5000, 64000, 1000000}) {
    const auto q = quantize_backlog(b);
    CHECK(dequantize_backlog(q) >= b);
    CHECK(dequantize_backlog(q) <= static_cast<Bits>(1.0905 * b + 1));  // one bucket is 2^(1/8)
  }
  CHECK(quantize_share(1.0) == 255);
  CHECK(quantize_share(0.0) == 0);
  CHECK(dequantize_share(quantize_share(1.0 / 3.0)) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("queue slices head first and keeps the backlog") {
  NodeQueue q;
  q.push_back(origin_fragment(1, 1, 5000));
  q.push_back(origin_fragment(1, 2, 800));
  CHECK(q.backlog() == 5800);
  const auto a = q.take(1504);
  REQUIRE(a.size() == 1);
  CHECK(a[0].offset == 0);
  CHECK(a[0].length == 1504);
  const auto b = q.take(3496);
  REQUIRE(b.size() == 1);
  CHECK(b[0].offset == 1504);
  CHECK(b[0].end() == 5000);
  CHECK(q.backlog() == 800);
  const auto c = q.take(10000);
  CHECK(c.size() == 1);
  CHECK(q.empty());
  CHECK(q.backlog() == 0);
  CHECK(q.take(100).empty());
}

TEST_CASE("queue take spans several units") {
  NodeQueue q;
  q.push_back(origin_fragment(1, 1, 800));
  q.push_back(origin_fragment(1, 2, 800));
  const auto parts = q.take(1200);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].length == 800);
  CHECK(parts[1].length == 400);
  CHECK(q.backlog() == 400);
  CHECK(q.front().offset == 400);
}

TEST_CASE("interval set") {
  IntervalSet s;
  CHECK(s.insert(0, 100) == 0);
  CHECK(s.insert(200, 300) == 0);
  CHECK(s.insert(50, 250) == 100);
  CHECK(s.covers(0, 300));
  CHECK(s.covered() == 300);
  CHECK(s.intervals().size() == 1);
  CHECK_FALSE(s.covers(0, 301));
}

TEST_CASE("reassembly") {
  const auto whole = origin_fragment(4, 9, 1000);
  auto [a, b] = split_fragment(whole, 496);

  ReassemblyBuffer one;
  CHECK_FALSE(one.add(a, 1.0).completed_now);
  CHECK(one.add(b, 2.0).completed_now);
  CHECK(one.status(4, 9).complete);
  CHECK(one.status(4, 9).received_bits == 1000);
  CHECK(one.completed_at(4, 9) == 2.0);
  CHECK(one.content_matches(4, 9));
  CHECK(one.add(a, 3.0).duplicate_bits == 496);
  CHECK(one.completed_at(4, 9) == 2.0);

  ReassemblyBuffer twice;
  twice.add(a, 1.0);
  CHECK(twice.add(a, 2.0).duplicate_bits == 496);
  CHECK_FALSE(twice.status(4, 9).complete);
  CHECK(twice.status(4, 9).received_bits == 992);

  ReassemblyBuffer empty;
  CHECK_FALSE(empty.status(4, 9).complete);
  CHECK(empty.status(4, 9).received_bits == 0);

  ReassemblyBuffer conflict;
  conflict.add(a, 1.0);
  auto bad = b;
  bad.total_length = 2000;
  CHECK_THROWS_AS(conflict.add(bad, 2.0), std::runtime_error);
}
