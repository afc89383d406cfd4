#include "omr/fragment.hpp"

#include "omr/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omr {

Bits header_bits(const Fragment& f) {
  Bits bits = kFixedHeaderBits + 8 * static_cast<Bits>(f.path.size());
  if (f.piggyback.backlog) bits += 8;
  if (f.piggyback.fair_shares) bits += 8 + 16 * static_cast<Bits>(f.piggyback.fair_shares->size());
  return bits;
}

std::vector<std::uint8_t> message_content(NodeId origin, std::uint32_t msg_id, Bits payload_bits) {
  const auto n = static_cast<std::size_t>(payload_bits / 8);
  std::vector<std::uint8_t> out(n);
  const std::uint64_t base = derive_seed(origin, {msg_id, 0xc0ffee});
  std::uint64_t word = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 8 == 0) word = splitmix64(base + k / 8);
    out[k] = static_cast<std::uint8_t>(word >> (8 * (k % 8)));
  }
  return out;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) {
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Fragment make_origin_fragment(const Message& m) {
  Fragment f;
  f.origin = m.origin;
  f.msg_id = m.msg_id;
  f.offset = 0;
  f.length = m.payload_bits;
  f.total_length = m.payload_bits;
  f.path = {m.origin};
  f.payload = std::make_shared<const std::vector<std::uint8_t>>(message_content(m.origin, m.msg_id, m.payload_bits));
  f.digest = fnv1a64(*f.payload);
  return f;
}

std::pair<Fragment, Fragment> split_fragment(const Fragment& f, Bits head_bits) {
  head_bits = std::clamp<Bits>(floor_to_bytes(head_bits), 0, f.length);
  Fragment head = f;
  Fragment tail = f;
  head.length = head_bits;
  tail.offset = f.offset + head_bits;
  tail.length = f.length - head_bits;
  tail.piggyback = {};
  const auto cut = static_cast<std::ptrdiff_t>(head_bits / 8);
  const auto& bytes = *f.payload;
  auto h = std::make_shared<std::vector<std::uint8_t>>(bytes.begin(), bytes.begin() + cut);
  auto t = std::make_shared<std::vector<std::uint8_t>>(bytes.begin() + cut, bytes.end());
  head.digest = fnv1a64(*h);
  tail.digest = fnv1a64(*t);
  head.payload = std::move(h);
  tail.payload = std::move(t);
  return {std::move(head), std::move(tail)};
}

namespace {

void put(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int k = bytes - 1; k >= 0; --k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

struct Reader {
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;

  std::uint64_t get(int bytes) {
    if (pos + static_cast<std::size_t>(bytes) > buf.size()) throw std::invalid_argument("fragment truncated");
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) v = (v << 8) | buf[pos++];
    return v;
  }
};

constexpr std::uint8_t kFlagBacklog = 0x01;
constexpr std::uint8_t kFlagShares = 0x02;

}  // namespace

std::vector<std::uint8_t> encode_fragment(const Fragment& f) {
  if (f.origin > 0xff) throw std::invalid_argument("node ids must fit in 8 bits");
  if (f.path.size() > 0xff) throw std::invalid_argument("path too long");
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(wire_bits(f) / 8));
  put(out, f.origin, 1);
  put(out, f.msg_id & 0xffff, 2);
  put(out, static_cast<std::uint64_t>(f.offset), 4);
  put(out, static_cast<std::uint64_t>(f.length), 4);
  put(out, static_cast<std::uint64_t>(f.total_length), 4);
  put(out, f.path.size(), 1);
  for (auto id : f.path) {
    if (id > 0xff) throw std::invalid_argument("node ids must fit in 8 bits");
    put(out, id, 1);
  }
  std::uint8_t flags = 0;
  if (f.piggyback.backlog) flags |= kFlagBacklog;
  if (f.piggyback.fair_shares) flags |= kFlagShares;
  put(out, flags, 1);
  if (f.piggyback.backlog) put(out, *f.piggyback.backlog, 1);
  if (f.piggyback.fair_shares) {
    put(out, f.piggyback.fair_shares->size(), 1);
    for (const auto& [relay, q] : *f.piggyback.fair_shares) {
      put(out, relay, 1);
      put(out, q, 1);
    }
  }
  if (f.payload) out.insert(out.end(), f.payload->begin(), f.payload->end());
  return out;
}

Fragment decode_fragment(std::span<const std::uint8_t> wire) {
  Reader r{wire};
  Fragment f;
  f.origin = static_cast<NodeId>(r.get(1));
  f.msg_id = static_cast<std::uint32_t>(r.get(2));
  f.offset = static_cast<Bits>(r.get(4));
  f.length = static_cast<Bits>(r.get(4));
  f.total_length = static_cast<Bits>(r.get(4));
  const auto hops = r.get(1);
  for (std::uint64_t k = 0; k < hops; ++k) f.path.push_back(static_cast<NodeId>(r.get(1)));
  const auto flags = static_cast<std::uint8_t>(r.get(1));
  if (flags & kFlagBacklog) f.piggyback.backlog = static_cast<std::uint8_t>(r.get(1));
  if (flags & kFlagShares) {
    const auto n = r.get(1);
    std::vector<std::pair<NodeId, std::uint8_t>> shares;
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto relay = static_cast<NodeId>(r.get(1));
      shares.emplace_back(relay, static_cast<std::uint8_t>(r.get(1)));
    }
    f.piggyback.fair_shares = std::move(shares);
  }
  if (f.length % 8 != 0 || f.offset % 8 != 0) throw std::invalid_argument("fragment not byte aligned");
  if (f.offset + f.length > f.total_length) throw std::invalid_argument("fragment exceeds message");
  const auto n = static_cast<std::size_t>(f.length / 8);
  if (wire.size() - r.pos != n) throw std::invalid_argument("payload length mismatch");
  auto bytes = std::make_shared<std::vector<std::uint8_t>>(wire.begin() + static_cast<std::ptrdiff_t>(r.pos), wire.end());
  f.digest = fnv1a64(*bytes);
  f.payload = std::move(bytes);
  return f;
}

std::uint8_t quantize_backlog(Bits backlog) {
  if (backlog <= 0) return 0;
  const double q = std::ceil(8.0 * std::log2(1.0 + static_cast<double>(backlog)));
  return static_cast<std::uint8_t>(std::min(255.0, q));
}

Bits dequantize_backlog(std::uint8_t q) {
  return static_cast<Bits>(std::llround(std::exp2(q / 8.0) - 1.0));
}

std::uint8_t quantize_share(double share) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(share, 0.0, 1.0) * 255.0));
}

double dequantize_share(std::uint8_t q) { return q / 255.0; }

}  // namespace omr
