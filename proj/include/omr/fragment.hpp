#pragma once

#include "omr/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace omr {

using Payload = std::shared_ptr<const std::vector<std::uint8_t>>;

/// Protocol state riding on a datagram: the sender's backlog and, for the
/// partial-topology variant, its fair shares at each upstream relay.
struct Piggyback {
  std::optional<std::uint8_t> backlog;                                    // quantised P
  std::optional<std::vector<std::pair<NodeId, std::uint8_t>>> fair_shares;  // (relay k, F_k(sender))

  bool empty() const { return !backlog && !fair_shares; }
};

struct Message {
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  Bits payload_bits = 0;
  double created_at = 0.0;
};

struct Fragment {
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  Bits offset = 0;  // bits from message start, byte aligned
  Bits length = 0;
  Bits total_length = 0;
  std::vector<NodeId> path;  // starts with origin, ends with the current holder
  Piggyback piggyback;
  Payload payload;  // exactly length/8 bytes
  std::uint64_t digest = 0;
  int attempts = 0;

  Bits end() const { return offset + length; }
};

inline constexpr Bits kFixedHeaderBits = 8 + 16 + 32 + 32 + 32 + 8 + 8;

Bits header_bits(const Fragment& f);
inline Bits wire_bits(const Fragment& f) { return header_bits(f) + f.length; }

/// Deterministic content of a message; both the origin and any auditor can
/// regenerate it.
std::vector<std::uint8_t> message_content(NodeId origin, std::uint32_t msg_id, Bits payload_bits);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Whole-message fragment as created at the origin.
Fragment make_origin_fragment(const Message& m);

/// Splits `f` into a head of `head_bits` (rounded down to bytes) and the rest.
std::pair<Fragment, Fragment> split_fragment(const Fragment& f, Bits head_bits);

std::vector<std::uint8_t> encode_fragment(const Fragment& f);
/// Throws std::invalid_argument on a malformed buffer.
Fragment decode_fragment(std::span<const std::uint8_t> wire);

/// Backlog in 256 logarithmic buckets: q = ceil(8 log2(1 + b)), saturating.
std::uint8_t quantize_backlog(Bits backlog);
Bits dequantize_backlog(std::uint8_t q);

std::uint8_t quantize_share(double share);
double dequantize_share(std::uint8_t q);

}  // namespace omr
