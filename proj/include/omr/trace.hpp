#pragma once

#include "omr/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace omr {

struct HeaderRecord {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string protocol;
  std::string mac;
  double t_net = 0.0;
  double period_u = 0.0;
  NodeId sink = 0;
  int node_count = 0;
  std::vector<std::string> technologies;  // index = TechId
};

struct NodeRecord {
  NodeId id = 0;
  double x = 0, y = 0, z = 0;
  std::vector<TechId> technologies;
};

struct LinkRecord {
  NodeId a = 0, b = 0;
  TechId tech = 0;
};

struct UpstreamRecord {
  NodeId node = 0;
  std::vector<NodeId> upstream;
};

struct MessageRecord {
  double time = 0;
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  Bits bits = 0;
};

struct SlotRecord {
  NodeId neighbor = 0;
  TechId tech = 0;
  Bits cap = 0;
  Bits bits = 0;
};

/// One allocation decision ('A') or one neighbour estimate ('E').
struct ProblemRecord {
  char kind = 'A';
  double time = 0;
  NodeId node = 0;
  NodeId neighbor = 0;
  Bits backlog = 0;
  std::vector<SlotRecord> slots;
  std::vector<std::pair<NodeId, Bits>> limits;
};

struct FragmentRecord {
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  Bits offset = 0, length = 0, total = 0;
  Bits header = 0;
  std::uint64_t digest = 0;
  std::vector<NodeId> path;
};

enum class TxKind : char { Data = 'D', Broadcast = 'B', Ack = 'K' };

struct TxRecord {
  double time = 0;
  std::uint64_t tx = 0;
  NodeId sender = 0, receiver = 0;
  TechId tech = 0;
  TxKind kind = TxKind::Data;
  Bits wire_bits = 0;
  double duration = 0;
  std::uint64_t acked_tx = 0;  // ack frames only
  std::vector<FragmentRecord> fragments;
};

/// Reception of a data or broadcast frame by an addressed receiver.
/// outcome: 'O' decoded (see mask), 'C' collision, 'H' half-duplex loss.
struct RxRecord {
  double time = 0;
  std::uint64_t tx = 0;
  NodeId receiver = 0;
  char outcome = 'O';
  std::string mask;  // '1' per fragment decoded
};

struct AckRecord {
  double time = 0;
  std::uint64_t tx = 0;
  std::string mask;
};

struct TimeoutRecord {
  double time = 0;
  std::uint64_t tx = 0;
};

struct CompleteRecord {
  double time = 0;
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  bool exact = true;
};

/// Backlog change at a node. reason: G generated, R received, A acked,
/// B broadcast without acks, X dropped after the retry cap.
struct QueueRecord {
  double time = 0;
  NodeId node = 0;
  char reason = 'G';
  Bits delta = 0;
  Bits backlog = 0;
};

/// reason: L path loop, C neighbours covered, D duplicate copy.
struct SuppressRecord {
  double time = 0;
  NodeId node = 0;
  char reason = 'L';
  NodeId origin = 0;
  std::uint32_t msg_id = 0;
  Bits offset = 0, length = 0;
};

using TraceRecord = std::variant<HeaderRecord, NodeRecord, LinkRecord, UpstreamRecord, MessageRecord, ProblemRecord,
                                 TxRecord, RxRecord, AckRecord, TimeoutRecord, CompleteRecord, QueueRecord,
                                 SuppressRecord>;

struct TraceLog {
  std::vector<TraceRecord> records;

  template <typename R>
  void add(R&& r) {
    records.emplace_back(std::forward<R>(r));
  }
  const HeaderRecord& header() const;
};

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_record(const TraceRecord& r);
TraceRecord parse_record(std::string_view line);

std::string serialize_trace(const TraceLog& log);
/// Throws TraceParseError naming the first bad line.
TraceLog parse_trace(std::string_view text);

/// FNV-1a over the serialized form.
std::uint64_t trace_hash(const TraceLog& log);

}  // namespace omr
