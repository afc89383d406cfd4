#pragma once

#include "omr/fragment.hpp"

#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace omr {

/// FIFO of message slices awaiting service. `backlog()` counts queued bits only;
/// bits handed to a radio are tracked by the caller until acknowledged.
class NodeQueue {
 public:
  void push_back(Fragment f);
  void push_front(Fragment f);
  /// Removes up to `bits` from the head, splitting the last unit if needed.
  std::vector<Fragment> take(Bits bits);
  std::optional<Fragment> pop_front();

  Bits backlog() const { return backlog_; }
  bool empty() const { return fifo_.empty(); }
  std::size_t size() const { return fifo_.size(); }
  const Fragment& front() const { return fifo_.front(); }

 private:
  std::deque<Fragment> fifo_;
  Bits backlog_ = 0;
};

/// Disjoint half-open intervals [begin, end), merged on insert.
class IntervalSet {
 public:
  /// Returns the number of bits of [begin, end) that were already covered.
  Bits insert(Bits begin, Bits end);
  bool covers(Bits begin, Bits end) const;
  Bits covered() const;
  const std::map<Bits, Bits>& intervals() const { return spans_; }

 private:
  std::map<Bits, Bits> spans_;
};

struct ReassemblyStatus {
  bool complete = false;
  Bits received_bits = 0;  // duplicates included
};

/// Sink-side reassembly keyed by (origin, msg_id).
class ReassemblyBuffer {
 public:
  struct AddResult {
    bool completed_now = false;
    Bits duplicate_bits = 0;
  };

  /// Throws std::runtime_error if `f` disagrees with earlier fragments on the
  /// message length.
  AddResult add(const Fragment& f, double time);
  ReassemblyStatus status(NodeId origin, std::uint32_t msg_id) const;
  std::optional<double> completed_at(NodeId origin, std::uint32_t msg_id) const;
  /// Reassembled bytes equal the regenerated message content.
  bool content_matches(NodeId origin, std::uint32_t msg_id) const;

 private:
  struct Entry {
    Bits total = 0;
    IntervalSet coverage;
    Bits received = 0;
    std::optional<double> completed;
    std::vector<std::uint8_t> bytes;
  };
  std::map<std::pair<NodeId, std::uint32_t>, Entry> entries_;
};

}  // namespace omr
