#include "omr/queue.hpp"

#include <algorithm>
#include <stdexcept>

namespace omr {

void NodeQueue::push_back(Fragment f) {
  backlog_ += f.length;
  fifo_.push_back(std::move(f));
}

void NodeQueue::push_front(Fragment f) {
  backlog_ += f.length;
  fifo_.push_front(std::move(f));
}

std::vector<Fragment> NodeQueue::take(Bits bits) {
  std::vector<Fragment> out;
  bits = floor_to_bytes(bits);
  while (bits > 0 && !fifo_.empty()) {
    Fragment& head = fifo_.front();
    if (head.length <= bits) {
      bits -= head.length;
      backlog_ -= head.length;
      out.push_back(std::move(head));
      fifo_.pop_front();
    } else {
      auto [first, rest] = split_fragment(head, bits);
      backlog_ -= first.length;
      bits = 0;
      head = std::move(rest);
      out.push_back(std::move(first));
    }
  }
  return out;
}

std::optional<Fragment> NodeQueue::pop_front() {
  if (fifo_.empty()) return std::nullopt;
  Fragment f = std::move(fifo_.front());
  fifo_.pop_front();
  backlog_ -= f.length;
  return f;
}

Bits IntervalSet::insert(Bits begin, Bits end) {
  if (end <= begin) return 0;
  Bits overlap = 0;
  auto it = spans_.upper_bound(begin);
  if (it != spans_.begin()) {
    auto prev = std::prev(it);
    if (prev->second >= begin) it = prev;
  }
  Bits lo = begin;
  Bits hi = end;
  while (it != spans_.end() && it->first <= end) {
    overlap += std::max<Bits>(0, std::min(it->second, end) - std::max(it->first, begin));
    lo = std::min(lo, it->first);
    hi = std::max(hi, it->second);
    it = spans_.erase(it);
  }
  spans_.emplace(lo, hi);
  return overlap;
}

bool IntervalSet::covers(Bits begin, Bits end) const {
  if (end <= begin) return true;
  auto it = spans_.upper_bound(begin);
  if (it == spans_.begin()) return false;
  --it;
  return it->first <= begin && it->second >= end;
}

Bits IntervalSet::covered() const {
  Bits sum = 0;
  for (const auto& [a, b] : spans_) sum += b - a;
  return sum;
}

ReassemblyBuffer::AddResult ReassemblyBuffer::add(const Fragment& f, double time) {
  auto& e = entries_[{f.origin, f.msg_id}];
  if (e.total == 0) {
    e.total = f.total_length;
    e.bytes.assign(static_cast<std::size_t>(f.total_length / 8), 0);
  } else if (e.total != f.total_length) {
    throw std::runtime_error("conflicting message length for " + std::to_string(f.origin) + ":" +
                             std::to_string(f.msg_id));
  }
  if (f.end() > e.total) throw std::runtime_error("fragment beyond message end");
  AddResult r;
  r.duplicate_bits = e.coverage.insert(f.offset, f.end());
  e.received += f.length;
  if (f.payload)
    std::copy(f.payload->begin(), f.payload->end(), e.bytes.begin() + static_cast<std::ptrdiff_t>(f.offset / 8));
  if (!e.completed && e.coverage.covers(0, e.total)) {
    e.completed = time;
    r.completed_now = true;
  }
  return r;
}

ReassemblyStatus ReassemblyBuffer::status(NodeId origin, std::uint32_t msg_id) const {
  auto it = entries_.find({origin, msg_id});
  if (it == entries_.end()) return {};
  return {it->second.coverage.covers(0, it->second.total), it->second.received};
}

std::optional<double> ReassemblyBuffer::completed_at(NodeId origin, std::uint32_t msg_id) const {
  auto it = entries_.find({origin, msg_id});
  return it == entries_.end() ? std::nullopt : it->second.completed;
}

bool ReassemblyBuffer::content_matches(NodeId origin, std::uint32_t msg_id) const {
  auto it = entries_.find({origin, msg_id});
  if (it == entries_.end()) return false;
  return it->second.bytes == message_content(origin, msg_id, it->second.total);
}

}  // namespace omr
