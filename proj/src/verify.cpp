#include "omr/verify.hpp"

#include "omr/fragment.hpp"
#include "omr/metrics.hpp"
#include "omr/queue.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace omr {

namespace {

constexpr double kTimeEps = 1e-9;

using MessageKey = std::pair<NodeId, std::uint32_t>;

std::string frag_id(const FragmentRecord& f) {
  return std::to_string(f.origin) + ":" + std::to_string(f.msg_id) + "@" + std::to_string(f.offset) + "+" +
         std::to_string(f.length);
}

class Auditor {
 public:
  explicit Auditor(const TraceLog& log) : log_(log) {
    for (const char* name : {"header", "constraints", "loop_freedom", "fragment_bounds", "digests", "reassembly",
                             "causality", "backlog_replay", "medium_exclusivity", "ideal_no_collisions",
                             "metric_ranges"})
      checks_.push_back({name, true, {}});
  }

  std::vector<CheckResult> run() {
    if (log_.records.empty() || !std::holds_alternative<HeaderRecord>(log_.records.front())) {
      flag("header", "first record is not a header");
      return checks_;
    }
    header_ = &std::get<HeaderRecord>(log_.records.front());
    ideal_ = header_->mac == "ideal";
    double last_time = 0.0;
    for (std::size_t k = 1; k < log_.records.size(); ++k) {
      const auto& rec = log_.records[k];
      std::visit([&](const auto& r) { visit(r, k, last_time); }, rec);
    }
    finish();
    return checks_;
  }

 private:
  void flag(const std::string& check, const std::string& detail) {
    for (auto& c : checks_)
      if (c.name == check && c.passed) {
        c.passed = false;
        c.detail = detail;
      }
  }

  void timed(double t, std::size_t line, double& last) {
    if (t + kTimeEps < last) flag("causality", "record " + std::to_string(line) + " goes back in time");
    last = std::max(last, t);
  }

  void visit(const HeaderRecord&, std::size_t line, double&) {
    flag("header", "second header at record " + std::to_string(line));
  }
  void visit(const NodeRecord&, std::size_t, double&) {}
  void visit(const LinkRecord&, std::size_t, double&) {}
  void visit(const UpstreamRecord&, std::size_t, double&) {}

  void visit(const MessageRecord& m, std::size_t line, double& last) {
    timed(m.time, line, last);
    messages_[{m.origin, m.msg_id}] = m;
  }

  void visit(const ProblemRecord& p, std::size_t line, double& last) {
    timed(p.time, line, last);
    const std::string where = std::string(1, p.kind) + " record " + std::to_string(line) + " (node " +
                              std::to_string(p.node) + ")";
    Bits total = 0;
    std::map<NodeId, Bits> per_neighbor;
    for (const auto& s : p.slots) {
      if (s.bits < 0 || s.bits % 8 != 0) flag("constraints", where + ": allocation not a whole number of bytes");
      if (s.bits > s.cap) flag("constraints", where + ": capacity exceeded on neighbour " + std::to_string(s.neighbor));
      total += s.bits;
      per_neighbor[s.neighbor] += s.bits;
    }
    if (total > std::max<Bits>(0, p.backlog)) flag("constraints", where + ": allocates more than the backlog");
    for (const auto& [j, limit] : p.limits)
      if (per_neighbor[j] > limit) flag("constraints", where + ": residual limit exceeded on neighbour " + std::to_string(j));
  }

  void visit(const TxRecord& x, std::size_t line, double& last) {
    timed(x.time, line, last);
    txs_[x.tx] = &x;
    if (x.kind == TxKind::Ack) {
      auto it = txs_.find(x.acked_tx);
      if (it == txs_.end() || it->second->kind == TxKind::Ack)
        flag("causality", "ack frame " + std::to_string(x.tx) + " for an unknown data frame");
    }
    if (x.kind != TxKind::Ack || !ideal_) {
      auto& end = radio_busy_[{x.sender, x.tech}];
      if (x.time + kTimeEps < end)
        flag("medium_exclusivity", "node " + std::to_string(x.sender) + " starts frame " + std::to_string(x.tx) +
                                       " while its radio is still transmitting");
      end = std::max(end, x.time + x.duration);
    }
    for (const auto& f : x.fragments) check_fragment(x, f);
  }

  void check_fragment(const TxRecord& x, const FragmentRecord& f) {
    std::set<NodeId> seen;
    for (auto id : f.path)
      if (!seen.insert(id).second)
        flag("loop_freedom", "fragment " + frag_id(f) + " in frame " + std::to_string(x.tx) + " repeats node " +
                                 std::to_string(id) + " in its path");
    if (f.path.empty() || f.path.front() != f.origin || f.path.back() != x.sender)
      flag("loop_freedom", "fragment " + frag_id(f) + " path does not run from origin to sender");

    auto m = messages_.find({f.origin, f.msg_id});
    if (m == messages_.end()) {
      flag("causality", "fragment " + frag_id(f) + " sent before its message was generated");
      return;
    }
    const Bits total = m->second.bits;
    if (f.total != total || f.length <= 0 || f.offset < 0 || f.offset + f.length > total || f.offset % 8 != 0 ||
        f.length % 8 != 0) {
      flag("fragment_bounds", "fragment " + frag_id(f) + " out of bounds for a " + std::to_string(total) + "-bit message");
      return;
    }
    auto& content = contents_[{f.origin, f.msg_id}];
    if (content.empty()) content = message_content(f.origin, f.msg_id, total);
    const auto* begin = content.data() + f.offset / 8;
    if (fnv1a64({begin, static_cast<std::size_t>(f.length / 8)}) != f.digest)
      flag("digests", "fragment " + frag_id(f) + " carries bytes that differ from its message");
  }

  void visit(const RxRecord& r, std::size_t line, double& last) {
    timed(r.time, line, last);
    auto it = txs_.find(r.tx);
    if (it == txs_.end()) {
      flag("causality", "reception of unknown frame " + std::to_string(r.tx));
      return;
    }
    const TxRecord& x = *it->second;
    if (r.time + kTimeEps < x.time + x.duration)
      flag("causality", "frame " + std::to_string(r.tx) + " received before it finished");
    if (ideal_ && r.outcome != 'O') flag("ideal_no_collisions", "frame " + std::to_string(r.tx) + " lost to a collision");
    if (r.receiver != header_->sink) return;
    for (std::size_t k = 0; k < r.mask.size() && k < x.fragments.size(); ++k) {
      if (r.mask[k] != '1') continue;
      const auto& f = x.fragments[k];
      sink_cover_[{f.origin, f.msg_id}].insert(f.offset, f.offset + f.length);
    }
  }

  void visit(const AckRecord& a, std::size_t line, double& last) {
    timed(a.time, line, last);
    settle(a.tx, "ack");
  }

  void visit(const TimeoutRecord& t, std::size_t line, double& last) {
    timed(t.time, line, last);
    settle(t.tx, "timeout");
  }

  void settle(std::uint64_t tx, const char* what) {
    auto it = txs_.find(tx);
    if (it == txs_.end() || it->second->kind == TxKind::Ack) {
      flag("causality", std::string(what) + " for unknown data frame " + std::to_string(tx));
      return;
    }
    if (!settled_.insert(tx).second) flag("causality", "data frame " + std::to_string(tx) + " settled twice");
  }

  void visit(const CompleteRecord& c, std::size_t line, double& last) {
    timed(c.time, line, last);
    const MessageKey key{c.origin, c.msg_id};
    const std::string id = std::to_string(c.origin) + ":" + std::to_string(c.msg_id);
    auto m = messages_.find(key);
    if (m == messages_.end()) {
      flag("causality", "message " + id + " completed but never generated");
      return;
    }
    if (!completed_.insert(key).second) flag("reassembly", "message " + id + " completed twice");
    if (!c.exact) flag("reassembly", "message " + id + " reassembled with wrong bytes");
    auto cover = sink_cover_.find(key);
    if (cover == sink_cover_.end() || !cover->second.covers(0, m->second.bits))
      flag("reassembly", "message " + id + " completed without full coverage");
  }

  void visit(const QueueRecord& q, std::size_t line, double& last) {
    timed(q.time, line, last);
    auto& b = backlog_[q.node];
    if (b + q.delta != q.backlog || q.backlog < 0)
      flag("backlog_replay", "node " + std::to_string(q.node) + " backlog " + std::to_string(q.backlog) +
                                 " does not follow from " + std::to_string(b) + " + " + std::to_string(q.delta));
    b = q.backlog;
  }

  void visit(const SuppressRecord& s, std::size_t line, double& last) { timed(s.time, line, last); }

  void finish() {
    for (const auto& [key, cover] : sink_cover_) {
      auto m = messages_.find(key);
      if (m != messages_.end() && cover.covers(0, m->second.bits) && !completed_.count(key))
        flag("reassembly", "message " + std::to_string(key.first) + ":" + std::to_string(key.second) +
                               " fully received but never completed");
    }
    const auto r = compute_metrics(log_);
    bool ok = r.rho_g >= 0 && r.rho_o >= 0 && r.rho_e >= 0 && (!r.rho_d || *r.rho_d >= 0);
    if (r.rho_s && (*r.rho_s < 0 || *r.rho_s > 1)) ok = false;
    for (const auto& [t, v] : r.rho_u) ok = ok && v >= 0;
    if (r.rho_s && *r.rho_s == 1.0 && !r.rho_d) ok = false;
    if (!ok) flag("metric_ranges", "a metric left its range");
  }

  const TraceLog& log_;
  const HeaderRecord* header_ = nullptr;
  bool ideal_ = true;
  std::vector<CheckResult> checks_;
  std::map<MessageKey, MessageRecord> messages_;
  std::map<MessageKey, std::vector<std::uint8_t>> contents_;
  std::unordered_map<std::uint64_t, const TxRecord*> txs_;
  std::map<std::pair<NodeId, TechId>, double> radio_busy_;
  std::set<std::uint64_t> settled_;
  std::map<MessageKey, IntervalSet> sink_cover_;
  std::set<MessageKey> completed_;
  std::map<NodeId, Bits> backlog_;
};

}  // namespace

bool TraceAudit::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

bool DirectoryAudit::passed() const {
  return corrupt.empty() && std::all_of(runs.begin(), runs.end(), [](const TraceAudit& a) { return a.passed(); });
}

TraceAudit audit_trace(const TraceLog& log, std::string run) {
  return {std::move(run), Auditor(log).run()};
}

DirectoryAudit audit_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  DirectoryAudit out;
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("trace_", 0) == 0 && e.path().extension() == ".log")
        files.push_back(e.path());
    }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const auto label = fs::relative(p, dir).generic_string();
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      out.runs.push_back(audit_trace(parse_trace(ss.str()), label));
    } catch (const std::exception& e) {
      out.corrupt.push_back(label + ": " + e.what());
    }
  }
  return out;
}

std::string format_audit(const DirectoryAudit& audit) {
  std::ostringstream os;
  for (const auto& run : audit.runs)
    for (const auto& c : run.checks) {
      os << (c.passed ? "PASS " : "FAIL ") << run.run << " " << c.name;
      if (!c.passed) os << ": " << c.detail;
      os << "\n";
    }
  for (const auto& c : audit.corrupt) os << "CORRUPT " << c << "\n";
  std::size_t failed = 0;
  for (const auto& run : audit.runs) failed += run.passed() ? 0 : 1;
  os << audit.runs.size() << " runs audited, " << failed << " failed, " << audit.corrupt.size() << " corrupt\n";
  return os.str();
}

}  // namespace omr
