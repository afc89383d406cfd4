#include "omr/trace.hpp"

#include "omr/fragment.hpp"

#include <charconv>
#include <cstring>
#include <type_traits>

namespace omr {

namespace {

class Writer {
 public:
  explicit Writer(char tag) { out_.push_back(tag); }

  Writer& num(double v) {
    sep();
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out_.append(buf, r.ptr);
    return *this;
  }
  template <typename I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
  Writer& num(I v) {
    sep();
    raw_int(v);
    return *this;
  }
  Writer& hex(std::uint64_t v) {
    sep();
    char buf[24];
    auto r = std::to_chars(buf, buf + sizeof buf, v, 16);
    out_.append(buf, r.ptr);
    return *this;
  }
  Writer& word(std::string_view s) {
    sep();
    out_.append(s.empty() ? std::string_view("-") : s);
    return *this;
  }
  template <typename I>
  Writer& ids(const std::vector<I>& v, char delim = ',') {
    sep();
    if (v.empty()) out_.push_back('-');
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) out_.push_back(delim);
      raw_int(static_cast<std::uint64_t>(v[k]));
    }
    return *this;
  }
  std::string& str() { return out_; }

  template <typename I>
  void raw_int(I v) {
    char buf[24];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out_.append(buf, r.ptr);
  }
  void raw(char c) { out_.push_back(c); }

 private:
  void sep() { out_.push_back(' '); }
  std::string out_;
};

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T to_num(std::string_view s, int base = 10) {
  T v{};
  std::from_chars_result r;
  if constexpr (std::is_floating_point_v<T>)
    r = std::from_chars(s.data(), s.data() + s.size(), v);
  else
    r = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw TraceParseError("bad number '" + std::string(s) + "'");
  return v;
}

template <typename I>
std::vector<I> to_ids(std::string_view s, char delim = ',') {
  std::vector<I> out;
  if (s == "-") return out;
  for (auto p : split(s, delim)) out.push_back(static_cast<I>(to_num<std::uint64_t>(p)));
  return out;
}

struct Fields {
  std::vector<std::string_view> f;
  std::size_t pos = 1;

  std::string_view next() {
    if (pos >= f.size()) throw TraceParseError("missing field");
    return f[pos++];
  }
  template <typename T>
  T num() {
    return to_num<T>(next());
  }
  void done() const {
    if (pos != f.size()) throw TraceParseError("trailing fields");
  }
};

std::string word_or_empty(std::string_view s) { return s == "-" ? std::string() : std::string(s); }

std::string serialize_fragment_list(const std::vector<FragmentRecord>& frags) {
  Writer w('\0');
  std::string& s = w.str();
  s.clear();
  if (frags.empty()) return "-";
  for (std::size_t k = 0; k < frags.size(); ++k) {
    const auto& f = frags[k];
    if (k) s.push_back(';');
    w.raw_int(f.origin);
    w.raw(':');
    w.raw_int(f.msg_id);
    w.raw(':');
    w.raw_int(f.offset);
    w.raw(':');
    w.raw_int(f.length);
    w.raw(':');
    w.raw_int(f.total);
    w.raw(':');
    w.raw_int(f.header);
    w.raw(':');
    char buf[24];
    auto r = std::to_chars(buf, buf + sizeof buf, f.digest, 16);
    s.append(buf, r.ptr);
    w.raw(':');
    for (std::size_t p = 0; p < f.path.size(); ++p) {
      if (p) s.push_back('.');
      w.raw_int(f.path[p]);
    }
  }
  return s;
}

std::vector<FragmentRecord> parse_fragment_list(std::string_view s) {
  std::vector<FragmentRecord> out;
  if (s == "-") return out;
  for (auto item : split(s, ';')) {
    auto p = split(item, ':');
    if (p.size() != 8) throw TraceParseError("bad fragment '" + std::string(item) + "'");
    FragmentRecord f;
    f.origin = to_num<NodeId>(p[0]);
    f.msg_id = to_num<std::uint32_t>(p[1]);
    f.offset = to_num<Bits>(p[2]);
    f.length = to_num<Bits>(p[3]);
    f.total = to_num<Bits>(p[4]);
    f.header = to_num<Bits>(p[5]);
    f.digest = to_num<std::uint64_t>(p[6], 16);
    f.path = to_ids<NodeId>(p[7], '.');
    out.push_back(std::move(f));
  }
  return out;
}

struct Serializer {
  std::string operator()(const HeaderRecord& r) const {
    Writer w('H');
    w.num(r.seed).hex(r.config_hash).word(r.protocol).word(r.mac).num(r.t_net).num(r.period_u).num(r.sink).num(
        r.node_count);
    std::string techs;
    for (std::size_t k = 0; k < r.technologies.size(); ++k) techs += (k ? "," : "") + r.technologies[k];
    w.word(techs);
    return std::move(w.str());
  }
  std::string operator()(const NodeRecord& r) const {
    Writer w('N');
    w.num(r.id).num(r.x).num(r.y).num(r.z).ids(r.technologies);
    return std::move(w.str());
  }
  std::string operator()(const LinkRecord& r) const {
    Writer w('L');
    w.num(r.a).num(r.b).num(static_cast<unsigned>(r.tech));
    return std::move(w.str());
  }
  std::string operator()(const UpstreamRecord& r) const {
    Writer w('Y');
    w.num(r.node).ids(r.upstream);
    return std::move(w.str());
  }
  std::string operator()(const MessageRecord& r) const {
    Writer w('M');
    w.num(r.time).num(r.origin).num(r.msg_id).num(r.bits);
    return std::move(w.str());
  }
  std::string operator()(const ProblemRecord& r) const {
    Writer w(r.kind);
    w.num(r.time).num(r.node).num(r.neighbor).num(r.backlog);
    std::string slots;
    for (std::size_t k = 0; k < r.slots.size(); ++k) {
      const auto& s = r.slots[k];
      if (k) slots += ';';
      slots += std::to_string(s.neighbor) + ':' + std::to_string(s.tech) + ':' + std::to_string(s.cap) + ':' +
               std::to_string(s.bits);
    }
    w.word(slots);
    std::string limits;
    for (std::size_t k = 0; k < r.limits.size(); ++k) {
      if (k) limits += ';';
      limits += std::to_string(r.limits[k].first) + ':' + std::to_string(r.limits[k].second);
    }
    w.word(limits);
    return std::move(w.str());
  }
  std::string operator()(const TxRecord& r) const {
    Writer w('X');
    w.num(r.time).num(r.tx).num(r.sender).num(r.receiver).num(static_cast<unsigned>(r.tech));
    w.word(std::string_view(reinterpret_cast<const char*>(&r.kind), 1));
    w.num(r.wire_bits).num(r.duration).num(r.acked_tx).word(serialize_fragment_list(r.fragments));
    return std::move(w.str());
  }
  std::string operator()(const RxRecord& r) const {
    Writer w('R');
    w.num(r.time).num(r.tx).num(r.receiver).word(std::string_view(&r.outcome, 1)).word(r.mask);
    return std::move(w.str());
  }
  std::string operator()(const AckRecord& r) const {
    Writer w('K');
    w.num(r.time).num(r.tx).word(r.mask);
    return std::move(w.str());
  }
  std::string operator()(const TimeoutRecord& r) const {
    Writer w('T');
    w.num(r.time).num(r.tx);
    return std::move(w.str());
  }
  std::string operator()(const CompleteRecord& r) const {
    Writer w('C');
    w.num(r.time).num(r.origin).num(r.msg_id).num(r.exact ? 1 : 0);
    return std::move(w.str());
  }
  std::string operator()(const QueueRecord& r) const {
    Writer w('Q');
    w.num(r.time).num(r.node).word(std::string_view(&r.reason, 1)).num(r.delta).num(r.backlog);
    return std::move(w.str());
  }
  std::string operator()(const SuppressRecord& r) const {
    Writer w('S');
    w.num(r.time).num(r.node).word(std::string_view(&r.reason, 1)).num(r.origin).num(r.msg_id).num(r.offset).num(
        r.length);
    return std::move(w.str());
  }
};

char single_char(std::string_view s) {
  if (s.size() != 1) throw TraceParseError("expected one character, got '" + std::string(s) + "'");
  return s[0];
}

}  // namespace

const HeaderRecord& TraceLog::header() const {
  for (const auto& r : records)
    if (auto h = std::get_if<HeaderRecord>(&r)) return *h;
  throw TraceParseError("trace has no header");
}

std::string serialize_record(const TraceRecord& r) { return std::visit(Serializer{}, r); }

TraceRecord parse_record(std::string_view line) {
  Fields in{split(line, ' ')};
  if (in.f.empty() || in.f[0].size() != 1) throw TraceParseError("bad record tag");
  const char tag = in.f[0][0];
  switch (tag) {
    case 'H': {
      HeaderRecord r;
      r.seed = in.num<std::uint64_t>();
      r.config_hash = to_num<std::uint64_t>(in.next(), 16);
      r.protocol = std::string(in.next());
      r.mac = std::string(in.next());
      r.t_net = in.num<double>();
      r.period_u = in.num<double>();
      r.sink = in.num<NodeId>();
      r.node_count = in.num<int>();
      auto techs = in.next();
      if (techs != "-")
        for (auto t : split(techs, ',')) r.technologies.emplace_back(t);
      in.done();
      return r;
    }
    case 'N': {
      NodeRecord r;
      r.id = in.num<NodeId>();
      r.x = in.num<double>();
      r.y = in.num<double>();
      r.z = in.num<double>();
      r.technologies = to_ids<TechId>(in.next());
      in.done();
      return r;
    }
    case 'L': {
      LinkRecord r;
      r.a = in.num<NodeId>();
      r.b = in.num<NodeId>();
      r.tech = static_cast<TechId>(in.num<unsigned>());
      in.done();
      return r;
    }
    case 'Y': {
      UpstreamRecord r;
      r.node = in.num<NodeId>();
      r.upstream = to_ids<NodeId>(in.next());
      in.done();
      return r;
    }
    case 'M': {
      MessageRecord r;
      r.time = in.num<double>();
      r.origin = in.num<NodeId>();
      r.msg_id = in.num<std::uint32_t>();
      r.bits = in.num<Bits>();
      in.done();
      return r;
    }
    case 'A':
    case 'E': {
      ProblemRecord r;
      r.kind = tag;
      r.time = in.num<double>();
      r.node = in.num<NodeId>();
      r.neighbor = in.num<NodeId>();
      r.backlog = in.num<Bits>();
      auto slots = in.next();
      if (slots != "-")
        for (auto s : split(slots, ';')) {
          auto p = split(s, ':');
          if (p.size() != 4) throw TraceParseError("bad slot");
          r.slots.push_back({to_num<NodeId>(p[0]), static_cast<TechId>(to_num<unsigned>(p[1])), to_num<Bits>(p[2]),
                             to_num<Bits>(p[3])});
        }
      auto limits = in.next();
      if (limits != "-")
        for (auto s : split(limits, ';')) {
          auto p = split(s, ':');
          if (p.size() != 2) throw TraceParseError("bad limit");
          r.limits.emplace_back(to_num<NodeId>(p[0]), to_num<Bits>(p[1]));
        }
      in.done();
      return r;
    }
    case 'X': {
      TxRecord r;
      r.time = in.num<double>();
      r.tx = in.num<std::uint64_t>();
      r.sender = in.num<NodeId>();
      r.receiver = in.num<NodeId>();
      r.tech = static_cast<TechId>(in.num<unsigned>());
      const char k = single_char(in.next());
      if (k != 'D' && k != 'B' && k != 'K') throw TraceParseError("bad tx kind");
      r.kind = static_cast<TxKind>(k);
      r.wire_bits = in.num<Bits>();
      r.duration = in.num<double>();
      r.acked_tx = in.num<std::uint64_t>();
      r.fragments = parse_fragment_list(in.next());
      in.done();
      return r;
    }
    case 'R': {
      RxRecord r;
      r.time = in.num<double>();
      r.tx = in.num<std::uint64_t>();
      r.receiver = in.num<NodeId>();
      r.outcome = single_char(in.next());
      r.mask = word_or_empty(in.next());
      in.done();
      return r;
    }
    case 'K': {
      AckRecord r;
      r.time = in.num<double>();
      r.tx = in.num<std::uint64_t>();
      r.mask = word_or_empty(in.next());
      in.done();
      return r;
    }
    case 'T': {
      TimeoutRecord r;
      r.time = in.num<double>();
      r.tx = in.num<std::uint64_t>();
      in.done();
      return r;
    }
    case 'C': {
      CompleteRecord r;
      r.time = in.num<double>();
      r.origin = in.num<NodeId>();
      r.msg_id = in.num<std::uint32_t>();
      r.exact = in.num<int>() != 0;
      in.done();
      return r;
    }
    case 'Q': {
      QueueRecord r;
      r.time = in.num<double>();
      r.node = in.num<NodeId>();
      r.reason = single_char(in.next());
      r.delta = in.num<Bits>();
      r.backlog = in.num<Bits>();
      in.done();
      return r;
    }
    case 'S': {
      SuppressRecord r;
      r.time = in.num<double>();
      r.node = in.num<NodeId>();
      r.reason = single_char(in.next());
      r.origin = in.num<NodeId>();
      r.msg_id = in.num<std::uint32_t>();
      r.offset = in.num<Bits>();
      r.length = in.num<Bits>();
      in.done();
      return r;
    }
    default:
      throw TraceParseError(std::string("unknown record tag '") + tag + "'");
  }
}

std::string serialize_trace(const TraceLog& log) {
  std::string out;
  for (const auto& r : log.records) {
    out += serialize_record(r);
    out.push_back('\n');
  }
  return out;
}

TraceLog parse_trace(std::string_view text) {
  TraceLog log;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      log.records.push_back(parse_record(line));
    } catch (const TraceParseError& e) {
      throw TraceParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

std::uint64_t trace_hash(const TraceLog& log) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : log.records) {
    const auto line = serialize_record(r);
    h = fnv1a64({reinterpret_cast<const std::uint8_t*>(line.data()), line.size()}, h);
    const std::uint8_t nl = '\n';
    h = fnv1a64({&nl, 1}, h);
  }
  return h;
}

}  // namespace omr
