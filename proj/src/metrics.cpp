#include "omr/metrics.hpp"

#include "omr/allocator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>

namespace omr {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string hex(std::uint64_t v) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, r.ptr);
}

}  // namespace

TraceDigest digest_trace(const TraceLog& log) {
  TraceDigest d;
  const auto& h = log.header();
  d.node_count = h.node_count;
  d.sink = h.sink;
  d.t_net = h.t_net;
  d.technologies = h.technologies;

  std::unordered_map<std::uint64_t, const TxRecord*> txs;
  for (const auto& rec : log.records) {
    if (auto n = std::get_if<NodeRecord>(&rec)) {
      d.node_technologies[n->id] = n->technologies;
    } else if (auto l = std::get_if<LinkRecord>(&rec)) {
      ++d.link_degree[{l->a, l->tech}];
      ++d.link_degree[{l->b, l->tech}];
    } else if (auto m = std::get_if<MessageRecord>(&rec)) {
      auto& row = d.messages[{m->origin, m->msg_id}];
      row.created = m->time;
      row.bits = m->bits;
    } else if (auto x = std::get_if<TxRecord>(&rec)) {
      txs[x->tx] = x;
      for (const auto& f : x->fragments) {
        auto it = d.messages.find({f.origin, f.msg_id});
        if (it != d.messages.end()) it->second.transmitted_bits += f.length + f.header;
      }
    } else if (auto r = std::get_if<RxRecord>(&rec)) {
      auto it = txs.find(r->tx);
      if (it == txs.end()) continue;
      const TxRecord& x = *it->second;
      for (std::size_t k = 0; k < r->mask.size() && k < x.fragments.size(); ++k) {
        if (r->mask[k] != '1') continue;
        const auto& f = x.fragments[k];
        d.link_bits[{x.sender, r->receiver, x.tech}] += f.length;
        if (r->receiver == d.sink) {
          auto m = d.messages.find({f.origin, f.msg_id});
          if (m != d.messages.end()) m->second.received_bits += f.length;
        }
      }
    } else if (auto c = std::get_if<CompleteRecord>(&rec)) {
      auto it = d.messages.find({c->origin, c->msg_id});
      if (it != d.messages.end() && !it->second.completed) it->second.completed = c->time;
    }
  }
  return d;
}

namespace {

struct NodeTotals {
  int generated = 0;
  int delivered = 0;
  int duplicated = 0;
  double delay_sum = 0.0;
};

std::map<NodeId, NodeTotals> per_node(const TraceDigest& d) {
  std::map<NodeId, NodeTotals> out;
  for (const auto& [key, row] : d.messages) {
    auto& n = out[key.first];
    ++n.generated;
    if (row.completed) {
      ++n.delivered;
      n.delay_sum += *row.completed - row.created;
    }
    if (row.bits > 0 && row.received_bits > row.bits) ++n.duplicated;
  }
  return out;
}

double sources(const TraceDigest& d) { return std::max(1, d.node_count - 1); }

}  // namespace

std::optional<double> compute_delay(const TraceDigest& d, std::vector<double>* per_message) {
  if (per_message) {
    per_message->clear();
    for (const auto& [key, row] : d.messages)
      if (row.completed) per_message->push_back(*row.completed - row.created);
  }
  double sum = 0.0;
  int counted = 0;
  for (const auto& [id, n] : per_node(d)) {
    if (n.delivered == 0) continue;
    sum += n.delay_sum / n.delivered;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / counted;
}

double compute_goodput(const TraceDigest& d) {
  double bytes = 0.0;
  for (const auto& [key, row] : d.messages) bytes += static_cast<double>(row.received_bits) / 8.0;
  return bytes / d.t_net / sources(d);
}

std::optional<double> compute_success_rate(const TraceDigest& d) {
  double sum = 0.0;
  int counted = 0;
  for (const auto& [id, n] : per_node(d)) {
    if (n.generated == 0) continue;
    sum += static_cast<double>(n.delivered) / n.generated;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / counted;
}

std::pair<double, double> compute_overhead(const TraceDigest& d) {
  double count = 0.0;
  double fraction = 0.0;
  int counted = 0;
  for (const auto& [id, n] : per_node(d)) {
    count += n.duplicated;
    if (n.generated > 0) {
      fraction += static_cast<double>(n.duplicated) / n.generated;
      ++counted;
    }
  }
  return {count / sources(d), counted ? fraction / counted : 0.0};
}

double compute_total_tx(const TraceDigest& d) {
  double bytes = 0.0;
  for (const auto& [key, row] : d.messages) bytes += static_cast<double>(row.transmitted_bits) / 8.0;
  const double messages = static_cast<double>(d.messages.size());
  if (messages == 0) return 0.0;
  return bytes / (sources(d) * messages * d.t_net);
}

std::optional<double> compute_link_throughput(const TraceDigest& d, TechId t) {
  double outer = 0.0;
  int holders = 0;
  for (const auto& [n, techs] : d.node_technologies) {
    if (std::find(techs.begin(), techs.end(), t) == techs.end()) continue;
    auto deg = d.link_degree.find({n, t});
    if (deg == d.link_degree.end() || deg->second == 0) continue;
    double inner = 0.0;
    for (auto it = d.link_bits.lower_bound({n, 0, 0}); it != d.link_bits.end() && std::get<0>(it->first) == n; ++it)
      if (std::get<2>(it->first) == t) inner += static_cast<double>(it->second) / 8.0 / d.t_net;
    outer += inner / deg->second;
    ++holders;
  }
  if (holders == 0) return std::nullopt;
  return outer / holders;
}

MetricsReport compute_metrics(const TraceLog& log) {
  const auto d = digest_trace(log);
  MetricsReport r;
  r.rho_d = compute_delay(d, &r.message_delays);
  r.rho_g = compute_goodput(d);
  r.rho_s = compute_success_rate(d);
  std::tie(r.rho_o, r.rho_o_fraction) = compute_overhead(d);
  r.rho_e = compute_total_tx(d);
  for (std::size_t t = 0; t < d.technologies.size(); ++t)
    if (auto u = compute_link_throughput(d, static_cast<TechId>(t))) r.rho_u[d.technologies[t]] = *u;
  const auto& protocol = log.header().protocol;
  if (protocol == "omr-ff") r.control_overhead_bits = control_overhead_bits(Mode::FF, d.node_count);
  if (protocol == "omr-pf") r.control_overhead_bits = control_overhead_bits(Mode::PF, d.node_count);
  r.messages_generated = static_cast<int>(d.messages.size());
  r.messages_delivered = static_cast<int>(r.message_delays.size());
  return r;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
  std::vector<std::pair<double, double>> out;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k + 1 < samples.size() && samples[k + 1] == samples[k]) continue;
    out.emplace_back(samples[k], static_cast<double>(k + 1) / n);
  }
  return out;
}

std::vector<std::pair<double, double>> empirical_ccdf(std::vector<double> samples) {
  auto out = empirical_cdf(std::move(samples));
  for (auto& p : out) p.second = 1.0 - p.second;
  return out;
}

double ccdf_at(const std::vector<double>& samples, double x) {
  if (samples.empty()) return 0.0;
  const auto above = std::count_if(samples.begin(), samples.end(), [&](double v) { return v > x; });
  return static_cast<double>(above) / static_cast<double>(samples.size());
}

std::string metrics_csv_header() { return "config_hash,seed,protocol,mac,metric,value\n"; }

std::string metrics_csv_rows(std::uint64_t config_hash, std::uint64_t seed, const std::string& protocol,
                             const std::string& mac, const MetricsReport& r) {
  std::string out;
  const std::string prefix = hex(config_hash) + "," + std::to_string(seed) + "," + protocol + "," + mac + ",";
  auto row = [&](const std::string& name, const std::optional<double>& v) {
    out += prefix + name + "," + (v ? fmt(*v) : std::string()) + "\n";
  };
  row("rho_d", r.rho_d);
  row("rho_g", r.rho_g);
  row("rho_s", r.rho_s);
  row("rho_o", r.rho_o);
  row("rho_o_fraction", r.rho_o_fraction);
  row("rho_e", r.rho_e);
  for (const auto& [tech, v] : r.rho_u) row("rho_u_" + tech, v);
  row("control_overhead_bits", r.control_overhead_bits);
  row("messages_generated", r.messages_generated);
  row("messages_delivered", r.messages_delivered);
  return out;
}

std::string distribution_csv(const std::vector<std::pair<double, double>>& points) {
  std::string out = "value,probability\n";
  for (const auto& [v, p] : points) out += fmt(v) + "," + fmt(p) + "\n";
  return out;
}

}  // namespace omr
