#pragma once

#include "omr/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace omr {

/// Per-message and per-link tables extracted from one trace.
struct TraceDigest {
  int node_count = 0;
  NodeId sink = 0;
  double t_net = 0.0;
  std::vector<std::string> technologies;
  std::map<NodeId, std::vector<TechId>> node_technologies;
  std::map<std::pair<NodeId, TechId>, int> link_degree;  // D^t_n

  struct MessageRow {
    double created = 0.0;
    Bits bits = 0;                  // M^s in bits
    Bits received_bits = 0;         // M^r in bits, duplicates included
    Bits transmitted_bits = 0;      // B, headers included
    std::optional<double> completed;
  };
  std::map<std::pair<NodeId, std::uint32_t>, MessageRow> messages;
  std::map<std::tuple<NodeId, NodeId, TechId>, Bits> link_bits;  // payload bits decoded on n -> m over t
};

TraceDigest digest_trace(const TraceLog& log);

struct MetricsReport {
  std::optional<double> rho_d;  // s
  double rho_g = 0.0;           // bytes/s per node
  std::optional<double> rho_s;
  double rho_o = 0.0;           // duplicated messages per source node
  double rho_o_fraction = 0.0;  // mean share of a node's messages with redundant copies
  double rho_e = 0.0;           // bytes/s
  std::map<std::string, double> rho_u;  // per technology name, bytes/s
  double control_overhead_bits = 0.0;
  int messages_generated = 0;
  int messages_delivered = 0;
  std::vector<double> message_delays;
};

/// Mean delay over fully delivered messages, per node then over nodes that
/// delivered at least one; absent when nothing was delivered.
std::optional<double> compute_delay(const TraceDigest& d, std::vector<double>* per_message = nullptr);
double compute_goodput(const TraceDigest& d);
/// Mean of R_n / I_n over nodes that generated traffic.
std::optional<double> compute_success_rate(const TraceDigest& d);
/// Literal per-node count and the fraction variant.
std::pair<double, double> compute_overhead(const TraceDigest& d);
double compute_total_tx(const TraceDigest& d);
/// Absent when no node holds t with at least one t-link.
std::optional<double> compute_link_throughput(const TraceDigest& d, TechId t);

MetricsReport compute_metrics(const TraceLog& log);

/// Points (v, P[X <= v]) over the distinct sorted samples.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);
/// Points (v, P[X > v]).
std::vector<std::pair<double, double>> empirical_ccdf(std::vector<double> samples);
double ccdf_at(const std::vector<double>& samples, double x);

std::string metrics_csv_header();
std::string metrics_csv_rows(std::uint64_t config_hash, std::uint64_t seed, const std::string& protocol,
                             const std::string& mac, const MetricsReport& r);
std::string distribution_csv(const std::vector<std::pair<double, double>>& points);

}  // namespace omr
