#include "omr/batch.hpp"

#include "omr/simulator.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace omr {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string cell_dir(Protocol p, Mac m) { return to_string(p) + "_" + to_string(m); }

struct CellKey {
  Protocol protocol;
  Mac mac;
  auto operator<=>(const CellKey&) const = default;
};

}  // namespace

bool BatchResult::ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

CellResult run_cell(const RunConfig& cfg, std::uint64_t seed, Protocol protocol, Mac mac,
                    const std::function<void(const TraceLog&)>& on_trace) {
  CellResult c;
  c.seed = seed;
  c.protocol = protocol;
  c.mac = mac;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto sim = run_simulation(make_sim_config(cfg, topology_for_seed(cfg, seed), protocol, mac), seed);
    c.report = compute_metrics(sim.trace);
    c.trace_hash = trace_hash(sim.trace);
    if (on_trace) on_trace(sim.trace);
    c.ok = true;
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

BatchResult run_batch(const RunConfig& cfg, const BatchOptions& options) {
  struct Job {
    std::uint64_t seed;
    Protocol protocol;
    Mac mac;
  };
  std::vector<Job> jobs;
  for (auto s = cfg.seeds.first;; ++s) {
    for (auto p : cfg.protocols)
      for (auto m : cfg.macs) jobs.push_back({s, p, m});
    if (s == cfg.seeds.last) break;
  }

  const fs::path out = cfg.out;
  if (options.write_files) {
    fs::create_directories(out);
    for (auto p : cfg.protocols)
      for (auto m : cfg.macs) fs::create_directories(out / cell_dir(p, m));
  }

  BatchResult result;
  result.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& job = jobs[k];
      auto on_trace = [&](const TraceLog& log) {
        if (options.write_files)
          write_file(out / cell_dir(job.protocol, job.mac) / ("trace_" + std::to_string(job.seed) + ".log"),
                     serialize_trace(log));
        if (options.on_trace) options.on_trace(job.seed, job.protocol, job.mac, log);
      };
      result.cells[k] = run_cell(cfg, job.seed, job.protocol, job.mac, on_trace);
    }
  };
  const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (!options.write_files) return result;

  std::string csv = metrics_csv_header();
  std::map<CellKey, std::map<std::string, std::vector<double>>> samples;
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    csv += metrics_csv_rows(cfg.hash, c.seed, to_string(c.protocol), to_string(c.mac), c.report);
    auto& s = samples[{c.protocol, c.mac}];
    s["delay"].insert(s["delay"].end(), c.report.message_delays.begin(), c.report.message_delays.end());
    s["goodput"].push_back(c.report.rho_g);
    for (const auto& [tech, v] : c.report.rho_u) s["link_throughput_" + tech].push_back(v);
  }
  write_file(out / "metrics.csv", csv);
  for (const auto& [key, metrics] : samples)
    for (const auto& [name, values] : metrics) {
      if (values.empty()) continue;
      const auto points = name == "delay" ? empirical_cdf(values) : empirical_ccdf(values);
      write_file(out / ("dist_" + name + "_" + to_string(key.protocol) + "_" + to_string(key.mac) + ".csv"),
                 distribution_csv(points));
    }
  write_file(out / "summary.txt", batch_summary(cfg, result));
  return result;
}

std::string batch_summary(const RunConfig& cfg, const BatchResult& result) {
  struct Acc {
    int runs = 0, failed = 0;
    std::map<std::string, std::pair<double, int>> sums;
    void add(const std::string& name, double v) {
      auto& s = sums[name];
      s.first += v;
      ++s.second;
    }
  };
  std::map<CellKey, Acc> acc;
  for (const auto& c : result.cells) {
    auto& a = acc[{c.protocol, c.mac}];
    ++a.runs;
    if (!c.ok) {
      ++a.failed;
      continue;
    }
    if (c.report.rho_d) a.add("rho_d", *c.report.rho_d);
    a.add("rho_g", c.report.rho_g);
    if (c.report.rho_s) a.add("rho_s", *c.report.rho_s);
    a.add("rho_o", c.report.rho_o);
    a.add("rho_o_fraction", c.report.rho_o_fraction);
    a.add("rho_e", c.report.rho_e);
    for (const auto& [tech, v] : c.report.rho_u) a.add("rho_u_" + tech, v);
  }
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "config %016llx  seeds %llu..%llu\n\n", static_cast<unsigned long long>(cfg.hash),
                static_cast<unsigned long long>(cfg.seeds.first), static_cast<unsigned long long>(cfg.seeds.last));
  s += line;
  std::snprintf(line, sizeof line, "%-10s %-10s %5s %6s %16s %12s\n", "protocol", "mac", "runs", "failed", "metric",
                "mean");
  s += line;
  for (const auto& [key, a] : acc)
    for (const auto& [name, sum] : a.sums) {
      std::snprintf(line, sizeof line, "%-10s %-10s %5d %6d %16s %12.6g\n", to_string(key.protocol).c_str(),
                    to_string(key.mac).c_str(), a.runs, a.failed, name.c_str(), sum.first / sum.second);
      s += line;
    }
  for (const auto& c : result.cells)
    if (!c.ok)
      s += "failed: seed " + std::to_string(c.seed) + " " + to_string(c.protocol) + " " + to_string(c.mac) + ": " +
           c.error + "\n";
  return s;
}

}  // namespace omr
