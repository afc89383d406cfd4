#pragma once

#include "omr/config.hpp"
#include "omr/metrics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace omr {

struct CellResult {
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::OmrFF;
  Mac mac = Mac::Ideal;
  bool ok = false;
  std::string error;
  MetricsReport report;
  std::uint64_t trace_hash = 0;
  double seconds = 0.0;  // wall clock, informational only
};

/// Runs one (seed, protocol, mac) cell. Failures are captured, not thrown.
/// `on_trace` sees the finished trace before it is dropped.
CellResult run_cell(const RunConfig& cfg, std::uint64_t seed, Protocol protocol, Mac mac,
                    const std::function<void(const TraceLog&)>& on_trace = {});

struct BatchOptions {
  bool write_files = true;
  /// Called from worker threads with each finished trace.
  std::function<void(std::uint64_t seed, Protocol, Mac, const TraceLog&)> on_trace;
};

struct BatchResult {
  std::vector<CellResult> cells;  // seed-major, then protocol, then mac

  bool ok() const;
};

/// Executes every cell on cfg.workers threads, then aggregates sequentially.
/// With write_files, emits metrics.csv, dist_<metric>_<protocol>_<mac>.csv,
/// <protocol>_<mac>/trace_<seed>.log and summary.txt under cfg.out.
BatchResult run_batch(const RunConfig& cfg, const BatchOptions& options = {});

/// Per (protocol, mac) means of the scalar metrics, as a fixed-width table.
std::string batch_summary(const RunConfig& cfg, const BatchResult& result);

}  // namespace omr
