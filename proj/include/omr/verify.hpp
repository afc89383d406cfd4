#pragma once

#include "omr/trace.hpp"

#include <string>
#include <vector>

namespace omr {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;  // first violation, empty when passed
};

struct TraceAudit {
  std::string run;  // file name or caller label
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Replays every trace invariant: allocation and estimate constraints, loop
/// freedom, fragment bounds and digests, sink reassembly, causality, backlog
/// bookkeeping, per-radio medium exclusivity and metric ranges.
TraceAudit audit_trace(const TraceLog& log, std::string run = {});

struct DirectoryAudit {
  std::vector<TraceAudit> runs;
  std::vector<std::string> corrupt;  // "path: reason"

  bool passed() const;
};

/// Audits every trace_*.log below `dir`. Unparseable traces are listed and
/// skipped.
DirectoryAudit audit_directory(const std::string& dir);

std::string format_audit(const DirectoryAudit& audit);

}  // namespace omr
