#pragma once

#include "pbf/trace.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pbf {

enum class AuditMode { Off, Warn, Fail };

std::string to_string(AuditMode mode);
AuditMode parse_audit_mode(const std::string& s);

/// Constants the per-iteration inequalities depend on.
struct AuditContext {
  double tau = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double chi = 1.0;
  double alpha = 0.0;
  double N = 0.0;
  double m = 0.0;
  std::optional<double> K;      // serious-step bound, needs a lower bound on phi*
  std::optional<double> t_bar;  // bound on t at cycle starts, same requirement
};

struct CheckResult {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  double worst_excess = -kInf;  // max of lhs - rhs over checked instances
  std::optional<std::uint64_t> first_violation_j;
  bool applicable = true;
  std::string note;
};

/// Streaming checker of the analysis inequalities along a PBF trace.
///
/// Slack for every inequality is 1e-8 (1 + |rhs|). `observe` returns the
/// names of checks that failed on this row so a caller in fail mode can stop.
class Auditor {
 public:
  explicit Auditor(AuditContext ctx);

  std::vector<std::string> observe(const TraceRow& row);

  const std::vector<CheckResult>& results() const { return checks_; }
  const AuditContext& context() const { return ctx_; }
  bool passed() const;
  nlohmann::json to_json() const;

 private:
  bool check(std::size_t idx, double lhs, double rhs, double slack, std::uint64_t j);

  AuditContext ctx_;
  std::vector<CheckResult> checks_;
  std::optional<TraceRow> prev_;
  std::optional<TraceRow> prev_serious_;
  double t_first_ = kNaN;
  std::uint64_t cycle_start_ = 1;
};

nlohmann::json checks_to_json(const std::vector<CheckResult>& checks);

/// Re-run every check on a trace file written by the harness.
std::vector<CheckResult> audit_trace(const TraceFile& trace);

/// Recover the audit constants from a trace header.
AuditContext audit_context_from_header(const TraceFile& trace);

}  // namespace pbf
