#include "pbf/audit.hpp"

#include <cmath>

namespace pbf {

namespace {

enum Check : std::size_t {
  kNullContraction,
  kCycleLength,
  kEpsEstimate,
  kWEstimate,
  kPotential,
  kEpsNonnegative,
  kSeriousCount,
  kTFirst,
  kIdentities,
  kNumChecks
};

const char* const kNames[kNumChecks] = {"null-contraction", "cycle-length",      "eps-estimate",
                                        "w-estimate",       "potential-recursion", "eps-nonnegative",
                                        "serious-count",    "t-first-bound",     "certificate-identities"};

double rel_slack(double rhs) { return 1e-8 * (1.0 + std::abs(rhs)); }

}  // namespace

std::string to_string(AuditMode mode) {
  switch (mode) {
    case AuditMode::Off: return "off";
    case AuditMode::Warn: return "warn";
    case AuditMode::Fail: return "fail";
  }
  return "?";
}

AuditMode parse_audit_mode(const std::string& s) {
  if (s == "off") return AuditMode::Off;
  if (s == "warn") return AuditMode::Warn;
  if (s == "fail") return AuditMode::Fail;
  fail(ErrorKind::InvalidArgument, "unknown audit mode '" + s + "'");
}

Auditor::Auditor(AuditContext ctx) : ctx_(ctx) {
  for (const char* name : kNames) {
    CheckResult c;
    c.name = name;
    checks_.push_back(c);
  }
  if (!ctx_.K) {
    checks_[kSeriousCount].applicable = false;
    checks_[kSeriousCount].note = "no lower bound on phi*";
  }
  if (!ctx_.t_bar) {
    checks_[kTFirst].applicable = false;
    checks_[kTFirst].note = "no lower bound on phi*";
  }
}

bool Auditor::check(std::size_t idx, double lhs, double rhs, double slack, std::uint64_t j) {
  CheckResult& c = checks_[idx];
  ++c.checked;
  const double excess = lhs - rhs;
  if (excess > c.worst_excess || std::isnan(excess)) c.worst_excess = excess;
  if (excess > slack || std::isnan(excess)) {
    ++c.violations;
    if (!c.first_violation_j) c.first_violation_j = j;
    return false;
  }
  return true;
}

std::vector<std::string> Auditor::observe(const TraceRow& row) {
  std::vector<std::string> failed;
  auto run = [&](std::size_t idx, double lhs, double rhs, double slack) {
    if (!check(idx, lhs, rhs, slack, row.j)) failed.push_back(kNames[idx]);
  };
  const double delta = ctx_.delta;
  const double lambda = ctx_.lambda;

  const bool cycle_start = !prev_ || prev_->serious;
  if (cycle_start) {
    t_first_ = row.t;
    cycle_start_ = row.j;
    if (ctx_.t_bar && row.k && static_cast<double>(*row.k) <= *ctx_.K) {
      run(kTFirst, row.t, *ctx_.t_bar, rel_slack(*ctx_.t_bar));
    }
  } else {
    const double rhs = delta / 2 + ctx_.tau * (prev_->t - delta / 2);
    run(kNullContraction, row.t, rhs, 1e-8 * (1.0 + std::abs(prev_->t)));
  }

  if (row.serious) {
    const double len = static_cast<double>(row.j - cycle_start_ + 1);
    const double bound = log_plus(2.0 * t_first_ / delta) / (1.0 - ctx_.tau) + 2.0;
    run(kCycleLength, len, bound, rel_slack(bound));

    const double dp2 = row.y_dist_prev * row.y_dist_prev;
    const double key_rhs = delta + (1.0 - ctx_.chi) / (2.0 * lambda) * dp2;
    run(kEpsEstimate, row.eps_hat + row.y_dist_new * row.y_dist_new / (2.0 * lambda), key_rhs, rel_slack(key_rhs));

    const double w_rhs = 4.0 * delta / lambda + ctx_.alpha * ctx_.N / (4.0 * lambda * lambda) * dp2;
    run(kWEstimate, row.w_hat_norm * row.w_hat_norm, w_rhs, rel_slack(w_rhs));

    run(kEpsNonnegative, -row.eps_hat, 0.0, 1e-10);

    if (prev_serious_) {
      const double pp = prev_serious_->y_dist_prev;
      const double rhs = prev_serious_->Delta + (2.0 + ctx_.m * lambda) * delta;
      run(kPotential, row.Delta + ctx_.alpha / (2.0 * lambda) * pp * pp, rhs, rel_slack(rhs));
    }

    if (ctx_.K && row.k) {
      const double cap = std::max(*ctx_.K, 1.0);
      run(kSeriousCount, static_cast<double>(*row.k), cap, 0.0);
    }

    if (row.v_hat.size() > 0 && row.x_hat_prev.size() == row.v_hat.size()) {
      const Vec v = (row.x_hat_prev - row.x_hat) / lambda;
      const Vec w = row.v_hat - ctx_.m * (row.y_hat - row.x_hat_prev);
      const double err = std::max((v - row.v_hat).norm() / (1.0 + v.norm()), (w - row.w_hat).norm() / (1.0 + w.norm()));
      run(kIdentities, err, 0.0, 1e-12);
    }
    prev_serious_ = row;
  }
  prev_ = row;
  return failed;
}

bool Auditor::passed() const {
  for (const CheckResult& c : checks_) {
    if (c.violations > 0) return false;
  }
  return true;
}

nlohmann::json checks_to_json(const std::vector<CheckResult>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    nlohmann::json j;
    j["check"] = c.name;
    j["status"] = !c.applicable ? "inapplicable" : (c.violations > 0 ? "fail" : "pass");
    j["checked"] = c.checked;
    j["violations"] = c.violations;
    if (c.checked > 0 && std::isfinite(c.worst_excess)) j["worst_excess"] = c.worst_excess;
    if (c.first_violation_j) j["first_violation_j"] = *c.first_violation_j;
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  return arr;
}

nlohmann::json Auditor::to_json() const { return checks_to_json(checks_); }

AuditContext audit_context_from_header(const TraceFile& trace) {
  AuditContext ctx;
  ctx.tau = trace.get_double("tau");
  ctx.delta = trace.get_double("delta");
  ctx.lambda = trace.get_double("lambda");
  ctx.chi = trace.get_double("chi");
  ctx.alpha = trace.get_double("alpha");
  ctx.N = trace.get_double("N");
  ctx.m = trace.get_double("m");
  const auto K = trace.get("budget_K");
  if (K && !K->empty()) ctx.K = trace.get_double("budget_K");
  const auto tb = trace.get("budget_t_bar");
  if (tb && !tb->empty()) ctx.t_bar = trace.get_double("budget_t_bar");
  return ctx;
}

std::vector<CheckResult> audit_trace(const TraceFile& trace) {
  Auditor auditor(audit_context_from_header(trace));
  for (const TraceRow& row : trace.rows) auditor.observe(row);
  return auditor.results();
}

}  // namespace pbf
