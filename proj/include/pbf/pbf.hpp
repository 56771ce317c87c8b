#pragma once

#include "pbf/audit.hpp"
#include "pbf/bundle.hpp"
#include "pbf/oracles.hpp"
#include "pbf/trace.hpp"

#include <functional>
#include <optional>

namespace pbf {

struct PbfParams {
  double lambda = 0.0;
  double chi = 1.0;
  double tau = 0.0;
  double delta = 0.0;
  double eta_bar = 0.0;
  double eps_bar = 0.0;
  double m_tilde = 0.0;  // m + chi / lambda
  double alpha = 0.0;    // chi (2 + m lambda) - 1
  double N = 0.0;        // 8 [1 - chi + (m lambda + 1)^2] / alpha
};

/// tau solving tau / (1 - tau) = lambda (4 M^2 / delta + L + m).
double tau_for(double lambda, double M, double L, double m, double delta);

/// Parameters of the main theorem. lambda defaults to 1/m and gamma_chi to
/// 1 + m lambda (chi = 1). Throws InvalidArgument when chi (2 + m lambda) <= 1.
PbfParams derive_params(const Problem& problem, double eta_bar, double eps_bar,
                        std::optional<double> lambda = std::nullopt, std::optional<double> gamma_chi = std::nullopt);

struct Tolerances {
  double eta_bar;
  double eps_bar;
};

/// (eta_bar, eps_bar) = (rho / 8, rho^2 / (2592 m)); use with lambda = 1/m, chi = 1.
Tolerances corollary_preset(double rho, double m);

struct ComplexityBudget {
  double moreau_at_x0 = 0.0;
  double phi_lower = 0.0;
  double K_real = 0.0;  // before the ceiling
  double K = 0.0;
  double zeta = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double t_bar = 0.0;
  double cycle_factor = 0.0;  // [ (1 + lambda (4M^2/delta + L + m)) log+(2 t_bar / delta) + 2 ]
  double outer_factor = 0.0;  // [ (M - phi*) max{...} + 1 ]
  double total = 0.0;         // cycle_factor * outer_factor
  std::uint64_t iterations = 0;  // ceil(total), saturated at 2^63
};

/// Iteration bound of the main theorem. `moreau_at_x0` is the Moreau envelope
/// value at x0 (or any upper bound on it, such as phi(x0)). The lower bound on
/// phi* defaults to the problem's hint; without one the call throws
/// MissingLowerBound.
ComplexityBudget complexity_budget(const PbfParams& params, const Problem& problem, double moreau_at_x0,
                                   std::optional<double> phi_lower = std::nullopt);

/// Stationarity certificate produced at a serious step.
struct SeriousRecord {
  std::uint64_t k = 0;
  std::uint64_t j = 0;
  Vec x_hat_prev;
  Vec x_hat;
  Vec y_hat;
  Vec v_hat;
  Vec w_hat;
  double eps_hat = 0.0;
  double Delta = 0.0;
  std::uint64_t cycle_length = 0;
};

enum class RunStatus { Converged, BudgetExhausted, AuditFailed };
std::string to_string(RunStatus s);

struct RunOptions {
  BundleScheme scheme = BundleScheme::MultiCut;
  ResetPolicy reset = ResetPolicy::FreshCut;
  std::optional<std::size_t> max_cuts = kDefaultMaxCuts;
  std::optional<double> subproblem_tol;  // default: default_subproblem_tol(delta)
  std::optional<std::uint64_t> max_total_iters;  // default: 2x budget, else 1e6
  std::optional<ComplexityBudget> budget;  // enables the K and t_bar audits
  AuditMode audit = AuditMode::Warn;
  bool timing = false;  // fill wall_time; traces are then not reproducible
  std::function<void(const TraceRow&)> sink;
};

struct RunResult {
  RunStatus status = RunStatus::BudgetExhausted;
  std::optional<SeriousRecord> terminal;  // set when converged
  std::optional<SeriousRecord> best;      // best certificate seen, by max(|w|/eta, eps/eps_bar)
  std::uint64_t iterations = 0;
  std::uint64_t serious_steps = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t max_total_iters = 0;
  std::vector<CheckResult> audit;
  std::string audit_failure;  // first failed check name in fail mode
};

/// The proximal bundle framework from x0.
RunResult run_pbf(const Problem& problem, const PbfParams& params, const Vec& x0, const RunOptions& options = {});

/// Audit constants for a parameter set and optional budget.
AuditContext make_audit_context(const Problem& problem, const PbfParams& params,
                                const std::optional<ComplexityBudget>& budget);

}  // namespace pbf
