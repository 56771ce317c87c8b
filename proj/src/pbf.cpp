#include "pbf/pbf.hpp"

#include "pbf/proxstep.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace pbf {

double tau_for(double lambda, double M, double L, double m, double delta) {
  require(lambda > 0.0 && delta > 0.0, "tau needs positive lambda and delta");
  const double r = lambda * (4.0 * M * M / delta + L + m);
  return r / (1.0 + r);
}

PbfParams derive_params(const Problem& problem, double eta_bar, double eps_bar, std::optional<double> lambda,
                        std::optional<double> gamma_chi) {
  require(eta_bar > 0.0 && std::isfinite(eta_bar), "eta_bar must be positive");
  require(eps_bar > 0.0 && std::isfinite(eps_bar), "eps_bar must be positive");
  const double m = problem.m();
  PbfParams p;
  p.eta_bar = eta_bar;
  p.eps_bar = eps_bar;
  p.lambda = lambda.value_or(1.0 / m);
  require(p.lambda > 0.0 && std::isfinite(p.lambda), "lambda must be positive");
  const double ml = m * p.lambda;
  const double gamma = gamma_chi.value_or(1.0 + ml);
  require(gamma > 0.0 && gamma <= 1.0 + ml * (1.0 + 1e-15), "gamma_chi must lie in (0, 1 + m lambda]");
  p.chi = std::min(1.0, (1.0 + gamma) / (2.0 + ml));
  p.alpha = p.chi * (2.0 + ml) - 1.0;
  require(p.alpha > 0.0, "chi (2 + m lambda) - 1 must be positive");
  p.N = 8.0 * (1.0 - p.chi + (ml + 1.0) * (ml + 1.0)) / p.alpha;
  p.delta = std::min(eps_bar * p.alpha / (2.0 * (p.alpha + (1.0 - p.chi) * (3.0 + ml))),
                     p.lambda * eta_bar * eta_bar / (8.0 + p.N * (3.0 + ml)));
  p.tau = tau_for(p.lambda, problem.M(), problem.L(), m, p.delta);
  p.m_tilde = m + p.chi / p.lambda;
  return p;
}

Tolerances corollary_preset(double rho, double m) {
  require(rho > 0.0 && m > 0.0, "rho and m must be positive");
  return {rho / 8.0, rho * rho / (2592.0 * m)};
}

ComplexityBudget complexity_budget(const PbfParams& p, const Problem& problem, double moreau_at_x0,
                                   std::optional<double> phi_lower) {
  if (!phi_lower) phi_lower = problem.phi_lower_hint();
  if (!phi_lower) fail(ErrorKind::MissingLowerBound, "budget requires a lower bound on phi*");
  require(std::isfinite(moreau_at_x0), "Moreau value at x0 must be finite");
  const double m = problem.m();
  const double M = problem.M();
  const double L = problem.L();
  const double lambda = p.lambda;

  ComplexityBudget b;
  b.moreau_at_x0 = moreau_at_x0;
  b.phi_lower = *phi_lower;
  const double gap = moreau_at_x0 - *phi_lower;
  require(gap >= 0.0, "Moreau value at x0 is below the lower bound on phi*");
  const double rate = std::max(2.0 * (1.0 - p.chi) / (p.alpha * p.eps_bar), p.N / (lambda * p.eta_bar * p.eta_bar));
  b.K_real = gap * rate;
  b.K = std::ceil(b.K_real);
  b.zeta = lambda > 1.0 / (2.0 * (L + m)) ? 1.0 / (2.0 * (L + m) * lambda) : 1.0;
  b.beta1 = (m + 2.0 / (b.zeta * lambda)) / (m + p.chi / lambda);
  b.beta2 = ((L + m) / 2.0 + 1.0) / (b.zeta * b.zeta) / (1.0 / (4.0 * b.zeta * lambda) + m / 2.0);
  b.t_bar = M * M + b.beta2 * (b.beta1 * gap + b.beta1 * (3.0 + m * lambda) * b.K * p.delta +
                               4.0 * b.zeta * lambda * M * M);
  b.cycle_factor = (1.0 + lambda * (4.0 * M * M / p.delta + L + m)) * log_plus(2.0 * b.t_bar / p.delta) + 2.0;
  b.outer_factor = b.K_real + 1.0;
  b.total = b.cycle_factor * b.outer_factor;
  constexpr double cap = 9.2e18;
  b.iterations = b.total >= cap ? static_cast<std::uint64_t>(cap) : static_cast<std::uint64_t>(std::ceil(b.total));
  return b;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::BudgetExhausted: return "budget-exhausted";
    case RunStatus::AuditFailed: return "audit-failed";
  }
  return "?";
}

AuditContext make_audit_context(const Problem& problem, const PbfParams& p,
                                const std::optional<ComplexityBudget>& budget) {
  AuditContext ctx;
  ctx.tau = p.tau;
  ctx.delta = p.delta;
  ctx.lambda = p.lambda;
  ctx.chi = p.chi;
  ctx.alpha = p.alpha;
  ctx.N = p.N;
  ctx.m = problem.m();
  if (budget) {
    ctx.K = budget->K;
    ctx.t_bar = budget->t_bar;
  }
  return ctx;
}

namespace {

std::vector<double> carry_weights(const GbusStep& step, const std::vector<double>& w) {
  std::vector<double> out;
  out.reserve(step.origin.size());
  for (int o : step.origin) out.push_back(o >= 0 ? w[static_cast<std::size_t>(o)] : 0.0);
  return out;
}

}  // namespace

RunResult run_pbf(const Problem& problem, const PbfParams& p, const Vec& x0, const RunOptions& opt) {
  problem.require_domain(x0);
  require(p.lambda > 0.0 && p.delta > 0.0 && p.tau > 0.0 && p.tau < 1.0, "invalid PBF parameters");
  if (opt.scheme == BundleScheme::OneCut && opt.reset == ResetPolicy::ShiftedMax) {
    fail(ErrorKind::InvalidArgument, "shifted-max reset needs a two-cut or multi-cut model");
  }
  const double m = problem.m();
  const double lambda = p.lambda;
  const double tol = opt.subproblem_tol.value_or(default_subproblem_tol(p.delta));

  RunResult res;
  res.max_total_iters = opt.max_total_iters.value_or(
      opt.budget ? std::max<std::uint64_t>(2 * std::min<std::uint64_t>(opt.budget->iterations, 1ULL << 62), 1)
                 : 1000000ULL);

  std::optional<Auditor> auditor;
  if (opt.audit != AuditMode::Off) auditor.emplace(make_audit_context(problem, p, opt.budget));
  const auto start = std::chrono::steady_clock::now();

  OracleAnswer at_x0 = problem.f().evaluate(x0);
  res.oracle_calls = 1;
  Vec center = x0;
  Vec y = x0;
  double phi_y = at_x0.value + problem.h().eval(x0);
  std::int64_t next_id = 0;
  BundleModel model(opt.scheme, problem.h(), x0, m, Cut{Linearization{x0, at_x0.value, at_x0.subgradient}, next_id++},
                    opt.max_cuts);
  std::vector<double> warm;
  std::uint64_t k = 1;
  std::uint64_t cycle_start = 1;
  double best_score = kInf;

  for (std::uint64_t j = 1; j <= res.max_total_iters; ++j) {
    const ProxSolution sol = solve_prox(model, lambda, tol, warm);
    const OracleAnswer at_x = problem.f().evaluate(sol.x);
    ++res.oracle_calls;
    res.iterations = j;

    const double phi_x = at_x.value + problem.h().eval(sol.x);
    const double reg_x = phi_x + 0.5 * p.m_tilde * (sol.x - center).squaredNorm();
    const double reg_y = phi_y + 0.5 * p.m_tilde * (y - center).squaredNorm();
    double reg_best = reg_y;
    if (reg_x <= reg_y) {
      y = sol.x;
      phi_y = phi_x;
      reg_best = reg_x;
    }
    const double t = reg_best - sol.theta;

    TraceRow row;
    row.j = j;
    row.k = k;
    row.t = t;
    row.theta = sol.theta;
    row.delta = p.delta;
    row.step_norm = (sol.x - center).norm();
    row.phi = phi_x;
    row.bundle_size = model.size();
    row.serious = !(t > p.delta);

    std::optional<SeriousRecord> rec;
    if (row.serious) {
      SeriousRecord s;
      s.k = k;
      s.j = j;
      s.x_hat_prev = center;
      s.x_hat = sol.x;
      s.y_hat = y;
      s.v_hat = (center - sol.x) / lambda;
      s.w_hat = s.v_hat - m * (y - center);
      const double phi_m_y = phi_y + 0.5 * m * (y - center).squaredNorm();
      s.eps_hat = phi_m_y - model.eval(sol.x) - s.v_hat.dot(y - sol.x);
      s.Delta = reg_best;
      s.cycle_length = j - cycle_start + 1;

      row.cycle_length = s.cycle_length;
      row.eps_hat = s.eps_hat;
      row.w_hat_norm = s.w_hat.norm();
      row.Delta = s.Delta;
      row.y_dist_prev = (y - center).norm();
      row.y_dist_new = (y - sol.x).norm();
      row.x_hat_prev = s.x_hat_prev;
      row.x_hat = s.x_hat;
      row.y_hat = s.y_hat;
      row.v_hat = s.v_hat;
      row.w_hat = s.w_hat;
      rec = std::move(s);
    }
    if (opt.timing) row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (auditor) {
      const auto failed = auditor->observe(row);
      if (!failed.empty() && opt.audit == AuditMode::Fail && res.audit_failure.empty()) res.audit_failure = failed[0];
    }
    if (opt.sink) opt.sink(row);

    if (rec) {
      ++res.serious_steps;
      const double score = std::max(row.w_hat_norm / p.eta_bar, rec->eps_hat / p.eps_bar);
      if (score < best_score) {
        best_score = score;
        res.best = *rec;
      }
    }
    if (!res.audit_failure.empty()) {
      res.status = RunStatus::AuditFailed;
      break;
    }

    if (!rec) {
      const Cut fresh{regularized_linearize(problem, center, sol.x, at_x), next_id++};
      const GbusStep step = model.null_update(sol.x, sol.dual_weights, fresh, p.tau);
      warm = carry_weights(step, sol.dual_weights);
      model = step.updated;
      continue;
    }

    if (row.w_hat_norm <= p.eta_bar && rec->eps_hat <= p.eps_bar) {
      res.status = RunStatus::Converged;
      res.terminal = std::move(rec);
      break;
    }
    const Cut fresh{Linearization{sol.x, at_x.value, at_x.subgradient}, next_id++};
    model = model.serious_reset(sol.x, fresh, opt.reset, sol.dual_weights);
    center = sol.x;
    warm.clear();
    ++k;
    cycle_start = j + 1;
  }
  if (auditor) res.audit = auditor->results();
  return res;
}

}  // namespace pbf
