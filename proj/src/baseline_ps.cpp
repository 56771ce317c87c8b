#include "pbf/baseline_ps.hpp"

#include "pbf/stationarity.hpp"

#include <cmath>

namespace pbf {

double PsParams::stepsize() const { return gamma / std::sqrt(static_cast<double>(T) + 1.0); }

PsParams make_ps_params(const Problem& problem, std::uint64_t T, std::optional<double> gamma,
                        std::optional<double> m_bar) {
  const double m = problem.m();
  PsParams p;
  p.T = T;
  p.gamma = gamma.value_or(1.0 / (2.0 * m));
  p.m_bar = m_bar.value_or(2.0 * m);
  require(p.gamma > 0.0 && p.gamma <= 1.0 / (2.0 * m) * (1.0 + 1e-15), "gamma must lie in (0, 1/(2m)]");
  require(p.m_bar > m && p.m_bar <= 2.0 * m * (1.0 + 1e-15), "m_bar must lie in (m, 2m]");
  require(p.stepsize() <= 1.0 / p.m_bar * (1.0 + 1e-15), "stepsize exceeds 1/m_bar");
  return p;
}

std::uint64_t ps_iteration_count(const Problem& problem, double rho, double gamma, double moreau_at_x0,
                                 std::optional<double> phi_lower) {
  require(rho > 0.0, "rho must be positive");
  require(gamma > 0.0 && gamma <= 1.0 / (2.0 * problem.m()) * (1.0 + 1e-15), "gamma must lie in (0, 1/(2m)]");
  if (!phi_lower) phi_lower = problem.phi_lower_hint();
  if (!phi_lower) fail(ErrorKind::MissingLowerBound, "iteration count requires a lower bound on phi*");
  const double M = problem.M();
  const double num = (moreau_at_x0 - *phi_lower) + 4.0 * problem.m() * M * M * gamma * gamma;
  const double T = num * num / (gamma * gamma * std::pow(rho, 4));
  return static_cast<std::uint64_t>(std::ceil(T));
}

PsResult ps_run(const Problem& problem, const PsParams& params, const Vec& x0, const PsOptions& opt) {
  problem.require_domain(x0);
  const double alpha = params.stepsize();
  require(alpha > 0.0, "stepsize must be positive");
  PsResult res;
  res.iterates.reserve(params.T + 2);
  res.iterates.push_back(x0);

  auto measure = [&](std::uint64_t t) -> double {
    if (opt.moreau_every == 0 || t % opt.moreau_every != 0) return kNaN;
    const double g = moreau_oracle(problem, 1.0 / problem.m(), res.iterates[t], opt.moreau_tol).grad_norm;
    if (!res.best_moreau_grad || g < *res.best_moreau_grad) {
      res.best_moreau_grad = g;
      res.best_index = t;
    }
    return g;
  };
  measure(0);

  for (std::uint64_t t = 0; t <= params.T; ++t) {
    const Vec& x = res.iterates.back();
    const OracleAnswer a = problem.f().evaluate(x);
    ++res.oracle_calls;
    Vec next = problem.h().prox(alpha, x - alpha * a.subgradient);
    TraceRow row;
    row.j = t + 1;
    row.step_norm = (next - x).norm();
    row.phi = problem.phi(next);
    res.iterates.push_back(std::move(next));
    row.moreau_grad = measure(t + 1);
    if (opt.sink) opt.sink(row);
  }
  return res;
}

PsAudit ps_audit(const Problem& problem, const PsParams& params, const std::vector<Vec>& iterates,
                 std::optional<double> phi_lower, double slack) {
  PsAudit a;
  a.slack = slack;
  if (problem.L() > 0.0) {
    a.applicable = false;
    a.note = "inapplicable (L>0)";
    return a;
  }
  if (!phi_lower) phi_lower = problem.phi_lower_hint();
  if (!phi_lower) {
    a.applicable = false;
    a.note = "no lower bound on phi*";
    return a;
  }
  require(iterates.size() >= params.T + 1, "audit needs the iterates x_0..x_T");
  const double m = problem.m();
  const double lambda = 1.0 / (params.m_bar - m);
  const double alpha = params.stepsize();
  const double n = static_cast<double>(params.T) + 1.0;

  double sum_sq = 0.0;
  double env0 = 0.0;
  for (std::uint64_t t = 0; t <= params.T; ++t) {
    const MoreauCert c = moreau_oracle(problem, lambda, iterates[t]);
    if (t == 0) env0 = c.envelope;
    a.grad_norms.push_back(c.grad_norm);
    sum_sq += c.grad_norm * c.grad_norm;
  }
  const double M = problem.M();
  a.lhs = sum_sq / n;
  a.rhs = params.m_bar / (params.m_bar - m) * ((env0 - *phi_lower) + 2.0 * params.m_bar * M * M * n * alpha * alpha) /
          (n * alpha);
  a.passed = a.lhs <= a.rhs * (1.0 + slack);
  return a;
}

nlohmann::json to_json(const PsAudit& a) {
  nlohmann::json j;
  j["check"] = "ps-averaged-moreau";
  if (!a.applicable) {
    j["status"] = "inapplicable";
    j["note"] = a.note;
    return j;
  }
  j["status"] = a.passed ? "pass" : "fail";
  j["lhs"] = a.lhs;
  j["rhs"] = a.rhs;
  j["slack"] = a.slack;
  return j;
}

}  // namespace pbf
