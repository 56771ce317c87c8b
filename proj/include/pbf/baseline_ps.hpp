#pragma once

#include "pbf/oracles.hpp"
#include "pbf/trace.hpp"

#include "json.hpp"

#include <functional>
#include <optional>

namespace pbf {

/// Proximal subgradient method with constant stepsize gamma / sqrt(T + 1).
struct PsParams {
  double gamma = 0.0;
  std::uint64_t T = 0;
  double m_bar = 0.0;

  double stepsize() const;
};

/// gamma defaults to 1/(2m) and m_bar to 2m. Rejects gamma outside (0, 1/(2m)],
/// m_bar outside (m, 2m] and a stepsize above 1/m_bar.
PsParams make_ps_params(const Problem& problem, std::uint64_t T, std::optional<double> gamma = std::nullopt,
                        std::optional<double> m_bar = std::nullopt);

/// ceil([(M^{1/m}(x0) - phi*) + 4 m M^2 gamma^2]^2 / (gamma^2 rho^4)). The lower
/// bound on phi* defaults to the problem's hint; without one the call throws.
std::uint64_t ps_iteration_count(const Problem& problem, double rho, double gamma, double moreau_at_x0,
                                 std::optional<double> phi_lower = std::nullopt);

struct PsOptions {
  std::uint64_t moreau_every = 0;  // measure ||grad M^{1/m}|| every this many iterates, 0 = never
  std::optional<double> moreau_tol;
  std::function<void(const TraceRow&)> sink;
};

struct PsResult {
  std::vector<Vec> iterates;  // x_0, ..., x_{T+1}
  std::uint64_t oracle_calls = 0;
  std::optional<double> best_moreau_grad;
  std::optional<std::uint64_t> best_index;
};

/// T + 1 steps x_{t+1} = prox_{alpha h}(x_t - alpha f'(x_t)).
PsResult ps_run(const Problem& problem, const PsParams& params, const Vec& x0, const PsOptions& options = {});

struct PsAudit {
  bool applicable = true;
  std::string note;
  double lhs = kNaN;  // average of ||grad M^{1/(m_bar - m)}(x_t)||^2 over t = 0..T
  double rhs = kNaN;
  double slack = 0.05;
  bool passed = false;
  std::vector<double> grad_norms;
};

/// Averaged bound on the Moreau gradients of x_0..x_T, every term measured by
/// moreau_oracle. Inapplicable when L > 0.
PsAudit ps_audit(const Problem& problem, const PsParams& params, const std::vector<Vec>& iterates,
                 std::optional<double> phi_lower = std::nullopt, double slack = 0.05);

nlohmann::json to_json(const PsAudit& a);

}  // namespace pbf
