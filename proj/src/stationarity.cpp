#include "pbf/stationarity.hpp"

#include "pbf/bundle.hpp"
#include "pbf/proxstep.hpp"
#include "pbf/rng.hpp"

#include <cmath>
#include <cstdio>

namespace pbf {

namespace {

constexpr std::size_t kInnerMaxCuts = 100;

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

InnerSolve solve_regularized_prox(const Problem& problem, const Vec& z, const Vec& c, double lambda, double tol,
                                  std::uint64_t max_iters) {
  require(lambda > 0.0 && tol > 0.0, "inner solve needs positive lambda and tol");
  problem.require_domain(z);
  const double m = problem.m();
  auto objective = [&](const Vec& u, double fu) {
    return fu + problem.h().eval(u) + 0.5 * m * (u - z).squaredNorm() + 0.5 * (u - c).squaredNorm() / lambda;
  };

  // start from the prox center projected onto dom h
  const Vec u0 = problem.h().project_domain(c);
  OracleAnswer a0 = problem.f().evaluate(u0);
  InnerSolve best;
  best.u = u0;
  best.value = objective(u0, a0.value);
  best.lower = -kInf;

  const double target_gap = tol * tol / (2.0 * lambda);
  BundleModel model = BundleModel::multi(problem.h(), c, m, {Cut{regularized_linearize(problem, z, u0, a0), 0}},
                                         kInnerMaxCuts);
  std::vector<double> warm;
  for (std::uint64_t it = 1; it <= max_iters; ++it) {
    // the lower bound absorbs the subproblem gap, so it only needs to be small next to target_gap
    const double sub_tol = std::max(1e-3 * target_gap, 1e-13 * (1.0 + std::abs(best.value)));
    const ProxSolution sol = solve_prox(model, lambda, sub_tol, warm);
    best.lower = std::max(best.lower, sol.theta - sol.gap);
    const OracleAnswer ax = problem.f().evaluate(sol.x);
    const double val = objective(sol.x, ax.value);
    if (val < best.value) {
      best.value = val;
      best.u = sol.x;
    }
    best.iterations = it;
    const double gap = std::max(0.0, best.value - best.lower);
    best.dist_bound = std::sqrt(2.0 * lambda * gap);
    // below the round-off floor of the values the gap cannot shrink further
    const double floor = 4e-16 * (1.0 + std::abs(best.value));
    if (best.dist_bound <= tol || gap <= floor) return best;

    const Cut cut{regularized_linearize(problem, z, sol.x, ax), static_cast<std::int64_t>(it)};
    const GbusStep step = model.null_update(sol.x, sol.dual_weights, cut, 0.0);
    warm.clear();
    for (int o : step.origin) warm.push_back(o >= 0 ? sol.dual_weights[static_cast<std::size_t>(o)] : 0.0);
    model = step.updated;
  }
  char msg[128];
  std::snprintf(msg, sizeof msg, "Moreau oracle not converged (distance bound %.3e > tol %.3e)", best.dist_bound, tol);
  fail(ErrorKind::MoreauNotConverged, msg);
}

double default_moreau_tol(const Vec& x) { return 1e-6 * (1.0 + x.norm()); }

MoreauCert moreau_oracle(const Problem& problem, double lambda, const Vec& x, std::optional<double> tol) {
  require(lambda > 0.0, "Moreau parameter must be positive");
  const InnerSolve s = solve_regularized_prox(problem, x, x, lambda, tol.value_or(default_moreau_tol(x)));
  MoreauCert cert;
  cert.x = x;
  cert.lambda = lambda;
  cert.m = problem.m();
  cert.x_hat = s.u;
  cert.grad = (1.0 / lambda + problem.m()) * (x - s.u);
  cert.grad_norm = cert.grad.norm();
  cert.envelope = s.value;
  cert.dist_bound = s.dist_bound;
  cert.iterations = s.iterations;
  return cert;
}

DirectionalCert regularized_to_directional(const Problem& problem, const RegularizedCert& cert,
                                           std::optional<double> inner_tol) {
  require(cert.m > 0.0, "conversion needs m > 0");
  const double eps = std::max(cert.eps, 0.0);
  DirectionalCert d;
  d.x = cert.x;
  d.eps_D = cert.w.norm() + 2.0 * std::sqrt(2.0 * cert.m * eps);
  d.delta_D = std::sqrt(2.0 * eps / cert.m);
  if (eps == 0.0) {
    // an exact subgradient of phi_m(.; x) at x is one of phi
    d.x_tilde = cert.x;
    d.subgradient = cert.w;
    d.verified = true;
    return d;
  }
  // phi(u) + m ||u - x||^2 - <w, u> = f_m(u; x) + h(u) + (m/2) ||u - (x + w/m)||^2 + const
  const double m = problem.m();
  const double tol = inner_tol.value_or(1e-3 * d.delta_D);
  const InnerSolve s = solve_regularized_prox(problem, cert.x, cert.x + cert.w / m, 1.0 / m, tol);
  d.x_tilde = s.u;
  d.subgradient = cert.w - 2.0 * m * (s.u - cert.x);
  const double dist = (cert.x - s.u).norm();
  d.verified = dist <= d.delta_D + s.dist_bound && d.subgradient.norm() <= d.eps_D + 2.0 * m * s.dist_bound;
  return d;
}

double regularized_to_moreau_bound(const RegularizedCert& cert) {
  return 18.0 * std::sqrt(2.0 * cert.m * std::max(cert.eps, 0.0)) + 4.0 * cert.w.norm();
}

double directional_to_moreau(const DirectionalCert& cert, double lambda, double m) {
  require(lambda > 0.0, "lambda must be positive");
  return (m + 1.0 / lambda) * ((3.0 + 2.0 * lambda * m) * cert.delta_D + 2.0 * lambda * cert.eps_D);
}

DirectionalCert moreau_to_directional(const MoreauCert& cert) {
  DirectionalCert d;
  d.x = cert.x;
  d.x_tilde = cert.x_hat;
  d.eps_D = cert.grad_norm;
  d.delta_D = cert.grad_norm / (cert.m + 1.0 / cert.lambda);
  d.subgradient = cert.grad;  // optimality of x_hat: grad is in the subdifferential of phi at x_hat
  d.verified = true;
  return d;
}

InclusionCheck check_subgradient_inequality(const Problem& problem, const Vec& p, const Vec& g, double eps,
                                            const Vec& c, double mu, std::uint64_t samples, std::uint64_t seed,
                                            double slack, std::optional<double> radius) {
  const double r = radius.value_or(std::max(1.0, 2.0 * p.norm()));
  const double base = problem.phi_reg(p, c, mu);
  Rng rng(seed);
  InclusionCheck out;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Vec u = problem.h().project_domain(p + rng.uniform_vec(static_cast<int>(p.size()), -r, r));
    const double excess = base + g.dot(u - p) - eps - problem.phi_reg(u, c, mu);
    ++out.samples;
    out.worst = std::max(out.worst, excess);
    if (excess > slack) ++out.violations;
  }
  return out;
}

InclusionCheck check_regularized(const Problem& problem, const RegularizedCert& cert, std::uint64_t samples,
                                 std::uint64_t seed, double slack) {
  return check_subgradient_inequality(problem, cert.x, cert.w, cert.eps, cert.x, cert.m, samples, seed, slack);
}

nlohmann::json to_json(const RegularizedCert& c) {
  return {{"x", vec_json(c.x)}, {"w", vec_json(c.w)}, {"w_norm", c.w.norm()}, {"eps", c.eps}, {"m", c.m}};
}

nlohmann::json to_json(const DirectionalCert& c) {
  return {{"x", vec_json(c.x)},         {"x_tilde", vec_json(c.x_tilde)},
          {"eps_D", c.eps_D},           {"delta_D", c.delta_D},
          {"distance", (c.x - c.x_tilde).norm()}, {"subgradient_norm", c.subgradient.norm()},
          {"verified", c.verified}};
}

nlohmann::json to_json(const MoreauCert& c) {
  return {{"x", vec_json(c.x)},       {"lambda", c.lambda},         {"m", c.m},
          {"x_hat", vec_json(c.x_hat)}, {"grad_norm", c.grad_norm}, {"envelope", c.envelope},
          {"dist_bound", c.dist_bound}, {"iterations", c.iterations}};
}

}  // namespace pbf
