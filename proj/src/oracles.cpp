#include "pbf/oracles.hpp"

#include "pbf/rng.hpp"

#include <cmath>

namespace pbf {

Linearization Linearization::rebased(const Vec& new_base) const {
  return {new_base, (*this)(new_base), slope};
}

Linearization Linearization::shifted(const Vec& a, const Vec& p, double c) const {
  return {base_point, value_at_base - a.dot(base_point - p) - c, slope - a};
}

Linearization convex_combination(double theta, const Linearization& a, const Linearization& b) {
  return {b.base_point, theta * a(b.base_point) + (1.0 - theta) * b.value_at_base,
          theta * a.slope + (1.0 - theta) * b.slope};
}

Problem::Problem(std::shared_ptr<const HybridOracle> f, SimpleTerm h, double m, double M, double L,
                 std::optional<double> phi_lower_hint)
    : f_(std::move(f)), h_(std::move(h)), m_(m), M_(M), L_(L), phi_lower_(phi_lower_hint) {
  require(f_ != nullptr, "problem requires an oracle");
  require(f_->dimension() == h_.dimension(), "oracle and h dimensions differ");
  require(m_ > 0.0 && std::isfinite(m_), "weak-convexity modulus m must be positive");
  require(M_ >= 0.0 && std::isfinite(M_), "hybrid constant M must be finite and nonnegative");
  require(L_ >= 0.0 && std::isfinite(L_), "hybrid constant L must be finite and nonnegative");
}

void Problem::require_domain(const Vec& x) const {
  if (x.size() != dimension() || !in_domain(x)) fail(ErrorKind::Domain, "point outside dom h");
}

double Problem::phi(const Vec& x) const {
  const double hx = h_.eval(x);
  if (!std::isfinite(hx)) return kInf;
  return f_->value(x) + hx;
}

double Problem::phi_reg(const Vec& u, const Vec& z, double mu) const {
  const double p = phi(u);
  if (!std::isfinite(p)) return kInf;
  return p + 0.5 * mu * (u - z).squaredNorm();
}

double Problem::f_reg(const Vec& u, const Vec& z) const {
  return f_->value(u) + 0.5 * m_ * (u - z).squaredNorm();
}

Linearization linearize(const Problem& problem, const Vec& x) {
  problem.require_domain(x);
  OracleAnswer a = problem.f().evaluate(x);
  return {x, a.value, std::move(a.subgradient)};
}

Linearization regularized_linearize(const Problem& problem, const Vec& center, const Vec& base) {
  problem.require_domain(base);
  return regularized_linearize(problem, center, base, problem.f().evaluate(base));
}

Linearization regularized_linearize(const Problem& problem, const Vec& center, const Vec& base,
                                    const OracleAnswer& at_base) {
  const Vec d = base - center;
  return {base, at_base.value + 0.5 * problem.m() * d.squaredNorm(), at_base.subgradient + problem.m() * d};
}

ConstantCheck check_declared_constants(const Problem& problem, const Vec& center, double radius,
                                       std::size_t pairs, std::uint64_t seed) {
  Rng rng(seed);
  const int n = problem.dimension();
  ConstantCheck out;
  out.pairs = pairs;
  for (std::size_t p = 0; p < pairs; ++p) {
    const Vec u = problem.h().project_domain(center + rng.uniform_vec(n, -radius, radius));
    const Vec v = problem.h().project_domain(center + rng.uniform_vec(n, -radius, radius));
    const OracleAnswer fu = problem.f().evaluate(u);
    const OracleAnswer fv = problem.f().evaluate(v);
    const double dist = (u - v).norm();

    const double diff = (fu.subgradient - fv.subgradient).norm();
    const double bound = 2.0 * problem.M() + problem.L() * dist;
    if (diff > bound + 1e-9 * (1.0 + dist)) ++out.hybrid_violations;
    if (bound > 0.0) out.worst_hybrid_ratio = std::max(out.worst_hybrid_ratio, diff / bound);

    // weak convexity in both directions
    const double sq = dist * dist;
    const double lhs1 = fv.value - (fu.value + fu.subgradient.dot(v - u) - 0.5 * problem.m() * sq);
    const double lhs2 = fu.value - (fv.value + fv.subgradient.dot(u - v) - 0.5 * problem.m() * sq);
    const double slack = 1e-9 * (1.0 + std::abs(fu.value) + std::abs(fv.value));
    if (lhs1 < -slack) ++out.weak_convexity_violations;
    if (lhs2 < -slack) ++out.weak_convexity_violations;
  }
  return out;
}

}  // namespace pbf
