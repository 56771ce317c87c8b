#pragma once

#include "pbf/simple_terms.hpp"
#include "pbf/types.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace pbf {

/// Value and one fixed subgradient of f at a point.
struct OracleAnswer {
  double value;
  Vec subgradient;
};

/// First-order oracle for the weakly convex term f.
///
/// Implementations must be deterministic and reentrant; ties in the
/// subdifferential are broken the same way on every call.
class HybridOracle {
 public:
  virtual ~HybridOracle() = default;

  virtual int dimension() const = 0;
  virtual OracleAnswer evaluate(const Vec& x) const = 0;

  double value(const Vec& x) const { return evaluate(x).value; }
  Vec subgradient(const Vec& x) const { return evaluate(x).subgradient; }
};

/// Oracle backed by two callables; mostly for tests and small examples.
class FunctionOracle final : public HybridOracle {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using SubgradFn = std::function<Vec(const Vec&)>;

  FunctionOracle(int dim, ValueFn value, SubgradFn subgrad)
      : dim_(dim), value_(std::move(value)), subgrad_(std::move(subgrad)) {}

  int dimension() const override { return dim_; }
  OracleAnswer evaluate(const Vec& x) const override { return {value_(x), subgrad_(x)}; }

 private:
  int dim_;
  ValueFn value_;
  SubgradFn subgrad_;
};

/// Affine function u -> value_at_base + <slope, u - base_point>.
struct Linearization {
  Vec base_point;
  double value_at_base = 0.0;
  Vec slope;

  double operator()(const Vec& u) const { return value_at_base + slope.dot(u - base_point); }
  /// Same affine function, stored relative to a different base point.
  Linearization rebased(const Vec& new_base) const;
  /// Subtract the affine function u -> <a, u - p> + c.
  Linearization shifted(const Vec& a, const Vec& p, double c) const;
};

/// theta * a + (1 - theta) * b, stored at b's base point.
Linearization convex_combination(double theta, const Linearization& a, const Linearization& b);

/// Composite problem phi = f + h with weak-convexity modulus m and the
/// (M, L)-hybrid constants of the oracle.
class Problem {
 public:
  Problem(std::shared_ptr<const HybridOracle> f, SimpleTerm h, double m, double M, double L,
          std::optional<double> phi_lower_hint = std::nullopt);

  const HybridOracle& f() const { return *f_; }
  std::shared_ptr<const HybridOracle> f_ptr() const { return f_; }
  const SimpleTerm& h() const { return h_; }
  int dimension() const { return h_.dimension(); }
  double m() const { return m_; }
  double M() const { return M_; }
  double L() const { return L_; }
  const std::optional<double>& phi_lower_hint() const { return phi_lower_; }

  bool in_domain(const Vec& x) const { return h_.contains(x); }
  void require_domain(const Vec& x) const;

  /// phi(x) = f(x) + h(x); +inf outside dom h.
  double phi(const Vec& x) const;
  /// phi_mu(u; z) = phi(u) + (mu/2)||u - z||^2.
  double phi_reg(const Vec& u, const Vec& z, double mu) const;
  /// f_m(u; z) = f(u) + (m/2)||u - z||^2.
  double f_reg(const Vec& u, const Vec& z) const;

 private:
  std::shared_ptr<const HybridOracle> f_;
  SimpleTerm h_;
  double m_, M_, L_;
  std::optional<double> phi_lower_;
};

/// l_f(.; x) = f(x) + <f'(x), . - x>.
Linearization linearize(const Problem& problem, const Vec& x);
/// Linearization of f_m(.; z) at base z~: slope f'(z~) + m(z~ - z).
Linearization regularized_linearize(const Problem& problem, const Vec& center, const Vec& base);
/// Same, from an oracle answer already computed at `base`.
Linearization regularized_linearize(const Problem& problem, const Vec& center, const Vec& base,
                                    const OracleAnswer& at_base);

/// Sampling check of the declared constants on a set of point pairs.
struct ConstantCheck {
  std::size_t pairs = 0;
  std::size_t hybrid_violations = 0;        // ||f'(u)-f'(v)|| > 2M + L||u-v|| + slack
  std::size_t weak_convexity_violations = 0;  // f(y) < f(x) + <f'(x),y-x> - (m/2)||y-x||^2 - slack
  double worst_hybrid_ratio = 0.0;          // max ||f'(u)-f'(v)|| / (2M + L||u-v||)
};

/// Sample `pairs` point pairs uniformly from the box [center - r, center + r]
/// projected onto dom h, and test the hybrid and weak-convexity inequalities.
ConstantCheck check_declared_constants(const Problem& problem, const Vec& center, double radius,
                                       std::size_t pairs, std::uint64_t seed);

}  // namespace pbf
