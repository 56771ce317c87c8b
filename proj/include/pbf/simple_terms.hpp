#pragma once

#include "pbf/types.hpp"

#include "json.hpp"

#include <string>
#include <variant>

namespace pbf {

/// Catalog of simple convex terms h with closed-form proximal maps.
///
/// Every variant is proper, lsc and convex. Indicator variants return +inf
/// outside their set; membership is tested with a relative tolerance of
/// 1e-12 so points produced by prox() are always inside.
class SimpleTerm {
 public:
  struct Zero {};
  struct L1 {
    double weight;
  };
  struct Box {
    Vec lower;  // may hold -inf
    Vec upper;  // may hold +inf
  };
  struct Ball {
    Vec center;
    double radius;
  };
  using Variant = std::variant<Zero, L1, Box, Ball>;

  static SimpleTerm zero(int dim);
  static SimpleTerm l1(int dim, double weight);
  static SimpleTerm box(Vec lower, Vec upper);
  static SimpleTerm box(int dim, double lower, double upper);
  static SimpleTerm ball(Vec center, double radius);
  static SimpleTerm ball(int dim, double radius);

  int dimension() const { return dim_; }
  const Variant& variant() const { return term_; }
  bool is_indicator() const;
  std::string name() const;

  bool contains(const Vec& u) const;
  /// h(u); +inf exactly when u is outside dom h.
  double eval(const Vec& u) const;
  /// argmin_u { h(u) + ||u - v||^2 / (2t) }, t > 0.
  Vec prox(double t, const Vec& v) const;
  /// Euclidean projection onto dom h (identity for finite-valued terms).
  Vec project_domain(const Vec& v) const;

  /// sup { ||u|| : u in dom h }, +inf for unbounded domains.
  double domain_radius() const;

  nlohmann::json to_json() const;
  static SimpleTerm from_json(const nlohmann::json& j);

 private:
  SimpleTerm(int dim, Variant v) : dim_(dim), term_(std::move(v)) {}

  int dim_;
  Variant term_;
};

double eval_h(const SimpleTerm& term, const Vec& u);
Vec prox_h(const SimpleTerm& term, double t, const Vec& v);

}  // namespace pbf
