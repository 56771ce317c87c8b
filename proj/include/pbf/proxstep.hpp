#pragma once

#include "pbf/bundle.hpp"

#include <span>
#include <vector>

namespace pbf {

/// Solution of min { Gamma(u) + ||u - c||^2 / (2 lambda) } for a bundle model
/// Gamma with prox center c.
struct ProxSolution {
  Vec x;
  double theta = 0.0;                 // optimal value, evaluated at x
  std::vector<double> dual_weights;   // one per cut, on the simplex
  Vec model_subgrad;                  // element of dGamma(x), equals (c - x) / lambda
  double gap = 0.0;                   // primal - dual gap at (x, dual_weights)
  std::size_t iterations = 0;         // dual ascent steps (0 for closed forms)
};

/// Subproblem tolerance used by the solver when none is configured.
double default_subproblem_tol(double delta);

/// Hard cap on dual ascent steps for the multi-cut solver.
inline constexpr std::size_t kMaxDualSteps = 100000;

/// Solve the bundle subproblem.
///
/// OneCut is closed form. TwoCut bisects the one-dimensional dual. MultiCut
/// runs accelerated projected-gradient ascent on the simplex dual and
/// finishes with an active-set polish; the reported gap is recomputed from
/// the final weights. `warm_start`, when it has one entry per cut, seeds the
/// dual weights. The requested `tol` is floored at a few ulps of the cut
/// values since the gap cannot be resolved below that.
///
/// Throws Error(SubproblemNotConverged) when the gap stays above tolerance
/// after kMaxDualSteps steps.
ProxSolution solve_prox(const BundleModel& model, double lambda, double tol,
                        std::span<const double> warm_start = {});

/// The multi-cut dual path regardless of the model's scheme; used to
/// cross-check the closed forms.
ProxSolution solve_prox_dual(const BundleModel& model, double lambda, double tol,
                             std::span<const double> warm_start = {});

/// Euclidean projection onto the unit simplex.
Vec project_simplex(const Vec& v);

}  // namespace pbf
