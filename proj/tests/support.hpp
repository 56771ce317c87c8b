#pragma once

#include "pbf/bundle.hpp"
#include "pbf/oracles.hpp"
#include "pbf/rng.hpp"

#include <cmath>
#include <functional>
#include <memory>

namespace pbf::testing {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Central finite-difference gradient with step 1e-6 (1 + ||x||).
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec p = x, q = x;
    p[i] += h;
    q[i] -= h;
    g[i] = (f(p) - f(q)) / (2.0 * h);
  }
  return g;
}

// Minimize a function of one or two variables over a box by dense grid search.
inline Vec grid_argmin(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, double step) {
  Vec best = lo;
  double best_val = kInf;
  const auto nx = static_cast<long>(std::floor((hi[0] - lo[0]) / step)) + 1;
  const long ny = lo.size() > 1 ? static_cast<long>(std::floor((hi[1] - lo[1]) / step)) + 1 : 1;
  Vec u(lo.size());
  for (long i = 0; i < nx; ++i) {
    u[0] = lo[0] + static_cast<double>(i) * step;
    for (long j = 0; j < ny; ++j) {
      if (lo.size() > 1) u[1] = lo[1] + static_cast<double>(j) * step;
      const double v = f(u);
      if (v < best_val) {
        best_val = v;
        best = u;
      }
    }
  }
  return best;
}

inline std::shared_ptr<FunctionOracle> abs_oracle() {
  return std::make_shared<FunctionOracle>(
      1, [](const Vec& x) { return std::abs(x[0]); },
      [](const Vec& x) { return vec({x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0)}); });
}

inline std::shared_ptr<FunctionOracle> half_sq_oracle(int dim) {
  return std::make_shared<FunctionOracle>(
      dim, [](const Vec& x) { return 0.5 * x.squaredNorm(); }, [](const Vec& x) { return x; });
}

// f(u) = u^4 - u^2; f'' >= -2 so it is 2-weakly convex.
inline std::shared_ptr<FunctionOracle> quartic_oracle() {
  return std::make_shared<FunctionOracle>(
      1, [](const Vec& x) { return std::pow(x[0], 4) - x[0] * x[0]; },
      [](const Vec& x) { return vec({4.0 * std::pow(x[0], 3) - 2.0 * x[0]}); });
}

// Dual of the subproblem on the simplex of weights; concave and smooth, so a
// zooming grid converges where the primal grid stalls in kink valleys.
inline Vec dual_grid_solution(const BundleModel& model, double lambda) {
  const auto& cuts = model.cuts();
  const Vec& c = model.prox_center();
  auto point = [&](const Vec& w) {
    Vec s = Vec::Zero(c.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * cuts[i].lin.slope;
    return Vec(model.h().prox(lambda, c - lambda * s));
  };
  auto neg_dual = [&](const Vec& free) {
    Vec w(static_cast<Eigen::Index>(cuts.size()));
    w.head(free.size()) = free;
    w[w.size() - 1] = 1.0 - free.sum();
    if ((w.array() < 0.0).any()) return kInf;
    const Vec u = point(w);
    double val = model.h().eval(u) + 0.5 * (u - c).squaredNorm() / lambda;
    for (std::size_t i = 0; i < cuts.size(); ++i) val += w[static_cast<Eigen::Index>(i)] * cuts[i].lin(u);
    return -val;
  };
  const int k = static_cast<int>(cuts.size()) - 1;
  Vec g = grid_argmin(neg_dual, Vec::Zero(k), Vec::Ones(k), 1e-2);
  for (double step = 1e-3; step >= 1e-7; step /= 10) {
    g = grid_argmin(neg_dual, (g.array() - 30 * step).cwiseMax(0.0), (g.array() + 30 * step).cwiseMin(1.0), step);
  }
  Vec w(k + 1);
  w.head(k) = g;
  w[k] = 1.0 - g.sum();
  return point(w);
}

}  // namespace pbf::testing
