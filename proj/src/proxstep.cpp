#include "pbf/proxstep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

namespace pbf {

namespace {

std::string format_gap(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", g);
  return buf;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Cut list in intercept form: l_i(u) = a_i + <g_i, u>.
struct CutMatrix {
  Mat G;  // n x k, column i is the slope of cut i
  Vec a;

  explicit CutMatrix(const BundleModel& model) {
    const auto& cuts = model.cuts();
    const int n = model.dimension();
    const int k = static_cast<int>(cuts.size());
    G.resize(n, k);
    a.resize(k);
    for (int i = 0; i < k; ++i) {
      G.col(i) = cuts[i].lin.slope;
      a[i] = cuts[i].lin.value_at_base - cuts[i].lin.slope.dot(cuts[i].lin.base_point);
    }
  }
  Vec values(const Vec& u) const { return a + G.transpose() * u; }
};

// Minimizes (1/2) w'Qw - r'w over the unit simplex, Q positive semidefinite.
// Primal active-set method on the bounds w_i >= 0. Each step minimizes over
// the face of the free indices in the reduced space {sum p = 0}; where the
// reduced Hessian is singular and the gradient has a component along its
// null space, the step follows that zero-curvature descent direction to the
// boundary instead.
std::optional<Vec> simplex_qp(const Mat& Q, const Vec& r, const Vec& start) {
  const Eigen::Index k = r.size();
  Vec w = start.size() == k ? project_simplex(start) : Vec::Constant(k, 1.0 / static_cast<double>(k));
  const double scale = 1.0 + r.cwiseAbs().maxCoeff() + Q.cwiseAbs().maxCoeff();
  const double mult_tol = 1e-14 * scale;

  bool face_min = false;
  for (int iter = 0; iter < 20 * static_cast<int>(k) + 100; ++iter) {
    std::vector<Eigen::Index> F;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (w[i] > 0.0) F.push_back(i);
    }
    const auto f = static_cast<Eigen::Index>(F.size());
    const Vec g = Q * w - r;

    Vec p = Vec::Zero(f);
    bool flat_dir = false;
    if (f > 1 && !face_min) {
      const Mat basis = Eigen::HouseholderQR<Mat>(Mat::Ones(f, 1)).householderQ();
      const Mat Z = basis.rightCols(f - 1);
      Mat QF(f, f);
      Vec gF(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        gF[a] = g[F[a]];
        for (Eigen::Index b = 0; b < f; ++b) QF(a, b) = Q(F[a], F[b]);
      }
      const Eigen::SelfAdjointEigenSolver<Mat> es(Z.transpose() * QF * Z);
      const Vec& ev = es.eigenvalues();
      const Mat& V = es.eigenvectors();
      const Vec zg = V.transpose() * (Z.transpose() * gF);
      // curvature below eigensolver round-off counts as flat
      const double ev_tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
      Eigen::Index flat = -1;
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] <= ev_tol && std::abs(zg[i]) > mult_tol && (flat < 0 || std::abs(zg[i]) > std::abs(zg[flat]))) {
          flat = i;
        }
      }
      Vec y = Vec::Zero(ev.size());
      if (flat >= 0) {
        y[flat] = zg[flat] > 0.0 ? -1.0 : 1.0;
      } else {
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
          if (ev[i] > ev_tol) y[i] = -zg[i] / ev[i];
        }
      }
      p = Z * (V * y);
      flat_dir = flat >= 0;
      if (!flat_dir && p.cwiseAbs().maxCoeff() <= 1e-15) p.setZero();
    }
    face_min = false;

    if (p.isZero(0.0)) {
      double nu = 0.0;
      for (Eigen::Index i : F) nu += g[i];
      nu /= static_cast<double>(std::max<Eigen::Index>(f, 1));
      Eigen::Index enter = -1;
      double most = -mult_tol;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (w[i] > 0.0) continue;
        if (g[i] - nu < most) {
          most = g[i] - nu;
          enter = i;
        }
      }
      if (enter < 0) return w;
      // move a little mass onto the entering index along the cheapest edge
      Vec d = Vec::Zero(k);
      d[enter] = 1.0;
      for (Eigen::Index i : F) d[i] = -w[i];
      const double slope = g.dot(d);
      const double curv = d.dot(Q * d);
      double step = curv > 0.0 ? std::min(1.0, -slope / curv) : 1.0;
      if (!(step > 0.0)) step = 1e-12;
      w += step * d;
      w = w.cwiseMax(0.0);
      w /= w.sum();
      continue;
    }

    double step = flat_dir ? kInf : 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index a = 0; a < f; ++a) {
      if (p[a] < 0.0) {
        const double lim = -w[F[a]] / p[a];
        if (lim < step) {
          step = lim;
          blocking = F[a];
        }
      }
    }
    if (blocking < 0 && flat_dir) return std::nullopt;  // unbounded below: Q is not PSD
    for (Eigen::Index a = 0; a < f; ++a) w[F[a]] += step * p[a];
    if (blocking >= 0) {
      w[blocking] = 0.0;
    } else {
      face_min = true;
    }
    w = w.cwiseMax(0.0);
    w /= w.sum();
  }
  return std::nullopt;
}

struct DualPoint {
  Vec w;
  Vec u;
  Vec ell;  // cut values at u
  double dual = 0.0;
  double gap = kInf;
};

class MultiCutSolver {
 public:
  MultiCutSolver(const BundleModel& model, double lambda)
      : model_(model), h_(model.h()), c_(model.prox_center()), lambda_(lambda), cm_(model) {}

  DualPoint evaluate(const Vec& w) const {
    DualPoint p;
    p.w = w;
    p.u = h_.prox(lambda_, c_ - lambda_ * (cm_.G * w));
    p.ell = cm_.values(p.u);
    const double hu = h_.eval(p.u);
    const double wl = w.dot(p.ell);
    p.dual = wl + hu + 0.5 * (p.u - c_).squaredNorm() / lambda_;
    p.gap = std::max(0.0, p.ell.maxCoeff() - wl);
    return p;
  }

  double gap_floor(const DualPoint& p) const { return 1e-14 * (1.0 + p.ell.cwiseAbs().maxCoeff()); }

  // Lipschitz constant of the dual gradient: lambda * ||G||_2^2, by power iteration.
  double lipschitz() const {
    const Mat GtG = cm_.G.transpose() * cm_.G;
    Vec v = Vec::Ones(GtG.rows()).normalized();
    double est = 0.0;
    for (int it = 0; it < 50; ++it) {
      Vec nv = GtG * v;
      const double nn = nv.norm();
      if (nn == 0.0) break;
      est = nn;
      v = nv / nn;
    }
    return std::max(lambda_ * est, 1e-12);
  }

  // Active-set refinement of the weights, returns the best point found.
  DualPoint polish(const DualPoint& start) const {
    DualPoint best = start;
    DualPoint cur = start;
    for (int round = 0; round < 3; ++round) {
      std::optional<Vec> w = refine(cur);
      if (!w) break;
      DualPoint cand = evaluate(*w);
      if (!(cand.gap < best.gap)) break;
      best = cand;
      cur = std::move(cand);
    }
    return best;
  }

 private:
  struct Structure {
    std::vector<int> free_idx;
    std::vector<int> fixed_idx;
    Vec fixed_val;  // entries used on fixed_idx
    Vec offset;     // entries used on free_idx (L1 sign term)
  };

  std::optional<Vec> refine(const DualPoint& p) const {
    const int n = model_.dimension();
    const Vec v = c_ - lambda_ * (cm_.G * p.w);
    Structure s;
    s.fixed_val = Vec::Zero(n);
    s.offset = Vec::Zero(n);
    std::optional<double> ball_mu;
    std::visit(overloaded{
                   [&](const SimpleTerm::Zero&) {
                     for (int i = 0; i < n; ++i) s.free_idx.push_back(i);
                   },
                   [&](const SimpleTerm::L1& t) {
                     for (int i = 0; i < n; ++i) {
                       if (p.u[i] == 0.0) {
                         s.fixed_idx.push_back(i);
                       } else {
                         s.free_idx.push_back(i);
                         s.offset[i] = t.weight * (p.u[i] > 0.0 ? 1.0 : -1.0);
                       }
                     }
                   },
                   [&](const SimpleTerm::Box& t) {
                     for (int i = 0; i < n; ++i) {
                       if (p.u[i] == t.lower[i] || p.u[i] == t.upper[i]) {
                         s.fixed_idx.push_back(i);
                         s.fixed_val[i] = p.u[i];
                       } else {
                         s.free_idx.push_back(i);
                       }
                     }
                   },
                   [&](const SimpleTerm::Ball& t) {
                     for (int i = 0; i < n; ++i) s.free_idx.push_back(i);
                     const double dist = (v - t.center).norm();
                     if (dist > t.radius) ball_mu = (dist / t.radius - 1.0) / lambda_;
                   },
               },
               h_.variant());

    if (!ball_mu) return active_set(s, c_, lambda_, p.w).first;
    return ball_refine(s, p.w, *ball_mu);
  }

  // For an active ball constraint with multiplier mu the subproblem is the
  // unconstrained one with center (c + lambda mu ctr) / (1 + lambda mu) and
  // parameter lambda / (1 + lambda mu); bisect on mu for ||u - ctr|| = r.
  std::optional<Vec> ball_refine(const Structure& s, const Vec& w_start, double mu0) const {
    const auto& ball = std::get<SimpleTerm::Ball>(h_.variant());
    Vec start = w_start;
    auto solve_at = [&](double mu) -> std::optional<std::pair<Vec, double>> {
      const double scale = 1.0 + lambda_ * mu;
      const Vec ce = (c_ + lambda_ * mu * ball.center) / scale;
      auto [w, u] = active_set(s, ce, lambda_ / scale, start);
      if (!w) return std::nullopt;
      start = *w;
      return std::make_pair(*w, (u - ball.center).norm() - ball.radius);
    };

    auto at0 = solve_at(0.0);
    if (!at0) return std::nullopt;
    if (at0->second <= 0.0) return at0->first;

    double lo = 0.0;
    double hi = std::max(mu0, 1e-12);
    auto at_hi = solve_at(hi);
    for (int i = 0; i < 200 && at_hi && at_hi->second > 0.0; ++i) {
      lo = hi;
      hi *= 2.0;
      at_hi = solve_at(hi);
    }
    if (!at_hi || at_hi->second > 0.0) return std::nullopt;
    Vec w = at_hi->first;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      auto r = solve_at(mid);
      if (!r) break;
      if (r->second > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        w = r->first;
      }
    }
    return w;
  }

  // With the structure of h fixed, u is affine in w on the free coordinates
  // and the dual is the simplex QP  max r.w - (lam/2) |G_F w|^2.
  std::pair<std::optional<Vec>, Vec> active_set(const Structure& s, const Vec& ce, double lam,
                                                 const Vec& w_start) const {
    const int n = model_.dimension();
    Vec u0(n);
    for (int i : s.fixed_idx) u0[i] = s.fixed_val[i];
    for (int i : s.free_idx) u0[i] = ce[i] - lam * s.offset[i];
    const Vec r = cm_.values(u0);
    Mat GF(static_cast<Eigen::Index>(s.free_idx.size()), cm_.G.cols());
    for (std::size_t i = 0; i < s.free_idx.size(); ++i) GF.row(static_cast<Eigen::Index>(i)) = cm_.G.row(s.free_idx[i]);
    const Mat Q = lam * (GF.transpose() * GF);

    std::optional<Vec> w = simplex_qp(Q, r, w_start);
    if (!w) return {std::nullopt, u0};
    Vec u = u0;
    const Vec Gw = GF * *w;
    for (std::size_t i = 0; i < s.free_idx.size(); ++i) u[s.free_idx[i]] -= lam * Gw[static_cast<Eigen::Index>(i)];
    return {w, u};
  }

  const BundleModel& model_;
  const SimpleTerm& h_;
  const Vec& c_;
  double lambda_;
  CutMatrix cm_;
};

ProxSolution finish(const BundleModel& model, double lambda, const Vec& w, Vec x, double gap,
                    std::size_t iterations) {
  ProxSolution sol;
  const Vec& c = model.prox_center();
  sol.theta = model.eval(x) + 0.5 * (x - c).squaredNorm() / lambda;
  sol.model_subgrad = (c - x) / lambda;
  sol.x = std::move(x);
  sol.dual_weights.assign(w.data(), w.data() + w.size());
  sol.gap = gap;
  sol.iterations = iterations;
  return sol;
}

ProxSolution solve_one(const BundleModel& model, double lambda) {
  const Cut& cut = model.cuts()[0];
  Vec x = model.h().prox(lambda, model.prox_center() - lambda * cut.lin.slope);
  return finish(model, lambda, Vec::Ones(1), std::move(x), 0.0, 0);
}

ProxSolution solve_two(const BundleModel& model, double lambda, double tol) {
  MultiCutSolver solver(model, lambda);
  auto at = [&](double theta) {
    Vec w(2);
    w << theta, 1.0 - theta;
    return solver.evaluate(w);
  };
  auto slope = [](const DualPoint& p) { return p.ell[0] - p.ell[1]; };

  DualPoint best;
  const DualPoint one = at(1.0);
  const DualPoint zero = at(0.0);
  if (slope(one) >= 0.0) {
    best = one;
  } else if (slope(zero) <= 0.0) {
    best = zero;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      if (slope(at(mid)) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    best = at(0.5 * (lo + hi));
  }
  if (best.gap > std::max(tol, solver.gap_floor(best))) best = solver.polish(best);
  return finish(model, lambda, best.w, best.u, best.gap, 0);
}

ProxSolution solve_multi(const BundleModel& model, double lambda, double tol, std::span<const double> warm) {
  MultiCutSolver solver(model, lambda);
  const int k = static_cast<int>(model.size());
  Vec w0 = Vec::Constant(k, 1.0 / k);
  if (warm.size() == static_cast<std::size_t>(k)) {
    Vec ws(k);
    for (int i = 0; i < k; ++i) ws[i] = warm[static_cast<std::size_t>(i)];
    w0 = project_simplex(ws);
  }

  DualPoint x = solver.evaluate(w0);
  auto done = [&](const DualPoint& p) { return p.gap <= std::max(tol, solver.gap_floor(p)); };
  if (!done(x)) x = solver.polish(x);
  if (done(x)) return finish(model, lambda, x.w, x.u, x.gap, 0);

  // FISTA ascent with backtracking and function-value restart
  double L = solver.lipschitz();
  DualPoint y = x;
  DualPoint best = x;
  double t = 1.0;
  for (std::size_t it = 1; it <= kMaxDualSteps; ++it) {
    DualPoint next;
    for (;;) {
      next = solver.evaluate(project_simplex(y.w + y.ell / L));
      const Vec d = next.w - y.w;
      const double model_val = y.dual + y.ell.dot(d) - 0.5 * L * d.squaredNorm();
      if (next.dual >= model_val - 1e-15 * (1.0 + std::abs(y.dual)) || L > 1e300) break;
      L *= 2.0;
    }
    if (next.gap < best.gap) best = next;
    if (done(best)) return finish(model, lambda, best.w, best.u, best.gap, it);

    if (it % 25 == 0) {
      DualPoint pol = solver.polish(best);
      if (pol.gap < best.gap) best = pol;
      if (done(best)) return finish(model, lambda, best.w, best.u, best.gap, it);
    }

    if (next.dual < x.dual) {
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vec yw = project_simplex(next.w + ((t - 1.0) / t_next) * (next.w - x.w));
    x = std::move(next);
    y = solver.evaluate(yw);
    t = t_next;
  }
  fail(ErrorKind::SubproblemNotConverged,
       "subproblem not converged (gap " + format_gap(best.gap) + " > tol " + format_gap(tol) + " after " +
           std::to_string(kMaxDualSteps) + " dual steps)");
}

}  // namespace

double default_subproblem_tol(double delta) { return std::min(1e-12, 1e-6 * delta); }

Vec project_simplex(const Vec& v) {
  const Eigen::Index n = v.size();
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += s[static_cast<std::size_t>(i)];
    const double cand = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[static_cast<std::size_t>(i)] - cand > 0.0) shift = cand;
  }
  Vec out = (v.array() - shift).cwiseMax(0.0).matrix();
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

ProxSolution solve_prox(const BundleModel& model, double lambda, double tol, std::span<const double> warm_start) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(tol > 0.0, "subproblem tolerance must be positive");
  if (model.size() == 1) return solve_one(model, lambda);
  if (model.scheme() == BundleScheme::TwoCut) return solve_two(model, lambda, tol);
  return solve_multi(model, lambda, tol, warm_start);
}

ProxSolution solve_prox_dual(const BundleModel& model, double lambda, double tol,
                             std::span<const double> warm_start) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(tol > 0.0, "subproblem tolerance must be positive");
  return solve_multi(model, lambda, tol, warm_start);
}

}  // namespace pbf
