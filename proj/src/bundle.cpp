#include "pbf/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace pbf {

std::string to_string(BundleScheme s) {
  switch (s) {
    case BundleScheme::OneCut: return "onecut";
    case BundleScheme::TwoCut: return "twocut";
    case BundleScheme::MultiCut: return "multicut";
  }
  return "?";
}

std::string to_string(ResetPolicy p) { return p == ResetPolicy::FreshCut ? "fresh-cut" : "shifted-max"; }

BundleScheme parse_scheme(const std::string& s) {
  if (s == "onecut" || s == "one-cut") return BundleScheme::OneCut;
  if (s == "twocut" || s == "two-cut") return BundleScheme::TwoCut;
  if (s == "multicut" || s == "multi-cut") return BundleScheme::MultiCut;
  fail(ErrorKind::InvalidArgument, "unknown bundle scheme '" + s + "'");
}

ResetPolicy parse_reset_policy(const std::string& s) {
  if (s == "fresh-cut" || s == "fresh") return ResetPolicy::FreshCut;
  if (s == "shifted-max" || s == "shifted") return ResetPolicy::ShiftedMax;
  fail(ErrorKind::InvalidArgument, "unknown reset policy '" + s + "'");
}

BundleModel::BundleModel(BundleScheme scheme, const SimpleTerm& h, Vec prox_center, double m, Cut first,
                         std::optional<std::size_t> max_cuts)
    : BundleModel(scheme, &h, std::move(prox_center), m, std::vector<Cut>{std::move(first)}, max_cuts) {}

BundleModel::BundleModel(BundleScheme scheme, const SimpleTerm* h, Vec center, double m, std::vector<Cut> cuts,
                         std::optional<std::size_t> max_cuts)
    : scheme_(scheme), h_(h), center_(std::move(center)), m_(m), cuts_(std::move(cuts)), max_cuts_(max_cuts) {
  require(!cuts_.empty(), "bundle model needs at least one cut");
  require(center_.size() == h_->dimension(), "prox center dimension mismatch");
  require(!max_cuts_ || *max_cuts_ >= 2, "max_cuts must be at least 2");
  for (const Cut& c : cuts_) require(c.lin.slope.size() == h_->dimension(), "cut dimension mismatch");
  if (scheme_ == BundleScheme::OneCut) require(cuts_.size() == 1, "one-cut model holds exactly one cut");
  if (scheme_ == BundleScheme::TwoCut) require(cuts_.size() <= 2, "two-cut model holds at most two cuts");
}

BundleModel BundleModel::multi(const SimpleTerm& h, Vec prox_center, double m, std::vector<Cut> cuts,
                               std::optional<std::size_t> max_cuts) {
  return BundleModel(BundleScheme::MultiCut, &h, std::move(prox_center), m, std::move(cuts), max_cuts);
}

double BundleModel::eval_cuts(const Vec& u) const {
  double best = -kInf;
  for (const Cut& c : cuts_) best = std::max(best, c.lin(u));
  return best;
}

double BundleModel::eval(const Vec& u) const {
  const double hu = h_->eval(u);
  if (!std::isfinite(hu)) return kInf;
  return eval_cuts(u) + hu;
}

std::vector<std::size_t> BundleModel::active_set(const Vec& x, double rel_tol) const {
  std::vector<double> vals(cuts_.size());
  double best = -kInf;
  for (std::size_t i = 0; i < cuts_.size(); ++i) {
    vals[i] = cuts_[i].lin(x);
    best = std::max(best, vals[i]);
  }
  const double gamma = best + h_->eval(x);
  const double tol = rel_tol * (1.0 + (std::isfinite(gamma) ? std::abs(gamma) : std::abs(best)));
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (best - vals[i] <= tol) active.push_back(i);
  }
  return active;
}

GbusStep BundleModel::null_update(const Vec& x, std::span<const double> weights, Cut new_cut, double tau,
                                  double active_tol) const {
  require(tau >= 0.0 && tau < 1.0, "tau must lie in [0, 1)");
  require(new_cut.lin.slope.size() == dimension(), "new cut dimension mismatch");

  switch (scheme_) {
    case BundleScheme::OneCut: {
      // (S1): tau * Gamma + (1 - tau) * [l(.; x) + h]; h is shared so only the affine parts mix.
      Cut agg{convex_combination(tau, cuts_[0].lin, new_cut.lin), -1};
      BundleModel updated(scheme_, h_, center_, m_, {std::move(agg)}, max_cuts_);
      return {std::move(updated), *this, {-1}};
    }
    case BundleScheme::TwoCut: {
      // (S2): A+ = theta A + (1 - theta) l(.; x-), latest <- l(.; x).
      Cut agg = cuts_[0];
      int agg_origin = 0;
      if (cuts_.size() == 2) {
        require(weights.size() == 2, "two-cut update needs two dual weights");
        const double theta = std::clamp(weights[0], 0.0, 1.0);
        agg = Cut{convex_combination(theta, cuts_[0].lin, cuts_[1].lin), -1};
        agg_origin = -1;
      }
      BundleModel bar(BundleScheme::OneCut, h_, center_, m_, {agg}, max_cuts_);
      BundleModel updated(scheme_, h_, center_, m_, {std::move(agg), std::move(new_cut)}, max_cuts_);
      return {std::move(updated), std::move(bar), {agg_origin, -1}};
    }
    case BundleScheme::MultiCut: {
      require(weights.empty() || weights.size() == cuts_.size(), "dual weights do not match the cut list");
      std::vector<std::size_t> active = active_set(x, active_tol);
      std::vector<bool> is_active(cuts_.size(), false);
      for (std::size_t i : active) is_active[i] = true;
      std::vector<bool> positive(cuts_.size(), false);
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
          positive[i] = true;
          is_active[i] = true;
        }
      }
      if (std::none_of(is_active.begin(), is_active.end(), [](bool b) { return b; })) {
        fail(ErrorKind::DegenerateActiveSet, "degenerate active set");
      }

      std::vector<bool> keep(cuts_.size(), true);
      std::size_t kept = cuts_.size();
      if (max_cuts_) {
        // evict inactive oldest-first, then zero-weight active cuts oldest-first
        for (int pass = 0; pass < 2 && kept + 1 > *max_cuts_; ++pass) {
          for (std::size_t i = 0; i < cuts_.size() && kept + 1 > *max_cuts_; ++i) {
            const bool evictable = pass == 0 ? !is_active[i] : !positive[i];
            if (keep[i] && evictable) {
              keep[i] = false;
              --kept;
            }
          }
        }
      }

      std::vector<Cut> next;
      std::vector<int> origin;
      std::vector<Cut> bar_cuts;
      next.reserve(kept + 1);
      for (std::size_t i = 0; i < cuts_.size(); ++i) {
        if (is_active[i] && keep[i]) bar_cuts.push_back(cuts_[i]);
        if (!keep[i]) continue;
        next.push_back(cuts_[i]);
        origin.push_back(static_cast<int>(i));
      }
      // active cuts dropped only under cap pressure still belong to Gamma-bar's support
      for (std::size_t i = 0; i < cuts_.size(); ++i) {
        if (is_active[i] && !keep[i] && positive[i]) bar_cuts.push_back(cuts_[i]);
      }
      next.push_back(std::move(new_cut));
      origin.push_back(-1);
      BundleModel bar(BundleScheme::MultiCut, h_, center_, m_, std::move(bar_cuts), std::nullopt);
      BundleModel updated(scheme_, h_, center_, m_, std::move(next), max_cuts_);
      return {std::move(updated), std::move(bar), std::move(origin)};
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown scheme");
}

BundleModel BundleModel::serious_reset(const Vec& new_center, Cut fresh, ResetPolicy policy,
                                       std::span<const double> weights) const {
  require(new_center.size() == dimension(), "new center dimension mismatch");
  if (policy == ResetPolicy::FreshCut) {
    return BundleModel(scheme_, h_, new_center, m_, {std::move(fresh)}, max_cuts_);
  }
  if (scheme_ == BundleScheme::OneCut) {
    fail(ErrorKind::InvalidArgument, "shifted-max reset needs a two-cut or multi-cut model");
  }

  // Gamma~ = Gamma - m<d, . - x_k> - (m/2)||d||^2 with d = x_k - x_{k-1}
  const Vec d = new_center - center_;
  const Vec a = m_ * d;
  const double c = 0.5 * m_ * d.squaredNorm();
  auto shift = [&](const Cut& cut) { return Cut{cut.lin.shifted(a, new_center, c), cut.id}; };

  if (scheme_ == BundleScheme::TwoCut) {
    Cut agg = cuts_[0];
    if (cuts_.size() == 2) {
      require(weights.size() == 2, "two-cut reset needs the last dual weights");
      agg = Cut{convex_combination(std::clamp(weights[0], 0.0, 1.0), cuts_[0].lin, cuts_[1].lin), -1};
    }
    return BundleModel(scheme_, h_, new_center, m_, {shift(agg), std::move(fresh)}, max_cuts_);
  }

  std::vector<Cut> next;
  next.reserve(cuts_.size() + 1);
  std::size_t first = 0;
  if (max_cuts_ && cuts_.size() + 1 > *max_cuts_) first = cuts_.size() + 1 - *max_cuts_;
  for (std::size_t i = first; i < cuts_.size(); ++i) next.push_back(shift(cuts_[i]));
  next.push_back(std::move(fresh));
  return BundleModel(scheme_, h_, new_center, m_, std::move(next), max_cuts_);
}

double eval_model(const BundleModel& model, const Vec& u) { return model.eval(u); }

}  // namespace pbf
