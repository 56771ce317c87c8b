#pragma once

#include "pbf/oracles.hpp"
#include "pbf/simple_terms.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pbf {

enum class BundleScheme { OneCut, TwoCut, MultiCut };
enum class ResetPolicy { FreshCut, ShiftedMax };

std::string to_string(BundleScheme s);
std::string to_string(ResetPolicy p);
BundleScheme parse_scheme(const std::string& s);
ResetPolicy parse_reset_policy(const std::string& s);

/// Linearization of f_m(.; prox center) at some base point. Aggregated cuts
/// (convex combinations, shifted copies) carry id -1.
struct Cut {
  Linearization lin;
  std::int64_t id = -1;
};

inline constexpr std::size_t kDefaultMaxCuts = 50;

struct GbusStep;

/// Convex minorant Gamma = max{cuts} + h of phi_m(.; prox center).
///
/// OneCut holds exactly one (aggregated) cut. TwoCut holds the aggregate at
/// position 0 and, after the first null update, the latest cut at position 1.
/// MultiCut holds an ordered list, oldest first, capped by max_cuts.
///
/// The model keeps a non-owning pointer to h; the term must outlive it.
class BundleModel {
 public:
  BundleModel(BundleScheme scheme, const SimpleTerm& h, Vec prox_center, double m, Cut first,
              std::optional<std::size_t> max_cuts = kDefaultMaxCuts);
  /// Multi-cut model over an explicit cut list.
  static BundleModel multi(const SimpleTerm& h, Vec prox_center, double m, std::vector<Cut> cuts,
                           std::optional<std::size_t> max_cuts = std::nullopt);

  BundleScheme scheme() const { return scheme_; }
  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }
  const SimpleTerm& h() const { return *h_; }
  const Vec& prox_center() const { return center_; }
  double m() const { return m_; }
  std::optional<std::size_t> max_cuts() const { return max_cuts_; }
  int dimension() const { return h_->dimension(); }

  /// max over cuts, without h.
  double eval_cuts(const Vec& u) const;
  /// Gamma(u) = max over cuts + h(u); +inf outside dom h.
  double eval(const Vec& u) const;

  /// Indices of cuts within `rel_tol * (1 + |Gamma(x)|)` of the max at x.
  std::vector<std::size_t> active_set(const Vec& x, double rel_tol) const;

  /// GBUS null update with scheme (S1), (S2) or (S3).
  ///
  /// `x` must be the exact prox minimizer of this model and `weights` the
  /// matching dual weights (one per cut, on the simplex). `new_cut` is the
  /// linearization of f_m(.; prox center) at x.
  GbusStep null_update(const Vec& x, std::span<const double> weights, Cut new_cut, double tau,
                       double active_tol = 1e-10) const;

  /// Model for the next cycle after a serious step to `new_center`.
  ///
  /// `fresh` is l_f(.; new_center). ShiftedMax keeps the stored cuts shifted
  /// to minorize phi_m(.; new_center); for TwoCut the two stored cuts are
  /// first aggregated with `weights`. OneCut supports FreshCut only.
  BundleModel serious_reset(const Vec& new_center, Cut fresh, ResetPolicy policy,
                            std::span<const double> weights = {}) const;

 private:
  BundleModel(BundleScheme scheme, const SimpleTerm* h, Vec center, double m, std::vector<Cut> cuts,
              std::optional<std::size_t> max_cuts);

  BundleScheme scheme_;
  const SimpleTerm* h_;
  Vec center_;
  double m_;
  std::vector<Cut> cuts_;
  std::optional<std::size_t> max_cuts_;
};

struct GbusStep {
  BundleModel updated;  // Gamma+
  BundleModel bar;      // the Gamma-bar certifying the sandwich
  /// For each cut of `updated`, its position in the old model, or -1 when new
  /// or aggregated.
  std::vector<int> origin;
};

double eval_model(const BundleModel& model, const Vec& u);

}  // namespace pbf
