#pragma once

#include "pbf/oracles.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace pbf {

/// f(x) = (1/n) sum_i |<a_i, x>^2 - b_i| with a_i the rows of A. The
/// subgradient takes sign(0) = 0.
class PhaseRetrievalOracle final : public HybridOracle {
 public:
  PhaseRetrievalOracle(Mat A, Vec b);

  int dimension() const override { return static_cast<int>(A_.cols()); }
  OracleAnswer evaluate(const Vec& x) const override;

  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
};

/// f(x) = w (x'Px/2 - beta sum_i cos x_i) + max_j (<c_j, x> + e_j), with c_j
/// the rows of C. Ties in the max go to the lowest index.
class HybridSyntheticOracle final : public HybridOracle {
 public:
  HybridSyntheticOracle(Mat P, double beta, double weight, Mat C, Vec e);

  int dimension() const override { return static_cast<int>(P_.rows()); }
  OracleAnswer evaluate(const Vec& x) const override;

  const Mat& P() const { return P_; }
  double beta() const { return beta_; }
  double weight() const { return weight_; }
  const Mat& C() const { return C_; }
  const Vec& e() const { return e_; }

 private:
  Mat P_;
  double beta_;
  double weight_;
  Mat C_;
  Vec e_;
};

struct Instance {
  Problem problem;
  std::string name;
  std::string generator;  // "phase_retrieval", "hybrid_synthetic"
  std::uint64_t seed = 0;
  double known_phi_star_lower = 0.0;
  Vec x0;                     // suggested starting point in dom h
  std::optional<Vec> planted;  // known good point, when the generator has one
  nlohmann::json params;      // generator arguments and notes on the constants
};

/// Bounded domain for the generated instances: "ball" (radius around 0) or
/// "box" ([-radius, radius]^dim).
struct DomainSpec {
  std::string kind = "ball";
  double radius = 2.0;
};

SimpleTerm make_domain(int dim, const DomainSpec& d);

/// Phase retrieval from explicit data. m = (2/n) sum ||a_i||^2,
/// M = (2/n) sigma_max(A)^2 sup_{dom h} ||x||, L = 0, phi* >= 0.
Instance make_phase_retrieval(Mat A, Vec b, SimpleTerm h, Vec x0, std::optional<Vec> planted = std::nullopt);

/// Gaussian a_i, planted x of unit norm, b_i = <a_i, x>^2 + noise * N(0,1).
Instance gen_phase_retrieval(int n_samples, int dim, std::uint64_t seed, double noise = 0.0,
                             const DomainSpec& domain = {});

/// Hybrid instance from explicit data; m, M, L computed from the eigenvalues
/// of P, beta, the weight and the pairwise distances of the rows of C.
Instance make_hybrid_synthetic(Mat P, double beta, double weight, Mat C, Vec e, SimpleTerm h, Vec x0);

/// P = Q diag(d) Q' with Haar-like Q and d uniform in [-1, 1], beta = 1,
/// kink_count affine pieces with Gaussian slopes of norm ~1.
Instance gen_hybrid_synthetic(int dim, std::uint64_t seed, double smooth_weight = 1.0, int kink_count = 5,
                              const DomainSpec& domain = {});

/// Floor on the declared m when the construction is convex.
inline constexpr double kMinModulus = 1e-6;

nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

/// Sampled hybrid and weak-convexity checks over pairs drawn from dom h.
ConstantCheck verify_instance(const Instance& inst, std::size_t pairs, std::uint64_t seed);

}  // namespace pbf
