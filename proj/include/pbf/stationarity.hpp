#pragma once

#include "pbf/oracles.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>

namespace pbf {

/// w is an eps-subgradient of phi_m(.; x) at x.
struct RegularizedCert {
  Vec x;
  Vec w;
  double eps = 0.0;
  double m = 0.0;
};

/// A witness x_tilde with ||x - x_tilde|| <= delta_D and an exhibited
/// subgradient of phi at x_tilde whose norm is at most eps_D.
struct DirectionalCert {
  Vec x;
  Vec x_tilde;
  double eps_D = 0.0;
  double delta_D = 0.0;
  Vec subgradient;
  bool verified = false;  // distance and norm checks passed
};

struct MoreauCert {
  Vec x;
  double lambda = 0.0;
  double m = 0.0;
  Vec x_hat;         // approximate minimizer defining the envelope
  Vec grad;          // (1/lambda + m)(x - x_hat)
  double grad_norm = 0.0;
  double envelope = 0.0;  // upper estimate of the envelope value at x
  double dist_bound = 0.0;  // certified bound on ||x_hat - exact minimizer||
  std::uint64_t iterations = 0;
};

/// Minimizer of f_m(u; z) + h(u) + (1/(2 lambda)) ||u - c||^2 by a multi-cut
/// proximal cutting-plane loop. Stops once the strong-convexity gap certifies
/// ||u - u*|| <= tol.
struct InnerSolve {
  Vec u;
  double value = 0.0;        // objective at u
  double lower = 0.0;        // certified lower bound on the optimal value
  double dist_bound = 0.0;   // sqrt(2 lambda (value - lower))
  std::uint64_t iterations = 0;
};

InnerSolve solve_regularized_prox(const Problem& problem, const Vec& z, const Vec& c, double lambda, double tol,
                                  std::uint64_t max_iters = 20000);

double default_moreau_tol(const Vec& x);

/// Moreau envelope value, prox point and gradient at x. Throws
/// MoreauNotConverged when the inner budget runs out.
MoreauCert moreau_oracle(const Problem& problem, double lambda, const Vec& x, std::optional<double> tol = std::nullopt);

/// (||w|| + 2 sqrt(2 m eps), sqrt(2 eps / m)) with the witness minimizing
/// phi(u) + m ||u - x||^2 - <w, u>.
DirectionalCert regularized_to_directional(const Problem& problem, const RegularizedCert& cert,
                                           std::optional<double> inner_tol = std::nullopt);

/// 18 sqrt(2 m eps) + 4 ||w||, a bound on ||grad M^{1/m}(x)||.
double regularized_to_moreau_bound(const RegularizedCert& cert);

/// (m + 1/lambda) [(3 + 2 lambda m) delta_D + 2 lambda eps_D].
double directional_to_moreau(const DirectionalCert& cert, double lambda, double m);

/// eps_D = ||grad||, delta_D = ||grad|| / (m + 1/lambda), witness x_hat.
DirectionalCert moreau_to_directional(const MoreauCert& cert);

struct InclusionCheck {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  double worst = -kInf;  // max of rhs - lhs
};

/// Samples phi_mu(u; c) >= phi_mu(p; c) + <g, u - p> - eps - slack at points
/// uniform in a box of half-width `radius` around p, projected onto dom h.
/// Default radius max(1, 2 ||p||).
InclusionCheck check_subgradient_inequality(const Problem& problem, const Vec& p, const Vec& g, double eps,
                                            const Vec& c, double mu, std::uint64_t samples, std::uint64_t seed,
                                            double slack = 1e-8, std::optional<double> radius = std::nullopt);

/// The regularized certificate's inclusion w in d_eps[phi_m(.; x)](x).
InclusionCheck check_regularized(const Problem& problem, const RegularizedCert& cert, std::uint64_t samples,
                                 std::uint64_t seed, double slack = 1e-8);

nlohmann::json to_json(const RegularizedCert& c);
nlohmann::json to_json(const DirectionalCert& c);
nlohmann::json to_json(const MoreauCert& c);

}  // namespace pbf
