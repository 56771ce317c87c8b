#include "pbf/pbf.hpp"
#include "pbf/stationarity.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace pbf;
using namespace pbf::testing;

namespace {

Problem square_problem() {
  auto f = std::make_shared<FunctionOracle>(
      1, [](const Vec& x) { return x[0] * x[0]; }, [](const Vec& x) { return vec({2.0 * x[0]}); });
  return Problem(f, SimpleTerm::zero(1), 1e-9, 0.0, 2.0, 0.0);
}

// sum (x_i^4 - x_i^2) + x1 x2 / 2 on a box: smooth, 2.5-weakly convex
Problem smooth_2d() {
  auto f = std::make_shared<FunctionOracle>(
      2,
      [](const Vec& x) {
        return std::pow(x[0], 4) - x[0] * x[0] + std::pow(x[1], 4) - x[1] * x[1] + 0.5 * x[0] * x[1];
      },
      [](const Vec& x) {
        return vec({4 * std::pow(x[0], 3) - 2 * x[0] + 0.5 * x[1], 4 * std::pow(x[1], 3) - 2 * x[1] + 0.5 * x[0]});
      });
  return Problem(f, SimpleTerm::box(2, -2.0, 2.0), 2.5, 0.0, 50.0);
}

Problem kinked_problem() {
  auto f = std::make_shared<FunctionOracle>(
      2, [](const Vec& x) { return std::abs(x[0] * x[0] - 1.0) + std::abs(x[1]); },
      [](const Vec& x) {
        const double q = x[0] * x[0] - 1.0;
        const double s = q > 0 ? 1.0 : (q < 0 ? -1.0 : 0.0);
        return vec({2.0 * s * x[0], x[1] > 0 ? 1.0 : (x[1] < 0 ? -1.0 : 0.0)});
      });
  return Problem(f, SimpleTerm::ball(2, 2.0), 2.0, 4.2, 0.0, 0.0);
}

RegularizedCert pbf_certificate(const Problem& prob, const Vec& x0, double eta, double eps) {
  const PbfParams p = derive_params(prob, eta, eps);
  const RunResult r = run_pbf(prob, p, x0, {});
  EXPECT_EQ(r.status, RunStatus::Converged);
  return RegularizedCert{r.terminal->y_hat, r.terminal->w_hat, r.terminal->eps_hat, prob.m()};
}

}  // namespace

TEST(Conversions, PinnedValues) {
  RegularizedCert c{vec({0.0}), vec({0.1}), 0.005, 1.0};
  const Problem prob = square_problem();
  const DirectionalCert d = regularized_to_directional(
      Problem(half_sq_oracle(1), SimpleTerm::zero(1), 1.0, 0.0, 1.0), c);
  EXPECT_NEAR(d.eps_D, 0.3, 1e-15);
  EXPECT_NEAR(d.delta_D, 0.1, 1e-15);

  c.eps = 0.001;
  EXPECT_NEAR(regularized_to_moreau_bound(c), 18.0 * std::sqrt(0.002) + 0.4, 1e-15);
  EXPECT_NEAR(regularized_to_moreau_bound(c), 1.2050, 1e-4);
  EXPECT_EQ(regularized_to_moreau_bound(RegularizedCert{vec({0.0}), vec({0.0}), 0.0, 3.0}), 0.0);

  DirectionalCert dd;
  dd.eps_D = 0.1;
  dd.delta_D = 0.1;
  EXPECT_NEAR(directional_to_moreau(dd, 1.0, 1.0), 1.4, 1e-15);
  dd.delta_D = 0.0;
  EXPECT_NEAR(directional_to_moreau(dd, 0.5, 3.0), (3.0 + 2.0) * 2.0 * 0.5 * 0.1, 1e-15);

  MoreauCert mc;
  mc.x = vec({1.0});
  mc.x_hat = vec({0.8});
  mc.lambda = 1.0;
  mc.m = 1.0;
  mc.grad = vec({0.4});
  mc.grad_norm = 0.4;
  const DirectionalCert back = moreau_to_directional(mc);
  EXPECT_DOUBLE_EQ(back.delta_D, 0.2);
  EXPECT_DOUBLE_EQ(back.eps_D, 0.4);
  EXPECT_EQ(back.x_tilde, mc.x_hat);
}

TEST(Conversions, CorollaryPresetGivesRho) {
  for (double rho : {1.0, 0.5, 0.25, 0.01}) {
    for (double m : {0.3, 1.0, 20.0}) {
      const Tolerances t = corollary_preset(rho, m);
      const RegularizedCert c{vec({0.0}), vec({t.eta_bar}), t.eps_bar, m};
      EXPECT_NEAR(regularized_to_moreau_bound(c), rho, 1e-12 * rho);
    }
  }
}

TEST(Conversions, ExactCertificateIsItsOwnWitness) {
  const Problem prob = kinked_problem();
  const RegularizedCert c{vec({1.0, 0.0}), vec({0.0, 0.0}), 0.0, prob.m()};
  const DirectionalCert d = regularized_to_directional(prob, c);
  EXPECT_EQ(d.delta_D, 0.0);
  EXPECT_EQ(d.eps_D, 0.0);
  EXPECT_EQ(d.x_tilde, c.x);
  EXPECT_TRUE(d.verified);
}

TEST(MoreauOracle, SquareClosedForm) {
  const MoreauCert c = moreau_oracle(square_problem(), 1.0, vec({3.0}));
  EXPECT_NEAR(c.x_hat[0], 1.0, 1e-5);
  EXPECT_NEAR(c.grad_norm, 2.0, 1e-5);
  EXPECT_NEAR(c.envelope, 1.0 + 0.5 * 4.0, 1e-8);
  EXPECT_LE(c.dist_bound, default_moreau_tol(vec({3.0})));
}

TEST(MoreauOracle, AtGlobalMinimizer) {
  const MoreauCert c = moreau_oracle(square_problem(), 0.7, vec({0.0}));
  EXPECT_LE(c.grad_norm, 1e-5);
}

TEST(MoreauOracle, AbsoluteValueSoftThreshold) {
  const Problem prob(abs_oracle(), SimpleTerm::zero(1), 1e-9, 1.0, 0.0, 0.0);
  const MoreauCert c = moreau_oracle(prob, 1.0, vec({0.4}));
  EXPECT_NEAR(c.x_hat[0], 0.0, 2e-6);
  EXPECT_NEAR(c.grad_norm, 0.4, 2e-6);
}

TEST(MoreauOracle, MatchesFiniteDifferencesOfEnvelope) {
  const Problem prob = smooth_2d();
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = rng.uniform_vec(2, -1.2, 1.2);
    const double lambda = 1.0 / prob.m();
    auto env = [&](const Vec& u) { return moreau_oracle(prob, lambda, u).envelope; };
    const MoreauCert c = moreau_oracle(prob, lambda, x);
    Vec fd(2);
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
      Vec p = x, q = x;
      p[i] += h;
      q[i] -= h;
      fd[i] = (env(p) - env(q)) / (2 * h);
    }
    EXPECT_LE((fd - c.grad).norm(), 1e-3 * std::max(1.0, c.grad_norm)) << "trial " << trial;
  }
}

TEST(MoreauOracle, RespectsDomain) {
  const Problem prob = kinked_problem();
  const MoreauCert c = moreau_oracle(prob, 0.5, vec({1.9, 0.5}));
  EXPECT_TRUE(prob.in_domain(c.x_hat));
  EXPECT_THROW(moreau_oracle(prob, 0.0, vec({0.0, 0.0})), Error);
  EXPECT_THROW(moreau_oracle(prob, 1.0, vec({3.0, 0.0})), Error);
}

TEST(Certificates, PbfCertificateIsRegularizedStationary) {
  const Problem prob = kinked_problem();
  const RegularizedCert c = pbf_certificate(prob, vec({0.3, 0.8}), 0.05, 1e-3);
  const InclusionCheck chk = check_regularized(prob, c, 10000, 1);
  EXPECT_EQ(chk.samples, 10000u);
  EXPECT_EQ(chk.violations, 0u) << "worst " << chk.worst;
}

TEST(Certificates, DirectionalWitness) {
  const Problem prob = kinked_problem();
  const RegularizedCert c = pbf_certificate(prob, vec({-0.4, 0.7}), 0.05, 1e-3);
  const DirectionalCert d = regularized_to_directional(prob, c, 1e-9);
  EXPECT_TRUE(d.verified);
  EXPECT_LE((d.x - d.x_tilde).norm(), d.delta_D + 1e-9);
  EXPECT_LE(d.subgradient.norm(), d.eps_D + 1e-8);
  // the exhibited vector is a subgradient of the weakly convex phi at x_tilde
  const InclusionCheck chk = check_subgradient_inequality(prob, d.x_tilde, d.subgradient, 0.0, d.x_tilde, prob.m(),
                                                          10000, 3, 1e-6);
  EXPECT_EQ(chk.violations, 0u) << "worst " << chk.worst;
}

TEST(Certificates, RoundTripBoundsDominateMeasuredGradient) {
  for (const Vec& x0 : {vec({0.3, 0.8}), vec({-1.5, -0.2}), vec({0.1, 0.1})}) {
    const Problem prob = kinked_problem();
    const RegularizedCert c = pbf_certificate(prob, x0, 0.05, 1e-3);
    const double direct = regularized_to_moreau_bound(c);
    const double via = directional_to_moreau(regularized_to_directional(prob, c), 1.0 / prob.m(), prob.m());
    const double measured = moreau_oracle(prob, 1.0 / prob.m(), c.x).grad_norm;
    EXPECT_LE(measured, direct);
    EXPECT_LE(measured, via);

    const MoreauCert mc = moreau_oracle(prob, 1.0 / prob.m(), c.x);
    const DirectionalCert md = moreau_to_directional(mc);
    EXPECT_LE((md.x - md.x_tilde).norm(), md.delta_D + 1e-12);
    EXPECT_LE(directional_to_moreau(md, 1.0 / prob.m(), prob.m()), 1e9);
  }
}

TEST(Certificates, SubdifferentialShift) {
  const Problem prob = kinked_problem();
  const RegularizedCert c = pbf_certificate(prob, vec({0.3, 0.8}), 0.05, 1e-3);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec center = c.x + rng.uniform_vec(2, -1.0, 1.0);
    const Vec v = c.w + prob.m() * (c.x - center);
    const InclusionCheck chk = check_subgradient_inequality(prob, c.x, v, c.eps, center, prob.m(), 1000, 100 + trial);
    EXPECT_EQ(chk.violations, 0u) << "worst " << chk.worst;
  }
}

TEST(Certificates, InclusionCheckDetectsBadCertificate) {
  const Problem prob = kinked_problem();
  const RegularizedCert bad{vec({0.5, 0.3}), vec({0.0, 0.0}), 0.0, prob.m()};
  EXPECT_GT(check_regularized(prob, bad, 1000, 2).violations, 0u);
}

TEST(Certificates, JsonFields) {
  const RegularizedCert c{vec({1.0, 2.0}), vec({0.0, 0.1}), 1e-3, 2.0};
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(j["x"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["w_norm"].get<double>(), 0.1);
}
