#include "pbf/rng.hpp"
#include "pbf/simple_terms.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace pbf;
using pbf::testing::vec;

TEST(SimpleTerms, EvalExamples) {
  EXPECT_EQ(eval_h(SimpleTerm::zero(3), vec({1, 2, 3})), 0.0);
  EXPECT_EQ(eval_h(SimpleTerm::l1(2, 2.0), vec({1, -3})), 8.0);
  EXPECT_EQ(eval_h(SimpleTerm::ball(2, 1.0), vec({2, 0})), kInf);
  EXPECT_EQ(eval_h(SimpleTerm::ball(2, 1.0), vec({0.6, 0.8})), 0.0);
  EXPECT_EQ(eval_h(SimpleTerm::box(2, -1.0, 1.0), vec({0.5, 1.5})), kInf);
}

TEST(SimpleTerms, ProxExamples) {
  const Vec v = vec({2, -0.5});
  EXPECT_TRUE(prox_h(SimpleTerm::zero(2), 1.0, v).isApprox(v));
  EXPECT_TRUE(prox_h(SimpleTerm::l1(2, 1.0), 1.0, v).isApprox(vec({1, 0})));
  const Vec p = prox_h(SimpleTerm::ball(2, 1.0), 3.0, vec({3, 4}));
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
  const Vec b = prox_h(SimpleTerm::box(vec({-1, -kInf}), vec({1, 0})), 1.0, vec({3, 2}));
  EXPECT_EQ(b, vec({1, 0}));
}

TEST(SimpleTerms, RejectsBadParameters) {
  EXPECT_THROW(SimpleTerm::l1(2, -1.0), Error);
  EXPECT_THROW(SimpleTerm::ball(2, 0.0), Error);
  EXPECT_THROW(SimpleTerm::box(vec({1}), vec({0})), Error);
  EXPECT_THROW(SimpleTerm::zero(2).prox(0.0, vec({1, 1})), Error);
}

class AllTerms : public ::testing::TestWithParam<int> {
 protected:
  static SimpleTerm make(int which) {
    switch (which) {
      case 0: return SimpleTerm::zero(3);
      case 1: return SimpleTerm::l1(3, 0.7);
      case 2: return SimpleTerm::box(vec({-1, -kInf, 0}), vec({1, 0.5, kInf}));
      default: return SimpleTerm::ball(vec({0.2, -0.1, 0.3}), 0.9);
    }
  }
};

TEST_P(AllTerms, ProxIsLocallyOptimal) {
  const SimpleTerm h = make(GetParam());
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = rng.uniform(0.1, 3.0);
    const Vec v = rng.uniform_vec(3, -3.0, 3.0);
    const Vec u = h.prox(t, v);
    ASSERT_TRUE(h.contains(u));
    auto g = [&](const Vec& x) { return h.eval(x) + 0.5 * (x - v).squaredNorm() / t; };
    const double gu = g(u);
    for (int i = 0; i < 3; ++i) {
      for (double s : {1e-6, -1e-6}) {
        Vec p = u;
        p[i] += s;
        if (h.is_indicator()) p = h.project_domain(p);
        EXPECT_LE(gu, g(p) + 1e-15);
      }
    }
  }
}

TEST_P(AllTerms, ProxIsNonexpansive) {
  const SimpleTerm h = make(GetParam());
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const double t = rng.uniform(0.1, 3.0);
    const Vec a = rng.uniform_vec(3, -4.0, 4.0);
    const Vec b = rng.uniform_vec(3, -4.0, 4.0);
    EXPECT_LE((h.prox(t, a) - h.prox(t, b)).norm(), (a - b).norm() * (1.0 + 1e-14));
  }
}

TEST_P(AllTerms, JsonRoundTrip) {
  const SimpleTerm h = make(GetParam());
  const SimpleTerm back = SimpleTerm::from_json(h.to_json());
  EXPECT_EQ(back.name(), h.name());
  EXPECT_EQ(back.to_json(), h.to_json());
  const Vec v = vec({0.3, 2.0, -1.5});
  EXPECT_EQ(back.prox(0.5, v), h.prox(0.5, v));
}

INSTANTIATE_TEST_SUITE_P(Catalog, AllTerms, ::testing::Values(0, 1, 2, 3));

TEST(SimpleTerms, L1MoreauDecomposition) {
  const double w = 0.8;
  const SimpleTerm h = SimpleTerm::l1(4, w);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = rng.uniform(0.1, 2.0);
    const Vec v = rng.uniform_vec(4, -3.0, 3.0);
    const Vec dual = (v / t).cwiseMax(-w).cwiseMin(w);
    EXPECT_LE((h.prox(t, v) + t * dual - v).norm(), 1e-13);
  }
}

TEST(SimpleTerms, DomainRadius) {
  EXPECT_EQ(SimpleTerm::zero(2).domain_radius(), kInf);
  EXPECT_DOUBLE_EQ(SimpleTerm::ball(vec({3, 4}), 1.0).domain_radius(), 6.0);
  EXPECT_DOUBLE_EQ(SimpleTerm::box(2, -3.0, 4.0).domain_radius(), std::sqrt(32.0));
}
