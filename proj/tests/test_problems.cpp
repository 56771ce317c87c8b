#include "pbf/problems.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace pbf;
using namespace pbf::testing;

TEST(PhaseRetrieval, SingleSampleIsAbsoluteQuadratic) {
  Mat A(1, 1);
  A << 1.0;
  const Instance inst = make_phase_retrieval(A, vec({1.0}), SimpleTerm::ball(1, 2.0), vec({0.5}));
  EXPECT_DOUBLE_EQ(inst.problem.m(), 2.0);
  EXPECT_DOUBLE_EQ(inst.problem.M(), 4.0);  // (2/1) * 1 * 2
  EXPECT_EQ(inst.problem.L(), 0.0);
  const HybridOracle& f = inst.problem.f();
  for (double x : {-2.0, -1.3, -1.0, 0.0, 0.4, 1.0, 1.7}) {
    EXPECT_DOUBLE_EQ(f.value(vec({x})), std::abs(x * x - 1.0));
  }
  EXPECT_EQ(f.subgradient(vec({1.0}))[0], 0.0);
  EXPECT_DOUBLE_EQ(f.subgradient(vec({1.5}))[0], 3.0);
  EXPECT_DOUBLE_EQ(f.subgradient(vec({0.5}))[0], -1.0);

  // secant form of 2-weak convexity on a dense grid, and that 2 is tight
  std::size_t violations = 0;
  double worst = kInf;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const double x = -2.0 + 0.01 * i, y = -2.0 + 0.01 * j;
      const double gap = f.value(vec({y})) - f.value(vec({x})) - f.subgradient(vec({x}))[0] * (y - x) +
                         0.5 * 2.0 * (y - x) * (y - x);
      if (gap < -1e-12) ++violations;
      if (std::abs(y - x) > 0.1) worst = std::min(worst, gap / ((y - x) * (y - x)));
    }
  }
  EXPECT_EQ(violations, 0u);
  EXPECT_LT(worst, 1e-9);
}

TEST(PhaseRetrieval, PlantedPointIsGlobalMinimum) {
  const Instance inst = gen_phase_retrieval(30, 4, 7);
  ASSERT_TRUE(inst.planted.has_value());
  EXPECT_NEAR(inst.planted->norm(), 1.0, 1e-15);
  EXPECT_NEAR(inst.problem.phi(*inst.planted), 0.0, 1e-13);
  EXPECT_NEAR(inst.problem.phi(-*inst.planted), 0.0, 1e-13);
  EXPECT_EQ(inst.known_phi_star_lower, 0.0);
  EXPECT_EQ(inst.problem.phi_lower_hint(), 0.0);
  EXPECT_TRUE(inst.problem.in_domain(inst.x0));
}

TEST(PhaseRetrieval, DeclaredConstantsPassSampling) {
  for (const char* kind : {"ball", "box"}) {
    const Instance inst = gen_phase_retrieval(50, 10, 3, 0.1, DomainSpec{kind, 2.0});
    const ConstantCheck c = verify_instance(inst, 100000, 11);
    EXPECT_EQ(c.hybrid_violations, 0u) << kind;
    EXPECT_EQ(c.weak_convexity_violations, 0u) << kind;
    EXPECT_LE(c.worst_hybrid_ratio, 1.0);
  }
}

TEST(PhaseRetrieval, DeclaredModulusMatchesFormula) {
  const Instance inst = gen_phase_retrieval(50, 10, 1);
  const auto& pr = dynamic_cast<const PhaseRetrievalOracle&>(inst.problem.f());
  double s = 0.0;
  for (Eigen::Index i = 0; i < pr.A().rows(); ++i) s += pr.A().row(i).squaredNorm();
  EXPECT_DOUBLE_EQ(inst.problem.m(), 2.0 / 50.0 * s);
  EXPECT_GT(inst.problem.m(), 10.0);
}

TEST(PhaseRetrieval, SubgradientMatchesFiniteDifferences) {
  const Instance inst = gen_phase_retrieval(20, 5, 2, 0.3);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = rng.uniform_vec(5, -0.8, 0.8);
    const Vec fd = fd_gradient([&](const Vec& u) { return inst.problem.f().value(u); }, x);
    EXPECT_LE((fd - inst.problem.f().subgradient(x)).norm(), 1e-5) << trial;
  }
}

TEST(PhaseRetrieval, GenerationIsDeterministic) {
  const Instance a = gen_phase_retrieval(10, 3, 42, 0.2);
  const Instance b = gen_phase_retrieval(10, 3, 42, 0.2);
  const Instance c = gen_phase_retrieval(10, 3, 43, 0.2);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_NE(to_json(a).dump(), to_json(c).dump());
}

TEST(HybridSynthetic, DeclaredConstantsPassSampling) {
  for (int dim : {2, 10}) {
    const Instance inst = gen_hybrid_synthetic(dim, 9, 1.0, 5);
    EXPECT_GT(inst.problem.M(), 0.0);
    EXPECT_GT(inst.problem.L(), 0.0);
    const ConstantCheck c = verify_instance(inst, 100000, 4);
    EXPECT_EQ(c.hybrid_violations, 0u) << dim;
    EXPECT_EQ(c.weak_convexity_violations, 0u) << dim;
  }
}

TEST(HybridSynthetic, DegenerateSettings) {
  const Instance smooth = gen_hybrid_synthetic(3, 1, 1.0, 0);
  EXPECT_EQ(smooth.problem.M(), 0.0);
  EXPECT_GT(smooth.problem.L(), 0.0);
  const Instance kinks = gen_hybrid_synthetic(3, 1, 0.0, 4);
  EXPECT_EQ(kinks.problem.L(), 0.0);
  EXPECT_EQ(kinks.problem.m(), kMinModulus);
  EXPECT_GT(kinks.problem.M(), 0.0);
  for (const Instance* inst : {&smooth, &kinks}) {
    const ConstantCheck c = verify_instance(*inst, 20000, 2);
    EXPECT_EQ(c.hybrid_violations + c.weak_convexity_violations, 0u);
  }
}

TEST(HybridSynthetic, LowerBoundHolds) {
  const Instance inst = gen_hybrid_synthetic(4, 8, 1.0, 6);
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const Vec x = inst.problem.h().project_domain(rng.uniform_vec(4, -2.0, 2.0));
    EXPECT_GE(inst.problem.phi(x), inst.known_phi_star_lower);
  }
}

TEST(HybridSynthetic, SubgradientMatchesFiniteDifferences) {
  const Instance inst = gen_hybrid_synthetic(5, 3, 1.0, 3);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = rng.uniform_vec(5, -1.0, 1.0);
    const Vec fd = fd_gradient([&](const Vec& u) { return inst.problem.f().value(u); }, x);
    EXPECT_LE((fd - inst.problem.f().subgradient(x)).norm(), 1e-5) << trial;
  }
}

TEST(InstanceIo, RoundTripIsExact) {
  const auto dir = std::filesystem::temp_directory_path();
  for (const Instance& inst : {gen_phase_retrieval(12, 3, 5, 0.1, DomainSpec{"box", 1.5}),
                               gen_hybrid_synthetic(3, 5, 0.7, 2)}) {
    const std::string path = (dir / ("pbf_instance_" + inst.name + ".json")).string();
    save_instance(inst, path);
    const Instance back = load_instance(path);
    std::remove(path.c_str());
    EXPECT_EQ(to_json(back).dump(), to_json(inst).dump());
    EXPECT_EQ(back.problem.m(), inst.problem.m());
    EXPECT_EQ(back.problem.M(), inst.problem.M());
    EXPECT_EQ(back.problem.L(), inst.problem.L());
    const Vec x = inst.x0 * 0.3;
    EXPECT_EQ(back.problem.phi(x), inst.problem.phi(x));
  }
}

TEST(InstanceIo, RejectsBadFiles) {
  nlohmann::json j = to_json(gen_phase_retrieval(5, 2, 1));
  j["constants"]["m"] = 1.0;
  EXPECT_THROW(instance_from_json(j), Error);
  j = to_json(gen_phase_retrieval(5, 2, 1));
  j["generator"] = "dictionary";
  EXPECT_THROW(instance_from_json(j), Error);
  j = to_json(gen_phase_retrieval(5, 2, 1));
  j["data"]["A"]["rows"] = 4;
  EXPECT_THROW(instance_from_json(j), Error);
  j.erase("data");
  EXPECT_THROW(instance_from_json(j), Error);
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), Error);
}

TEST(Generators, Validation) {
  EXPECT_THROW(gen_phase_retrieval(0, 3, 1), Error);
  EXPECT_THROW(gen_phase_retrieval(3, 0, 1), Error);
  EXPECT_THROW(gen_phase_retrieval(3, 2, 1, 0.0, DomainSpec{"sphere", 1.0}), Error);
  EXPECT_THROW(make_phase_retrieval(Mat::Ones(2, 2), vec({1.0, 1.0}), SimpleTerm::zero(2), vec({0.0, 0.0})), Error);
  EXPECT_THROW(gen_hybrid_synthetic(2, 1, -1.0, 2), Error);
}
