#include "quantlim/idqd.hpp"

#include <gtest/gtest.h>

#include <random>

#include "genspec.hpp"
#include "quantlim/errors.hpp"

using namespace quantlim;

namespace {

// N sensors with prescribed per-sensor level lists; models are irrelevant for
// the plain dimension count but must validate.
SystemSpec structural_spec(const std::vector<std::vector<int>>& levels_per_sensor) {
  SystemSpec spec;
  spec.d_theta = 2;
  spec.space.dim = 2;
  spec.space.bounds = {Interval{-kInf, kInf}, Interval{-kInf, kInf}};
  spec.assumptions = {Assumption::A1, Assumption::A2, Assumption::A3, Assumption::A5};
  for (const auto& levels : levels_per_sensor) {
    Sensor s;
    Eigen::MatrixXd design(levels.size(), 2);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(levels.size(), levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
      design(l, 0) = 1.0;
      design(l, 1) = 0.5;
      cov(l, l) = 1.0;
      std::vector<double> thresholds(levels[l] - 1);
      for (int t = 0; t < levels[l] - 1; ++t) thresholds[t] = t;
      s.quantizer.quantizers.push_back(genspec::interval_partition_quantizer(thresholds));
    }
    s.model = ObservationModel{GaussianLinear{design, cov}};
    spec.sensors.push_back(std::move(s));
  }
  return spec;
}

}  // namespace

TEST(Idqd, SingleBinarySensor) {
  EXPECT_EQ(idqd(structural_spec({{2}})), 1);
}

TEST(Idqd, AllUnitLevelQuantizersGiveZero) {
  EXPECT_EQ(idqd(structural_spec({{1}, {1, 1}, {1, 1, 1}})), 0);
}

TEST(Idqd, MixedSystemDirectSubstitution) {
  // sensor 1: R = (4); sensor 2: R = (2,3) -> (4 + 6) - 2 = 8
  EXPECT_EQ(idqd(structural_spec({{4}, {2, 3}})), 8);
}

TEST(RidqdIsm, TwoIdenticalSensorsOneSubgroup) {
  SystemSpec spec = structural_spec({{2}, {2}});
  GroupingIsm g;
  g.groups = {{{0, 1}}};
  EXPECT_EQ(ridqd_ism(spec, g), 1);
  EXPECT_EQ(idqd(spec), 2);
}

TEST(RidqdIsm, SingletonSubgroupsRecoverTheUnrefinedValue) {
  SystemSpec spec = structural_spec({{3}, {2, 2}});
  GroupingIsm g;
  g.groups = {{{0}}, {{1}}};
  EXPECT_EQ(ridqd_ism(spec, g), idqd(spec));
}

TEST(RidqdIsm, TwoSubgroupsDirectSubstitution) {
  // four sensors, subgroups {0,1} with R=(3) and {2,3} with R=(2,2):
  // (3-1) + (4-1) = 5
  SystemSpec spec = structural_spec({{3}, {3}, {2, 2}, {2, 2}});
  GroupingIsm g;
  g.groups = {{{0, 1}}, {{2, 3}}};
  EXPECT_EQ(ridqd_ism(spec, g), 5);
}

TEST(RidqdIsm, RejectsMixedSubgroups) {
  SystemSpec spec = structural_spec({{2}, {3}});
  GroupingIsm g;
  g.groups = {{{0, 1}}};  // different quantizers inside one subgroup
  EXPECT_THROW(ridqd_ism(spec, g), ValidationError);
}

TEST(RidqdIsm, RejectsNonPartitions) {
  SystemSpec spec = structural_spec({{2}, {2}});
  GroupingIsm missing;
  missing.groups = {{{0}}};
  EXPECT_THROW(ridqd_ism(spec, missing), ValidationError);
  GroupingIsm duplicated;
  duplicated.groups = {{{0, 0, 1}}};
  EXPECT_THROW(ridqd_ism(spec, duplicated), ValidationError);
}

TEST(RidqdIndep, TwoSubvectorSensor) {
  // N=1, L=2, R=(2,2): lambda_indep = 4 - 2 = 2 while lambda = 4 - 1 = 3
  SystemSpec spec = structural_spec({{2, 2}});
  EXPECT_EQ(ridqd_indep(spec), 2);
  EXPECT_EQ(idqd(spec), 3);
}

TEST(RidqdIndep, SingleSlotSensorsCoincideWithIdqd) {
  SystemSpec spec = structural_spec({{4}, {2}, {6}});
  EXPECT_EQ(ridqd_indep(spec), idqd(spec));
}

TEST(RidqdIndep, MixedSystemDirectSubstitution) {
  // (3+2-2) + (2-1) = 4
  SystemSpec spec = structural_spec({{3, 2}, {2}});
  EXPECT_EQ(ridqd_indep(spec), 4);
}

TEST(RidqdIndep, RequiresDeclaredAssumption) {
  SystemSpec spec = structural_spec({{2}});
  spec.assumptions.erase(Assumption::A5);
  EXPECT_THROW(ridqd_indep(spec), ValidationError);
}

TEST(RidqdIndepIsm, SharedScalarSubvectors) {
  // four i.i.d. scalar subvectors sharing one binary quantizer: 2 - 1 = 1
  SystemSpec spec = structural_spec({{2, 2}, {2, 2}});
  spec.assumptions.insert(Assumption::A6);
  GroupingIndepIsm g;
  g.groups = {{{SubvectorRef{0, 0}, SubvectorRef{0, 1}, SubvectorRef{1, 0}, SubvectorRef{1, 1}}}};
  EXPECT_EQ(ridqd_indep_ism(spec, g), 1);
}

TEST(RidqdIndepIsm, SingletonSubgroupsRecoverIndepValue) {
  // both subvectors share the marginal model (one group) but use different
  // quantizers (two singleton subgroups), so W = 1 < 2 = sum of L_j
  SystemSpec spec = structural_spec({{2, 3}});
  spec.assumptions.insert(Assumption::A6);
  GroupingIndepIsm g;
  g.groups = {{{SubvectorRef{0, 0}}, {SubvectorRef{0, 1}}}};
  EXPECT_EQ(ridqd_indep_ism(spec, g), ridqd_indep(spec));
}

TEST(RidqdIndepIsm, TwoSubgroupsDirectSubstitution) {
  // subgroup levels 4 and 2: (4-1) + (2-1) = 4
  SystemSpec spec = structural_spec({{4}, {4}, {2}, {2}});
  spec.assumptions.insert(Assumption::A6);
  GroupingIndepIsm g;
  g.groups = {{{SubvectorRef{0, 0}, SubvectorRef{1, 0}}},
              {{SubvectorRef{2, 0}, SubvectorRef{3, 0}}}};
  EXPECT_EQ(ridqd_indep_ism(spec, g), 4);
}

TEST(Verdict, Example1TriggersBothGeneralTheorems) {
  SystemSpec spec = genspec::example1_spec();
  Verdict v = verdict(spec, 2);
  EXPECT_EQ(v.lambda, 1);
  EXPECT_TRUE(v.triggered.count(Theorem::T1));
  EXPECT_TRUE(v.triggered.count(Theorem::T2));
  EXPECT_FALSE(v.triggered.count(Theorem::T3));
}

TEST(Verdict, EqualDimensionTriggersNothing) {
  SystemSpec spec = genspec::example1_spec();
  Verdict v = verdict(spec, 1);  // D_theta = lambda: strict inequality required
  EXPECT_TRUE(v.triggered.empty());
}

TEST(Verdict, IsmRefinementFiresWhenGeneralBoundIsSilent) {
  // two identical binary sensors: lambda = 2 (T1 silent at D=2) but the
  // refined value is 1, so T3 fires
  SystemSpec spec = structural_spec({{2}, {2}});
  spec.assumptions.insert(Assumption::A4);
  GroupingIsm g;
  g.groups = {{{0, 1}}};
  spec.ism = g;
  Verdict v = verdict(spec, 2);
  EXPECT_EQ(v.lambda, 2);
  ASSERT_TRUE(v.lambda_ism.has_value());
  EXPECT_EQ(*v.lambda_ism, 1);
  EXPECT_FALSE(v.triggered.count(Theorem::T1));
  EXPECT_TRUE(v.triggered.count(Theorem::T3));
}

TEST(Verdict, TheoremsRequireDeclaredAssumptions) {
  SystemSpec spec = genspec::example1_spec();
  spec.assumptions = {Assumption::A1};  // no regularity assumptions at all
  Verdict v = verdict(spec, 2);
  EXPECT_TRUE(v.triggered.empty());
}

TEST(Verdict, JsonRoundTripContainsAllQuantities) {
  SystemSpec spec = structural_spec({{2, 2}});
  Verdict v = verdict(spec, 4);
  nlohmann::json j = verdict_to_json(v);
  EXPECT_EQ(j["lambda"], 3);
  EXPECT_EQ(j["lambda_indep"], 2);
  EXPECT_TRUE(j["lambda_ism"].is_null());
  EXPECT_EQ(j["d_theta"], 4);
}

// Inequality chains on randomized grouped systems, with equality exactly when
// every subgroup is a singleton (levels are always >= 2 in the generator).
TEST(Idqd, RefinementChainsOnRandomGroupedSpecs) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    genspec::GroupedSpec gen = genspec::random_grouped_spec(rng, 6, 3, 5);
    gen.spec.validate();
    long lambda = idqd(gen.spec);
    long lambda_ism = ridqd_ism(gen.spec, gen.ism);
    long lambda_indep = ridqd_indep(gen.spec);
    EXPECT_GE(lambda, lambda_ism);
    EXPECT_GE(lambda, lambda_indep);
    EXPECT_EQ(lambda == lambda_ism, gen.all_ism_singletons);
    if (gen.spec.declares(Assumption::A6)) {
      long lambda_both = ridqd_indep_ism(gen.spec, gen.indep_ism);
      EXPECT_GE(lambda_indep, lambda_both);
      EXPECT_EQ(lambda_indep == lambda_both, gen.all_indep_singletons);
    }
  }
}
