#include "quantlim/identifiability.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "genspec.hpp"
#include "oracles.hpp"
#include "quantlim/cellprob.hpp"
#include "quantlim/errors.hpp"
#include "quantlim/idqd.hpp"

using namespace quantlim;

namespace {

ParameterPoint point2(double a, double b) {
  ParameterPoint p(2);
  p << a, b;
  return p;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST(Phi, Example1TwoEntriesFromOracle) {
  SystemSpec spec = genspec::example1_spec();
  PhiVector p = phi(spec, point2(0.0, 1.0));
  ASSERT_EQ(p.values.size(), 2);
  EXPECT_NEAR(p.values[0], 0.9544997361036416, 1e-13);
  EXPECT_NEAR(p.values[1], 1.0 - 0.9544997361036416, 1e-13);
}

TEST(Phi, EntriesFactorAcrossIndependentSensors) {
  SystemSpec spec = genspec::example1_spec();
  spec.sensors.push_back(spec.sensors[0]);
  spec.sensors[1].quantizer.quantizers[0] = genspec::binary_interval_quantizer(-1.0, 1.0);
  ParameterPoint theta = point2(0.2, 1.4);
  PhiVector joint = phi(spec, theta);
  ASSERT_EQ(joint.values.size(), 4);
  auto t0 = table_probs(spec, 0, theta);
  auto t1 = table_probs(spec, 1, theta);
  // lexicographic: sensor 0 most significant
  EXPECT_NEAR(joint.values[0], t0[0] * t1[0], 1e-15);
  EXPECT_NEAR(joint.values[1], t0[0] * t1[1], 1e-15);
  EXPECT_NEAR(joint.values[2], t0[1] * t1[0], 1e-15);
  EXPECT_NEAR(joint.values[3], t0[1] * t1[1], 1e-15);
  EXPECT_NEAR(joint.values.sum(), 1.0, 1e-12);
}

TEST(Psi, LengthEqualsInestimableDimension) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    genspec::GroupedSpec gen = genspec::random_grouped_spec(rng, 4, 3, 4);
    ParameterPoint theta = point2(0.1, -0.3);
    EXPECT_EQ(psi(gen.spec, theta).values.size(), idqd(gen.spec));
    EXPECT_LT(idqd(gen.spec), global_alphabet_size(gen.spec));  // lambda < D_u
  }
}

TEST(Psi, Example1SingleEntry) {
  SystemSpec spec = genspec::example1_spec();
  PsiVector p = psi(spec, point2(0.0, 1.0));
  ASSERT_EQ(p.values.size(), 1);
  EXPECT_NEAR(p.values[0], 0.9544997361036416, 1e-13);
}

TEST(Psi, IdenticalSensorsGiveIdenticalBlocks) {
  SystemSpec spec = genspec::example1_spec();
  spec.sensors.push_back(spec.sensors[0]);
  PsiVector p = psi(spec, point2(0.3, 2.0));
  ASSERT_EQ(p.values.size(), 2);
  EXPECT_EQ(p.values[0], p.values[1]);
}

TEST(ObsEquivalent, ReflexiveAndDiscriminating) {
  SystemSpec spec = genspec::example2_spec();
  EXPECT_TRUE(obs_equivalent(spec, point2(0.0, 0.0), point2(0.0, 0.0)));
  EXPECT_FALSE(obs_equivalent(spec, point2(0.0, 0.0), point2(3.0, 3.0)));
}

TEST(Trace, Example1FindsEquivalentPointAtEveryRho) {
  SystemSpec spec = genspec::example1_spec();
  EquivalenceTrace trace = trace_example1(0.0, 1.0, {0.25, 0.5, 0.75}, -2.0, 2.0);
  for (const auto& s : trace.samples) {
    EXPECT_LE(s.residual, 1e-12);
    EXPECT_GT(s.alpha, 0.0);  // the bracket starts at the cell midpoint
    EXPECT_TRUE(obs_equivalent(spec, point2(0.0, 1.0), point2(s.alpha, s.beta), 1e-9));
  }
  // frozen from the high-precision root: alpha at rho = 0.5
  EXPECT_NEAR(trace.samples[1].alpha, 0.8046182354292453, 1e-9);
}

TEST(Trace, ApproachingRhoOneRecoversTheOriginalPoint) {
  EquivalenceTrace trace = trace_example1(0.0, 1.0, {0.999}, -2.0, 2.0);
  EXPECT_LE(trace.samples[0].residual, 1e-12);
  EXPECT_LT(std::abs(trace.samples[0].alpha), 0.1);
}

TEST(Trace, SemiInfiniteIntervalUsesExpandingBracket) {
  // a = -inf: g is monotone decreasing in alpha
  EquivalenceTrace trace = trace_example1(0.5, 2.0, {0.3, 0.6, 0.9}, -kInf, 1.0);
  for (const auto& s : trace.samples) {
    EXPECT_LE(s.residual, 1e-12);
    EXPECT_NEAR(interval_gaussian_prob(s.alpha, s.beta, -kInf, 1.0), trace.target, 1e-12);
  }
  // b = +inf mirrored
  EquivalenceTrace up = trace_example1(-0.5, 1.5, {0.4, 0.8}, -1.0, kInf);
  for (const auto& s : up.samples) EXPECT_LE(s.residual, 1e-12);
}

TEST(Trace, RejectsInvalidArguments) {
  EXPECT_THROW(trace_example1(0.0, 0.0, {0.5}, -2.0, 2.0), ValidationError);
  EXPECT_THROW(trace_example1(0.0, 1.0, {0.5}, -kInf, kInf), ValidationError);
  EXPECT_THROW(trace_example1(0.0, 1.0, {1.5}, -2.0, 2.0), ValidationError);
  EXPECT_THROW(trace_example1(0.0, 1.0, {0.5}, 2.0, -2.0), ValidationError);
}

TEST(Trace, FiftyRhosGivePairwiseDistinctEquivalentPoints) {
  std::vector<double> rhos = linspace(0.02, 0.98, 50);
  EquivalenceTrace trace = trace_example1(0.0, 1.0, rhos, -2.0, 2.0);
  std::set<std::pair<double, double>> seen;
  for (const auto& s : trace.samples) seen.insert({s.alpha, s.beta});
  EXPECT_EQ(seen.size(), 50u);
}

TEST(Trace, CsvHasFourColumns) {
  EquivalenceTrace trace = trace_example1(0.0, 1.0, {0.5}, -2.0, 2.0);
  std::ostringstream oss;
  write_trace_csv(oss, trace);
  EXPECT_TRUE(oss.str().rfind("rho,alpha_rho,beta_rho,residual\n", 0) == 0);
}

TEST(Lemma1, ConstructedEquivalentPairsAgreeBothWays) {
  SystemSpec spec = genspec::example1_spec();
  EquivalenceTrace trace = trace_example1(0.0, 1.0, {0.2, 0.5, 0.8}, -2.0, 2.0);
  for (const auto& s : trace.samples) {
    Lemma1Result r = lemma1_check(spec, point2(0.0, 1.0), point2(s.alpha, s.beta));
    EXPECT_TRUE(r.agree);
    EXPECT_TRUE(r.phi_equal);
    EXPECT_TRUE(r.psi_equal);
  }
}

TEST(Lemma1, RandomDistinctPairsAreUnequalBothWays) {
  SystemSpec spec = genspec::example2_spec();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  for (int i = 0; i < 100; ++i) {
    ParameterPoint t1 = point2(unif(rng), unif(rng));
    ParameterPoint t2 = point2(unif(rng), unif(rng));
    Lemma1Result r = lemma1_check(spec, t1, t2);
    EXPECT_TRUE(r.agree) << "phi " << r.phi_distance << " psi " << r.psi_distance;
  }
}

TEST(Lemma1, IdenticalPointsAreEqualBothWays) {
  SystemSpec spec = genspec::example2_spec();
  Lemma1Result r = lemma1_check(spec, point2(0.7, -0.1), point2(0.7, -0.1));
  EXPECT_TRUE(r.agree);
  EXPECT_TRUE(r.phi_equal);
  EXPECT_EQ(r.phi_distance, 0.0);
}

TEST(IdentifiablePoint, SymmetricSquareGivesOrigin) {
  Eigen::Vector2d star = identifiable_point_example2(-1.0, 1.0, -1.0, 1.0);
  EXPECT_DOUBLE_EQ(star[0], 0.0);
  EXPECT_DOUBLE_EQ(star[1], 0.0);
}

TEST(IdentifiablePoint, AsymmetricRectangleGivesCenter) {
  Eigen::Vector2d star = identifiable_point_example2(0.0, 2.0, 0.0, 4.0);
  EXPECT_DOUBLE_EQ(star[0], 1.0);
  EXPECT_DOUBLE_EQ(star[1], 2.0);
  // gradient-zero via the derivative oracle
  SystemSpec spec = genspec::example2_spec(0.0, 2.0, 0.0, 4.0);
  auto p = [&](const Eigen::VectorXd& t) { return cell_prob(spec, 0, OutcomeVector{{1}}, t); };
  Eigen::VectorXd fd = oracle::fd_gradient(p, star);
  EXPECT_LE(fd.lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(IdentifiablePoint, InformationVanishesThereYetThePointIsOptimal) {
  // singular information at an identifiable point: rank-zero matrix while the
  // cell probability is strictly dominant on a ring around the center
  SystemSpec spec = genspec::example2_spec();
  Eigen::Vector2d star = identifiable_point_example2(-1.0, 1.0, -1.0, 1.0);
  double p_star = cell_prob(spec, 0, OutcomeVector{{1}}, point2(star[0], star[1]));
  for (double angle = 0.0; angle < 6.28; angle += 0.3) {
    ParameterPoint t = point2(0.8 * std::cos(angle), 0.8 * std::sin(angle));
    EXPECT_LT(cell_prob(spec, 0, OutcomeVector{{1}}, t), p_star);
  }
}

TEST(IdentifiablePoint, RejectsInfiniteRectangles) {
  EXPECT_THROW(identifiable_point_example2(-kInf, 1.0, -1.0, 1.0), ValidationError);
}

TEST(LevelSet, SinglePointGridEqualsCellProbability) {
  SystemSpec spec = genspec::example1_spec();
  auto rows = level_set_grid(spec, {OutcomeVector{{1}}}, {0.5}, {1.5});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].prob, cell_prob(spec, 0, OutcomeVector{{1}}, point2(0.5, 1.5)));
}

TEST(LevelSet, Example1GridSymmetricInAlphaAndDecreasingInBeta) {
  SystemSpec spec = genspec::example1_spec();
  auto alpha = linspace(-6.0, 6.0, 25);
  auto beta = linspace(0.1, 10.0, 34);
  auto rows = level_set_grid(spec, {OutcomeVector{{1}}}, alpha, beta);
  auto at = [&](int i, int k) { return rows[i * beta.size() + k].prob; };
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (std::size_t k = 0; k < beta.size(); ++k) {
      EXPECT_NEAR(at(i, k), at(alpha.size() - 1 - i, k), 1e-12);
    }
  }
  int mid = 12;  // alpha = 0 row
  for (std::size_t k = 1; k < beta.size(); ++k) {
    EXPECT_LT(at(mid, k), at(mid, k - 1));
  }
}

TEST(LevelSet, Example2GridHasTheCircularSymmetries) {
  SystemSpec spec = genspec::example2_spec();
  auto axis = linspace(-3.0, 3.0, 21);
  auto rows = level_set_grid(spec, {OutcomeVector{{1}}}, axis, axis);
  auto at = [&](int i, int k) { return rows[i * axis.size() + k].prob; };
  const int n = static_cast<int>(axis.size());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      EXPECT_NEAR(at(i, k), at(n - 1 - i, n - 1 - k), 1e-12);  // theta -> -theta
      EXPECT_NEAR(at(i, k), at(k, i), 1e-12);                  // coordinate swap
    }
  }
}

TEST(InjectivityScan, Example1CoarseGridContainsEquivalentPairs) {
  SystemSpec spec = genspec::example1_spec();
  // a plain symmetric coarse grid: the alpha -> -alpha mirror symmetry of the
  // (-2,2) cell already produces exactly equivalent grid pairs
  std::vector<ParameterPoint> grid;
  for (double a = -3.0; a <= 3.0; a += 0.5) {
    for (double b = 0.5; b <= 4.0; b += 0.5) grid.push_back(point2(a, b));
  }
  auto pairs = injectivity_scan(spec, grid, 1e-12);
  EXPECT_FALSE(pairs.empty());
  for (const auto& p : pairs) {
    EXPECT_NEAR(grid[p.index1][0], -grid[p.index2][0], 1e-12);
    EXPECT_EQ(grid[p.index1][1], grid[p.index2][1]);
  }

  // traced equivalent points are found as well when they sit on the grid
  EquivalenceTrace trace = trace_example1(0.0, 1.0, {0.5}, -2.0, 2.0);
  std::vector<ParameterPoint> seeded{point2(0.0, 1.0),
                                     point2(trace.samples[0].alpha, trace.samples[0].beta),
                                     point2(1.0, 4.0)};
  auto seeded_pairs = injectivity_scan(spec, seeded, 1e-9);
  ASSERT_FALSE(seeded_pairs.empty());
  EXPECT_EQ(seeded_pairs[0].index1, 0);
  EXPECT_EQ(seeded_pairs[0].index2, 1);
}

TEST(InjectivityScan, MonotoneOneParameterDesignHasNoPairs) {
  SystemSpec spec = genspec::control_two_threshold_spec();
  std::vector<ParameterPoint> grid;
  for (double t = -3.0; t <= 3.0; t += 0.25) {
    ParameterPoint p(1);
    p << t;
    grid.push_back(p);
  }
  EXPECT_TRUE(injectivity_scan(spec, grid, 1e-10).empty());
}

TEST(InjectivityScan, SinglePointGridIsEmpty) {
  SystemSpec spec = genspec::example1_spec();
  EXPECT_TRUE(injectivity_scan(spec, {point2(0.0, 1.0)}, 1e-9).empty());
}
