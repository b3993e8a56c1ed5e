#include "quantlim/fim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "genspec.hpp"
#include "oracles.hpp"
#include "quantlim/errors.hpp"

using namespace quantlim;

namespace {

ParameterPoint point2(double a, double b) {
  ParameterPoint p(2);
  p << a, b;
  return p;
}

// D_theta = 1 mean estimation with one binary threshold at zero.
SystemSpec one_threshold_spec() {
  SystemSpec spec;
  spec.d_theta = 1;
  spec.space.dim = 1;
  spec.space.bounds = {Interval{-10.0, 10.0}};
  spec.assumptions = {Assumption::A1, Assumption::A2};
  Sensor s;
  s.model = ObservationModel{IsotropicGaussianMeanVector{1, 0}};
  s.quantizer.quantizers = {genspec::interval_partition_quantizer({0.0})};
  spec.sensors.push_back(s);
  return spec;
}

}  // namespace

TEST(LogLikelihood, SingleBinarySensorMatchesOracle) {
  SystemSpec spec = genspec::example1_spec();
  // ln(Phi(2) - Phi(-2)) = -0.04656791229239016, frozen from the oracle
  double ll = log_likelihood(spec, {OutcomeVector{{1}}}, point2(0.0, 1.0));
  EXPECT_NEAR(ll, -0.04656791229239016, 1e-12);
  EXPECT_NEAR(ll, std::log(oracle::interval_prob(0.0, 1.0, -2.0, 2.0)), 1e-11);
}

TEST(LogLikelihood, DeterministicOutcomeGivesZero) {
  // quantizer whose first cell is the whole line: q = 1, ln q = 0
  SystemSpec spec;
  spec.d_theta = 1;
  spec.space.dim = 1;
  spec.space.bounds = {Interval{-kInf, kInf}};
  Sensor s;
  s.model = ObservationModel{IsotropicGaussianMeanVector{1, 0}};
  VectorQuantizer q;
  q.dim_in = 1;
  q.cells.resize(2);
  q.cells[0].rects = {Rect{Interval{-kInf, kInf}}};
  q.cells[1].is_complement = true;
  s.quantizer.quantizers = {q};
  spec.sensors.push_back(s);

  ParameterPoint theta(1);
  theta << 0.3;
  EXPECT_DOUBLE_EQ(log_likelihood(spec, {OutcomeVector{{1}}}, theta), 0.0);
  // the complement cell has probability zero: reported as -infinity
  EXPECT_TRUE(std::isinf(log_likelihood(spec, {OutcomeVector{{2}}}, theta)));
}

TEST(LogLikelihood, TwoIdenticalSensorsAddUp) {
  SystemSpec spec = genspec::example1_spec();
  spec.sensors.push_back(spec.sensors[0]);
  ParameterPoint theta = point2(0.0, 1.0);
  double single = log_likelihood(genspec::example1_spec(), {OutcomeVector{{1}}}, theta);
  double both = log_likelihood(spec, {OutcomeVector{{1}}, OutcomeVector{{1}}}, theta);
  EXPECT_NEAR(both, 2.0 * single, 1e-14);
}

TEST(Fim, Example1IsRankOneAtSymmetricPoint) {
  SystemSpec spec = genspec::example1_spec();
  FisherReport report = fim(spec, point2(0.0, 1.0));
  ASSERT_EQ(report.matrix.rows(), 2);
  EXPECT_EQ(report.numerical_rank, 1);
  EXPECT_TRUE(report.singular_verdict);
  EXPECT_EQ(report.idqd_bound, 1);
  EXPECT_LT(report.singular_values[1] / report.singular_values[0], 1e-10);
}

TEST(Fim, SingleBinarySensorIsRankOneOuterProduct) {
  // J = grad q grad q^T / (q (1-q)) since the two gradients are negatives
  SystemSpec spec = genspec::example1_spec();
  ParameterPoint theta = point2(0.8, 1.3);
  FisherReport report = fim(spec, theta);
  EXPECT_LE(report.numerical_rank, 1);

  Eigen::VectorXd g = cell_grad(spec, 0, OutcomeVector{{1}}, theta);
  double q = cell_prob(spec, 0, OutcomeVector{{1}}, theta);
  Eigen::MatrixXd expected = g * g.transpose() / (q * (1.0 - q));
  EXPECT_NEAR((report.matrix - expected).lpNorm<Eigen::Infinity>(), 0.0, 1e-14);
}

TEST(Fim, Example2VanishesAtCenter) {
  SystemSpec spec = genspec::example2_spec();
  FisherReport report = fim(spec, point2(0.0, 0.0));
  EXPECT_NEAR(report.matrix.lpNorm<Eigen::Infinity>(), 0.0, 1e-15);
  EXPECT_EQ(report.numerical_rank, 0);
  EXPECT_TRUE(report.singular_verdict);
}

TEST(Fim, TwoSensorSystemIsSumOfSingleSensorTerms) {
  SystemSpec two = genspec::example1_spec();
  Sensor second = two.sensors[0];
  second.quantizer.quantizers[0] = genspec::binary_interval_quantizer(-1.0, 3.0);
  two.sensors.push_back(second);

  SystemSpec first_only = genspec::example1_spec();
  SystemSpec second_only = genspec::example1_spec();
  second_only.sensors[0] = second;

  ParameterPoint theta = point2(0.2, 0.9);
  Eigen::MatrixXd sum = fim(first_only, theta).matrix + fim(second_only, theta).matrix;
  Eigen::MatrixXd joint = fim(two, theta).matrix;
  EXPECT_NEAR((joint - sum).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(Fim, SymmetricPsdOnRandomSystems) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    SystemSpec spec = genspec::random_overparameterized_spec(rng);
    ParameterPoint theta(spec.d_theta);
    for (int i = 0; i < spec.d_theta; ++i) theta[i] = unif(rng);
    FisherReport report = fim(spec, theta);
    EXPECT_NEAR((report.matrix - report.matrix.transpose()).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(report.matrix);
    double sigma_max = report.singular_values.size() ? report.singular_values[0] : 0.0;
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * std::max(1.0, sigma_max));
  }
}

TEST(VerifyRankBounds, Example1HasZeroSlack) {
  SystemSpec spec = genspec::example1_spec();
  RankBoundCheck check = verify_rank_bounds(spec, point2(0.0, 1.0));
  ASSERT_EQ(check.per_sensor.size(), 1u);
  EXPECT_EQ(check.per_sensor[0].bound, 1);
  EXPECT_EQ(check.per_sensor[0].rank, 1);
  EXPECT_EQ(check.per_sensor[0].slack, 0);
  EXPECT_EQ(check.total_bound, 1);
  EXPECT_EQ(check.total_slack, 0);
  EXPECT_TRUE(check.all_hold);
}

TEST(VerifyRankBounds, ThreeBinarySensorsOneParameter) {
  SystemSpec spec;
  spec.d_theta = 1;
  spec.space.dim = 1;
  spec.space.bounds = {Interval{-10.0, 10.0}};
  spec.assumptions = {Assumption::A1, Assumption::A2};
  for (double t : {-0.5, 0.0, 0.5}) {
    Sensor s;
    s.model = ObservationModel{IsotropicGaussianMeanVector{1, 0}};
    s.quantizer.quantizers = {genspec::interval_partition_quantizer({t})};
    spec.sensors.push_back(s);
  }
  ParameterPoint theta(1);
  theta << 0.1;
  RankBoundCheck check = verify_rank_bounds(spec, theta);
  EXPECT_EQ(check.total_bound, 3);
  EXPECT_EQ(check.total_rank, 1);  // D_theta = 1 caps the rank
  EXPECT_TRUE(check.all_hold);
}

TEST(VerifyRankBounds, DegenerateThetaGivesRankZero) {
  SystemSpec spec = genspec::example2_spec();
  RankBoundCheck check = verify_rank_bounds(spec, point2(0.0, 0.0));
  EXPECT_EQ(check.total_rank, 0);
  EXPECT_TRUE(check.all_hold);
}

TEST(Crb, OneDimensionalThresholdDesignGivesPiOverTwo) {
  SystemSpec spec = one_threshold_spec();
  ParameterPoint theta(1);
  theta << 0.0;
  FisherReport report = fim(spec, theta);
  // q = 1/2, dq = -phi(0): J = 4 phi(0)^2 = 2/pi, CRB = pi/2
  EXPECT_NEAR(report.matrix(0, 0), 0.6366197723675814, 1e-12);
  auto bound = crb(report);
  ASSERT_TRUE(bound.has_value());
  EXPECT_NEAR((*bound)(0, 0), 1.5707963267948966, 1e-11);
}

TEST(Crb, IdentityInformationGivesIdentityBound) {
  FisherReport synthetic;
  synthetic.matrix = Eigen::MatrixXd::Identity(3, 3);
  synthetic.singular_values = Eigen::VectorXd::Ones(3);
  synthetic.numerical_rank = 3;
  auto bound = crb(synthetic);
  ASSERT_TRUE(bound.has_value());
  EXPECT_NEAR((*bound - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>(), 0.0, 1e-14);
}

TEST(Crb, SingularReportYieldsNoBound) {
  SystemSpec spec = genspec::example1_spec();
  FisherReport report = fim(spec, point2(0.0, 1.0));
  EXPECT_FALSE(crb(report).has_value());
}

TEST(Crb, ProductWithInformationIsIdentity) {
  SystemSpec spec = genspec::control_two_threshold_spec();
  ParameterPoint theta(1);
  theta << 0.4;
  FisherReport report = fim(spec, theta);
  auto bound = crb(report);
  ASSERT_TRUE(bound.has_value());
  Eigen::MatrixXd prod = (*bound) * report.matrix;
  EXPECT_NEAR((prod - Eigen::MatrixXd::Identity(1, 1)).lpNorm<Eigen::Infinity>(), 0.0, 1e-8);
}

// Desk-scale singularity law: overparameterized systems always produce a
// numerically singular information matrix with rank at most the bound.
TEST(Fim, OverparameterizedSystemsAreSingular) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    SystemSpec spec = genspec::random_overparameterized_spec(rng);
    ParameterPoint theta(spec.d_theta);
    for (int i = 0; i < spec.d_theta; ++i) theta[i] = unif(rng);
    FisherReport report = fim(spec, theta);
    ASSERT_GT(report.singular_values[0], 0.0);
    EXPECT_LT(report.singular_values[spec.d_theta - 1] / report.singular_values[0], 1e-8);
    EXPECT_LE(report.numerical_rank, report.idqd_bound);
    EXPECT_TRUE(report.singular_verdict);
  }
}

TEST(Fim, JsonExportCarriesTheContract) {
  SystemSpec spec = genspec::example1_spec();
  FisherReport report = fim(spec, point2(0.0, 1.0));
  nlohmann::json j = fisher_report_to_json(report);
  EXPECT_EQ(j["numerical_rank"], 1);
  EXPECT_EQ(j["idqd_bound"], 1);
  EXPECT_TRUE(j["singular"].get<bool>());
  EXPECT_EQ(j["matrix_row_major"].size(), 4u);
  EXPECT_TRUE(j["crb_row_major"].is_null());
}
