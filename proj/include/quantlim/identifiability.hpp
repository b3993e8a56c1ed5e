#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "quantlim/quantizers.hpp"
#include "quantlim/system_spec.hpp"

namespace quantlim {

// Probability vector over the global outcome alphabet (all sensors jointly),
// in lexicographic order with the first sensor most significant. Entries are
// products of per-sensor cell probabilities and sum to one.
struct PhiVector {
  Eigen::VectorXd values;  // length D_u
};

// Stacked per-sensor cell probabilities with the last outcome dropped per
// sensor; its length equals the inestimable dimension of the system.
struct PsiVector {
  Eigen::VectorXd values;  // length lambda
};

long global_alphabet_size(const SystemSpec& spec);  // D_u
std::vector<std::vector<OutcomeVector>> global_alphabet(const SystemSpec& spec);

PhiVector phi(const SystemSpec& spec, const ParameterPoint& theta);
PsiVector psi(const SystemSpec& spec, const ParameterPoint& theta);

// Definition of observational equivalence at floating-point scale: the
// sup-norm distance between the full outcome distributions is at most tol.
bool obs_equivalent(const SystemSpec& spec, const ParameterPoint& theta1,
                    const ParameterPoint& theta2, double tol = 1e-10);

struct Lemma1Result {
  bool phi_equal = false;
  bool psi_equal = false;
  bool agree = false;  // the biconditional held for this pair
  double phi_distance = 0.0;
  double psi_distance = 0.0;
};

// Checks the injectivity-reduction biconditional on one pair: the full
// distributions match exactly when the reduced vectors match.
Lemma1Result lemma1_check(const SystemSpec& spec, const ParameterPoint& theta1,
                          const ParameterPoint& theta2, double tol = 1e-10);

// Probability that a scalar N(alpha, beta) observation lands in (a, b).
double interval_gaussian_prob(double alpha, double beta, double a, double b);

struct TraceSample {
  double rho = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;
};

struct EquivalenceTrace {
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double a = 0.0;
  double b = 0.0;
  double target = 0.0;  // the shared cell probability
  std::vector<TraceSample> samples;
};

// For each rho in (0,1) finds alpha_rho with
//   P(x in (a,b) | alpha_rho, rho*beta0) = P(x in (a,b) | alpha0, beta0)
// by bracketed bisection to 1e-12 residual, producing a curve of parameter
// points observationally equivalent to (alpha0, beta0) under a binary interval
// quantizer. Exactly one of a, b may be infinite.
EquivalenceTrace trace_example1(double alpha0, double beta0, const std::vector<double>& rho_grid,
                                double a, double b);

// CSV columns: rho, alpha_rho, beta_rho, residual.
void write_trace_csv(std::ostream& os, const EquivalenceTrace& trace);

// The stationary point of ln P(u=1 | theta) for a bivariate unit-variance
// Gaussian quantized by the rectangle (a1,b1)x(a2,b2): the rectangle center.
// Certifies a vanishing gradient and local dominance before returning.
Eigen::Vector2d identifiable_point_example2(double a1, double b1, double a2, double b2);

struct LevelSetRow {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double prob = 0.0;
};

// P(joint outcome | theta) over a 2-D parameter grid, for contour plotting.
std::vector<LevelSetRow> level_set_grid(const SystemSpec& spec,
                                        const std::vector<OutcomeVector>& outcome,
                                        const std::vector<double>& axis1,
                                        const std::vector<double>& axis2);

// CSV columns: theta1, theta2, prob.
void write_level_set_csv(std::ostream& os, const std::vector<LevelSetRow>& rows);

struct EquivalentPair {
  int index1 = 0;
  int index2 = 0;
  double phi_distance = 0.0;
};

// All unordered pairs of distinct grid points whose outcome distributions
// agree within tol; a finite-grid surrogate for the injectivity question.
std::vector<EquivalentPair> injectivity_scan(const SystemSpec& spec,
                                             const std::vector<ParameterPoint>& grid, double tol);

void write_scan_csv(std::ostream& os, const std::vector<ParameterPoint>& grid,
                    const std::vector<EquivalentPair>& pairs);

}  // namespace quantlim
