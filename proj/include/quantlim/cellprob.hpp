#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "quantlim/quantizers.hpp"
#include "quantlim/system_spec.hpp"

namespace quantlim {

enum class TableMethod { analytic, monte_carlo };

struct TableEntry {
  OutcomeVector outcome;
  double prob = 0.0;
  Eigen::VectorXd grad;  // length d_theta
};

// Full outcome-probability table of one sensor at one parameter point.
// Invariants (enforced on assembly): probabilities in [0,1], probabilities sum
// to one, gradients sum to the zero vector.
struct CellProbabilityTable {
  int sensor_id = 0;
  TableMethod method = TableMethod::analytic;
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::vector<TableEntry> entries;  // alphabet (lexicographic) order

  const TableEntry& at(const OutcomeVector& s) const;
};

// P(sensor outcome = s | theta). Analytic path: products of per-axis CDF
// differences, complement cells as one minus the sum of their siblings.
// Monte Carlo path: deterministic indicator mean (seed from the spec).
double cell_prob(const SystemSpec& spec, int sensor, const OutcomeVector& s,
                 const ParameterPoint& theta);

// Gradient of cell_prob with respect to theta. Analytic models use closed
// forms; the Monte Carlo path falls back to central finite differences with
// step 1e-6 * max(1, |theta_i|) and common random numbers.
Eigen::VectorXd cell_grad(const SystemSpec& spec, int sensor, const OutcomeVector& s,
                          const ParameterPoint& theta);

CellProbabilityTable table(const SystemSpec& spec, int sensor, const ParameterPoint& theta);

// Probabilities only, in alphabet order; the fast path for likelihood loops.
std::vector<double> table_probs(const SystemSpec& spec, int sensor, const ParameterPoint& theta);

// CSV columns: sensor, outcome, probability, grad_1..grad_Dtheta.
void write_table_csv(std::ostream& os, const CellProbabilityTable& t);

}  // namespace quantlim
