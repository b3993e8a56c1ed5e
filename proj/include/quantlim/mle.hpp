#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <vector>

#include "quantlim/intervals.hpp"
#include "quantlim/system_spec.hpp"

namespace quantlim {

// Outcome counts from n i.i.d. snapshots, one count vector per sensor in
// alphabet order. Deterministic given (spec, theta, n, seed); sensors draw
// from independent streams keyed by their index.
struct QuantizedDataset {
  long n_snapshots = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<long>> counts;  // [sensor][flat outcome index]
};

QuantizedDataset sample(const SystemSpec& spec, const ParameterPoint& theta_true, long n,
                        std::uint64_t seed);

// Snapshot-additive log-likelihood: sum over sensors and outcomes of
// count * ln q. Returns -infinity when an observed outcome has q = 0.
double dataset_log_likelihood(const SystemSpec& spec, const QuantizedDataset& data,
                              const ParameterPoint& theta);

struct FitOptions {
  int grid_points_per_axis = 41;
  int n_starts = 12;
  double tie_tolerance = 1e-6;  // nats
};

struct FitResult {
  struct Maximizer {
    ParameterPoint theta;
    double log_lik = 0.0;
  };
  std::vector<Maximizer> maximizers;  // descending log-likelihood, all near-ties
  double spread_diameter = 0.0;       // max pairwise distance among near-ties
  double tie_tolerance = 0.0;
  bool grid_fallback = false;  // no refinement improved on the best grid point
  bool boundary_hit = false;   // some maximizer sits on the search box boundary
};

// Multi-start maximum likelihood: coarse grid seeding followed by
// derivative-free simplex refinement from the best separated grid points.
// The search box must be finite and contained in the parameter space.
FitResult fit(const SystemSpec& spec, const QuantizedDataset& data, const Rect& search_box,
              const FitOptions& options = {});

struct StudyRow {
  std::uint64_t seed = 0;
  int n_maximizers = 0;
  double spread_diameter = 0.0;
  bool all_equivalent = false;  // near-ties pairwise observationally equivalent
  double best_log_lik = 0.0;
};

struct StudySummary {
  std::vector<StudyRow> rows;  // in seed order
  double median_spread = 0.0;
  bool all_rows_equivalent = false;
};

// Repeats sample + fit across seeds and reports how degenerate the maximizer
// set is; the empirical witness for estimation above the dimension limit.
StudySummary degeneracy_study(const SystemSpec& spec, const ParameterPoint& theta_true, long n,
                              const std::vector<std::uint64_t>& seeds, const Rect& search_box,
                              const FitOptions& options = {}, double equiv_tol = 1e-6);

nlohmann::json dataset_to_json(const SystemSpec& spec, const QuantizedDataset& data);
nlohmann::json fit_result_to_json(const FitResult& fit);

// CSV columns: seed, n_maximizers, spread_diameter, all_equivalent, best_log_lik.
void write_study_csv(std::ostream& os, const StudySummary& study);

}  // namespace quantlim
