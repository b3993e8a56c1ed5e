#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "quantlim/cellprob.hpp"
#include "quantlim/system_spec.hpp"

namespace quantlim {

struct FisherReport {
  Eigen::MatrixXd matrix;           // D_theta x D_theta, symmetric PSD
  Eigen::VectorXd singular_values;  // descending
  int numerical_rank = 0;
  double rank_tolerance = 0.0;      // sigma_max * D_theta * 1e-10
  std::vector<int> per_sensor_ranks;
  long idqd_bound = 0;          // the inestimable dimension of the system
  bool singular_verdict = false;    // numerical_rank < D_theta
  int flagged_small_cells = 0;      // cells with 0 < q < 1e-12 (included in the sum)
};

// Sum over sensors of ln q at the observed outcomes. An observed outcome with
// zero probability yields -infinity (the distinct "impossible data" report).
double log_likelihood(const SystemSpec& spec, const std::vector<OutcomeVector>& u,
                      const ParameterPoint& theta);

FisherReport fim(const SystemSpec& spec, const ParameterPoint& theta);

struct RankBoundCheck {
  struct PerSensor {
    int rank = 0;
    long bound = 0;  // alphabet size minus one
    long slack = 0;
  };
  std::vector<PerSensor> per_sensor;
  int total_rank = 0;
  long total_bound = 0;  // the inestimable dimension
  long total_slack = 0;
  bool all_hold = false;
};

RankBoundCheck verify_rank_bounds(const SystemSpec& spec, const ParameterPoint& theta);

// Inverse information matrix when the report is full rank; nullopt when
// singular (no pseudo-inverse surrogate is ever produced).
std::optional<Eigen::MatrixXd> crb(const FisherReport& report);

nlohmann::json fisher_report_to_json(const FisherReport& report);

}  // namespace quantlim
