#include "quantlim/fim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "quantlim/errors.hpp"
#include "quantlim/idqd.hpp"

namespace quantlim {

namespace {

constexpr double kQFloor = 1e-300;  // cells below this are eliminated from the sum
constexpr double kQFlag = 1e-12;    // cells below this are kept but flagged

int svd_rank(const Eigen::MatrixXd& m, double* tolerance_out, Eigen::VectorXd* sv_out) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  Eigen::VectorXd sv = svd.singularValues();
  double tol = sv.size() > 0 ? sv[0] * static_cast<double>(m.rows()) * 1e-10 : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) ++rank;
  }
  if (tolerance_out) *tolerance_out = tol;
  if (sv_out) *sv_out = sv;
  return rank;
}

std::vector<Eigen::MatrixXd> sensor_fim_terms(const SystemSpec& spec, const ParameterPoint& theta,
                                              int* flagged_out) {
  const int d = spec.d_theta;
  int flagged = 0;
  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(spec.sensors.size());
  for (int j = 0; j < spec.n_sensors(); ++j) {
    CellProbabilityTable t = table(spec, j, theta);
    Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(d, d);
    for (const auto& e : t.entries) {
      if (e.prob < kQFloor) continue;  // zero-probability summands are eliminated
      if (e.prob < kQFlag) ++flagged;
      jj.noalias() += (e.grad * e.grad.transpose()) / e.prob;
    }
    terms.push_back(std::move(jj));
  }
  if (flagged_out) *flagged_out = flagged;
  return terms;
}

}  // namespace

double log_likelihood(const SystemSpec& spec, const std::vector<OutcomeVector>& u,
                      const ParameterPoint& theta) {
  if (static_cast<int>(u.size()) != spec.n_sensors()) {
    throw ValidationError("log_likelihood: expected one outcome per sensor");
  }
  double ll = 0.0;
  for (int j = 0; j < spec.n_sensors(); ++j) {
    double q = cell_prob(spec, j, u[j], theta);
    if (q <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += std::log(q);
  }
  return ll;
}

FisherReport fim(const SystemSpec& spec, const ParameterPoint& theta) {
  spec.space.require_point(theta);
  FisherReport report;
  auto terms = sensor_fim_terms(spec, theta, &report.flagged_small_cells);

  const int d = spec.d_theta;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d);
  report.per_sensor_ranks.reserve(terms.size());
  for (const auto& term : terms) {
    j += term;
    report.per_sensor_ranks.push_back(svd_rank(term, nullptr, nullptr));
  }
  j = ((j + j.transpose()) / 2.0).eval();

  report.matrix = j;
  report.numerical_rank = svd_rank(j, &report.rank_tolerance, &report.singular_values);
  report.idqd_bound = idqd(spec);
  report.singular_verdict = report.numerical_rank < d;
  return report;
}

RankBoundCheck verify_rank_bounds(const SystemSpec& spec, const ParameterPoint& theta) {
  spec.space.require_point(theta);
  RankBoundCheck check;
  auto terms = sensor_fim_terms(spec, theta, nullptr);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(spec.d_theta, spec.d_theta);
  check.all_hold = true;
  for (int j = 0; j < spec.n_sensors(); ++j) {
    total += terms[j];
    RankBoundCheck::PerSensor ps;
    ps.rank = svd_rank(terms[j], nullptr, nullptr);
    ps.bound = spec.sensors[j].quantizer.alphabet_size() - 1;
    ps.slack = ps.bound - ps.rank;
    check.all_hold = check.all_hold && ps.slack >= 0;
    check.per_sensor.push_back(ps);
  }
  check.total_rank = svd_rank(total, nullptr, nullptr);
  check.total_bound = idqd(spec);
  check.total_slack = check.total_bound - check.total_rank;
  check.all_hold = check.all_hold && check.total_slack >= 0;
  return check;
}

std::optional<Eigen::MatrixXd> crb(const FisherReport& report) {
  const int d = static_cast<int>(report.matrix.rows());
  if (report.numerical_rank < d) return std::nullopt;
  Eigen::MatrixXd inv = report.matrix.inverse();
  return ((inv + inv.transpose()) / 2.0).eval();
}

nlohmann::json fisher_report_to_json(const FisherReport& report) {
  nlohmann::json matrix = nlohmann::json::array();
  for (int i = 0; i < report.matrix.rows(); ++i) {
    for (int j = 0; j < report.matrix.cols(); ++j) matrix.push_back(report.matrix(i, j));
  }
  nlohmann::json sv = nlohmann::json::array();
  for (int i = 0; i < report.singular_values.size(); ++i) sv.push_back(report.singular_values[i]);
  nlohmann::json per_sensor = nlohmann::json::array();
  for (int r : report.per_sensor_ranks) per_sensor.push_back(r);

  nlohmann::json out{{"d_theta", report.matrix.rows()},
                     {"matrix_row_major", std::move(matrix)},
                     {"singular_values", std::move(sv)},
                     {"numerical_rank", report.numerical_rank},
                     {"rank_tolerance", report.rank_tolerance},
                     {"per_sensor_ranks", std::move(per_sensor)},
                     {"idqd_bound", report.idqd_bound},
                     {"singular", report.singular_verdict},
                     {"flagged_small_cells", report.flagged_small_cells}};
  if (auto inv = crb(report)) {
    nlohmann::json c = nlohmann::json::array();
    for (int i = 0; i < inv->rows(); ++i) {
      for (int j = 0; j < inv->cols(); ++j) c.push_back((*inv)(i, j));
    }
    out["crb_row_major"] = std::move(c);
  } else {
    out["crb_row_major"] = nullptr;
  }
  return out;
}

}  // namespace quantlim
