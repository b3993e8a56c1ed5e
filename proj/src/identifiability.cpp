#include "quantlim/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "quantlim/cellprob.hpp"
#include "quantlim/csv.hpp"
#include "quantlim/errors.hpp"
#include "quantlim/normal.hpp"
#include "quantlim/parallel.hpp"

namespace quantlim {

namespace {

constexpr long kMaxGlobalAlphabet = 50'000'000;
constexpr double kResidualTol = 1e-12;
constexpr double kBracketCap = 1e6;

std::vector<std::vector<double>> sensor_prob_tables(const SystemSpec& spec,
                                                    const ParameterPoint& theta) {
  std::vector<std::vector<double>> tables(spec.n_sensors());
  for (int j = 0; j < spec.n_sensors(); ++j) tables[j] = table_probs(spec, j, theta);
  return tables;
}

}  // namespace

long global_alphabet_size(const SystemSpec& spec) {
  long d_u = 1;
  for (const auto& s : spec.sensors) {
    d_u *= s.quantizer.alphabet_size();
    if (d_u > kMaxGlobalAlphabet) {
      throw NumericalError("global outcome alphabet exceeds " +
                           std::to_string(kMaxGlobalAlphabet) + " entries");
    }
  }
  return d_u;
}

std::vector<std::vector<OutcomeVector>> global_alphabet(const SystemSpec& spec) {
  const long d_u = global_alphabet_size(spec);
  std::vector<std::vector<OutcomeVector>> per_sensor;
  per_sensor.reserve(spec.sensors.size());
  for (const auto& s : spec.sensors) per_sensor.push_back(s.quantizer.outcome_alphabet());

  std::vector<std::vector<OutcomeVector>> out;
  out.reserve(static_cast<std::size_t>(d_u));
  std::vector<std::size_t> idx(spec.sensors.size(), 0);
  while (true) {
    std::vector<OutcomeVector> joint;
    joint.reserve(spec.sensors.size());
    for (std::size_t j = 0; j < idx.size(); ++j) joint.push_back(per_sensor[j][idx[j]]);
    out.push_back(std::move(joint));
    int j = static_cast<int>(idx.size()) - 1;
    while (j >= 0) {
      if (++idx[j] < per_sensor[j].size()) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

PhiVector phi(const SystemSpec& spec, const ParameterPoint& theta) {
  spec.space.require_point(theta);
  const long d_u = global_alphabet_size(spec);
  auto tables = sensor_prob_tables(spec, theta);

  PhiVector out;
  out.values.resize(d_u);
  // odometer over per-sensor flat indices, first sensor most significant
  std::vector<std::size_t> idx(spec.sensors.size(), 0);
  for (long a = 0; a < d_u; ++a) {
    double p = 1.0;
    for (std::size_t j = 0; j < idx.size(); ++j) p *= tables[j][idx[j]];
    out.values[a] = p;
    int j = static_cast<int>(idx.size()) - 1;
    while (j >= 0) {
      if (++idx[j] < tables[j].size()) break;
      idx[j] = 0;
      --j;
    }
  }
  return out;
}

PsiVector psi(const SystemSpec& spec, const ParameterPoint& theta) {
  spec.space.require_point(theta);
  auto tables = sensor_prob_tables(spec, theta);
  long len = 0;
  for (const auto& t : tables) len += static_cast<long>(t.size()) - 1;
  PsiVector out;
  out.values.resize(len);
  long pos = 0;
  for (const auto& t : tables) {
    for (std::size_t s = 0; s + 1 < t.size(); ++s) out.values[pos++] = t[s];
  }
  return out;
}

bool obs_equivalent(const SystemSpec& spec, const ParameterPoint& theta1,
                    const ParameterPoint& theta2, double tol) {
  PhiVector p1 = phi(spec, theta1);
  PhiVector p2 = phi(spec, theta2);
  return (p1.values - p2.values).lpNorm<Eigen::Infinity>() <= tol;
}

Lemma1Result lemma1_check(const SystemSpec& spec, const ParameterPoint& theta1,
                          const ParameterPoint& theta2, double tol) {
  Lemma1Result r;
  r.phi_distance = (phi(spec, theta1).values - phi(spec, theta2).values).lpNorm<Eigen::Infinity>();
  r.psi_distance = (psi(spec, theta1).values - psi(spec, theta2).values).lpNorm<Eigen::Infinity>();
  r.phi_equal = r.phi_distance <= tol;
  r.psi_equal = r.psi_distance <= tol;
  r.agree = r.phi_equal == r.psi_equal;
  return r;
}

double interval_gaussian_prob(double alpha, double beta, double a, double b) {
  if (!(beta > 0.0)) throw ValidationError("interval_gaussian_prob requires beta > 0");
  double s = std::sqrt(beta);
  return norm_interval_prob((a - alpha) / s, (b - alpha) / s);
}

namespace {

// Bisection for h(alpha) = g(alpha, beta) - target on a bracket with a sign
// change; g is continuous, so the residual target is always reachable.
double bisect_alpha(double lo, double hi, double beta, double a, double b, double target,
                    double* residual_out) {
  auto h = [&](double alpha) { return interval_gaussian_prob(alpha, beta, a, b) - target; };
  double hlo = h(lo);
  double hhi = h(hi);
  if (std::abs(hlo) <= kResidualTol) {
    *residual_out = std::abs(hlo);
    return lo;
  }
  if (std::abs(hhi) <= kResidualTol) {
    *residual_out = std::abs(hhi);
    return hi;
  }
  if ((hlo > 0) == (hhi > 0)) {
    throw NumericalError("equivalence trace: bracket endpoints have the same sign");
  }
  double mid = lo;
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    double hm = h(mid);
    if (std::abs(hm) <= kResidualTol) {
      *residual_out = std::abs(hm);
      return mid;
    }
    if ((hm > 0) == (hlo > 0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  double res = std::abs(h(mid));
  if (res <= kResidualTol) {
    *residual_out = res;
    return mid;
  }
  throw NumericalError("equivalence trace: bisection failed to reach the residual target");
}

}  // namespace

EquivalenceTrace trace_example1(double alpha0, double beta0, const std::vector<double>& rho_grid,
                                double a, double b) {
  if (!(beta0 > 0.0)) throw ValidationError("trace_example1 requires beta0 > 0");
  if (!(a < b)) throw ValidationError("trace_example1 requires a < b");
  if (std::isinf(a) && std::isinf(b)) {
    throw ValidationError("trace_example1: a and b cannot both be unbounded");
  }
  for (double rho : rho_grid) {
    if (!(rho > 0.0 && rho < 1.0)) {
      throw ValidationError("trace_example1: every rho must lie in (0, 1)");
    }
  }

  EquivalenceTrace trace;
  trace.alpha0 = alpha0;
  trace.beta0 = beta0;
  trace.a = a;
  trace.b = b;
  trace.target = interval_gaussian_prob(alpha0, beta0, a, b);
  trace.samples.resize(rho_grid.size());

  const bool both_finite = std::isfinite(a) && std::isfinite(b);
  parallel_for(rho_grid.size(), [&](std::size_t i) {
    const double rho = rho_grid[i];
    const double beta = rho * beta0;
    double lo, hi;
    if (both_finite) {
      // The cell midpoint maximizes g for fixed beta and g there grows as beta
      // shrinks, so it sits above the target; far to the right g falls to zero.
      lo = 0.5 * (a + b);
      double offset = std::max(1.0, b - a);
      hi = lo + offset;
      while (interval_gaussian_prob(hi, beta, a, b) > trace.target) {
        offset *= 2.0;
        hi = lo + offset;
        if (offset > kBracketCap) {
          throw NumericalError("equivalence trace: no sign change below the bracket cap");
        }
      }
    } else {
      // One side unbounded: g is monotone in alpha with limits 0 and 1, so a
      // symmetric bracket expanded geometrically must straddle the target.
      double m = 1.0;
      while (true) {
        double gl = interval_gaussian_prob(-m, beta, a, b);
        double gr = interval_gaussian_prob(m, beta, a, b);
        if ((gl - trace.target) * (gr - trace.target) <= 0.0) break;
        m *= 4.0;
        if (m > kBracketCap) {
          throw NumericalError("equivalence trace: no sign change below the bracket cap");
        }
      }
      lo = -m;
      hi = m;
    }
    double residual = 0.0;
    double alpha = bisect_alpha(lo, hi, beta, a, b, trace.target, &residual);
    trace.samples[i] = TraceSample{rho, alpha, beta, residual};
  });
  return trace;
}

void write_trace_csv(std::ostream& os, const EquivalenceTrace& trace) {
  os << "rho,alpha_rho,beta_rho,residual\n";
  for (const auto& s : trace.samples) {
    os << format_g17(s.rho) << "," << format_g17(s.alpha) << "," << format_g17(s.beta) << ","
       << format_g17(s.residual) << "\n";
  }
}

Eigen::Vector2d identifiable_point_example2(double a1, double b1, double a2, double b2) {
  if (!std::isfinite(a1) || !std::isfinite(b1) || !std::isfinite(a2) || !std::isfinite(b2) ||
      !(a1 < b1) || !(a2 < b2)) {
    throw ValidationError("identifiable_point_example2 requires a finite rectangle with a_i < b_i");
  }
  Eigen::Vector2d star((a1 + b1) / 2.0, (a2 + b2) / 2.0);

  // Stationarity of ln P(u=1|theta): per coordinate the CDF-difference
  // derivative phi(a_i - t_i) - phi(b_i - t_i) vanishes at the midpoint.
  auto cell_prob_at = [&](double t1, double t2) {
    return norm_interval_prob(a1 - t1, b1 - t1) * norm_interval_prob(a2 - t2, b2 - t2);
  };
  const double p_star = cell_prob_at(star[0], star[1]);
  const double g1 = (norm_pdf(a1 - star[0]) - norm_pdf(b1 - star[0])) /
                    norm_interval_prob(a1 - star[0], b1 - star[0]);
  const double g2 = (norm_pdf(a2 - star[1]) - norm_pdf(b2 - star[1])) /
                    norm_interval_prob(a2 - star[1], b2 - star[1]);
  if (std::abs(g1) > 1e-10 || std::abs(g2) > 1e-10) {
    throw NumericalError("identifiable_point_example2: gradient does not vanish at the center");
  }
  const double step = 0.25 * std::min(b1 - a1, b2 - a2);
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      if (cell_prob_at(star[0] + di * step, star[1] + dj * step) >= p_star) {
        throw NumericalError("identifiable_point_example2: center is not a strict local maximum");
      }
    }
  }
  return star;
}

std::vector<LevelSetRow> level_set_grid(const SystemSpec& spec,
                                        const std::vector<OutcomeVector>& outcome,
                                        const std::vector<double>& axis1,
                                        const std::vector<double>& axis2) {
  if (spec.d_theta != 2) {
    throw ValidationError("level_set_grid requires a 2-dimensional parameter space");
  }
  if (static_cast<int>(outcome.size()) != spec.n_sensors()) {
    throw ValidationError("level_set_grid: expected one outcome per sensor");
  }
  std::vector<long> flat(outcome.size());
  for (int j = 0; j < spec.n_sensors(); ++j) {
    flat[j] = spec.sensors[j].quantizer.flat_index(outcome[j]);
  }
  std::vector<LevelSetRow> rows(axis1.size() * axis2.size());
  parallel_for(axis1.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < axis2.size(); ++k) {
      ParameterPoint theta(2);
      theta << axis1[i], axis2[k];
      double p = 1.0;
      for (int j = 0; j < spec.n_sensors(); ++j) {
        p *= table_probs(spec, j, theta)[static_cast<std::size_t>(flat[j])];
      }
      rows[i * axis2.size() + k] = LevelSetRow{axis1[i], axis2[k], p};
    }
  });
  return rows;
}

void write_level_set_csv(std::ostream& os, const std::vector<LevelSetRow>& rows) {
  os << "theta1,theta2,prob\n";
  for (const auto& r : rows) {
    os << format_g17(r.theta1) << "," << format_g17(r.theta2) << "," << format_g17(r.prob)
       << "\n";
  }
}

std::vector<EquivalentPair> injectivity_scan(const SystemSpec& spec,
                                             const std::vector<ParameterPoint>& grid, double tol) {
  std::vector<Eigen::VectorXd> phis(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { phis[i] = phi(spec, grid[i]).values; });

  std::vector<EquivalentPair> pairs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      if ((grid[i] - grid[j]).lpNorm<Eigen::Infinity>() == 0.0) continue;  // identical points
      double dist = (phis[i] - phis[j]).lpNorm<Eigen::Infinity>();
      if (dist <= tol) {
        pairs.push_back(EquivalentPair{static_cast<int>(i), static_cast<int>(j), dist});
      }
    }
  }
  return pairs;
}

void write_scan_csv(std::ostream& os, const std::vector<ParameterPoint>& grid,
                    const std::vector<EquivalentPair>& pairs) {
  const int d = grid.empty() ? 0 : static_cast<int>(grid.front().size());
  os << "index1,index2";
  for (int i = 1; i <= d; ++i) os << ",theta1_" << i;
  for (int i = 1; i <= d; ++i) os << ",theta2_" << i;
  os << ",phi_distance\n";
  for (const auto& p : pairs) {
    os << p.index1 << "," << p.index2;
    for (int i = 0; i < d; ++i) os << "," << format_g17(grid[p.index1][i]);
    for (int i = 0; i < d; ++i) os << "," << format_g17(grid[p.index2][i]);
    os << "," << format_g17(p.phi_distance) << "\n";
  }
}

}  // namespace quantlim
