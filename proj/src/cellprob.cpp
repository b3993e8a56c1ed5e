#include "quantlim/cellprob.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "quantlim/csv.hpp"
#include "quantlim/errors.hpp"
#include "quantlim/rng.hpp"

namespace quantlim {

namespace {

void check_sensor_index(const SystemSpec& spec, int sensor) {
  if (sensor < 0 || sensor >= spec.n_sensors()) {
    throw ValidationError("sensor index " + std::to_string(sensor) + " out of range");
  }
}

// Per-slot level probabilities (and gradients) of one sensor. Every built-in
// analytic model has independent coordinates, so the marginal probability of a
// subvector cell is the model probability of the cylinder rectangle that is
// unbounded on all other coordinates, and the joint outcome probability is the
// product over slots.
struct SlotLevels {
  std::vector<double> p;
  std::vector<Eigen::VectorXd> g;
};

SlotLevels slot_levels(const Sensor& sensor, int slot, int coord_offset,
                       const ParameterPoint& theta, bool want_grad) {
  const VectorQuantizer& q = sensor.quantizer.quantizers[slot];
  const int k = sensor.model.dim_x();
  SlotLevels out;
  out.p.assign(q.levels(), 0.0);
  if (want_grad) out.g.assign(q.levels(), Eigen::VectorXd::Zero(theta.size()));

  double explicit_sum = 0.0;
  Eigen::VectorXd explicit_grad = Eigen::VectorXd::Zero(theta.size());
  for (int r = 0; r < q.levels(); ++r) {
    if (q.cells[r].is_complement) continue;
    for (const Rect& cell_rect : q.cells[r].rects) {
      Rect cylinder(k);  // unbounded except on this slot's coordinates
      for (int c = 0; c < q.dim_in; ++c) cylinder[coord_offset + c] = cell_rect[c];
      if (want_grad) {
        auto [p, g] = sensor.model.rect_prob_grad(cylinder, theta);
        out.p[r] += p;
        out.g[r] += g;
      } else {
        out.p[r] += sensor.model.rect_prob(cylinder, theta);
      }
    }
    explicit_sum += out.p[r];
    if (want_grad) explicit_grad += out.g[r];
  }
  if (auto c = q.complement_index()) {
    // Never integrate the complement: one minus the siblings is exact and
    // keeps the level probabilities normalized by construction.
    out.p[*c] = std::max(0.0, 1.0 - explicit_sum);
    if (want_grad) out.g[*c] = -explicit_grad;
  }
  return out;
}

std::vector<SlotLevels> all_slot_levels(const Sensor& sensor, const ParameterPoint& theta,
                                        bool want_grad) {
  std::vector<SlotLevels> slots;
  slots.reserve(sensor.quantizer.size());
  int offset = 0;
  for (int l = 0; l < sensor.quantizer.size(); ++l) {
    slots.push_back(slot_levels(sensor, l, offset, theta, want_grad));
    offset += sensor.quantizer.quantizers[l].dim_in;
  }
  return slots;
}

bool needs_monte_carlo(const Sensor& sensor) { return !sensor.model.analytic_rects(); }

int mc_budget(const SystemSpec& spec) {
  if (!spec.mc_samples || *spec.mc_samples < 1) {
    throw ValidationError(
        "this model/region combination has no exact rectangle form and the spec configures no "
        "Monte Carlo budget (monte_carlo_samples)");
  }
  return *spec.mc_samples;
}

std::vector<double> mc_probs(const SystemSpec& spec, int sensor, const ParameterPoint& theta) {
  const Sensor& s = spec.sensors[sensor];
  const int n = mc_budget(spec);
  auto [mean, transform] = s.model.sampling_transform(theta);
  const long size = s.quantizer.alphabet_size();
  std::vector<long> counts(static_cast<std::size_t>(size), 0);
  Eigen::VectorXd z(mean.size()), x(mean.size());
  for (int i = 0; i < n; ++i) {
    // keyed by (seed, sensor, sample index): reproducible in any eval order
    CounterRng rng = CounterRng::keyed(spec.seed, static_cast<std::uint64_t>(sensor),
                                       static_cast<std::uint64_t>(i));
    for (int d = 0; d < z.size(); ++d) z[d] = rng.normal();
    x = mean + transform * z;
    counts[static_cast<std::size_t>(s.quantizer.flat_index(s.quantizer.apply(x)))]++;
  }
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return probs;
}

double fd_step(double coord) { return 1e-6 * std::max(1.0, std::abs(coord)); }

void require_interior_for_fd(const SystemSpec& spec, const ParameterPoint& theta) {
  for (int i = 0; i < theta.size(); ++i) {
    ParameterPoint lo = theta, hi = theta;
    double h = fd_step(theta[i]);
    lo[i] -= h;
    hi[i] += h;
    if (!spec.space.contains(lo) || !spec.space.contains(hi)) {
      throw NumericalError(
          "theta is within one finite-difference step of the parameter-space boundary "
          "(coordinate " +
          std::to_string(i) + "); central differences unavailable");
    }
  }
}

}  // namespace

const TableEntry& CellProbabilityTable::at(const OutcomeVector& s) const {
  for (const auto& e : entries) {
    if (e.outcome == s) return e;
  }
  throw ValidationError("outcome not present in table");
}

double cell_prob(const SystemSpec& spec, int sensor, const OutcomeVector& s,
                 const ParameterPoint& theta) {
  check_sensor_index(spec, sensor);
  spec.space.require_point(theta);
  const Sensor& sj = spec.sensors[sensor];
  sj.quantizer.flat_index(s);  // range-checks the outcome symbols
  if (needs_monte_carlo(sj)) {
    return mc_probs(spec, sensor, theta)[static_cast<std::size_t>(sj.quantizer.flat_index(s))];
  }
  auto slots = all_slot_levels(sj, theta, false);
  double q = 1.0;
  for (std::size_t l = 0; l < slots.size(); ++l) q *= slots[l].p[s.symbols[l] - 1];
  return q;
}

Eigen::VectorXd cell_grad(const SystemSpec& spec, int sensor, const OutcomeVector& s,
                          const ParameterPoint& theta) {
  check_sensor_index(spec, sensor);
  spec.space.require_point(theta);
  const Sensor& sj = spec.sensors[sensor];
  const long flat = sj.quantizer.flat_index(s);
  if (needs_monte_carlo(sj)) {
    require_interior_for_fd(spec, theta);
    Eigen::VectorXd grad(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      double h = fd_step(theta[i]);
      ParameterPoint lo = theta, hi = theta;
      lo[i] -= h;
      hi[i] += h;
      double plo = mc_probs(spec, sensor, lo)[static_cast<std::size_t>(flat)];
      double phi = mc_probs(spec, sensor, hi)[static_cast<std::size_t>(flat)];
      grad[i] = (phi - plo) / (2.0 * h);
    }
    return grad;
  }
  auto slots = all_slot_levels(sj, theta, true);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t l = 0; l < slots.size(); ++l) {
    double rest = 1.0;
    for (std::size_t m = 0; m < slots.size(); ++m) {
      if (m != l) rest *= slots[m].p[s.symbols[m] - 1];
    }
    grad += rest * slots[l].g[s.symbols[l] - 1];
  }
  return grad;
}

std::vector<double> table_probs(const SystemSpec& spec, int sensor, const ParameterPoint& theta) {
  check_sensor_index(spec, sensor);
  if (theta.size() != spec.d_theta) {
    throw ValidationError("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(spec.d_theta));
  }
  const Sensor& sj = spec.sensors[sensor];
  if (needs_monte_carlo(sj)) return mc_probs(spec, sensor, theta);
  auto slots = all_slot_levels(sj, theta, false);
  auto alphabet = sj.quantizer.outcome_alphabet();
  std::vector<double> probs(alphabet.size());
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    double q = 1.0;
    for (std::size_t l = 0; l < slots.size(); ++l) q *= slots[l].p[alphabet[i].symbols[l] - 1];
    probs[i] = q;
  }
  return probs;
}

CellProbabilityTable table(const SystemSpec& spec, int sensor, const ParameterPoint& theta) {
  check_sensor_index(spec, sensor);
  spec.space.require_point(theta);
  const Sensor& sj = spec.sensors[sensor];
  const bool mc = needs_monte_carlo(sj);

  CellProbabilityTable t;
  t.sensor_id = sensor;
  t.method = mc ? TableMethod::monte_carlo : TableMethod::analytic;
  t.seed = spec.seed;
  t.n_samples = mc ? mc_budget(spec) : 0;

  auto alphabet = sj.quantizer.outcome_alphabet();
  t.entries.resize(alphabet.size());

  if (mc) {
    auto probs = mc_probs(spec, sensor, theta);
    require_interior_for_fd(spec, theta);
    // one pair of shifted tables per coordinate, shared across all outcomes
    std::vector<std::vector<double>> plo(theta.size()), phi(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      double h = fd_step(theta[i]);
      ParameterPoint lo = theta, hi = theta;
      lo[i] -= h;
      hi[i] += h;
      plo[i] = mc_probs(spec, sensor, lo);
      phi[i] = mc_probs(spec, sensor, hi);
    }
    for (std::size_t s = 0; s < alphabet.size(); ++s) {
      t.entries[s].outcome = alphabet[s];
      t.entries[s].prob = probs[s];
      t.entries[s].grad.resize(theta.size());
      for (int i = 0; i < theta.size(); ++i) {
        double h = fd_step(theta[i]);
        t.entries[s].grad[i] = (phi[i][s] - plo[i][s]) / (2.0 * h);
      }
    }
  } else {
    auto slots = all_slot_levels(sj, theta, true);
    for (std::size_t s = 0; s < alphabet.size(); ++s) {
      t.entries[s].outcome = alphabet[s];
      double q = 1.0;
      for (std::size_t l = 0; l < slots.size(); ++l) q *= slots[l].p[alphabet[s].symbols[l] - 1];
      t.entries[s].prob = q;
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
      for (std::size_t l = 0; l < slots.size(); ++l) {
        double rest = 1.0;
        for (std::size_t m = 0; m < slots.size(); ++m) {
          if (m != l) rest *= slots[m].p[alphabet[s].symbols[m] - 1];
        }
        grad += rest * slots[l].g[alphabet[s].symbols[l] - 1];
      }
      t.entries[s].grad = grad;
    }
  }

  // Table invariants; a breach means the integration went wrong.
  double sum = 0.0;
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(theta.size());
  for (const auto& e : t.entries) {
    if (e.prob < -1e-15 || e.prob > 1.0 + 1e-12) {
      throw NumericalError("cell table: probability out of [0,1] for sensor " +
                           std::to_string(sensor));
    }
    sum += e.prob;
    grad_sum += e.grad;
  }
  const double sum_tol =
      mc ? 3.0 * std::sqrt(0.25 / std::max(1, t.n_samples)) + 1e-12 : 1e-12;
  const double grad_tol = mc ? 1e-6 : 1e-10;
  if (std::abs(sum - 1.0) > sum_tol) {
    throw NumericalError("cell table: probabilities sum to " + format_g17(sum) + " for sensor " +
                         std::to_string(sensor));
  }
  if (grad_sum.lpNorm<Eigen::Infinity>() > grad_tol) {
    throw NumericalError("cell table: gradients sum to a nonzero vector for sensor " +
                         std::to_string(sensor));
  }
  return t;
}

void write_table_csv(std::ostream& os, const CellProbabilityTable& t) {
  const int d = t.entries.empty() ? 0 : static_cast<int>(t.entries.front().grad.size());
  os << "sensor,outcome,probability";
  for (int i = 1; i <= d; ++i) os << ",grad_" << i;
  os << "\n";
  for (const auto& e : t.entries) {
    os << t.sensor_id << ",";
    for (std::size_t l = 0; l < e.outcome.symbols.size(); ++l) {
      if (l > 0) os << "-";
      os << e.outcome.symbols[l];
    }
    os << "," << format_g17(e.prob);
    for (int i = 0; i < d; ++i) os << "," << format_g17(e.grad[i]);
    os << "\n";
  }
}

}  // namespace quantlim
