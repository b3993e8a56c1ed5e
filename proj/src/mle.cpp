#include "quantlim/mle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "quantlim/cellprob.hpp"
#include "quantlim/csv.hpp"
#include "quantlim/errors.hpp"
#include "quantlim/identifiability.hpp"
#include "quantlim/parallel.hpp"
#include "quantlim/rng.hpp"

namespace quantlim {

QuantizedDataset sample(const SystemSpec& spec, const ParameterPoint& theta_true, long n,
                        std::uint64_t seed) {
  spec.space.require_point(theta_true);
  if (n < 0) throw ValidationError("sample: n must be nonnegative");

  QuantizedDataset data;
  data.n_snapshots = n;
  data.seed = seed;
  data.counts.resize(spec.sensors.size());
  for (int j = 0; j < spec.n_sensors(); ++j) {
    const Sensor& sensor = spec.sensors[j];
    data.counts[j].assign(static_cast<std::size_t>(sensor.quantizer.alphabet_size()), 0);
    auto [mean, transform] = sensor.model.sampling_transform(theta_true);
    Eigen::VectorXd z(mean.size()), x(mean.size());
    for (long i = 0; i < n; ++i) {
      CounterRng rng = CounterRng::keyed(seed, static_cast<std::uint64_t>(j),
                                         static_cast<std::uint64_t>(i));
      for (int d = 0; d < z.size(); ++d) z[d] = rng.normal();
      x = mean + transform * z;
      auto outcome = sensor.quantizer.apply(x);
      data.counts[j][static_cast<std::size_t>(sensor.quantizer.flat_index(outcome))]++;
    }
  }
  return data;
}

double dataset_log_likelihood(const SystemSpec& spec, const QuantizedDataset& data,
                              const ParameterPoint& theta) {
  if (static_cast<int>(data.counts.size()) != spec.n_sensors()) {
    throw ValidationError("dataset does not match the spec's sensor count");
  }
  double ll = 0.0;
  for (int j = 0; j < spec.n_sensors(); ++j) {
    auto probs = table_probs(spec, j, theta);
    for (std::size_t s = 0; s < probs.size(); ++s) {
      long c = data.counts[j][s];
      if (c == 0) continue;
      if (probs[s] <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += static_cast<double>(c) * std::log(probs[s]);
    }
  }
  return ll;
}

namespace {

void check_search_box(const SystemSpec& spec, const Rect& box) {
  if (static_cast<int>(box.size()) != spec.d_theta) {
    throw ValidationError("search box dimension differs from d_theta");
  }
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!std::isfinite(box[i].lo) || !std::isfinite(box[i].hi) || !(box[i].lo < box[i].hi)) {
      throw ValidationError("search box must be finite with lower < upper on every axis");
    }
    if (box[i].lo < spec.space.bounds[i].lo || box[i].hi > spec.space.bounds[i].hi) {
      throw ValidationError("search box must be contained in the parameter space");
    }
  }
}

ParameterPoint clamp_to_box(const ParameterPoint& x, const Rect& box) {
  ParameterPoint y = x;
  for (int i = 0; i < y.size(); ++i) y[i] = std::clamp(y[i], box[i].lo, box[i].hi);
  return y;
}

// Nelder-Mead ascent with iterates clamped to the box; derivative-free so the
// likelihood kinks at cell-probability saturation points do not matter.
struct SimplexResult {
  ParameterPoint x;
  double value = -std::numeric_limits<double>::infinity();
};

SimplexResult nelder_mead_max(const std::function<double(const ParameterPoint&)>& f,
                              const ParameterPoint& x0, const Rect& box) {
  const int d = static_cast<int>(x0.size());
  const int max_iter = 600;
  const double ftol = 1e-13;
  const double xtol = 1e-10;

  std::vector<ParameterPoint> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  for (int i = 0; i < d; ++i) {
    double step = 0.05 * (box[i].hi - box[i].lo);
    if (pts[i + 1][i] + step > box[i].hi) step = -step;
    pts[i + 1][i] += step;
    pts[i + 1] = clamp_to_box(pts[i + 1], box);
  }
  for (int i = 0; i <= d; ++i) vals[i] = f(pts[i]);

  auto order = [&] {
    std::vector<int> idx(d + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    std::vector<ParameterPoint> p2(d + 1);
    std::vector<double> v2(d + 1);
    for (int i = 0; i <= d; ++i) {
      p2[i] = pts[idx[i]];
      v2[i] = vals[idx[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    order();
    double diam = 0.0;
    for (int i = 1; i <= d; ++i) diam = std::max(diam, (pts[i] - pts[0]).norm());
    bool flat = std::isfinite(vals[d]) && std::isfinite(vals[0]) &&
                (vals[0] - vals[d]) < ftol * (1.0 + std::abs(vals[0]));
    if (diam < xtol && flat) break;

    ParameterPoint centroid = ParameterPoint::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[i];
    centroid /= static_cast<double>(d);

    auto eval_at = [&](double coef) {
      ParameterPoint x = clamp_to_box(centroid + coef * (centroid - pts[d]), box);
      return std::make_pair(x, f(x));
    };

    auto [xr, fr] = eval_at(1.0);  // reflection
    if (fr > vals[0]) {
      auto [xe, fe] = eval_at(2.0);  // expansion
      if (fe > fr) {
        pts[d] = xe;
        vals[d] = fe;
      } else {
        pts[d] = xr;
        vals[d] = fr;
      }
      continue;
    }
    if (fr > vals[d - 1]) {
      pts[d] = xr;
      vals[d] = fr;
      continue;
    }
    auto [xc, fc] = eval_at(fr > vals[d] ? 0.5 : -0.5);  // contraction
    if (fc > std::max(fr, vals[d])) {
      pts[d] = xc;
      vals[d] = fc;
      continue;
    }
    for (int i = 1; i <= d; ++i) {  // shrink
      pts[i] = clamp_to_box(pts[0] + 0.5 * (pts[i] - pts[0]), box);
      vals[i] = f(pts[i]);
    }
  }
  order();
  return SimplexResult{pts[0], vals[0]};
}

}  // namespace

FitResult fit(const SystemSpec& spec, const QuantizedDataset& data, const Rect& search_box,
              const FitOptions& options) {
  check_search_box(spec, search_box);
  const int d = spec.d_theta;
  const int gp = std::max(2, options.grid_points_per_axis);

  auto objective = [&](const ParameterPoint& theta) {
    return dataset_log_likelihood(spec, data, theta);
  };

  // coarse grid seeding
  long n_grid = 1;
  for (int i = 0; i < d; ++i) n_grid *= gp;
  std::vector<ParameterPoint> grid_pts(n_grid, ParameterPoint(d));
  std::vector<double> grid_vals(n_grid);
  std::vector<double> step(d);
  for (int i = 0; i < d; ++i) step[i] = (search_box[i].hi - search_box[i].lo) / (gp - 1);
  for (long g = 0; g < n_grid; ++g) {
    long rem = g;
    for (int i = d - 1; i >= 0; --i) {
      grid_pts[g][i] = search_box[i].lo + static_cast<double>(rem % gp) * step[i];
      rem /= gp;
    }
  }
  parallel_for(static_cast<std::size_t>(n_grid),
               [&](std::size_t g) { grid_vals[g] = objective(grid_pts[g]); });

  std::vector<long> by_value(n_grid);
  std::iota(by_value.begin(), by_value.end(), 0);
  std::sort(by_value.begin(), by_value.end(),
            [&](long a, long b) { return grid_vals[a] > grid_vals[b]; });

  // separated starts: walk the ranking, skip points close to an already-chosen
  // start so distinct ridge segments each get a refinement
  std::vector<ParameterPoint> starts;
  double min_sep_sq = 0.0;
  for (int i = 0; i < d; ++i) min_sep_sq += (1.5 * step[i]) * (1.5 * step[i]);
  for (long rank = 0; rank < n_grid && static_cast<int>(starts.size()) < options.n_starts;
       ++rank) {
    const ParameterPoint& cand = grid_pts[by_value[rank]];
    if (!std::isfinite(grid_vals[by_value[rank]])) break;
    bool close = false;
    for (const auto& s : starts) {
      if ((s - cand).squaredNorm() < min_sep_sq) {
        close = true;
        break;
      }
    }
    if (!close) starts.push_back(cand);
  }
  const double grid_best = starts.empty() ? -std::numeric_limits<double>::infinity()
                                          : grid_vals[by_value[0]];
  if (starts.empty()) {
    throw NumericalError("fit: the likelihood is -infinity on the whole seeding grid");
  }

  std::vector<SimplexResult> refined(starts.size());
  parallel_for(starts.size(),
               [&](std::size_t i) { refined[i] = nelder_mead_max(objective, starts[i], search_box); });

  FitResult result;
  result.tie_tolerance = options.tie_tolerance;

  double best = grid_best;
  for (const auto& r : refined) best = std::max(best, r.value);
  result.grid_fallback = true;
  for (const auto& r : refined) {
    if (r.value > grid_best) result.grid_fallback = false;
  }

  std::vector<SimplexResult> candidates = refined;
  if (result.grid_fallback) {
    candidates.push_back(SimplexResult{grid_pts[by_value[0]], grid_best});
  }

  // keep near-ties, merging duplicates that converged to the same point
  double dedup_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    double w = 1e-7 * (search_box[i].hi - search_box[i].lo);
    dedup_sq += w * w;
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const SimplexResult& a, const SimplexResult& b) { return a.value > b.value; });
  for (const auto& c : candidates) {
    if (!(c.value >= best - options.tie_tolerance)) continue;
    bool dup = false;
    for (const auto& m : result.maximizers) {
      if ((m.theta - c.x).squaredNorm() <= dedup_sq) {
        dup = true;
        break;
      }
    }
    if (!dup) result.maximizers.push_back(FitResult::Maximizer{c.x, c.value});
  }

  for (const auto& m : result.maximizers) {
    for (int i = 0; i < d; ++i) {
      double edge = 1e-6 * (search_box[i].hi - search_box[i].lo);
      if (m.theta[i] - search_box[i].lo < edge || search_box[i].hi - m.theta[i] < edge) {
        result.boundary_hit = true;
      }
    }
  }
  for (std::size_t i = 0; i < result.maximizers.size(); ++i) {
    for (std::size_t j = i + 1; j < result.maximizers.size(); ++j) {
      result.spread_diameter =
          std::max(result.spread_diameter,
                   (result.maximizers[i].theta - result.maximizers[j].theta).norm());
    }
  }
  return result;
}

StudySummary degeneracy_study(const SystemSpec& spec, const ParameterPoint& theta_true, long n,
                              const std::vector<std::uint64_t>& seeds, const Rect& search_box,
                              const FitOptions& options, double equiv_tol) {
  StudySummary study;
  study.rows.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    QuantizedDataset data = sample(spec, theta_true, n, seeds[i]);
    FitResult fr = fit(spec, data, search_box, options);
    StudyRow row;
    row.seed = seeds[i];
    row.n_maximizers = static_cast<int>(fr.maximizers.size());
    row.spread_diameter = fr.spread_diameter;
    row.best_log_lik = fr.maximizers.empty() ? 0.0 : fr.maximizers.front().log_lik;
    row.all_equivalent = true;
    for (std::size_t a = 0; a < fr.maximizers.size(); ++a) {
      for (std::size_t b = a + 1; b < fr.maximizers.size(); ++b) {
        if (!obs_equivalent(spec, fr.maximizers[a].theta, fr.maximizers[b].theta, equiv_tol)) {
          row.all_equivalent = false;
        }
      }
    }
    study.rows[i] = row;
  });

  std::vector<double> spreads;
  spreads.reserve(study.rows.size());
  study.all_rows_equivalent = true;
  for (const auto& r : study.rows) {
    spreads.push_back(r.spread_diameter);
    study.all_rows_equivalent = study.all_rows_equivalent && r.all_equivalent;
  }
  std::sort(spreads.begin(), spreads.end());
  if (!spreads.empty()) {
    std::size_t m = spreads.size() / 2;
    study.median_spread =
        spreads.size() % 2 == 1 ? spreads[m] : 0.5 * (spreads[m - 1] + spreads[m]);
  }
  return study;
}

nlohmann::json dataset_to_json(const SystemSpec& spec, const QuantizedDataset& data) {
  nlohmann::json sensors = nlohmann::json::array();
  for (int j = 0; j < static_cast<int>(data.counts.size()); ++j) {
    auto alphabet = spec.sensors[j].quantizer.outcome_alphabet();
    nlohmann::json counts = nlohmann::json::array();
    for (std::size_t s = 0; s < data.counts[j].size(); ++s) {
      counts.push_back({{"outcome", alphabet[s].symbols}, {"count", data.counts[j][s]}});
    }
    sensors.push_back({{"sensor", j}, {"counts", std::move(counts)}});
  }
  return {{"n_snapshots", data.n_snapshots}, {"seed", data.seed}, {"sensors", std::move(sensors)}};
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
  nlohmann::json maxima = nlohmann::json::array();
  for (const auto& m : fit.maximizers) {
    std::vector<double> theta(m.theta.data(), m.theta.data() + m.theta.size());
    maxima.push_back({{"theta", theta}, {"log_likelihood", m.log_lik}});
  }
  return {{"maximizers", std::move(maxima)},
          {"spread_diameter", fit.spread_diameter},
          {"tie_tolerance", fit.tie_tolerance},
          {"grid_fallback", fit.grid_fallback},
          {"boundary_hit", fit.boundary_hit}};
}

void write_study_csv(std::ostream& os, const StudySummary& study) {
  os << "seed,n_maximizers,spread_diameter,all_equivalent,best_log_lik\n";
  for (const auto& r : study.rows) {
    os << r.seed << "," << r.n_maximizers << "," << format_g17(r.spread_diameter) << ","
       << (r.all_equivalent ? 1 : 0) << "," << format_g17(r.best_log_lik) << "\n";
  }
}

}  // namespace quantlim
