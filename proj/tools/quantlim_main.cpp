#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "quantlim/csv.hpp"
#include "quantlim/errors.hpp"
#include "quantlim/fim.hpp"
#include "quantlim/identifiability.hpp"
#include "quantlim/idqd.hpp"
#include "quantlim/mle.hpp"
#include "quantlim/rng.hpp"
#include "quantlim/spec_json.hpp"

namespace {

using namespace quantlim;

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse '" + tok + "' as a number");
    }
  }
  return out;
}

// "lo:hi:count" inclusive linspace
std::vector<double> parse_linspace(const std::string& s) {
  double lo, hi;
  int count;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 1) {
    throw ValidationError("expected lo:hi:count, got '" + s + "'");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

// "lo:hi:n1,lo:hi:n2" -> two axes
std::pair<std::vector<double>, std::vector<double>> parse_grid(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw ValidationError("grid needs two axes: lo:hi:n,lo:hi:n");
  }
  return {parse_linspace(s.substr(0, comma)), parse_linspace(s.substr(comma + 1))};
}

// one comma-separated linspace per parameter coordinate
std::vector<ParameterPoint> parse_point_grid(const std::string& s, int d_theta) {
  std::vector<std::vector<double>> axes;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) axes.push_back(parse_linspace(tok));
  if (static_cast<int>(axes.size()) != d_theta) {
    throw ValidationError("grid has " + std::to_string(axes.size()) + " axes but d_theta is " +
                          std::to_string(d_theta));
  }
  std::vector<ParameterPoint> points;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    ParameterPoint p(d_theta);
    for (int i = 0; i < d_theta; ++i) p[i] = axes[i][idx[i]];
    points.push_back(std::move(p));
    int i = d_theta - 1;
    while (i >= 0) {
      if (++idx[i] < axes[i].size()) break;
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return points;
}

// "1,2;3" -> per-sensor outcome vectors (sensors split by ';')
std::vector<OutcomeVector> parse_outcome(const std::string& s) {
  std::vector<OutcomeVector> out;
  std::stringstream sensors(s);
  std::string group;
  while (std::getline(sensors, group, ';')) {
    OutcomeVector v;
    std::stringstream symbols(group);
    std::string tok;
    while (std::getline(symbols, tok, ',')) v.symbols.push_back(std::stoi(tok));
    out.push_back(std::move(v));
  }
  return out;
}

ParameterPoint to_point(const std::vector<double>& v) {
  ParameterPoint p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
  return p;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output file " + path);
  out << content;
}

SystemSpec load_or_exit(const std::string& path) {
  ParseOutcome outcome = parse_spec_file(path);
  if (!outcome.ok()) {
    std::cerr << "spec validation failed for " << path << ":\n";
    for (const auto& e : outcome.errors) std::cerr << "  - " << e << "\n";
    std::exit(1);
  }
  return std::move(*outcome.spec);
}

void print_verdict(const Verdict& v) {
  auto cell = [](const std::optional<long>& x) {
    return x ? std::to_string(*x) : std::string("-");
  };
  std::cout << "quantity            value   condition\n";
  std::cout << "lambda              " << v.lambda << "       D_theta > lambda triggers T1/T2\n";
  std::cout << "lambda_ISM          " << cell(v.lambda_ism)
            << "       D_theta > lambda_ISM triggers T3 (A4)\n";
  std::cout << "lambda_Indep        " << cell(v.lambda_indep)
            << "       D_theta > lambda_Indep triggers T4 (A5)\n";
  std::cout << "lambda_Indep_ISM    " << cell(v.lambda_indep_ism)
            << "       D_theta > lambda_Indep_ISM triggers T5 (A6)\n";
  std::cout << "D_theta             " << v.d_theta << "\n";
  std::cout << "triggered theorems: ";
  if (v.triggered.empty()) {
    std::cout << "none";
  } else {
    bool first = true;
    for (auto t : v.triggered) {
      std::cout << (first ? "" : ", ") << theorem_name(t);
      first = false;
    }
  }
  std::cout << "\n";
}

struct Example1Shape {
  double a = 0.0, b = 0.0;
};

// Recognizes the one-sensor scalar mean/variance system with a binary
// interval-plus-complement quantizer and extracts its interval.
std::optional<Example1Shape> example1_shape(const SystemSpec& spec) {
  if (spec.n_sensors() != 1 || spec.d_theta != 2) return std::nullopt;
  const Sensor& s = spec.sensors[0];
  if (!std::holds_alternative<ScalarGaussianMeanVar>(s.model.variant())) return std::nullopt;
  if (s.quantizer.size() != 1) return std::nullopt;
  const VectorQuantizer& q = s.quantizer.quantizers[0];
  if (q.levels() != 2 || !q.complement_index()) return std::nullopt;
  const QuantizerCell& cell = q.cells[1 - *q.complement_index()];
  if (cell.rects.size() != 1) return std::nullopt;
  return Example1Shape{cell.rects[0][0].lo, cell.rects[0][0].hi};
}

bool example2_shape(const SystemSpec& spec) {
  if (spec.n_sensors() != 1 || spec.d_theta != 2) return false;
  const Sensor& s = spec.sensors[0];
  const auto* iso = std::get_if<IsotropicGaussianMeanVector>(&s.model.variant());
  if (!iso || iso->dim != 2 || s.quantizer.size() != 1) return false;
  const VectorQuantizer& q = s.quantizer.quantizers[0];
  return q.levels() == 2 && q.complement_index().has_value();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Dimension limits and identifiability diagnostics for quantized estimation systems"};
  app.require_subcommand(1);

  std::string spec_path, out_path, theta_csv, outcome_str, grid_str, rhos_str, outdir = ".";
  int dtheta_override = 0;
  double tol = 1e-10;
  long n_snapshots = 10000;
  int n_seeds = 20;

  auto* cmd_idqd = app.add_subcommand("idqd", "Dimension limits and triggered theorems");
  cmd_idqd->add_option("spec", spec_path, "system spec JSON")->required();
  cmd_idqd->add_option("--dtheta", dtheta_override, "parameter dimension override");
  cmd_idqd->add_option("--out", out_path, "write the verdict as JSON");

  auto* cmd_fim = app.add_subcommand("fim", "Fisher information report at a parameter point");
  cmd_fim->add_option("spec", spec_path)->required();
  cmd_fim->add_option("--theta", theta_csv, "comma-separated theta")->required();
  cmd_fim->add_option("--out", out_path, "write the report as JSON");

  auto* cmd_level = app.add_subcommand("levelset", "Outcome-probability grid for contour plots");
  cmd_level->add_option("spec", spec_path)->required();
  cmd_level->add_option("--outcome", outcome_str, "per-sensor outcome, e.g. \"1\" or \"1,2;1\"")
      ->required();
  cmd_level->add_option("--grid", grid_str, "lo:hi:n,lo:hi:n")->required();
  cmd_level->add_option("--out", out_path, "output CSV path")->required();

  auto* cmd_trace = app.add_subcommand("equiv-trace", "Equivalence curve for the scalar example");
  cmd_trace->add_option("spec", spec_path, "must be an interval-quantizer scalar system")
      ->required();
  cmd_trace->add_option("--theta0", theta_csv, "alpha0,beta0")->required();
  cmd_trace->add_option("--rhos", rhos_str, "lo:hi:count in (0,1)")->required();
  cmd_trace->add_option("--out", out_path, "output CSV path")->required();

  auto* cmd_scan = app.add_subcommand("scan", "Observationally-equivalent pairs on a grid");
  cmd_scan->add_option("spec", spec_path)->required();
  cmd_scan->add_option("--grid", grid_str, "lo:hi:n,lo:hi:n")->required();
  cmd_scan->add_option("--tol", tol, "sup-norm equivalence tolerance");
  cmd_scan->add_option("--out", out_path, "output CSV path")->required();

  auto* cmd_sim = app.add_subcommand("simulate", "Degeneracy study: sample, fit, compare maximizers");
  cmd_sim->add_option("spec", spec_path)->required();
  cmd_sim->add_option("--theta", theta_csv, "true parameter")->required();
  cmd_sim->add_option("--n", n_snapshots, "snapshots per seed");
  cmd_sim->add_option("--seeds", n_seeds, "number of seeds");
  cmd_sim->add_option("--out", out_path, "study CSV path")->required();
  std::string fits_path;
  cmd_sim->add_option("--emit-fits", fits_path, "also write per-seed fit results as JSON");

  auto* cmd_fig = app.add_subcommand("figures", "Regenerate the contour grids of the two examples");
  cmd_fig->add_option("spec", spec_path)->required();
  cmd_fig->add_option("--outdir", outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (cmd_idqd->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    Verdict v = verdict(spec, dtheta_override > 0 ? dtheta_override : spec.d_theta);
    print_verdict(v);
    if (!out_path.empty()) write_text_file(out_path, verdict_to_json(v).dump(2) + "\n");
    return 0;
  }

  if (cmd_fim->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    FisherReport report = fim(spec, to_point(parse_doubles(theta_csv)));
    std::string text = fisher_report_to_json(report).dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      write_text_file(out_path, text);
      std::cout << "rank " << report.numerical_rank << "/" << report.matrix.rows()
                << (report.singular_verdict ? " (singular)" : " (nonsingular)") << ", report at "
                << out_path << "\n";
    }
    return 0;
  }

  if (cmd_level->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    auto [axis1, axis2] = parse_grid(grid_str);
    auto rows = level_set_grid(spec, parse_outcome(outcome_str), axis1, axis2);
    std::ostringstream oss;
    write_level_set_csv(oss, rows);
    write_text_file(out_path, oss.str());
    std::cout << rows.size() << " grid rows written to " << out_path << "\n";
    return 0;
  }

  if (cmd_trace->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    auto shape = example1_shape(spec);
    if (!shape) {
      throw ValidationError(
          "equiv-trace requires a one-sensor scalar mean/variance spec with a binary interval "
          "quantizer");
    }
    auto theta0 = parse_doubles(theta_csv);
    if (theta0.size() != 2) throw ValidationError("--theta0 must be alpha0,beta0");
    EquivalenceTrace trace =
        trace_example1(theta0[0], theta0[1], parse_linspace(rhos_str), shape->a, shape->b);
    std::ostringstream oss;
    write_trace_csv(oss, trace);
    write_text_file(out_path, oss.str());
    std::cout << trace.samples.size() << " equivalent points written to " << out_path << "\n";
    return 0;
  }

  if (cmd_scan->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    std::vector<ParameterPoint> grid = parse_point_grid(grid_str, spec.d_theta);
    auto pairs = injectivity_scan(spec, grid, tol);
    std::ostringstream oss;
    write_scan_csv(oss, grid, pairs);
    write_text_file(out_path, oss.str());
    std::cout << pairs.size() << " equivalent pairs written to " << out_path << "\n";
    return 0;
  }

  if (cmd_sim->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    ParameterPoint theta = to_point(parse_doubles(theta_csv));
    Rect box(spec.d_theta);
    for (int i = 0; i < spec.d_theta; ++i) {
      // default study box: the parameter space clipped to a finite window
      box[i].lo = std::max(spec.space.bounds[i].lo, -6.0);
      box[i].hi = std::min(spec.space.bounds[i].hi, i == 1 ? 10.0 : 6.0);
    }
    std::vector<std::uint64_t> seeds(n_seeds);
    for (int i = 0; i < n_seeds; ++i) seeds[i] = combine_keys(spec.seed, i);
    StudySummary study = degeneracy_study(spec, theta, n_snapshots, seeds, box);
    std::ostringstream oss;
    write_study_csv(oss, study);
    write_text_file(out_path, oss.str());
    std::cout << "median spread_diameter " << format_g17(study.median_spread) << " over "
              << n_seeds << " seeds, study at " << out_path << "\n";
    if (!fits_path.empty()) {
      nlohmann::json fits = nlohmann::json::array();
      for (int i = 0; i < n_seeds; ++i) {
        QuantizedDataset data = sample(spec, theta, n_snapshots, seeds[i]);
        fits.push_back(fit_result_to_json(fit(spec, data, box)));
      }
      write_text_file(fits_path, fits.dump(2) + "\n");
    }
    return 0;
  }

  if (cmd_fig->parsed()) {
    SystemSpec spec = load_or_exit(spec_path);
    std::vector<OutcomeVector> outcome{OutcomeVector{{1}}};
    if (auto shape = example1_shape(spec)) {
      std::vector<double> alpha = parse_linspace("-6:6:121");
      std::vector<double> beta = parse_linspace("0.1:10:100");
      auto rows = level_set_grid(spec, outcome, alpha, beta);
      std::ostringstream oss;
      write_level_set_csv(oss, rows);
      write_text_file(outdir + "/example1_surface.csv", oss.str());
      write_text_file(outdir + "/example1_contour.csv", oss.str());
      std::cout << "wrote example1_surface.csv and example1_contour.csv under " << outdir << "\n";
      return 0;
    }
    if (example2_shape(spec)) {
      std::vector<double> axis = parse_linspace("-6:6:121");
      auto rows = level_set_grid(spec, outcome, axis, axis);
      std::ostringstream oss;
      write_level_set_csv(oss, rows);
      write_text_file(outdir + "/example2_surface.csv", oss.str());
      write_text_file(outdir + "/example2_contour.csv", oss.str());
      std::cout << "wrote example2_surface.csv and example2_contour.csv under " << outdir << "\n";
      return 0;
    }
    throw ValidationError("figures: spec matches neither shipped example shape");
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
