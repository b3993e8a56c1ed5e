#include "quantlim/spec_json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "quantlim/errors.hpp"

namespace quantlim {

namespace {

using nlohmann::json;

// Collects violations with JSON-pointer-ish locations instead of failing on
// the first problem; a config author gets the whole list at once.
struct Parser {
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) {
    errors.push_back(path + ": " + message);
  }

  bool require_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  bool require_array(const json& j, const std::string& path) {
    if (j.is_array()) return true;
    fail(path, "expected an array");
    return false;
  }

  const json* get(const json& obj, const char* key, const std::string& path, bool required) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) fail(path, std::string("missing required field '") + key + "'");
      return nullptr;
    }
    return &obj.at(key);
  }

  int get_int(const json& obj, const char* key, const std::string& path, int fallback,
              bool required) {
    const json* j = get(obj, key, path, required);
    if (!j) return fallback;
    if (!j->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return fallback;
    }
    return j->get<int>();
  }

  // Endpoint values: a finite number, or the strings "inf" / "-inf".
  double parse_endpoint(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
    }
    fail(path, "expected a number or \"inf\"/\"-inf\"");
    return 0.0;
  }

  Interval parse_interval_pair(const json& j, const std::string& path) {
    Interval iv;
    if (!require_array(j, path) || j.size() != 2) {
      fail(path, "expected [lo, hi]");
      return iv;
    }
    iv.lo = parse_endpoint(j[0], path + "[0]");
    iv.hi = parse_endpoint(j[1], path + "[1]");
    return iv;
  }

  Rect parse_rect(const json& j, const std::string& path) {
    Rect rect;
    if (!require_array(j, path)) return rect;
    for (std::size_t k = 0; k < j.size(); ++k) {
      rect.push_back(parse_interval_pair(j[k], path + "[" + std::to_string(k) + "]"));
    }
    return rect;
  }

  Eigen::MatrixXd parse_matrix(const json& j, const std::string& path) {
    if (!require_array(j, path) || j.empty()) {
      fail(path, "expected a nonempty array of rows");
      return Eigen::MatrixXd();
    }
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_array() || j[i].size() != cols || cols == 0) {
        fail(path, "rows must be equal-length nonempty arrays");
        return Eigen::MatrixXd();
      }
      for (std::size_t k = 0; k < cols; ++k) {
        if (!j[i][k].is_number()) {
          fail(path, "matrix entries must be numbers");
          return Eigen::MatrixXd();
        }
        m(i, k) = j[i][k].get<double>();
      }
    }
    return m;
  }

  ObservationModel parse_model(const json& j, const std::string& path) {
    if (!require_object(j, path)) return ObservationModel{};
    const json* kind = get(j, "kind", path, true);
    if (!kind || !kind->is_string()) {
      fail(path + ".kind", "expected a string");
      return ObservationModel{};
    }
    const std::string k = kind->get<std::string>();
    if (k == "scalar_gaussian_mean_var") {
      ScalarGaussianMeanVar m;
      m.theta_offset = get_int(j, "theta_offset", path, 0, false);
      return ObservationModel{m};
    }
    if (k == "isotropic_gaussian_mean_vector") {
      IsotropicGaussianMeanVector m;
      m.dim = get_int(j, "dim", path, 1, true);
      m.theta_offset = get_int(j, "theta_offset", path, 0, false);
      if (m.dim < 1) fail(path + ".dim", "must be >= 1");
      return ObservationModel{m};
    }
    if (k == "gaussian_linear") {
      GaussianLinear m;
      if (const json* h = get(j, "design", path, true)) m.design = parse_matrix(*h, path + ".design");
      if (const json* c = get(j, "cov", path, true)) m.cov = parse_matrix(*c, path + ".cov");
      if (m.cov.rows() != m.cov.cols() || m.cov.rows() != m.design.rows()) {
        fail(path, "cov must be square with the same row count as design");
      }
      return ObservationModel{m};
    }
    fail(path + ".kind", "unknown model kind '" + k + "'");
    return ObservationModel{};
  }

  VectorQuantizer parse_quantizer(const json& j, const std::string& path) {
    VectorQuantizer q;
    if (!require_object(j, path)) return q;
    q.dim_in = get_int(j, "dim", path, 1, true);
    const json* cells = get(j, "cells", path, true);
    if (!cells || !require_array(*cells, path + ".cells")) return q;
    if (cells->empty()) {
      fail(path + ".cells", "levels must be >= 1 (cells array is empty)");
      return q;
    }
    for (std::size_t r = 0; r < cells->size(); ++r) {
      const std::string cpath = path + ".cells[" + std::to_string(r) + "]";
      QuantizerCell cell;
      if (!require_object((*cells)[r], cpath)) continue;
      const json& cj = (*cells)[r];
      if (cj.contains("complement") && cj["complement"].is_boolean() &&
          cj["complement"].get<bool>()) {
        cell.is_complement = true;
      } else if (const json* rects = get(cj, "rects", cpath, true)) {
        if (require_array(*rects, cpath + ".rects")) {
          for (std::size_t i = 0; i < rects->size(); ++i) {
            cell.rects.push_back(
                parse_rect((*rects)[i], cpath + ".rects[" + std::to_string(i) + "]"));
          }
        }
      }
      q.cells.push_back(std::move(cell));
    }
    return q;
  }

  GroupingIsm parse_grouping_ism(const json& j, const std::string& path) {
    GroupingIsm g;
    if (!require_array(j, path)) return g;
    for (std::size_t p = 0; p < j.size(); ++p) {
      std::vector<std::vector<int>> group;
      const std::string gpath = path + "[" + std::to_string(p) + "]";
      if (!require_array(j[p], gpath)) continue;
      for (std::size_t m = 0; m < j[p].size(); ++m) {
        std::vector<int> subgroup;
        const std::string spath = gpath + "[" + std::to_string(m) + "]";
        if (!require_array(j[p][m], spath)) continue;
        for (const auto& e : j[p][m]) {
          if (!e.is_number_integer()) {
            fail(spath, "sensor indices must be integers");
            continue;
          }
          subgroup.push_back(e.get<int>());
        }
        group.push_back(std::move(subgroup));
      }
      g.groups.push_back(std::move(group));
    }
    return g;
  }

  GroupingIndepIsm parse_grouping_indep(const json& j, const std::string& path) {
    GroupingIndepIsm g;
    if (!require_array(j, path)) return g;
    for (std::size_t w = 0; w < j.size(); ++w) {
      std::vector<std::vector<SubvectorRef>> group;
      const std::string gpath = path + "[" + std::to_string(w) + "]";
      if (!require_array(j[w], gpath)) continue;
      for (std::size_t t = 0; t < j[w].size(); ++t) {
        std::vector<SubvectorRef> subgroup;
        const std::string spath = gpath + "[" + std::to_string(t) + "]";
        if (!require_array(j[w][t], spath)) continue;
        for (const auto& e : j[w][t]) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
              !e[1].is_number_integer()) {
            fail(spath, "subvector references must be [sensor, slot] integer pairs");
            continue;
          }
          subgroup.push_back(SubvectorRef{e[0].get<int>(), e[1].get<int>()});
        }
        group.push_back(std::move(subgroup));
      }
      g.groups.push_back(std::move(group));
    }
    return g;
  }

  SystemSpec parse(const json& doc) {
    SystemSpec spec;
    if (!require_object(doc, "$")) return spec;

    const json* schema = get(doc, "schema", "$", true);
    if (schema && (!schema->is_string() || schema->get<std::string>() != kSpecSchemaId)) {
      fail("$.schema", std::string("expected \"") + kSpecSchemaId + "\"");
    }

    spec.d_theta = get_int(doc, "d_theta", "$", 0, true);

    if (const json* ps = get(doc, "parameter_space", "$", true)) {
      if (require_object(*ps, "$.parameter_space")) {
        if (const json* bounds = get(*ps, "bounds", "$.parameter_space", true)) {
          if (require_array(*bounds, "$.parameter_space.bounds")) {
            for (std::size_t i = 0; i < bounds->size(); ++i) {
              const std::string bpath = "$.parameter_space.bounds[" + std::to_string(i) + "]";
              if (!require_object((*bounds)[i], bpath)) continue;
              Interval iv;
              if (const json* lo = get((*bounds)[i], "lower", bpath, true)) {
                iv.lo = parse_endpoint(*lo, bpath + ".lower");
              }
              if (const json* hi = get((*bounds)[i], "upper", bpath, true)) {
                iv.hi = parse_endpoint(*hi, bpath + ".upper");
              }
              spec.space.bounds.push_back(iv);
            }
          }
        }
        if (const json* open = get(*ps, "open_coords", "$.parameter_space", false)) {
          if (require_array(*open, "$.parameter_space.open_coords")) {
            for (const auto& e : *open) {
              if (e.is_number_integer()) {
                spec.space.open_coords.push_back(e.get<int>());
              } else {
                fail("$.parameter_space.open_coords", "entries must be integers");
              }
            }
          }
        }
      }
      spec.space.dim = static_cast<int>(spec.space.bounds.size());
    }

    if (const json* as = get(doc, "assumptions", "$", false)) {
      if (require_array(*as, "$.assumptions")) {
        for (const auto& e : *as) {
          if (!e.is_string()) {
            fail("$.assumptions", "entries must be strings A1..A6");
            continue;
          }
          try {
            spec.assumptions.insert(assumption_from_name(e.get<std::string>()));
          } catch (const ValidationError& err) {
            fail("$.assumptions", err.what());
          }
        }
      }
    }

    if (const json* sensors = get(doc, "sensors", "$", true)) {
      if (require_array(*sensors, "$.sensors")) {
        for (std::size_t jx = 0; jx < sensors->size(); ++jx) {
          const std::string spath = "$.sensors[" + std::to_string(jx) + "]";
          Sensor sensor;
          if (!require_object((*sensors)[jx], spath)) continue;
          if (const json* model = get((*sensors)[jx], "model", spath, true)) {
            sensor.model = parse_model(*model, spath + ".model");
          }
          if (const json* quants = get((*sensors)[jx], "quantizers", spath, true)) {
            if (require_array(*quants, spath + ".quantizers")) {
              for (std::size_t l = 0; l < quants->size(); ++l) {
                sensor.quantizer.quantizers.push_back(parse_quantizer(
                    (*quants)[l], spath + ".quantizers[" + std::to_string(l) + "]"));
              }
            }
          }
          spec.sensors.push_back(std::move(sensor));
        }
      }
    }

    if (const json* gr = get(doc, "groupings", "$", false)) {
      if (require_object(*gr, "$.groupings")) {
        if (const json* ism = get(*gr, "ism", "$.groupings", false)) {
          spec.ism = parse_grouping_ism(*ism, "$.groupings.ism");
        }
        if (const json* indep = get(*gr, "indep_ism", "$.groupings", false)) {
          spec.indep_ism = parse_grouping_indep(*indep, "$.groupings.indep_ism");
        }
      }
    }

    if (const json* seed = get(doc, "seed", "$", false)) {
      if (seed->is_number_unsigned()) {
        spec.seed = seed->get<std::uint64_t>();
      } else if (seed->is_number_integer() && seed->get<std::int64_t>() >= 0) {
        spec.seed = static_cast<std::uint64_t>(seed->get<std::int64_t>());
      } else {
        fail("$.seed", "expected a nonnegative integer");
      }
    }
    if (const json* mc = get(doc, "monte_carlo_samples", "$", false)) {
      if (mc->is_number_integer()) {
        spec.mc_samples = mc->get<int>();
        if (*spec.mc_samples < 1) fail("$.monte_carlo_samples", "must be >= 1");
      } else {
        fail("$.monte_carlo_samples", "expected an integer");
      }
    }
    return spec;
  }
};

json endpoint_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

json rect_to_json(const Rect& rect) {
  json axes = json::array();
  for (const auto& iv : rect) {
    axes.push_back(json::array({endpoint_to_json(iv.lo), endpoint_to_json(iv.hi)}));
  }
  return axes;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ParseOutcome parse_spec_json(const nlohmann::json& doc) {
  Parser parser;
  SystemSpec spec = parser.parse(doc);
  ParseOutcome out;
  out.errors = std::move(parser.errors);
  if (out.errors.empty()) {
    auto semantic = spec.collect_violations();
    out.errors.insert(out.errors.end(), semantic.begin(), semantic.end());
  }
  if (out.errors.empty()) out.spec = std::move(spec);
  return out;
}

ParseOutcome parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return ParseOutcome{std::nullopt, {path + ": cannot open file"}};
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    return ParseOutcome{std::nullopt, {path + ": JSON parse error: " + e.what()}};
  }
  return parse_spec_json(doc);
}

SystemSpec load_spec_file(const std::string& path) {
  ParseOutcome out = parse_spec_file(path);
  if (out.ok()) return std::move(*out.spec);
  std::ostringstream oss;
  oss << "invalid spec file " << path << " (" << out.errors.size() << " violation"
      << (out.errors.size() == 1 ? "" : "s") << "):";
  for (const auto& e : out.errors) oss << "\n  - " << e;
  throw ValidationError(oss.str());
}

nlohmann::json spec_to_json(const SystemSpec& spec) {
  json doc;
  doc["schema"] = kSpecSchemaId;
  doc["d_theta"] = spec.d_theta;

  json bounds = json::array();
  for (const auto& b : spec.space.bounds) {
    bounds.push_back({{"lower", endpoint_to_json(b.lo)}, {"upper", endpoint_to_json(b.hi)}});
  }
  doc["parameter_space"] = {{"bounds", std::move(bounds)}};
  if (!spec.space.open_coords.empty()) {
    doc["parameter_space"]["open_coords"] = spec.space.open_coords;
  }

  json assumptions = json::array();
  for (auto a : spec.assumptions) assumptions.push_back(assumption_name(a));
  doc["assumptions"] = std::move(assumptions);

  json sensors = json::array();
  for (const auto& s : spec.sensors) {
    json model;
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
            model = {{"kind", "scalar_gaussian_mean_var"}, {"theta_offset", m.theta_offset}};
          } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
            model = {{"kind", "isotropic_gaussian_mean_vector"},
                     {"dim", m.dim},
                     {"theta_offset", m.theta_offset}};
          } else {
            model = {{"kind", "gaussian_linear"},
                     {"design", matrix_to_json(m.design)},
                     {"cov", matrix_to_json(m.cov)}};
          }
        },
        s.model.variant());
    json quantizers = json::array();
    for (const auto& q : s.quantizer.quantizers) {
      json cells = json::array();
      for (const auto& cell : q.cells) {
        if (cell.is_complement) {
          cells.push_back({{"complement", true}});
        } else {
          json rects = json::array();
          for (const auto& r : cell.rects) rects.push_back(rect_to_json(r));
          cells.push_back({{"rects", std::move(rects)}});
        }
      }
      quantizers.push_back({{"dim", q.dim_in}, {"cells", std::move(cells)}});
    }
    sensors.push_back({{"model", std::move(model)}, {"quantizers", std::move(quantizers)}});
  }
  doc["sensors"] = std::move(sensors);

  if (spec.ism || spec.indep_ism) {
    json groupings;
    if (spec.ism) groupings["ism"] = spec.ism->groups;
    if (spec.indep_ism) {
      json groups = json::array();
      for (const auto& group : spec.indep_ism->groups) {
        json g = json::array();
        for (const auto& subgroup : group) {
          json sg = json::array();
          for (const auto& r : subgroup) sg.push_back(json::array({r.sensor, r.slot}));
          g.push_back(std::move(sg));
        }
        groups.push_back(std::move(g));
      }
      groupings["indep_ism"] = std::move(groups);
    }
    doc["groupings"] = std::move(groupings);
  }

  doc["seed"] = spec.seed;
  if (spec.mc_samples) doc["monte_carlo_samples"] = *spec.mc_samples;
  return doc;
}

bool specs_structurally_equal(const SystemSpec& a, const SystemSpec& b) {
  return spec_to_json(a) == spec_to_json(b);
}

}  // namespace quantlim
