#include "quantlim/idqd.hpp"

#include <sstream>

#include "quantlim/errors.hpp"

namespace quantlim {

namespace {

void require_valid_grouping(const std::vector<std::string>& violations) {
  if (violations.empty()) return;
  std::ostringstream oss;
  oss << "grouping inconsistent with spec:";
  for (const auto& v : violations) oss << "\n  - " << v;
  throw ValidationError(oss.str());
}

}  // namespace

long idqd(const SystemSpec& spec) {
  long total = 0;
  for (const auto& s : spec.sensors) total += s.quantizer.alphabet_size();
  return total - spec.n_sensors();
}

long ridqd_ism(const SystemSpec& spec, const GroupingIsm& grouping) {
  require_valid_grouping(check_grouping_ism(spec, grouping));
  long total = 0;
  for (const auto& group : grouping.groups) {
    for (const auto& subgroup : group) {
      total += spec.sensors[subgroup.front()].quantizer.alphabet_size() - 1;
    }
  }
  return total;
}

long ridqd_indep(const SystemSpec& spec) {
  if (!spec.declares(Assumption::A5)) {
    throw ValidationError("ridqd_indep requires assumption A5 (independent subvectors)");
  }
  long levels = 0, slots = 0;
  for (const auto& s : spec.sensors) {
    for (const auto& q : s.quantizer.quantizers) {
      levels += q.levels();
      ++slots;
    }
  }
  return levels - slots;
}

long ridqd_indep_ism(const SystemSpec& spec, const GroupingIndepIsm& grouping) {
  if (!spec.declares(Assumption::A6)) {
    throw ValidationError("ridqd_indep_ism requires assumption A6");
  }
  require_valid_grouping(check_grouping_indep_ism(spec, grouping));
  long total = 0;
  for (const auto& group : grouping.groups) {
    for (const auto& subgroup : group) {
      const auto& ref = subgroup.front();
      total += spec.sensors[ref.sensor].quantizer.quantizers[ref.slot].levels() - 1;
    }
  }
  return total;
}

std::string theorem_name(Theorem t) { return "T" + std::to_string(static_cast<int>(t)); }

Verdict verdict(const SystemSpec& spec, int d_theta) {
  Verdict v;
  v.d_theta = d_theta;
  v.lambda = idqd(spec);
  v.assumptions_declared = spec.assumptions;

  const bool a1 = spec.declares(Assumption::A1);
  const bool a2 = spec.declares(Assumption::A2);
  const bool a3 = spec.declares(Assumption::A3);
  const bool regular = a2 || a3;

  if (spec.ism) v.lambda_ism = ridqd_ism(spec, *spec.ism);
  if (spec.declares(Assumption::A5)) v.lambda_indep = ridqd_indep(spec);
  if (spec.indep_ism && spec.declares(Assumption::A6)) {
    v.lambda_indep_ism = ridqd_indep_ism(spec, *spec.indep_ism);
  }

  if (a1 && a2 && d_theta > v.lambda) v.triggered.insert(Theorem::T1);
  if (a1 && a3 && d_theta > v.lambda) v.triggered.insert(Theorem::T2);
  if (a1 && regular && spec.declares(Assumption::A4) && v.lambda_ism &&
      d_theta > *v.lambda_ism) {
    v.triggered.insert(Theorem::T3);
  }
  if (a1 && regular && v.lambda_indep && d_theta > *v.lambda_indep) {
    v.triggered.insert(Theorem::T4);
  }
  if (a1 && regular && v.lambda_indep_ism && d_theta > *v.lambda_indep_ism) {
    v.triggered.insert(Theorem::T5);
  }
  return v;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json assumptions = nlohmann::json::array();
  for (auto a : v.assumptions_declared) assumptions.push_back(assumption_name(a));
  nlohmann::json triggered = nlohmann::json::array();
  for (auto t : v.triggered) triggered.push_back(theorem_name(t));
  nlohmann::json out{{"d_theta", v.d_theta},
                     {"lambda", v.lambda},
                     {"assumptions", std::move(assumptions)},
                     {"triggered_theorems", std::move(triggered)}};
  out["lambda_ism"] = v.lambda_ism ? nlohmann::json(*v.lambda_ism) : nlohmann::json();
  out["lambda_indep"] = v.lambda_indep ? nlohmann::json(*v.lambda_indep) : nlohmann::json();
  out["lambda_indep_ism"] =
      v.lambda_indep_ism ? nlohmann::json(*v.lambda_indep_ism) : nlohmann::json();
  return out;
}

}  // namespace quantlim
