#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quantlim/system_spec.hpp"

namespace quantlim {

// Inestimable dimension for quantized data: sum over sensors of the alphabet
// size, minus the number of sensors. Depends only on (N, {R_jl}).
long idqd(const SystemSpec& spec);

// Refinement under shared sensor models / shared superquantizers: one
// (alphabet - 1) term per subgroup instead of per sensor.
long ridqd_ism(const SystemSpec& spec, const GroupingIsm& grouping);

// Refinement under independent observation subvectors: each subvector counts
// as its own effective sensor. Requires assumption A5 to be declared.
long ridqd_indep(const SystemSpec& spec);

// Combined refinement: one (levels - 1) term per subvector subgroup.
// Requires assumption A6 to be declared.
long ridqd_indep_ism(const SystemSpec& spec, const GroupingIndepIsm& grouping);

enum class Theorem { T1 = 1, T2, T3, T4, T5 };

std::string theorem_name(Theorem t);

struct Verdict {
  int d_theta = 0;
  long lambda = 0;
  std::optional<long> lambda_ism;
  std::optional<long> lambda_indep;
  std::optional<long> lambda_indep_ism;
  std::set<Theorem> triggered;
  std::set<Assumption> assumptions_declared;
};

// Evaluates which singularity/nonidentifiability theorems fire for the given
// parameter dimension. A theorem is listed only when its assumptions are
// declared in the spec and its strict dimension condition holds.
Verdict verdict(const SystemSpec& spec, int d_theta);

nlohmann::json verdict_to_json(const Verdict& v);

}  // namespace quantlim
