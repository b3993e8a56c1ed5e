#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "quantlim/system_spec.hpp"

namespace quantlim {

inline constexpr const char* kSpecSchemaId = "quantlim-spec-v1";

struct ParseOutcome {
  std::optional<SystemSpec> spec;
  std::vector<std::string> errors;  // schema/semantic violations with locations

  bool ok() const { return spec.has_value() && errors.empty(); }
};

ParseOutcome parse_spec_json(const nlohmann::json& doc);
ParseOutcome parse_spec_file(const std::string& path);

// Throws ValidationError listing every violation.
SystemSpec load_spec_file(const std::string& path);

// Canonical emission; parsing the result reproduces a structurally identical
// spec. Infinite endpoints are encoded as the strings "inf" / "-inf".
nlohmann::json spec_to_json(const SystemSpec& spec);

bool specs_structurally_equal(const SystemSpec& a, const SystemSpec& b);

}  // namespace quantlim
