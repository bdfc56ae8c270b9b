#pragma once

#include <string>

#include <json.hpp>

#include "credence/core.hpp"

namespace credence {

// Strict reader: all ten primitive keys required, optional extension keys,
// anything else is a Schema error naming the key.
ModelParams params_from_json(const nlohmann::json& j);
ModelParams params_from_file(const std::string& path);
nlohmann::json params_to_json(const ModelParams& p);

// Reads or writes a named numeric field (primitives and knobs). Used by
// sweeps and finite differences.
bool has_numeric_field(const std::string& name);
double get_field(const ModelParams& p, const std::string& name);
void set_field(ModelParams& p, const std::string& name, double v);

}  // namespace credence
