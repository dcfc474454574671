#pragma once

#include <stdexcept>
#include <string>

#include "aerocell/deployment.hpp"

namespace aerocell::deployment {

// Scenario/config schema violation; the message names the offending key.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parses the scenario JSON document (top-level keys: platforms,
// ground_cells, ues, sensors, channels, backhaul, dsa_policy, defaults).
// Unknown keys and type mismatches raise SchemaError naming the key.
Scenario load_scenario_json(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

}  // namespace aerocell::deployment
