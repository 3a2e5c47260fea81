#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "econlab/econ/registry.hpp"

namespace econlab::econ {

/// A complete simulation configuration. `levers` always holds every registry lever once
/// the config has been through parse_config() or make_config().
struct SimConfig {
  LeverValues levers;
  int n_households = 5;
  int n_firms = 2;
  int n_goods = 2;
  int skill_dims = 2;
  int horizon = 24;
  std::uint64_t seed = 1;
};

/// A config with all levers at their defaults.
SimConfig make_config(const ParameterRegistry& registry = default_registry());

/// Parses the config-file JSON object. Missing keys take defaults; unknown keys, unknown
/// levers and out-of-range values are rejected with a ValidationError naming each field.
SimConfig parse_config(const Json& object, const ParameterRegistry& registry = default_registry());

/// Checks population sizes and every lever value. Throws ValidationError.
void validate_config(const SimConfig& config, const ParameterRegistry& registry = default_registry());

Json to_json(const SimConfig& config);

}  // namespace econlab::econ
