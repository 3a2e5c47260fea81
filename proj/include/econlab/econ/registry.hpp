#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace econlab::econ {

using Json = nlohmann::json;

enum class ValueKind { boolean, fraction, money, count };

std::string to_string(ValueKind kind);

/// One tunable policy lever. Money levers are integer cents.
struct LeverSpec {
  std::string name;
  ValueKind kind = ValueKind::fraction;
  double min = 0.0;
  double max = 1.0;
  bool max_exclusive = false;
  Json default_value;
  std::string description;
};

/// How a metric series collapses to one number per run.
enum class Aggregation { cumulative, final, mean };

std::string to_string(Aggregation agg);

struct MetricSpec {
  std::string name;
  Aggregation aggregation = Aggregation::final;
  std::string description;
};

/// Lever assignments keyed by lever name.
using LeverValues = std::map<std::string, Json>;

/// The capability boundary: which levers may be set and which metrics can be observed.
class ParameterRegistry {
 public:
  ParameterRegistry() = default;
  ParameterRegistry(std::vector<LeverSpec> levers, std::vector<MetricSpec> metrics);

  const std::vector<LeverSpec>& levers() const noexcept { return levers_; }
  const std::vector<MetricSpec>& metrics() const noexcept { return metrics_; }

  const LeverSpec* find_lever(std::string_view name) const noexcept;
  const MetricSpec* find_metric(std::string_view name) const noexcept;
  bool has_lever(std::string_view name) const noexcept { return find_lever(name) != nullptr; }
  bool has_metric(std::string_view name) const noexcept { return find_metric(name) != nullptr; }

  /// Returns an error message when `value` is not a legal value for the lever, naming the
  /// lever and its range; std::nullopt when it is legal.
  std::optional<std::string> check_value(const LeverSpec& lever, const Json& value) const;

  /// Canonical JSON form of a legal value: fractions as doubles, money/count as integers.
  static Json normalize(const LeverSpec& lever, const Json& value);

  LeverValues defaults() const;

  /// Fills unassigned levers with defaults and validates everything. Throws ValidationError
  /// naming each unknown or out-of-range lever.
  LeverValues resolve(const LeverValues& overrides) const;

  Json to_json() const;

 private:
  std::vector<LeverSpec> levers_;
  std::vector<MetricSpec> metrics_;
};

/// The simulator's built-in registry.
const ParameterRegistry& default_registry();

}  // namespace econlab::econ
