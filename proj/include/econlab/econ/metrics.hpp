#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/econ/types.hpp"

namespace econlab::econ {

/// Gini coefficient as sum_i sum_j |x_i - x_j| / (2 n^2 mean), no small-sample correction.
/// All-zero input yields 0. Throws std::invalid_argument on empty or negative input.
double gini(std::span<const double> values);

MetricFrame compute_metrics(const EconomyState& state);

/// Metric names in catalogue order, matching the MetricFrame fields.
const std::vector<std::string>& metric_names();

/// Value of the named metric as a double (money metrics in cents).
double metric_value(const MetricFrame& frame, std::string_view name);

nlohmann::json to_json(const MetricFrame& frame);

}  // namespace econlab::econ
