#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/behavior/decision.hpp"
#include "econlab/econ/config.hpp"
#include "econlab/econ/types.hpp"

namespace econlab::econ {

/// Builds the tick-0 world from a seeded synthetic population. Throws ValidationError on
/// bad population sizes, unknown levers, or out-of-range lever values.
EconomyState init_economy(const SimConfig& config, std::uint64_t seed);
inline EconomyState init_economy(const SimConfig& config) { return init_economy(config, config.seed); }

/// Sum of household cash, firm cash, government balance and bank reserves.
Money total_money(const EconomyState& state) noexcept;

/// Household id -> deposits, as held by the bank.
std::map<AgentId, Money> deposit_ledger(const EconomyState& state);

struct TickReport {
  std::int64_t tick = 0;  // the tick that was completed (state.tick after the step)
  std::vector<MoneyEvent> events;
  MetricFrame metrics;
  std::vector<behavior::BehaviorNote> notes;
};

/// Advances one month. Phase order:
///  1 firms set prices/wages and post vacancies, 2 labor matching, 3 production, 4 wages and dividends,
///  5 government (tax, transfers, innovation subsidy + productivity growth), 6 bank interest,
///  7 product market (with deposit top-up before and savings sweep after), 8 metrics.
TickReport step_month(EconomyState& state, behavior::DecisionProvider& provider);
TickReport step_month(EconomyState& state);

struct SimulationResult {
  SimConfig config;
  std::vector<MetricFrame> series;
  EconomyState final_state;
  std::vector<behavior::BehaviorNote> notes;
};

using ProgressCallback = std::function<void(std::int64_t done, std::int64_t total)>;

/// Runs `horizon` months. Throws ValidationError when horizon < 1 or init fails.
SimulationResult run(const SimConfig& config, std::uint64_t seed, int horizon, behavior::DecisionProvider& provider,
                     const ProgressCallback& progress = {});
SimulationResult run(const SimConfig& config, std::uint64_t seed, int horizon);

nlohmann::json to_json(const MoneyEvent& event);
nlohmann::json to_json(const EconomyState& state);

/// Metric series keyed by metric name, each an array over ticks.
nlohmann::json metric_series_json(const std::vector<MetricFrame>& series);

/// Export form: {config, seed, horizon, metrics: {name: [...]}, ledger: [...]}.
nlohmann::json to_json(const SimulationResult& result);

}  // namespace econlab::econ
