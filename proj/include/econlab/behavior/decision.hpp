#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/econ/types.hpp"

namespace econlab::behavior {

using econ::AgentId;
using econ::Money;

enum class AgentKind { household, firm };

std::string to_string(AgentKind kind);

struct HouseholdSnapshot {
  AgentId id = 0;
  Money cash = 0;
  Money deposits = 0;
  bool employed = false;
  Money wage = 0;
  Money last_income = 0;
  Money last_consumption = 0;
};

struct FirmSnapshot {
  AgentId id = 0;
  AgentId good_id = 0;
  Money price = 1;
  std::int64_t inventory = 0;
  Money cash = 0;
  double productivity = 1.0;
  Money wage_offer = 0;
  std::uint32_t target_slots = 0;
  std::uint32_t employees = 0;
  std::uint32_t last_unfilled = 0;
  std::uint32_t filled_streak = 0;
};

struct MarketSignals {
  Money price_level = 0;
  double unemployment_rate = 0.0;
  std::int64_t last_sales = 0;  // firms only
};

/// Everything a provider may see about one agent. Holds no RNG state.
struct DecisionContext {
  std::variant<HouseholdSnapshot, FirmSnapshot> agent;
  MarketSignals market;

  AgentKind kind() const noexcept {
    return std::holds_alternative<HouseholdSnapshot>(agent) ? AgentKind::household : AgentKind::firm;
  }
};

nlohmann::json to_json(const DecisionContext& ctx);

inline constexpr double kPropensityMin = 0.3;
inline constexpr double kPropensityMax = 0.95;
inline constexpr double kMultiplierMin = 0.5;
inline constexpr double kMultiplierMax = 2.0;

struct Decision {
  AgentKind kind = AgentKind::household;
  double consumption_propensity = kPropensityMax;
  double wage_offer_multiplier = 1.0;
  double price_multiplier = 1.0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// A structured log line emitted while deciding (fallbacks, clamp warnings).
struct BehaviorNote {
  std::string level;     // info | warn | error
  std::string category;  // fallback | clamp | transport
  std::string message;
};

/// Source of per-tick agent decisions. One instance serves one run; runs never share one.
class DecisionProvider {
 public:
  virtual ~DecisionProvider() = default;
  virtual Decision decide(const DecisionContext& ctx) = 0;

  /// Returns and clears notes accumulated since the last call.
  virtual std::vector<BehaviorNote> take_notes() { return {}; }
};

/// Clamps every field of `decision` into its legal range. Returns true if anything moved.
bool clamp_decision(Decision& decision);

/// Deterministic household/firm rules.
///  household: propensity = clamp(0.95 - 0.05 * deposit_buffer_months, 0.3, 0.95)
///  firm wage: x1.02 with unfilled slots last tick, x0.98 once all slots were filled for 3 ticks
///  firm price: x1.05 when sold out, x0.95 above 3 months of unsold stock
Decision decide_rule_based(const DecisionContext& ctx);

class RuleBasedProvider final : public DecisionProvider {
 public:
  Decision decide(const DecisionContext& ctx) override { return decide_rule_based(ctx); }
};

struct ParseError {
  std::string message;
};

/// Parses a provider reply made of `KEY=float` lines (PROPENSITY, WAGE_MULT, PRICE_MULT).
/// Whitespace around keys and values is ignored; the last occurrence of a key wins; other
/// lines are ignored. Values are returned unclamped. Fails when no key relevant to `kind`
/// is present.
std::variant<Decision, ParseError> parse_decision(std::string_view text, AgentKind kind);

}  // namespace econlab::behavior
