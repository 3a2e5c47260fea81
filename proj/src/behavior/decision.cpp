#include "econlab/behavior/decision.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

namespace econlab::behavior {

std::string to_string(AgentKind kind) { return kind == AgentKind::household ? "household" : "firm"; }

nlohmann::json to_json(const DecisionContext& ctx) {
  nlohmann::json j;
  j["agent_kind"] = to_string(ctx.kind());
  if (const auto* h = std::get_if<HouseholdSnapshot>(&ctx.agent)) {
    j["id"] = h->id;
    j["cash"] = h->cash;
    j["deposits"] = h->deposits;
    j["employed"] = h->employed;
    j["wage"] = h->wage;
    j["last_income"] = h->last_income;
    j["last_consumption"] = h->last_consumption;
  } else {
    const auto& f = std::get<FirmSnapshot>(ctx.agent);
    j["id"] = f.id;
    j["good_id"] = f.good_id;
    j["price"] = f.price;
    j["inventory"] = f.inventory;
    j["cash"] = f.cash;
    j["productivity"] = f.productivity;
    j["wage_offer"] = f.wage_offer;
    j["target_slots"] = f.target_slots;
    j["employees"] = f.employees;
    j["last_unfilled"] = f.last_unfilled;
    j["filled_streak"] = f.filled_streak;
    j["last_sales"] = ctx.market.last_sales;
  }
  j["price_level"] = ctx.market.price_level;
  j["unemployment_rate"] = ctx.market.unemployment_rate;
  return j;
}

namespace {

bool clamp_into(double& v, double lo, double hi) {
  const double before = v;
  if (std::isnan(v)) v = hi;
  v = std::clamp(v, lo, hi);
  return v != before || std::isnan(before);
}

}  // namespace

bool clamp_decision(Decision& d) {
  bool moved = false;
  moved |= clamp_into(d.consumption_propensity, kPropensityMin, kPropensityMax);
  moved |= clamp_into(d.wage_offer_multiplier, kMultiplierMin, kMultiplierMax);
  moved |= clamp_into(d.price_multiplier, kMultiplierMin, kMultiplierMax);
  return moved;
}

Decision decide_rule_based(const DecisionContext& ctx) {
  Decision d;
  d.kind = ctx.kind();
  if (const auto* h = std::get_if<HouseholdSnapshot>(&ctx.agent)) {
    constexpr double kPerBufferMonth = 0.05;
    const double buffer_months =
        h->last_consumption > 0 ? static_cast<double>(h->deposits) / static_cast<double>(h->last_consumption) : 0.0;
    d.consumption_propensity = std::clamp(kPropensityMax - kPerBufferMonth * buffer_months, kPropensityMin, kPropensityMax);
    return d;
  }
  const auto& f = std::get<FirmSnapshot>(ctx.agent);
  constexpr std::uint32_t kFilledTicksBeforeCut = 3;
  if (f.last_unfilled > 0) {
    d.wage_offer_multiplier = 1.02;
  } else if (f.filled_streak >= kFilledTicksBeforeCut) {
    d.wage_offer_multiplier = 0.98;
  }
  const std::int64_t sales = ctx.market.last_sales;
  if (f.inventory == 0 && sales > 0) {
    d.price_multiplier = 1.05;
  } else if (f.inventory > 0 && f.inventory > 3 * sales) {
    d.price_multiplier = 0.95;
  }
  return d;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_float(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::variant<Decision, ParseError> parse_decision(std::string_view text, AgentKind kind) {
  std::optional<double> propensity;
  std::optional<double> wage;
  std::optional<double> price;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = trim(line.substr(0, eq));
    const auto value = parse_float(line.substr(eq + 1));
    if (!value) continue;
    if (key == "PROPENSITY") propensity = value;
    else if (key == "WAGE_MULT") wage = value;
    else if (key == "PRICE_MULT") price = value;
  }
  Decision d;
  d.kind = kind;
  if (kind == AgentKind::household) {
    if (!propensity) return ParseError{"no PROPENSITY=<float> line in reply"};
    d.consumption_propensity = *propensity;
    return d;
  }
  if (!wage && !price) return ParseError{"no WAGE_MULT=<float> or PRICE_MULT=<float> line in reply"};
  d.wage_offer_multiplier = wage.value_or(1.0);
  d.price_multiplier = price.value_or(1.0);
  return d;
}

}  // namespace econlab::behavior
