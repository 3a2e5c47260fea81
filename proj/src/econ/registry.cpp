#include "econlab/econ/registry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "econlab/error.hpp"

namespace econlab::econ {

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::boolean: return "boolean";
    case ValueKind::fraction: return "fraction";
    case ValueKind::money: return "money";
    case ValueKind::count: return "count";
  }
  return "unknown";
}

std::string to_string(Aggregation agg) {
  switch (agg) {
    case Aggregation::cumulative: return "cumulative";
    case Aggregation::final: return "final";
    case Aggregation::mean: return "mean";
  }
  return "unknown";
}

ParameterRegistry::ParameterRegistry(std::vector<LeverSpec> levers, std::vector<MetricSpec> metrics)
    : levers_(std::move(levers)), metrics_(std::move(metrics)) {
  std::set<std::string> seen;
  for (const auto& lever : levers_) {
    if (!seen.insert(lever.name).second) throw ValidationError("duplicate lever name: " + lever.name, {lever.name});
    if (auto err = check_value(lever, lever.default_value)) throw ValidationError("bad default: " + *err, {lever.name});
  }
  std::sort(levers_.begin(), levers_.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

const LeverSpec* ParameterRegistry::find_lever(std::string_view name) const noexcept {
  auto it = std::find_if(levers_.begin(), levers_.end(), [&](const auto& l) { return l.name == name; });
  return it == levers_.end() ? nullptr : &*it;
}

const MetricSpec* ParameterRegistry::find_metric(std::string_view name) const noexcept {
  auto it = std::find_if(metrics_.begin(), metrics_.end(), [&](const auto& m) { return m.name == name; });
  return it == metrics_.end() ? nullptr : &*it;
}

namespace {

std::string range_text(const LeverSpec& lever) {
  std::ostringstream os;
  if (lever.kind == ValueKind::boolean) return "{true, false}";
  os << '[' << lever.min << ", " << lever.max << (lever.max_exclusive ? ")" : "]");
  return os.str();
}

}  // namespace

std::optional<std::string> ParameterRegistry::check_value(const LeverSpec& lever, const Json& value) const {
  auto bad = [&](const std::string& why) {
    return std::optional<std::string>(lever.name + ": " + why + "; expected " + to_string(lever.kind) + " in " +
                                      range_text(lever));
  };
  double v = 0.0;
  switch (lever.kind) {
    case ValueKind::boolean:
      if (!value.is_boolean()) return bad("not a boolean");
      return std::nullopt;
    case ValueKind::fraction:
      if (!value.is_number()) return bad("not a number");
      v = value.get<double>();
      break;
    case ValueKind::money:
    case ValueKind::count:
      if (!value.is_number_integer()) return bad("not an integer");
      v = static_cast<double>(value.get<std::int64_t>());
      break;
  }
  if (!std::isfinite(v) || v < lever.min || v > lever.max || (lever.max_exclusive && v >= lever.max)) {
    std::ostringstream os;
    os << "value " << value.dump() << " out of range";
    return bad(os.str());
  }
  return std::nullopt;
}

Json ParameterRegistry::normalize(const LeverSpec& lever, const Json& value) {
  switch (lever.kind) {
    case ValueKind::fraction: return Json(value.get<double>());
    case ValueKind::money:
    case ValueKind::count: return Json(value.get<std::int64_t>());
    case ValueKind::boolean: break;
  }
  return value;
}

LeverValues ParameterRegistry::defaults() const {
  LeverValues out;
  for (const auto& lever : levers_) out[lever.name] = normalize(lever, lever.default_value);
  return out;
}

LeverValues ParameterRegistry::resolve(const LeverValues& overrides) const {
  LeverValues out = defaults();
  std::vector<std::string> fields;
  std::string message;
  for (const auto& [name, value] : overrides) {
    const LeverSpec* lever = find_lever(name);
    if (lever == nullptr) {
      fields.push_back(name);
      message += (message.empty() ? "" : "; ") + ("unknown lever: " + name);
      continue;
    }
    if (auto err = check_value(*lever, value)) {
      fields.push_back(name);
      message += (message.empty() ? "" : "; ") + *err;
      continue;
    }
    out[name] = normalize(*lever, value);
  }
  if (!fields.empty()) throw ValidationError(message, fields);
  return out;
}

Json ParameterRegistry::to_json() const {
  Json levers = Json::array();
  for (const auto& l : levers_) {
    Json range = Json::object();
    if (l.kind != ValueKind::boolean) {
      range = {{"min", l.min}, {"max", l.max}, {"max_exclusive", l.max_exclusive}};
    }
    levers.push_back({{"name", l.name},
                      {"kind", to_string(l.kind)},
                      {"range", range},
                      {"default", l.default_value},
                      {"description", l.description}});
  }
  Json metrics = Json::array();
  for (const auto& m : metrics_) {
    metrics.push_back({{"name", m.name}, {"aggregation", to_string(m.aggregation)}, {"description", m.description}});
  }
  return {{"levers", levers}, {"metrics", metrics}};
}

const ParameterRegistry& default_registry() {
  static const ParameterRegistry registry(
      {
          {"income_tax_rate", ValueKind::fraction, 0.0, 1.0, true, 0.1,
           "Flat tax withheld from every wage payment."},
          {"transfer_per_household", ValueKind::money, 0.0, 1'000'000.0, false, 20000,
           "Monthly lump-sum transfer paid by the government to each household (cents)."},
          {"innovation_support", ValueKind::boolean, 0.0, 1.0, false, false,
           "Government support for innovation: pays subsidy_per_firm to every firm each month and grows firm "
           "productivity by productivity_growth_rate."},
          {"subsidy_per_firm", ValueKind::money, 0.0, 100'000'000.0, false, 100000,
           "Monthly innovation subsidy per firm while innovation_support is on (cents)."},
          {"productivity_growth_rate", ValueKind::fraction, 0.0, 0.2, false, 0.02,
           "Monthly productivity growth applied to every firm while innovation_support is on."},
          {"monthly_deposit_rate", ValueKind::fraction, 0.0, 0.05, false, 0.002,
           "Monthly interest the bank pays on household deposits."},
      },
      {
          {"total_consumption", Aggregation::cumulative, "Household spending on goods in the month (cents)."},
          {"avg_income", Aggregation::cumulative,
           "Mean household income in the month: net wage + transfer + interest (cents)."},
          {"avg_wealth", Aggregation::final, "Mean household cash + deposits (cents)."},
          {"savings_rate", Aggregation::mean, "(total income - total consumption) / total income; 0 without income."},
          {"gini_wealth", Aggregation::final, "Gini coefficient of household wealth."},
          {"unemployment_rate", Aggregation::final, "Share of households without a job."},
          {"price_level", Aggregation::final, "Inventory-weighted mean goods price (cents)."},
      });
  return registry;
}

}  // namespace econlab::econ
