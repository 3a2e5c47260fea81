#include "econlab/econ/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace econlab::econ {

double gini(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("gini: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("gini: values must be finite and non-negative");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (double v : sorted) total += v;
  if (total == 0.0) return 0.0;
  // With x sorted ascending, sum_i sum_j |x_i - x_j| = 2 * sum_i (2i - n + 1) x_i (0-based i).
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  }
  const double mean = total / n;
  return (2.0 * weighted) / (2.0 * n * n * mean);
}

MetricFrame compute_metrics(const EconomyState& state) {
  MetricFrame frame;
  frame.tick = state.tick;
  const auto& hs = state.households;
  if (hs.empty()) return frame;

  Money income = 0;
  Money consumption = 0;
  Money wealth = 0;
  std::size_t unemployed = 0;
  std::vector<double> wealths;
  wealths.reserve(hs.size());
  for (const auto& h : hs) {
    income += h.last_income;
    consumption += h.last_consumption;
    wealth += h.cash + h.deposits;
    wealths.push_back(static_cast<double>(h.cash + h.deposits));
    if (!h.employment) ++unemployed;
  }
  const auto n = static_cast<Money>(hs.size());
  frame.total_consumption = consumption;
  frame.avg_income = income / n;
  frame.avg_wealth = wealth / n;
  frame.savings_rate = income > 0 ? static_cast<double>(income - consumption) / static_cast<double>(income) : 0.0;
  frame.gini_wealth = gini(wealths);
  frame.unemployment_rate = static_cast<double>(unemployed) / static_cast<double>(hs.size());

  std::int64_t stock = 0;
  double weighted = 0.0;
  double plain = 0.0;
  for (const auto& f : state.firms) {
    stock += f.inventory;
    weighted += static_cast<double>(f.price) * static_cast<double>(f.inventory);
    plain += static_cast<double>(f.price);
  }
  if (stock > 0) {
    frame.price_level = static_cast<Money>(std::llround(weighted / static_cast<double>(stock)));
  } else if (!state.firms.empty()) {
    frame.price_level = static_cast<Money>(std::llround(plain / static_cast<double>(state.firms.size())));
  }
  return frame;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"total_consumption", "avg_income",        "avg_wealth", "savings_rate",
                                              "gini_wealth",       "unemployment_rate", "price_level"};
  return names;
}

double metric_value(const MetricFrame& f, std::string_view name) {
  if (name == "total_consumption") return static_cast<double>(f.total_consumption);
  if (name == "avg_income") return static_cast<double>(f.avg_income);
  if (name == "avg_wealth") return static_cast<double>(f.avg_wealth);
  if (name == "savings_rate") return f.savings_rate;
  if (name == "gini_wealth") return f.gini_wealth;
  if (name == "unemployment_rate") return f.unemployment_rate;
  if (name == "price_level") return static_cast<double>(f.price_level);
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

nlohmann::json to_json(const MetricFrame& f) {
  return {{"tick", f.tick},
          {"total_consumption", f.total_consumption},
          {"avg_income", f.avg_income},
          {"avg_wealth", f.avg_wealth},
          {"savings_rate", f.savings_rate},
          {"gini_wealth", f.gini_wealth},
          {"unemployment_rate", f.unemployment_rate},
          {"price_level", f.price_level}};
}

}  // namespace econlab::econ
