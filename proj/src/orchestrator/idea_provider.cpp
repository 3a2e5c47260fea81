#include "econlab/orchestrator/idea_provider.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace econlab::orchestrator {

namespace {

bool mentions(const std::string& text, std::initializer_list<const char*> words) {
  return std::any_of(words.begin(), words.end(), [&](const char* w) { return text.find(w) != std::string::npos; });
}

}  // namespace

std::string KeywordIdeaProvider::complete(const std::string& prompt) {
  std::string intuition;
  if (const auto at = prompt.find("Intuition: "); at != std::string::npos) {
    const auto start = at + 11;
    intuition = prompt.substr(start, prompt.find('\n', start) - start);
  }
  std::string t = intuition;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  const bool lowering = mentions(t, {"tax cut", "cut tax", "cutting tax", "lower tax", "lower income tax", "reduce tax",
                                     "reduce income tax", "reducing tax", "tax reduction"});

  std::vector<std::string> levers;
  if (mentions(t, {"innovation", "r&d", "research", "technolog"})) levers.push_back("innovation_support:false:true");
  if (mentions(t, {"tax"})) levers.push_back(lowering ? "income_tax_rate:0.1:0.05" : "income_tax_rate:0.1:0.2");
  if (mentions(t, {"transfer", "welfare", "benefit"})) levers.push_back("transfer_per_household:20000:40000");
  if (mentions(t, {"interest", "deposit rate"})) levers.push_back("monthly_deposit_rate:0.002:0.004");

  std::string reply = "STATEMENT=" + intuition + "\n";
  if (levers.empty()) return reply;
  for (const auto& l : levers) reply += "LEVER=" + l + "\n";

  // A tax rise is the one lever here expected to shrink the household aggregates.
  const bool contractionary = mentions(t, {"tax"}) && !lowering;
  const std::string up = contractionary ? "decrease" : "increase";
  std::vector<std::string> metrics;
  if (mentions(t, {"consum", "spend", "demand"})) metrics.push_back("total_consumption:" + up);
  if (mentions(t, {"income", "wage"})) metrics.push_back("avg_income:" + up);
  if (mentions(t, {"wealth", "saving"})) metrics.push_back("avg_wealth:" + up);
  if (mentions(t, {"inequal", "gini"})) metrics.push_back("gini_wealth:decrease");
  if (mentions(t, {"unemploy", "jobs"})) metrics.push_back("unemployment_rate:decrease");
  if (metrics.empty()) metrics.push_back("total_consumption:" + up);
  for (const auto& m : metrics) reply += "METRIC=" + m + "\n";
  return reply;
}

}  // namespace econlab::orchestrator
