#include "econlab/econ/economy.hpp"

#include <algorithm>
#include <cmath>

#include "econlab/econ/markets.hpp"
#include "econlab/econ/metrics.hpp"
#include "econlab/error.hpp"

namespace econlab::econ {

std::string to_string(MoneyEventKind kind) {
  switch (kind) {
    case MoneyEventKind::wage: return "wage";
    case MoneyEventKind::dividend: return "dividend";
    case MoneyEventKind::purchase: return "purchase";
    case MoneyEventKind::tax: return "tax";
    case MoneyEventKind::transfer: return "transfer";
    case MoneyEventKind::subsidy: return "subsidy";
    case MoneyEventKind::interest_mint: return "interest_mint";
    case MoneyEventKind::deposit: return "deposit";
    case MoneyEventKind::withdrawal: return "withdrawal";
  }
  return "unknown";
}

std::string to_string(const Account& account) {
  switch (account.kind) {
    case AccountKind::household: return "household:" + std::to_string(account.id);
    case AccountKind::firm: return "firm:" + std::to_string(account.id);
    case AccountKind::government: return "government";
    case AccountKind::bank: return "bank";
  }
  return "unknown";
}

namespace {

// Synthetic population ranges.
constexpr double kCashMin = 1'000'00;
constexpr double kCashMax = 10'000'00;
constexpr double kWageMin = 2'500'00;
constexpr double kWageMax = 3'500'00;
constexpr double kProductivityMin = 15.0;
constexpr double kProductivityMax = 25.0;
constexpr double kMarkup = 1.1;
constexpr double kRequirementMax = 0.25;
constexpr int kFirmCashMonths = 3;
constexpr double kPayoutRatio = 0.5;
constexpr Money kDrawdownMonths = 12;

double lever_double(const SimConfig& c, const char* name) { return c.levers.at(name).get<double>(); }
Money lever_money(const SimConfig& c, const char* name) { return c.levers.at(name).get<Money>(); }

Money floor_mul(Money amount, double rate) {
  return static_cast<Money>(std::floor(static_cast<double>(amount) * rate));
}

}  // namespace

EconomyState init_economy(const SimConfig& raw_config, std::uint64_t seed) {
  SimConfig config = raw_config;
  config.levers = default_registry().resolve(raw_config.levers);
  config.seed = seed;
  validate_config(config);

  EconomyState state;
  state.rng = SplitMix64(seed);
  state.n_goods = static_cast<std::uint32_t>(config.n_goods);
  auto& rng = state.rng;

  const auto dims = static_cast<std::size_t>(config.skill_dims);
  state.households.reserve(static_cast<std::size_t>(config.n_households));
  for (int i = 0; i < config.n_households; ++i) {
    Household h;
    h.id = static_cast<AgentId>(i);
    h.skills.resize(dims);
    for (auto& s : h.skills) s = rng.uniform();
    h.cash = static_cast<Money>(std::llround(std::exp(rng.uniform(std::log(kCashMin), std::log(kCashMax)))));
    h.preferences.resize(static_cast<std::size_t>(config.n_goods));
    double sum = 0.0;
    for (auto& w : h.preferences) {
      w = -std::log1p(-rng.uniform());
      sum += w;
    }
    if (sum <= 0.0) {
      std::fill(h.preferences.begin(), h.preferences.end(), 1.0);
      sum = static_cast<double>(h.preferences.size());
    }
    for (auto& w : h.preferences) w /= sum;
    h.consumption_propensity = behavior::kPropensityMax;
    h.equity_share = -std::log1p(-rng.uniform());
    state.households.push_back(std::move(h));
  }
  double equity_total = 0.0;
  for (const auto& h : state.households) equity_total += h.equity_share;
  for (auto& h : state.households) {
    h.equity_share = equity_total > 0.0 ? h.equity_share / equity_total : 1.0 / static_cast<double>(state.households.size());
  }

  const auto target = static_cast<std::uint32_t>((config.n_households + config.n_firms - 1) / config.n_firms);
  state.firms.reserve(static_cast<std::size_t>(config.n_firms));
  for (int j = 0; j < config.n_firms; ++j) {
    Firm f;
    f.id = static_cast<AgentId>(j);
    f.good_id = static_cast<AgentId>(j % config.n_goods);
    f.productivity = rng.uniform(kProductivityMin, kProductivityMax);
    f.wage_indexed_productivity = f.productivity;
    Posting posting;
    posting.requirements.resize(dims);
    for (auto& r : posting.requirements) r = rng.uniform(0.0, kRequirementMax);
    posting.wage_offer = static_cast<Money>(std::llround(rng.uniform(kWageMin, kWageMax)));
    f.price = std::max<Money>(
        1, static_cast<Money>(std::llround(static_cast<double>(posting.wage_offer) / f.productivity * kMarkup *
                                           rng.uniform(0.9, 1.1))));
    f.target_slots = target;
    f.cash = posting.wage_offer * target * kFirmCashMonths;
    f.postings.push_back(std::move(posting));
    state.firms.push_back(std::move(f));
  }

  state.government.income_tax_rate = lever_double(config, "income_tax_rate");
  state.government.transfer_per_household = lever_money(config, "transfer_per_household");
  state.government.innovation_support = config.levers.at("innovation_support").get<bool>();
  state.government.subsidy_per_firm = lever_money(config, "subsidy_per_firm");
  state.government.productivity_growth_rate = lever_double(config, "productivity_growth_rate");
  state.bank.monthly_deposit_rate = lever_double(config, "monthly_deposit_rate");

  state.initial_total_money = total_money(state);
  return state;
}

Money total_money(const EconomyState& state) noexcept {
  Money total = state.government.balance + state.bank.reserves;
  for (const auto& h : state.households) total += h.cash;
  for (const auto& f : state.firms) total += f.cash;
  return total;
}

std::map<AgentId, Money> deposit_ledger(const EconomyState& state) {
  std::map<AgentId, Money> out;
  for (const auto& h : state.households) out[h.id] = h.deposits;
  return out;
}

namespace {

class TickBuilder {
 public:
  TickBuilder(EconomyState& state, behavior::DecisionProvider& provider)
      : s_(state), provider_(provider), tick_(state.tick) {
    AgentId max_id = 0;
    for (const auto& h : s_.households) max_id = std::max(max_id, h.id);
    index_.assign(s_.households.empty() ? 0 : max_id + 1, SIZE_MAX);
    for (std::size_t i = 0; i < s_.households.size(); ++i) index_[s_.households[i].id] = i;
    gross_wage_.assign(s_.households.size(), 0);
    income_.assign(s_.households.size(), 0);
  }

  TickReport run() {
    const MetricFrame before = compute_metrics(s_);
    set_firm_terms(before);
    match();
    produce();
    pay_wages();
    government();
    bank_interest();
    product_market(before);
    ++s_.tick;

    TickReport report;
    report.tick = s_.tick;
    report.metrics = compute_metrics(s_);
    report.notes = provider_.take_notes();
    s_.ledger.insert(s_.ledger.end(), events_.begin(), events_.end());
    report.events = std::move(events_);
    return report;
  }

 private:
  Household& household(AgentId id) { return s_.households[index_.at(id)]; }

  void record(MoneyEventKind kind, Account from, Account to, Money amount) {
    if (amount != 0) events_.push_back({tick_, kind, from, to, amount});
  }

  void set_firm_terms(const MetricFrame& before) {
    for (auto& f : s_.firms) {
      if (f.postings.empty()) continue;
      Posting& posting = f.postings.front();

      behavior::FirmSnapshot snap;
      snap.id = f.id;
      snap.good_id = f.good_id;
      snap.price = f.price;
      snap.inventory = f.inventory;
      snap.cash = f.cash;
      snap.productivity = f.productivity;
      snap.wage_offer = posting.wage_offer;
      snap.target_slots = f.target_slots;
      snap.employees = static_cast<std::uint32_t>(f.employees.size());
      snap.last_unfilled = f.last_unfilled;
      snap.filled_streak = f.filled_streak;
      behavior::DecisionContext ctx{snap, {before.price_level, before.unemployment_rate, f.last_sales}};
      behavior::Decision d = provider_.decide(ctx);
      behavior::clamp_decision(d);

      // Wage offers follow productivity gains since the last update.
      const double pass_through = f.productivity / f.wage_indexed_productivity;
      f.wage_indexed_productivity = f.productivity;
      posting.wage_offer = std::max<Money>(
          1, static_cast<Money>(std::llround(static_cast<double>(posting.wage_offer) * d.wage_offer_multiplier * pass_through)));
      if (d.wage_offer_multiplier < 1.0) f.filled_streak = 0;
      f.price = std::max<Money>(1, static_cast<Money>(std::llround(static_cast<double>(f.price) * d.price_multiplier)));

      for (auto& e : f.employees) {
        e.wage = posting.wage_offer;
        household(e.household).employment->wage = posting.wage_offer;
      }
      const auto affordable = static_cast<std::size_t>(f.cash / posting.wage_offer);
      while (f.employees.size() > affordable) {
        household(f.employees.back().household).employment.reset();
        f.employees.pop_back();
      }
      const std::size_t cap = std::min<std::size_t>(f.target_slots, affordable);
      posting.slots = static_cast<std::uint32_t>(cap > f.employees.size() ? cap - f.employees.size() : 0);
    }
  }

  void match() {
    std::vector<JobOffer> offers;
    for (const auto& f : s_.firms) {
      if (!f.postings.empty() && f.postings.front().slots > 0) offers.push_back({f.id, f.postings.front()});
    }
    const auto matches = match_labor(s_.households, offers);
    for (auto& f : s_.firms) {
      if (f.postings.empty()) continue;
      const std::uint32_t posted = f.postings.front().slots;
      std::uint32_t filled = 0;
      for (const auto& m : matches) {
        if (m.firm != f.id) continue;
        f.employees.push_back({m.household, m.wage});
        household(m.household).employment = Employment{f.id, m.wage};
        ++filled;
      }
      f.last_unfilled = posted - filled;
      if (f.last_unfilled > 0) {
        f.filled_streak = 0;
      } else if (f.employees.size() >= f.target_slots) {
        ++f.filled_streak;
      }
    }
  }

  void produce() {
    for (auto& f : s_.firms) {
      f.inventory += static_cast<std::int64_t>(std::floor(f.productivity * static_cast<double>(f.employees.size())));
    }
  }

  void pay_wages() {
    for (auto& f : s_.firms) {
      for (const auto& e : f.employees) {
        const Money paid = std::min(e.wage, f.cash);
        f.cash -= paid;
        Household& h = household(e.household);
        h.cash += paid;
        gross_wage_[index_[h.id]] += paid;
        record(MoneyEventKind::wage, Account::firm(f.id), Account::household(h.id), paid);
      }
      // Half of the cash above the payroll reserve is paid out to owners.
      if (f.postings.empty()) continue;
      const Money reserve = f.postings.front().wage_offer * f.target_slots * kFirmCashMonths;
      if (f.cash <= reserve) continue;
      const Money payout = floor_mul(f.cash - reserve, kPayoutRatio);
      for (std::size_t i = 0; i < s_.households.size(); ++i) {
        Household& h = s_.households[i];
        const Money share = floor_mul(payout, h.equity_share);
        f.cash -= share;
        h.cash += share;
        income_[i] += share;
        record(MoneyEventKind::dividend, Account::firm(f.id), Account::household(h.id), share);
      }
    }
  }

  void government() {
    auto& gov = s_.government;
    for (std::size_t i = 0; i < s_.households.size(); ++i) {
      Household& h = s_.households[i];
      const Money tax = std::min(floor_mul(gross_wage_[i], gov.income_tax_rate), h.cash);
      h.cash -= tax;
      gov.balance += tax;
      income_[i] += gross_wage_[i] - tax;
      record(MoneyEventKind::tax, Account::household(h.id), Account::government(), tax);

      h.cash += gov.transfer_per_household;
      gov.balance -= gov.transfer_per_household;
      income_[i] += gov.transfer_per_household;
      record(MoneyEventKind::transfer, Account::government(), Account::household(h.id), gov.transfer_per_household);
    }
    if (!gov.innovation_support) return;
    for (auto& f : s_.firms) {
      f.cash += gov.subsidy_per_firm;
      gov.balance -= gov.subsidy_per_firm;
      record(MoneyEventKind::subsidy, Account::government(), Account::firm(f.id), gov.subsidy_per_firm);
      f.productivity *= 1.0 + gov.productivity_growth_rate;
    }
  }

  void bank_interest() {
    auto& bank = s_.bank;
    for (std::size_t i = 0; i < s_.households.size(); ++i) {
      Household& h = s_.households[i];
      const Money interest = floor_mul(h.deposits, bank.monthly_deposit_rate);
      if (interest <= 0) continue;
      h.deposits += interest;
      bank.reserves += interest;
      bank.minted_interest_cumulative += interest;
      income_[i] += interest;
      record(MoneyEventKind::interest_mint, Account::bank(), Account::household(h.id), interest);
    }
  }

  void product_market(const MetricFrame& before) {
    auto& bank = s_.bank;
    for (auto& h : s_.households) {
      behavior::HouseholdSnapshot snap{h.id,
                                       h.cash,
                                       h.deposits,
                                       h.employment.has_value(),
                                       h.employment ? h.employment->wage : 0,
                                       h.last_income,
                                       h.last_consumption};
      behavior::DecisionContext ctx{snap, {before.price_level, before.unemployment_rate, 0}};
      behavior::Decision d = provider_.decide(ctx);
      behavior::clamp_decision(d);
      h.consumption_propensity = d.consumption_propensity;

      // Cash on hand is set to this month's income plus a twelfth of savings (unemployed
      // households top up to last month's spending); the rest is held as deposits.
      const std::size_t i = index_[h.id];
      Money target = std::max<Money>(income_[i], 0) + h.deposits / kDrawdownMonths;
      if (!h.employment) target = std::max(target, h.last_consumption);
      if (h.cash > target) {
        const Money d = h.cash - target;
        h.cash -= d;
        h.deposits += d;
        bank.reserves += d;
        record(MoneyEventKind::deposit, Account::household(h.id), Account::bank(), d);
      } else if (h.cash < target && h.deposits > 0) {
        const Money w = std::min(h.deposits, target - h.cash);
        h.deposits -= w;
        bank.reserves -= w;
        h.cash += w;
        record(MoneyEventKind::withdrawal, Account::bank(), Account::household(h.id), w);
      }
    }

    std::vector<Money> cash_before(s_.households.size());
    for (std::size_t i = 0; i < s_.households.size(); ++i) cash_before[i] = s_.households[i].cash;
    std::vector<std::int64_t> stock_before(s_.firms.size());
    for (std::size_t j = 0; j < s_.firms.size(); ++j) stock_before[j] = s_.firms[j].inventory;

    const auto purchases = clear_product_market(s_.households, s_.firms, s_.n_goods);
    for (const auto& p : purchases) {
      record(MoneyEventKind::purchase, Account::household(p.household), Account::firm(p.firm), p.amount);
    }
    for (std::size_t j = 0; j < s_.firms.size(); ++j) s_.firms[j].last_sales = stock_before[j] - s_.firms[j].inventory;

    for (std::size_t i = 0; i < s_.households.size(); ++i) {
      Household& h = s_.households[i];
      h.last_consumption = cash_before[i] - h.cash;
      h.last_income = income_[i];
    }
  }

  EconomyState& s_;
  behavior::DecisionProvider& provider_;
  std::int64_t tick_;
  std::vector<std::size_t> index_;
  std::vector<Money> gross_wage_;
  std::vector<Money> income_;
  std::vector<MoneyEvent> events_;
};

}  // namespace

TickReport step_month(EconomyState& state, behavior::DecisionProvider& provider) {
  return TickBuilder(state, provider).run();
}

TickReport step_month(EconomyState& state) {
  behavior::RuleBasedProvider rules;
  return step_month(state, rules);
}

SimulationResult run(const SimConfig& config, std::uint64_t seed, int horizon, behavior::DecisionProvider& provider,
                     const ProgressCallback& progress) {
  if (horizon < 1) throw ValidationError("horizon must be ≥ 1", {"horizon"});
  SimulationResult result;
  result.final_state = init_economy(config, seed);
  result.config = config;
  result.config.levers = default_registry().resolve(config.levers);
  result.config.seed = seed;
  result.config.horizon = horizon;
  result.series.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    TickReport report = step_month(result.final_state, provider);
    result.series.push_back(report.metrics);
    for (auto& note : report.notes) result.notes.push_back(std::move(note));
    if (progress) progress(t + 1, horizon);
  }
  return result;
}

SimulationResult run(const SimConfig& config, std::uint64_t seed, int horizon) {
  behavior::RuleBasedProvider rules;
  return run(config, seed, horizon, rules);
}

nlohmann::json to_json(const MoneyEvent& e) {
  return {{"tick", e.tick},
          {"kind", to_string(e.kind)},
          {"from", to_string(e.from)},
          {"to", to_string(e.to)},
          {"amount", e.amount}};
}

nlohmann::json to_json(const EconomyState& s) {
  using nlohmann::json;
  json households = json::array();
  for (const auto& h : s.households) {
    json employment = nullptr;
    if (h.employment) employment = {{"firm", h.employment->firm}, {"wage", h.employment->wage}};
    households.push_back({{"id", h.id},
                          {"skills", h.skills},
                          {"cash", h.cash},
                          {"deposits", h.deposits},
                          {"employment", employment},
                          {"preferences", h.preferences},
                          {"consumption_propensity", h.consumption_propensity},
                          {"equity_share", h.equity_share},
                          {"last_income", h.last_income},
                          {"last_consumption", h.last_consumption}});
  }
  json firms = json::array();
  for (const auto& f : s.firms) {
    json postings = json::array();
    for (const auto& p : f.postings) {
      postings.push_back({{"requirements", p.requirements}, {"wage_offer", p.wage_offer}, {"slots", p.slots}});
    }
    json employees = json::array();
    for (const auto& e : f.employees) employees.push_back({{"household", e.household}, {"wage", e.wage}});
    firms.push_back({{"id", f.id},
                     {"good_id", f.good_id},
                     {"price", f.price},
                     {"inventory", f.inventory},
                     {"cash", f.cash},
                     {"productivity", f.productivity},
                     {"postings", postings},
                     {"employees", employees},
                     {"target_slots", f.target_slots},
                     {"last_sales", f.last_sales},
                     {"last_unfilled", f.last_unfilled},
                     {"filled_streak", f.filled_streak},
                     {"wage_indexed_productivity", f.wage_indexed_productivity}});
  }
  json ledger = json::array();
  for (const auto& e : s.ledger) ledger.push_back(to_json(e));
  json deposits = json::object();
  for (const auto& [id, amount] : deposit_ledger(s)) deposits[std::to_string(id)] = amount;
  const auto& g = s.government;
  return {{"tick", s.tick},
          {"households", households},
          {"firms", firms},
          {"government",
           {{"balance", g.balance},
            {"income_tax_rate", g.income_tax_rate},
            {"transfer_per_household", g.transfer_per_household},
            {"innovation_support", g.innovation_support},
            {"subsidy_per_firm", g.subsidy_per_firm},
            {"productivity_growth_rate", g.productivity_growth_rate}}},
          {"bank",
           {{"reserves", s.bank.reserves},
            {"deposit_ledger", deposits},
            {"monthly_deposit_rate", s.bank.monthly_deposit_rate},
            {"minted_interest_cumulative", s.bank.minted_interest_cumulative}}},
          {"rng_state", s.rng.state()},
          {"n_goods", s.n_goods},
          {"initial_total_money", s.initial_total_money},
          {"ledger", ledger}};
}

nlohmann::json metric_series_json(const std::vector<MetricFrame>& series) {
  nlohmann::json out = nlohmann::json::object();
  nlohmann::json ticks = nlohmann::json::array();
  for (const auto& f : series) ticks.push_back(f.tick);
  out["tick"] = ticks;
  for (const auto& name : metric_names()) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& f : series) {
      const auto j = to_json(f);
      values.push_back(j.at(name));
    }
    out[name] = values;
  }
  return out;
}

nlohmann::json to_json(const SimulationResult& result) {
  nlohmann::json ledger = nlohmann::json::array();
  for (const auto& e : result.final_state.ledger) ledger.push_back(to_json(e));
  return {{"config", to_json(result.config)},
          {"seed", result.config.seed},
          {"horizon", result.config.horizon},
          {"metrics", metric_series_json(result.series)},
          {"ledger", ledger}};
}

}  // namespace econlab::econ
