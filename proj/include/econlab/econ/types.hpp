#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "econlab/econ/rng.hpp"

namespace econlab::econ {

/// Money is integer cents throughout; conservation checks are exact.
using Money = std::int64_t;
using AgentId = std::uint32_t;

struct Employment {
  AgentId firm = 0;
  Money wage = 0;
};

struct Household {
  AgentId id = 0;
  std::vector<double> skills;       // each in [0, 1]
  Money cash = 0;
  Money deposits = 0;
  std::optional<Employment> employment;
  std::vector<double> preferences;  // weight per good, sums to 1
  double consumption_propensity = 0.95;
  double equity_share = 0.0;        // share of distributed firm profits; shares sum to 1
  Money last_income = 0;            // net wage + dividend + transfer + interest of the last tick
  Money last_consumption = 0;
};

struct Posting {
  std::vector<double> requirements;  // each in [0, 1]
  Money wage_offer = 0;
  std::uint32_t slots = 0;
};

struct Employee {
  AgentId household = 0;
  Money wage = 0;
};

struct Firm {
  AgentId id = 0;
  AgentId good_id = 0;
  Money price = 1;
  std::int64_t inventory = 0;
  Money cash = 0;
  double productivity = 1.0;
  std::vector<Posting> postings;
  std::vector<Employee> employees;

  // Bookkeeping read by the behavior providers.
  std::uint32_t target_slots = 0;
  std::int64_t last_sales = 0;
  std::uint32_t last_unfilled = 0;
  std::uint32_t filled_streak = 0;
  double wage_indexed_productivity = 1.0;
};

struct Government {
  Money balance = 0;
  double income_tax_rate = 0.0;
  Money transfer_per_household = 0;
  bool innovation_support = false;
  Money subsidy_per_firm = 0;
  double productivity_growth_rate = 0.0;
};

struct Bank {
  Money reserves = 0;
  double monthly_deposit_rate = 0.0;
  Money minted_interest_cumulative = 0;
  // The per-household deposit ledger is the `deposits` field of each household; see
  // deposit_ledger() in economy.hpp.
};

enum class MoneyEventKind { wage, dividend, purchase, tax, transfer, subsidy, interest_mint, deposit, withdrawal };

std::string to_string(MoneyEventKind kind);

enum class AccountKind { household, firm, government, bank };

struct Account {
  AccountKind kind = AccountKind::government;
  AgentId id = 0;

  static Account household(AgentId id) { return {AccountKind::household, id}; }
  static Account firm(AgentId id) { return {AccountKind::firm, id}; }
  static Account government() { return {AccountKind::government, 0}; }
  static Account bank() { return {AccountKind::bank, 0}; }

  friend bool operator==(const Account&, const Account&) = default;
};

std::string to_string(const Account& account);

struct MoneyEvent {
  std::int64_t tick = 0;
  MoneyEventKind kind = MoneyEventKind::wage;
  Account from;
  Account to;
  Money amount = 0;
};

struct MetricFrame {
  std::int64_t tick = 0;
  Money total_consumption = 0;
  Money avg_income = 0;
  Money avg_wealth = 0;
  double savings_rate = 0.0;
  double gini_wealth = 0.0;
  double unemployment_rate = 0.0;
  Money price_level = 0;
};

struct EconomyState {
  std::int64_t tick = 0;
  std::vector<Household> households;
  std::vector<Firm> firms;
  Government government;
  Bank bank;
  SplitMix64 rng;
  std::uint32_t n_goods = 1;
  Money initial_total_money = 0;
  std::vector<MoneyEvent> ledger;
};

}  // namespace econlab::econ
