#pragma once

#include <span>
#include <vector>

#include "econlab/econ/types.hpp"

namespace econlab::econ {

struct JobOffer {
  AgentId firm = 0;
  Posting posting;
};

struct LaborMatch {
  AgentId household = 0;
  AgentId firm = 0;
  Money wage = 0;

  friend bool operator==(const LaborMatch&, const LaborMatch&) = default;
};

/// True when every skill dimension meets the posting's requirement.
bool eligible(const Household& household, const Posting& posting) noexcept;

/// Matches unemployed households to open slots. Offers are visited by wage_offer desc, then
/// firm id asc; each takes eligible candidates in household id order until its slots run
/// out. Employed households are never matched.
std::vector<LaborMatch> match_labor(std::span<const Household> households, std::span<const JobOffer> offers);

struct Purchase {
  AgentId household = 0;
  AgentId firm = 0;
  std::int64_t quantity = 0;
  Money amount = 0;
};

/// Clears the product market in place. Each household (in id order) budgets
/// floor(propensity * cash), splits it across goods by preference weight, and buys
/// floor(allocation / price) units from the cheapest producer of each good first, capped
/// by inventory. Cash and inventory never go negative.
std::vector<Purchase> clear_product_market(std::span<Household> households, std::span<Firm> firms,
                                           std::uint32_t n_goods);

}  // namespace econlab::econ
