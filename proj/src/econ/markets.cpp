#include "econlab/econ/markets.hpp"

#include <algorithm>
#include <numeric>

namespace econlab::econ {

bool eligible(const Household& household, const Posting& posting) noexcept {
  if (household.skills.size() < posting.requirements.size()) return false;
  for (std::size_t i = 0; i < posting.requirements.size(); ++i) {
    if (household.skills[i] < posting.requirements[i]) return false;
  }
  return true;
}

std::vector<LaborMatch> match_labor(std::span<const Household> households, std::span<const JobOffer> offers) {
  std::vector<std::size_t> offer_order(offers.size());
  std::iota(offer_order.begin(), offer_order.end(), 0);
  std::stable_sort(offer_order.begin(), offer_order.end(), [&](std::size_t a, std::size_t b) {
    if (offers[a].posting.wage_offer != offers[b].posting.wage_offer) {
      return offers[a].posting.wage_offer > offers[b].posting.wage_offer;
    }
    return offers[a].firm < offers[b].firm;
  });

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < households.size(); ++i) {
    if (!households[i].employment) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return households[a].id < households[b].id; });

  std::vector<bool> taken(households.size(), false);
  std::vector<LaborMatch> matches;
  for (std::size_t oi : offer_order) {
    const JobOffer& offer = offers[oi];
    std::uint32_t remaining = offer.posting.slots;
    for (std::size_t hi : candidates) {
      if (remaining == 0) break;
      if (taken[hi] || !eligible(households[hi], offer.posting)) continue;
      taken[hi] = true;
      --remaining;
      matches.push_back({households[hi].id, offer.firm, offer.posting.wage_offer});
    }
  }
  return matches;
}

std::vector<Purchase> clear_product_market(std::span<Household> households, std::span<Firm> firms,
                                           std::uint32_t n_goods) {
  // Producers of each good, cheapest first; price ties go to the lower firm id.
  std::vector<std::vector<std::size_t>> sellers(n_goods);
  for (std::size_t f = 0; f < firms.size(); ++f) {
    if (firms[f].good_id < n_goods) sellers[firms[f].good_id].push_back(f);
  }
  for (auto& list : sellers) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      if (firms[a].price != firms[b].price) return firms[a].price < firms[b].price;
      return firms[a].id < firms[b].id;
    });
  }

  std::vector<std::size_t> order(households.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return households[a].id < households[b].id; });

  std::vector<Purchase> purchases;
  for (std::size_t hi : order) {
    Household& h = households[hi];
    const double propensity = std::clamp(h.consumption_propensity, 0.0, 1.0);
    const Money budget = static_cast<Money>(propensity * static_cast<double>(h.cash));
    for (std::uint32_t g = 0; g < n_goods && g < h.preferences.size(); ++g) {
      Money allocation = static_cast<Money>(static_cast<double>(budget) * h.preferences[g]);
      allocation = std::min(allocation, h.cash);
      for (std::size_t fi : sellers[g]) {
        Firm& firm = firms[fi];
        if (allocation < firm.price || firm.inventory <= 0) continue;
        const std::int64_t quantity = std::min<std::int64_t>(allocation / firm.price, firm.inventory);
        const Money amount = quantity * firm.price;
        firm.inventory -= quantity;
        firm.cash += amount;
        h.cash -= amount;
        allocation -= amount;
        purchases.push_back({h.id, firm.id, quantity, amount});
      }
    }
  }
  return purchases;
}

}  // namespace econlab::econ
