#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "auctionlab/outcome.hpp"
#include "auctionlab/rng.hpp"

namespace auctionlab::baselines {

/// Multi-unit VCG with additive identical per-unit values: units go to the
/// highest bidders greedily (ties to the lowest index) and each winner pays
/// the welfare externality it imposes on the rest. With no per-bidder cap
/// (unit_cap = 0) the top bidder takes all m_units and pays m_units times
/// the second-highest bid.
Outcome vcg_multiunit(const std::vector<double>& bids, std::size_t m_units,
                      std::size_t unit_cap = 0);

/// Single-item second-price: highest bidder wins, pays the second-highest
/// bid; ties to the lowest index.
Outcome second_price_single(const std::vector<double>& bids);

/// Single-item first-price: highest bidder wins, pays its own bid.
Outcome first_price_single(const std::vector<double>& bids);

/// Single-item auction with a reserve price (the revenue-optimal mechanism
/// for i.i.d. uniform values when reserve = 0.5): no sale below the reserve,
/// otherwise the winner pays max(reserve, second-highest bid).
Outcome myerson_uniform_single(const std::vector<double>& bids, double reserve);

/// Profile generator for Monte Carlo evaluation; must be deterministic in
/// the Rng stream it is handed.
using ProfileSampler = std::function<std::vector<double>(Rng&)>;

/// Mean truthful revenue of a mechanism over sampled profiles.
double expected_revenue_mc(const MechanismFn& mechanism, const ProfileSampler& sampler,
                           std::size_t n_samples, std::uint64_t seed);

/// i.i.d. U[0,1] values for n_bidders.
ProfileSampler uniform_sampler(std::size_t n_bidders);

}  // namespace auctionlab::baselines
