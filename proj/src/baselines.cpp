#include "auctionlab/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "auctionlab/errors.hpp"

namespace auctionlab::baselines {

namespace {

void check_bids(const std::vector<double>& bids) {
    if (bids.empty()) throw dimension_error("mechanism: empty bid vector");
    for (double b : bids)
        if (!(b >= 0.0)) throw domain_error("mechanism: bids must be nonnegative and finite");
}

// Bidder indices sorted by bid descending, lowest index first on ties.
std::vector<std::size_t> rank_bidders(const std::vector<double>& bids) {
    std::vector<std::size_t> order(bids.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });
    return order;
}

// Greedy unit counts under a per-bidder cap; skip_bidder (if < n) is treated
// as absent. cap = 0 means no cap.
std::vector<std::size_t> greedy_units(const std::vector<double>& bids, std::size_t m_units,
                                      std::size_t cap, std::size_t skip_bidder) {
    const std::size_t effective_cap = cap == 0 ? m_units : cap;
    std::vector<std::size_t> units(bids.size(), 0);
    std::size_t remaining = m_units;
    for (std::size_t n : rank_bidders(bids)) {
        if (n == skip_bidder || remaining == 0) continue;
        const std::size_t take = std::min(effective_cap, remaining);
        units[n] = take;
        remaining -= take;
    }
    return units;
}

double welfare(const std::vector<double>& bids, const std::vector<std::size_t>& units,
               std::size_t skip_bidder) {
    double total = 0.0;
    for (std::size_t n = 0; n < bids.size(); ++n)
        if (n != skip_bidder) total += bids[n] * static_cast<double>(units[n]);
    return total;
}

Outcome units_to_outcome(const std::vector<double>& bids, const std::vector<std::size_t>& units,
                         std::size_t m_units) {
    Outcome out(bids.size(), m_units);
    std::size_t next_unit = 0;
    for (std::size_t n = 0; n < bids.size(); ++n)
        for (std::size_t k = 0; k < units[n]; ++k) out.alloc(n, next_unit++) = 1.0;
    return out;
}

std::size_t top_bidder(const std::vector<double>& bids) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < bids.size(); ++n)
        if (bids[n] > bids[best]) best = n;
    return best;
}

double second_highest(const std::vector<double>& bids, std::size_t winner) {
    double second = 0.0;
    for (std::size_t n = 0; n < bids.size(); ++n)
        if (n != winner) second = std::max(second, bids[n]);
    return second;
}

}  // namespace

Outcome vcg_multiunit(const std::vector<double>& bids, std::size_t m_units,
                      std::size_t unit_cap) {
    check_bids(bids);
    if (m_units < 1) throw config_error("vcg_multiunit: m_units must be >= 1");
    const std::size_t absent = bids.size();  // sentinel: nobody skipped
    const std::vector<std::size_t> units = greedy_units(bids, m_units, unit_cap, absent);
    Outcome out = units_to_outcome(bids, units, m_units);
    if (bids.size() < 2) return out;  // no competitor, no externality
    for (std::size_t n = 0; n < bids.size(); ++n) {
        if (units[n] == 0) continue;
        const std::vector<std::size_t> without_n = greedy_units(bids, m_units, unit_cap, n);
        const double others_without = welfare(bids, without_n, n);
        const double others_with = welfare(bids, units, n);
        out.payments[n] = std::max(0.0, others_without - others_with);
    }
    return out;
}

Outcome second_price_single(const std::vector<double>& bids) {
    check_bids(bids);
    Outcome out(bids.size(), 1);
    const std::size_t winner = top_bidder(bids);
    out.alloc(winner, 0) = 1.0;
    out.payments[winner] = bids.size() < 2 ? 0.0 : second_highest(bids, winner);
    return out;
}

Outcome first_price_single(const std::vector<double>& bids) {
    check_bids(bids);
    Outcome out(bids.size(), 1);
    const std::size_t winner = top_bidder(bids);
    out.alloc(winner, 0) = 1.0;
    out.payments[winner] = bids[winner];
    return out;
}

Outcome myerson_uniform_single(const std::vector<double>& bids, double reserve) {
    check_bids(bids);
    if (!(reserve >= 0.0 && reserve <= 1.0))
        throw config_error("myerson_uniform_single: reserve must lie in [0, 1]");
    Outcome out(bids.size(), 1);
    const std::size_t winner = top_bidder(bids);
    if (bids[winner] < reserve) return out;  // no sale
    out.alloc(winner, 0) = 1.0;
    const double second = bids.size() < 2 ? 0.0 : second_highest(bids, winner);
    out.payments[winner] = std::max(reserve, second);
    return out;
}

double expected_revenue_mc(const MechanismFn& mechanism, const ProfileSampler& sampler,
                           std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw config_error("expected_revenue_mc: n_samples must be >= 1");
    Rng rng{seed};
    double total = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Outcome out = mechanism(sampler(rng));
        for (double p : out.payments) total += p;
    }
    return total / static_cast<double>(n_samples);
}

ProfileSampler uniform_sampler(std::size_t n_bidders) {
    if (n_bidders < 1) throw config_error("uniform_sampler: need at least one bidder");
    return [n_bidders](Rng& rng) {
        std::vector<double> profile(n_bidders);
        for (double& v : profile) v = rng.uniform01();
        return profile;
    };
}

}  // namespace auctionlab::baselines
