#pragma once

#include <functional>
#include <vector>

#include "auctionlab/matrix.hpp"

namespace auctionlab {

/// Result of running any auction on a bid vector: an N x M matrix of
/// per-unit allocation (probabilities for the learned auction, 0/1 for the
/// classical ones) and the per-bidder payments. Per unit, column sums stay
/// <= 1; the slack is the seller withholding the unit.
struct Outcome {
    Matrix alloc;       // n_bidders x n_units
    std::vector<double> payments;  // length n_bidders

    Outcome() = default;
    Outcome(std::size_t n_bidders, std::size_t n_units)
        : alloc(n_bidders, n_units), payments(n_bidders, 0.0) {}

    double units_won(std::size_t bidder) const {
        double total = 0.0;
        for (std::size_t m = 0; m < alloc.cols; ++m) total += alloc(bidder, m);
        return total;
    }
};

using AuctionOutcome = Outcome;
using MechanismOutcome = Outcome;

/// Any bids -> outcome rule; lets the regret oracles treat learned and
/// classical mechanisms uniformly.
using MechanismFn = std::function<Outcome(const std::vector<double>&)>;

}  // namespace auctionlab
