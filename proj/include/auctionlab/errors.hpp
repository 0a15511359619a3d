#pragma once

#include <stdexcept>
#include <string>

namespace auctionlab {

// Bad scenario/model configuration (rejected before any computation runs).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mismatched vector/matrix sizes between caller and callee.
struct dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input values outside the mathematical domain (non-finite, out of range).
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training diverged; carries a diagnostic dump of the optimizer state.
struct training_error : std::runtime_error {
    training_error(const std::string& msg, std::string dump)
        : std::runtime_error(msg), diagnostic_dump(std::move(dump)) {}
    std::string diagnostic_dump;
};

}  // namespace auctionlab
