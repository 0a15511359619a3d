#pragma once

#include <cstdio>
#include <string>

namespace auctionlab {

/// Floats in CSV output use 9 significant digits.
inline std::string format_g9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

}  // namespace auctionlab
