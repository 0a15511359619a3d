#pragma once

namespace auctionlab {

inline constexpr const char* kVersionTag = "0.1.0";

}  // namespace auctionlab
