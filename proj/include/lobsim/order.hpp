#pragma once

#include <cstdint>

namespace lobsim {

enum class Side : std::uint8_t { Buy = 0, Sell = 1 };

inline Side opposite(Side s) noexcept {
    return s == Side::Buy ? Side::Sell : Side::Buy;
}

inline char side_char(Side s) noexcept {
    return s == Side::Buy ? 'B' : 'A';
}

// A resting limit order. Volumes are always one lot in this model, but the
// field is kept explicit so conservation checks can sum it.
struct Order {
    std::uint64_t id = 0;
    Side side = Side::Buy;
    int quote = 0;        // price in ticks
    int volume = 1;       // lots
    std::int64_t birth_time = 0;

    friend bool operator==(const Order&, const Order&) = default;
};

} // namespace lobsim
