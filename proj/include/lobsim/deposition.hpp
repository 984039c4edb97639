#pragma once

#include <cstdint>

#include "lobsim/order.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

enum class EventKind : std::uint8_t { Market, Limit };

// One incoming order, fully determined before it touches the book.
// For a Market event `side` is the aggressor side (a buy market order
// consumes asks); `quote` is meaningful only for Limit events.
struct EventSpec {
    EventKind kind = EventKind::Limit;
    Side side = Side::Buy;
    int quote = 0;
};

// Which order-flow mechanism drives the simulation, plus everything needed
// to reproduce a run: flow parameters, order lifetime, seed, and run length.
//
// Mechanisms:
//   1  uniform band:  limits land uniformly within L ticks of the opposite
//      best (inclusive of it, so crossings can occur); market orders arrive
//      with fixed probability pi.
//   2  spread band:   limits land uniformly in a band of k*spread ticks that
//      never reaches the opposite best, so crossings are impossible; market
//      orders arrive with fixed probability pi.
//   3  signed gap:    a displacement xi ~ U{-L..L} is drawn; the order is a
//      limit placed xi ticks inside the opposite best when xi < spread and
//      converts to a market order otherwise, so the market-order fraction
//      is emergent rather than a parameter.
struct MechanismConfig {
    int mechanism = 2;
    double pi = 1.0 / 3.0;            // market-order probability (mechanisms 1, 2)
    int L = 100;                      // band half-width in ticks (mechanisms 1, 3)
    int k = 4;                        // band width in units of the spread (mechanism 2)
    std::int64_t tau = 400;           // resting-order lifetime in steps
    std::uint64_t seed = 1;
    std::int64_t steps = 1'000'000;   // recorded steps, after warmup
    std::int64_t warmup = 5'000;      // discarded steps

    // Throws ConfigError on out-of-range values.
    void validate() const;

    // The conventional parameter set for each mechanism.
    static MechanismConfig defaults_for(int mechanism);
};

// All draws consume the generator in a fixed order (side, then kind, then
// quote) so that a (seed, config) pair replays identically.

// Mechanism 1. Sells land uniformly on {b, ..., b+L}, buys on {a-L, ..., a};
// the endpoints touch the opposite best, so a limit can annihilate there.
inline EventSpec next_event_uniform_band(Pcg32& rng, int best_bid, int best_ask,
                                         double pi, int L) {
    EventSpec ev;
    ev.side = rng.coin() ? Side::Buy : Side::Sell;
    if (rng.bernoulli(pi)) {
        ev.kind = EventKind::Market;
        return ev;
    }
    ev.kind = EventKind::Limit;
    ev.quote = ev.side == Side::Sell ? rng.uniform_int(best_bid, best_bid + L)
                                     : rng.uniform_int(best_ask - L, best_ask);
    return ev;
}

// Mechanism 2. Sells land uniformly on {b+1, ..., b+k*s}, buys on
// {a-k*s, ..., a-1}, where s is the current spread; the band rescales with
// the spread and stays strictly behind the opposite best.
inline EventSpec next_event_spread_band(Pcg32& rng, int best_bid, int best_ask,
                                        double pi, int k) {
    EventSpec ev;
    ev.side = rng.coin() ? Side::Buy : Side::Sell;
    if (rng.bernoulli(pi)) {
        ev.kind = EventKind::Market;
        return ev;
    }
    ev.kind = EventKind::Limit;
    const int s = best_ask - best_bid;
    ev.quote = ev.side == Side::Sell ? rng.uniform_int(best_bid + 1, best_bid + k * s)
                                     : rng.uniform_int(best_ask - k * s, best_ask - 1);
    return ev;
}

// Mechanism 3. A displacement xi ~ U{-L, ..., L} measured inward from the
// opposite best: sells quote at a-xi, buys at b+xi. When xi >= spread the
// quote would cross, and the order is issued as a market order instead.
// Limits satisfy xi <= s-1 and therefore stay strictly behind the opposite
// best; negative xi simply lands behind the same-side best.
inline EventSpec next_event_signed_gap(Pcg32& rng, int best_bid, int best_ask, int L) {
    EventSpec ev;
    ev.side = rng.coin() ? Side::Buy : Side::Sell;
    const int xi = rng.uniform_int(-L, L);
    const int s = best_ask - best_bid;
    if (xi >= s) {
        ev.kind = EventKind::Market;
        return ev;
    }
    ev.kind = EventKind::Limit;
    ev.quote = ev.side == Side::Sell ? best_ask - xi : best_bid + xi;
    return ev;
}

// Dispatch on config.mechanism; config must already be validated.
inline EventSpec next_event(Pcg32& rng, int best_bid, int best_ask,
                            const MechanismConfig& config) {
    switch (config.mechanism) {
        case 1: return next_event_uniform_band(rng, best_bid, best_ask, config.pi, config.L);
        case 2: return next_event_spread_band(rng, best_bid, best_ask, config.pi, config.k);
        default: return next_event_signed_gap(rng, best_bid, best_ask, config.L);
    }
}

} // namespace lobsim
