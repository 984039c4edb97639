#pragma once

#include <cstdint>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/deposition.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

// One line of the simulated time series. On a depleted step the quote-derived
// fields fall back to the last known best quotes so the series stays defined.
struct StepRecord {
    std::int64_t time = 0;
    std::int64_t mid_halfticks = 0;  // best_ask + best_bid (twice the mid, exact)
    int spread = 0;                  // ticks
    std::uint32_t n_bid = 0;         // resting orders per side after the step
    std::uint32_t n_ask = 0;
    char event = 'L';                // M market, L limit rested, C limit crossed,
                                     // D depleted (event skipped, side reseeded)
    bool depleted = false;
};

// Post-warmup aggregates of one run.
struct RunSummary {
    std::int64_t steps = 0;
    std::int64_t warmup = 0;
    double mean_spread = 0.0;
    double mean_orders_per_side = 0.0;
    double market_order_fraction = 0.0;
    std::uint64_t market_orders = 0;
    std::uint64_t cross_match_pairs = 0;
    std::uint64_t depletion_count = 0;
};

// The event loop: per step, advance the clock, expire orders older than tau,
// then either apply one flow event drawn from the mechanism or — if a side
// is empty so best quotes are undefined — skip the event, reseed the missing
// side(s) with a single order at the last known best quote, and count the
// step as a depletion.
class Engine {
public:
    explicit Engine(const MechanismConfig& config);

    // Advance by one event step and report what happened.
    StepRecord step();

    const Book& book() const noexcept { return book_; }
    Book& book() noexcept { return book_; }  // probes snapshot/restore through this

    std::int64_t time() const noexcept { return book_.time(); }
    const MechanismConfig& config() const noexcept { return config_; }

    // Lifetime totals since construction (warmup included).
    std::uint64_t market_order_count() const noexcept { return market_orders_; }
    std::uint64_t depletion_count() const noexcept { return depletions_; }

private:
    void reseed_empty_sides();

    MechanismConfig config_;
    Pcg32 rng_;
    Book book_;
    int last_bid_;
    int last_ask_;
    std::uint64_t market_orders_ = 0;
    std::uint64_t depletions_ = 0;
};

// Drive an engine through config.warmup discarded steps and config.steps
// recorded ones, feeding every post-warmup record to `sink` (any callable
// taking const StepRecord&) and accumulating the post-warmup summary.
template <typename Sink>
RunSummary run_simulation(Engine& engine, Sink&& sink) {
    const MechanismConfig& config = engine.config();
    for (std::int64_t i = 0; i < config.warmup; ++i) {
        engine.step();
    }
    const std::uint64_t market_before = engine.market_order_count();
    const std::uint64_t cross_before = engine.book().counters().cross_pairs;
    const std::uint64_t depletions_before = engine.depletion_count();

    double spread_sum = 0.0;
    double orders_sum = 0.0;
    for (std::int64_t i = 0; i < config.steps; ++i) {
        const StepRecord rec = engine.step();
        spread_sum += rec.spread;
        orders_sum += 0.5 * (static_cast<double>(rec.n_bid) + rec.n_ask);
        sink(rec);
    }

    RunSummary summary;
    summary.steps = config.steps;
    summary.warmup = config.warmup;
    summary.mean_spread = spread_sum / static_cast<double>(config.steps);
    summary.mean_orders_per_side = orders_sum / static_cast<double>(config.steps);
    summary.market_orders = engine.market_order_count() - market_before;
    summary.market_order_fraction =
        static_cast<double>(summary.market_orders) / static_cast<double>(config.steps);
    summary.cross_match_pairs = engine.book().counters().cross_pairs - cross_before;
    summary.depletion_count = engine.depletion_count() - depletions_before;
    return summary;
}

inline RunSummary run_simulation(Engine& engine) {
    return run_simulation(engine, [](const StepRecord&) {});
}

// Mid-price increments r(t) = mid(t + lag) - mid(t), in half-ticks.
// A series shorter than lag yields an empty result.
std::vector<std::int64_t> returns(const std::vector<std::int64_t>& mid_halfticks,
                                  std::int64_t lag);

// Merge per-replica summaries into one, weighting means by step counts and
// summing event counts. Associative and commutative.
RunSummary merge_summaries(const std::vector<RunSummary>& parts);

} // namespace lobsim
