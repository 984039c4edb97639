#include "lobsim/engine.hpp"

#include "lobsim/errors.hpp"

namespace lobsim {

Engine::Engine(const MechanismConfig& config)
    : config_(config), rng_(config.seed), last_bid_(-1), last_ask_(1) {
    config_.validate();
    // Deterministic initial book: one bid and one ask straddling quote 0,
    // so best quotes exist from the first step. Consumes no randomness.
    book_.place_limit(Side::Buy, -1);
    book_.place_limit(Side::Sell, 1);
}

void Engine::reseed_empty_sides() {
    if (book_.side_empty(Side::Buy)) {
        const PlaceResult r = book_.place_limit(Side::Buy, last_bid_);
        if (r.outcome != PlaceOutcome::Rested) {
            throw InvariantViolation("reseeded bid crossed the book");
        }
    }
    if (book_.side_empty(Side::Sell)) {
        const PlaceResult r = book_.place_limit(Side::Sell, last_ask_);
        if (r.outcome != PlaceOutcome::Rested) {
            throw InvariantViolation("reseeded ask crossed the book");
        }
    }
}

StepRecord Engine::step() {
    book_.set_time(book_.time() + 1);
    book_.cancel_expired(config_.tau);

    StepRecord rec;
    rec.time = book_.time();

    if (book_.side_empty(Side::Buy) || book_.side_empty(Side::Sell)) {
        // Best quotes undefined: no mechanism can draw an event. Record the
        // depletion and restore a one-order side at the last known quote.
        ++depletions_;
        reseed_empty_sides();
        rec.event = 'D';
        rec.depleted = true;
    } else {
        const EventSpec ev = next_event(rng_, *book_.best_bid(), *book_.best_ask(), config_);
        if (ev.kind == EventKind::Market) {
            ++market_orders_;
            book_.execute_market(ev.side, 1);
            rec.event = 'M';
        } else {
            const PlaceResult placed = book_.place_limit(ev.side, ev.quote);
            rec.event = placed.outcome == PlaceOutcome::Matched ? 'C' : 'L';
        }
    }

    const auto bb = book_.best_bid();
    const auto ba = book_.best_ask();
    if (bb) last_bid_ = *bb; else rec.depleted = true;
    if (ba) last_ask_ = *ba; else rec.depleted = true;
    if (last_bid_ >= last_ask_) {
        throw InvariantViolation("best bid reached the best ask after an event");
    }

    rec.mid_halfticks = static_cast<std::int64_t>(last_ask_) + last_bid_;
    rec.spread = last_ask_ - last_bid_;
    rec.n_bid = static_cast<std::uint32_t>(book_.bid_order_count());
    rec.n_ask = static_cast<std::uint32_t>(book_.ask_order_count());
    return rec;
}

std::vector<std::int64_t> returns(const std::vector<std::int64_t>& mid_halfticks,
                                  std::int64_t lag) {
    if (lag < 1) {
        throw ConfigError("return lag must be at least 1");
    }
    const auto n = static_cast<std::int64_t>(mid_halfticks.size());
    std::vector<std::int64_t> out;
    if (n <= lag) return out;
    out.reserve(static_cast<std::size_t>(n - lag));
    for (std::int64_t i = 0; i + lag < n; ++i) {
        out.push_back(mid_halfticks[static_cast<std::size_t>(i + lag)] -
                      mid_halfticks[static_cast<std::size_t>(i)]);
    }
    return out;
}

RunSummary merge_summaries(const std::vector<RunSummary>& parts) {
    RunSummary merged;
    if (parts.empty()) return merged;
    double spread_weighted = 0.0;
    double orders_weighted = 0.0;
    for (const RunSummary& p : parts) {
        merged.steps += p.steps;
        merged.warmup += p.warmup;
        spread_weighted += p.mean_spread * static_cast<double>(p.steps);
        orders_weighted += p.mean_orders_per_side * static_cast<double>(p.steps);
        merged.market_orders += p.market_orders;
        merged.cross_match_pairs += p.cross_match_pairs;
        merged.depletion_count += p.depletion_count;
    }
    const auto total = static_cast<double>(merged.steps);
    merged.mean_spread = spread_weighted / total;
    merged.mean_orders_per_side = orders_weighted / total;
    merged.market_order_fraction = static_cast<double>(merged.market_orders) / total;
    return merged;
}

} // namespace lobsim
