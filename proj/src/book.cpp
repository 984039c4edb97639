#include "lobsim/book.hpp"

#include <sstream>

#include "lobsim/errors.hpp"

namespace lobsim {

std::optional<int> Book::best_bid() const noexcept {
    if (bids_.empty()) return std::nullopt;
    return bids_.begin()->first;
}

std::optional<int> Book::best_ask() const noexcept {
    if (asks_.empty()) return std::nullopt;
    return asks_.begin()->first;
}

int Book::spread() const {
    if (bids_.empty() || asks_.empty()) {
        throw UndefinedPriceError("spread undefined: one side of the book is empty");
    }
    return asks_.begin()->first - bids_.begin()->first;
}

std::int64_t Book::mid_halfticks() const {
    if (bids_.empty() || asks_.empty()) {
        throw UndefinedPriceError("mid undefined: one side of the book is empty");
    }
    return static_cast<std::int64_t>(asks_.begin()->first) + bids_.begin()->first;
}

std::vector<std::pair<int, int>> Book::depth_profile(Side side) const {
    std::vector<std::pair<int, int>> out;
    if (side == Side::Buy) {
        out.reserve(bids_.size());
        for (const auto& [quote, level] : bids_) {
            out.emplace_back(quote, static_cast<int>(level.size()));
        }
    } else {
        out.reserve(asks_.size());
        for (const auto& [quote, level] : asks_) {
            out.emplace_back(quote, static_cast<int>(level.size()));
        }
    }
    return out;
}

int Book::pop_oldest_at_best(Side side) {
    if (side == Side::Buy) {
        auto it = bids_.begin();
        Level& level = it->second;
        const int quote = it->first;
        level.erase(level.begin());
        if (level.empty()) bids_.erase(it);
        --n_bid_;
        return quote;
    }
    auto it = asks_.begin();
    Level& level = it->second;
    const int quote = it->first;
    level.erase(level.begin());
    if (level.empty()) asks_.erase(it);
    --n_ask_;
    return quote;
}

PlaceResult Book::place_limit(Side side, int quote) {
    PlaceResult result;
    result.order_id = next_order_id_++;
    ++counters_.placed;

    if (side == Side::Sell) {
        const auto bb = best_bid();
        if (bb && quote <= *bb) {
            // Crossing limit: annihilates the oldest order at the opposite
            // best; the incoming order is consumed in the same pair.
            result.outcome = PlaceOutcome::Matched;
            result.match_quote = pop_oldest_at_best(Side::Buy);
            ++counters_.cross_pairs;
            return result;
        }
        asks_[quote].push_back(Order{result.order_id, side, quote, 1, time_});
        ++n_ask_;
    } else {
        const auto ba = best_ask();
        if (ba && quote >= *ba) {
            result.outcome = PlaceOutcome::Matched;
            result.match_quote = pop_oldest_at_best(Side::Sell);
            ++counters_.cross_pairs;
            return result;
        }
        bids_[quote].push_back(Order{result.order_id, side, quote, 1, time_});
        ++n_bid_;
    }
    expiry_.push_back(ExpiryEntry{time_, result.order_id, quote, side});
    result.outcome = PlaceOutcome::Rested;
    return result;
}

ExecutionReport Book::execute_market(Side aggressor, int volume) {
    ExecutionReport report;
    const Side resting = opposite(aggressor);
    report.old_best = resting == Side::Buy ? best_bid() : best_ask();
    while (report.filled < volume && !side_empty(resting)) {
        pop_oldest_at_best(resting);
        ++report.filled;
        ++counters_.filled;
    }
    report.new_best = resting == Side::Buy ? best_bid() : best_ask();
    return report;
}

std::size_t Book::cancel_expired(std::int64_t lifetime) {
    std::size_t removed = 0;
    const std::int64_t cutoff = time_ - lifetime;
    while (!expiry_.empty() && expiry_.front().birth_time <= cutoff) {
        const ExpiryEntry entry = expiry_.front();
        expiry_.pop_front();
        if (entry.side == Side::Buy) {
            auto it = bids_.find(entry.quote);
            if (it != bids_.end() && it->second.front().id == entry.id) {
                it->second.erase(it->second.begin());
                if (it->second.empty()) bids_.erase(it);
                --n_bid_;
                ++counters_.cancelled;
                ++removed;
            }
        } else {
            auto it = asks_.find(entry.quote);
            if (it != asks_.end() && it->second.front().id == entry.id) {
                it->second.erase(it->second.begin());
                if (it->second.empty()) asks_.erase(it);
                --n_ask_;
                ++counters_.cancelled;
                ++removed;
            }
        }
        // Entries whose order was already filled or annihilated are stale;
        // the id test above rejects them and they are simply dropped.
    }
    return removed;
}

namespace {

template <typename MapT>
void validate_side(const MapT& levels, Side expected_side, std::size_t expected_count,
                   std::uint64_t id_bound) {
    std::size_t count = 0;
    for (const auto& [quote, level] : levels) {
        if (level.empty()) {
            throw InvariantViolation("empty level left in map at quote " + std::to_string(quote));
        }
        std::uint64_t last_id = 0;
        std::int64_t last_birth = INT64_MIN;
        for (const Order& order : level) {
            if (order.side != expected_side) {
                throw InvariantViolation("order on the wrong side at quote " + std::to_string(quote));
            }
            if (order.quote != quote) {
                throw InvariantViolation("order quote disagrees with its level key");
            }
            if (order.volume != 1) {
                throw InvariantViolation("order volume must be one lot");
            }
            if (order.id == 0 || order.id >= id_bound) {
                throw InvariantViolation("order id outside the issued range");
            }
            if (order.id <= last_id) {
                throw InvariantViolation("level queue ids not strictly increasing");
            }
            if (order.birth_time < last_birth) {
                throw InvariantViolation("level queue birth times not in arrival order");
            }
            last_id = order.id;
            last_birth = order.birth_time;
            ++count;
        }
    }
    if (count != expected_count) {
        throw InvariantViolation("side order count disagrees with cached total");
    }
}

} // namespace

void Book::validate() const {
    if (!bids_.empty() && !asks_.empty() && bids_.begin()->first >= asks_.begin()->first) {
        throw InvariantViolation("best bid at or above best ask");
    }
    validate_side(bids_, Side::Buy, n_bid_, next_order_id_);
    validate_side(asks_, Side::Sell, n_ask_, next_order_id_);

    std::int64_t last_birth = INT64_MIN;
    for (const ExpiryEntry& entry : expiry_) {
        if (entry.birth_time < last_birth) {
            throw InvariantViolation("expiry queue out of birth order");
        }
        last_birth = entry.birth_time;
    }

    const std::uint64_t resting = n_bid_ + n_ask_;
    const std::uint64_t accounted =
        resting + counters_.filled + counters_.cancelled + 2 * counters_.cross_pairs;
    if (counters_.placed != accounted) {
        throw InvariantViolation("order conservation broken: placed != resting + filled + cancelled + 2*cross_pairs");
    }
}

std::string Book::serialize() const {
    std::ostringstream out;
    out << "time=" << time_ << '\n';
    auto write_level = [&out](char tag, int quote, const Level& level) {
        out << tag << ' ' << quote << ' ';
        for (std::size_t i = 0; i < level.size(); ++i) {
            if (i > 0) out << ',';
            out << level[i].birth_time;
        }
        out << '\n';
    };
    for (const auto& [quote, level] : bids_) write_level('B', quote, level);
    for (const auto& [quote, level] : asks_) write_level('A', quote, level);
    return out.str();
}

} // namespace lobsim
