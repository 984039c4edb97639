#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lobsim/order.hpp"

namespace lobsim {

// What happened to an incoming limit order.
enum class PlaceOutcome : std::uint8_t {
    Rested,   // joined the back of its price level
    Matched,  // crossed the opposite best and annihilated its oldest order
};

struct PlaceResult {
    PlaceOutcome outcome = PlaceOutcome::Rested;
    std::uint64_t order_id = 0;       // id assigned to the incoming order
    int match_quote = 0;              // price of the annihilated order (Matched only)
};

struct ExecutionReport {
    int filled = 0;                   // lots actually consumed
    std::optional<int> old_best;      // opposite best before execution
    std::optional<int> new_best;      // opposite best after execution
};

// Lifetime totals, used by conservation checks and run reports.
struct BookCounters {
    std::uint64_t placed = 0;         // limit orders assigned an id
    std::uint64_t filled = 0;         // resting orders consumed by market orders
    std::uint64_t cancelled = 0;      // resting orders expired
    std::uint64_t cross_pairs = 0;    // limit-vs-limit annihilations (2 orders each)

    friend bool operator==(const BookCounters&, const BookCounters&) = default;
};

// Price-time-priority book on an integer tick grid, one-lot orders.
//
// Each side is a map from quote to a FIFO queue (front = oldest). Bids are
// keyed descending so begin() is always the best quote on either side.
// Expiry is tracked by a deque of placement records in birth order; because
// queues are FIFO and ids increase monotonically, a record that reaches the
// front of that deque refers to a live order if and only if that order is
// at the front of its level queue, which makes expiry O(1) amortized with
// no auxiliary index.
class Book {
public:
    using Level = std::vector<Order>;
    using BidMap = std::map<int, Level, std::greater<int>>;
    using AskMap = std::map<int, Level>;

    // --- inspection -------------------------------------------------------

    std::optional<int> best_bid() const noexcept;
    std::optional<int> best_ask() const noexcept;

    // Spread in ticks; throws UndefinedPriceError if either side is empty.
    int spread() const;

    // Twice the mid-price, in ticks (i.e. the mid expressed in half-ticks).
    // Exact integer: best_ask + best_bid. Throws if either side is empty.
    std::int64_t mid_halfticks() const;

    std::size_t bid_order_count() const noexcept { return n_bid_; }
    std::size_t ask_order_count() const noexcept { return n_ask_; }
    std::size_t order_count(Side s) const noexcept { return s == Side::Buy ? n_bid_ : n_ask_; }
    bool side_empty(Side s) const noexcept { return order_count(s) == 0; }

    const BidMap& bids() const noexcept { return bids_; }
    const AskMap& asks() const noexcept { return asks_; }
    const BookCounters& counters() const noexcept { return counters_; }

    // (quote, resting volume) pairs ordered from the best quote outward;
    // empty side yields an empty list.
    std::vector<std::pair<int, int>> depth_profile(Side side) const;

    std::int64_t time() const noexcept { return time_; }
    void set_time(std::int64_t t) noexcept { time_ = t; }

    // --- mutation ---------------------------------------------------------

    // Submit a limit order at `quote` with the book's current time as its
    // birth time. A sell at or below the best bid (or a buy at or above the
    // best ask) annihilates the oldest order resting at that opposite best
    // quote and never rests; anything else joins the back of its level.
    PlaceResult place_limit(Side side, int quote);

    // Consume up to `volume` lots from the side opposite the aggressor,
    // best price first, oldest order first within a price.
    ExecutionReport execute_market(Side aggressor, int volume);

    // Remove every resting order with birth_time <= time - lifetime.
    // Returns the number of orders cancelled.
    std::size_t cancel_expired(std::int64_t lifetime);

    // --- integrity / persistence ------------------------------------------

    // Full structural scan; throws InvariantViolation on the first problem.
    // Intended for tests and debugging, not the hot path.
    void validate() const;

    // Text form: "time=<t>", then one line per occupied level, bids from the
    // best outward then asks from the best outward, each as
    // "<B|A> <quote> <birth,birth,...>" with births in queue order.
    std::string serialize() const;

    friend bool operator==(const Book&, const Book&) = default;

private:
    struct ExpiryEntry {
        std::int64_t birth_time = 0;
        std::uint64_t id = 0;
        int quote = 0;
        Side side = Side::Buy;

        friend bool operator==(const ExpiryEntry&, const ExpiryEntry&) = default;
    };

    // Remove the oldest order at the best quote of `side`; the level must
    // exist. Returns its quote.
    int pop_oldest_at_best(Side side);

    BidMap bids_;
    AskMap asks_;
    std::deque<ExpiryEntry> expiry_;
    std::size_t n_bid_ = 0;
    std::size_t n_ask_ = 0;
    std::int64_t time_ = 0;
    std::uint64_t next_order_id_ = 1;
    BookCounters counters_;
};

// A restorable copy of the full book state (orders, ids, clocks, counters,
// pending expiries). Restoring makes the book indistinguishable from one
// that never diverged, which is what lets measurement probes run without
// perturbing the simulated path.
class BookSnapshot {
public:
    explicit BookSnapshot(const Book& book) : state_(book) {}

    void restore(Book& book) const { book = state_; }
    const Book& state() const noexcept { return state_; }

private:
    Book state_;
};

} // namespace lobsim
