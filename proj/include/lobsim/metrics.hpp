#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/order.hpp"

namespace lobsim {

// One evaluation of the granularity g on one side of the book.
//
// The side is partitioned from its best quote outward into N consecutive
// intervals of s ticks (s = current spread), where N = floor(range / s) and
// range = |farthest occupied quote - best quote| + 1; the trailing partial
// interval is dropped. Omega is the resting volume inside the N*s covered
// ticks and g = Omega / (N * s) — the average linear order density, kept as
// an exact integer ratio. The sample is only meaningful (valid) when N > 2.
struct GranularitySample {
    std::int64_t time = 0;
    Side side = Side::Buy;
    int s = 0;                 // spread at measurement time, ticks
    int N = 0;                 // number of complete s-tick intervals
    std::int64_t omega = 0;    // resting volume in the covered window
    double g = 0.0;            // omega / (N * s)
    bool valid = false;        // N > 2
};

// Measure g on `side`. Requires both best quotes (throws UndefinedPriceError
// otherwise). When the occupied range is shorter than one spread (N = 0) the
// sample is returned with N = 0, g = 0, valid = false.
GranularitySample measure_granularity(const Book& book, Side side);

// The reference prediction dp = omega / g for a uniform book of density g.
// Throws FitError when g <= 0 (the sparse-book limit where it diverges).
double zero_order_impact(double omega, double g);

// --- generic statistics helpers --------------------------------------------

// Streaming mean / variance (Welford).
class RunningStats {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double stderr_mean() const noexcept {
        return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct BatchMeansResult {
    double mean = 0.0;
    double stderr_mean = 0.0;
    int batches_used = 0;
};

// Mean and standard error of an autocorrelated series: split it in order
// into n_batches contiguous batches and use the dispersion of batch means.
// Falls back to the i.i.d. formula when fewer than 4 batches can be formed.
BatchMeansResult batch_means(const std::vector<double>& series, int n_batches);

// --- histograms -------------------------------------------------------------

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t count = 0;
    double density = 0.0;  // count / (total * (hi - lo)); integrates to 1
};

struct Histogram {
    std::vector<HistogramBin> bins;
    std::uint64_t total = 0;  // samples inside the covered support
};

// Histogram over explicit ascending edges (values outside are dropped);
// densities are normalized by the in-range total so they integrate to 1.
Histogram histogram_with_edges(const std::vector<double>& values,
                               const std::vector<double>& edges);

// Geometric (log-spaced) bin edges covering [lo, hi] with the given
// resolution. When integer_align is set, edges are rounded to the integer
// lattice and deduplicated so discrete values cannot create artificial
// gaps between populated bins. Requires 0 < lo <= hi.
std::vector<double> log_edges(double lo, double hi, int bins_per_decade,
                              bool integer_align);

// Log-binned histogram of strictly positive values.
Histogram log_histogram(const std::vector<double>& values, int bins_per_decade,
                        bool integer_align);

// Normalized density of valid granularity samples over `n_bins` log-spaced
// bins spanning the observed range. Throws FitError when no sample is valid.
Histogram granularity_histogram(const std::vector<GranularitySample>& samples,
                                int n_bins);

} // namespace lobsim
