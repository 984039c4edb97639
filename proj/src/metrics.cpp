#include "lobsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lobsim/errors.hpp"

namespace lobsim {

namespace {

// Volume resting at quotes within [win_lo, win_hi] on one side.
template <typename MapT>
std::int64_t volume_in_window(const MapT& levels, int win_lo, int win_hi) {
    std::int64_t total = 0;
    for (const auto& [quote, level] : levels) {
        if (quote < win_lo || quote > win_hi) {
            // Maps iterate from the best quote outward, so the first quote
            // past the window ends the scan on that side.
            break;
        }
        total += static_cast<std::int64_t>(level.size());
    }
    return total;
}

} // namespace

GranularitySample measure_granularity(const Book& book, Side side) {
    GranularitySample sample;
    sample.time = book.time();
    sample.side = side;
    sample.s = book.spread();  // throws UndefinedPriceError if a side is empty

    int best = 0;
    int range = 0;
    if (side == Side::Sell) {
        best = book.asks().begin()->first;
        const int farthest = book.asks().rbegin()->first;
        range = farthest - best + 1;
    } else {
        best = book.bids().begin()->first;
        const int farthest = book.bids().rbegin()->first;
        range = best - farthest + 1;
    }

    sample.N = range / sample.s;
    if (sample.N == 0) {
        return sample;  // occupied range shorter than one spread: no estimate
    }
    const int covered = sample.N * sample.s;
    if (side == Side::Sell) {
        sample.omega = volume_in_window(book.asks(), best, best + covered - 1);
    } else {
        sample.omega = volume_in_window(book.bids(), best - covered + 1, best);
    }
    sample.g = static_cast<double>(sample.omega) / static_cast<double>(covered);
    sample.valid = sample.N > 2;
    return sample;
}

double zero_order_impact(double omega, double g) {
    if (!(g > 0.0)) {
        throw FitError("zero_order_impact requires g > 0");
    }
    return omega / g;
}

BatchMeansResult batch_means(const std::vector<double>& series, int n_batches) {
    BatchMeansResult result;
    const std::size_t n = series.size();
    if (n == 0) return result;

    const std::size_t batch_len = n_batches > 0 ? n / static_cast<std::size_t>(n_batches) : 0;
    if (n_batches < 4 || batch_len < 1) {
        RunningStats stats;
        for (double x : series) stats.add(x);
        result.mean = stats.mean();
        result.stderr_mean = stats.stderr_mean();
        result.batches_used = 1;
        return result;
    }

    RunningStats over_batches;
    for (int b = 0; b < n_batches; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * batch_len;
        double sum = 0.0;
        for (std::size_t i = begin; i < begin + batch_len; ++i) sum += series[i];
        over_batches.add(sum / static_cast<double>(batch_len));
    }
    result.mean = over_batches.mean();
    result.stderr_mean = over_batches.stderr_mean();
    result.batches_used = n_batches;
    return result;
}

Histogram histogram_with_edges(const std::vector<double>& values,
                               const std::vector<double>& edges) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
        throw FitError("histogram needs at least two ascending edges");
    }
    Histogram hist;
    hist.bins.resize(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        hist.bins[i].lo = edges[i];
        hist.bins[i].hi = edges[i + 1];
    }
    for (double v : values) {
        if (v < edges.front() || v > edges.back()) continue;
        // Bins are [lo, hi); the final bin also includes its upper edge so
        // the maximum sample is not dropped.
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t idx = static_cast<std::size_t>(it - edges.begin());
        idx = idx == 0 ? 0 : idx - 1;
        if (idx >= hist.bins.size()) idx = hist.bins.size() - 1;
        ++hist.bins[idx].count;
        ++hist.total;
    }
    if (hist.total > 0) {
        for (HistogramBin& bin : hist.bins) {
            const double width = bin.hi - bin.lo;
            bin.density = width > 0.0
                              ? static_cast<double>(bin.count) /
                                    (static_cast<double>(hist.total) * width)
                              : 0.0;
        }
    }
    return hist;
}

std::vector<double> log_edges(double lo, double hi, int bins_per_decade,
                              bool integer_align) {
    if (!(lo > 0.0) || hi < lo) {
        throw FitError("log-spaced edges require 0 < lo <= hi");
    }
    if (bins_per_decade < 1) {
        throw FitError("bins_per_decade must be positive");
    }
    std::vector<double> edges;
    if (integer_align) {
        const double factor = std::pow(10.0, 1.0 / bins_per_decade);
        double edge = std::max(1.0, std::floor(lo));
        edges.push_back(edge);
        while (edge <= hi) {
            edge = std::max(edge + 1.0, std::round(edge * factor));
            edges.push_back(edge);
        }
        return edges;
    }
    if (lo == hi) {
        return {0.95 * lo, 1.05 * lo};
    }
    const double decades = std::log10(hi / lo);
    const int n_bins = std::max(1, static_cast<int>(std::ceil(decades * bins_per_decade)));
    edges.reserve(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i) {
        edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / n_bins));
    }
    edges.back() = hi;
    return edges;
}

Histogram log_histogram(const std::vector<double>& values, int bins_per_decade,
                        bool integer_align) {
    if (values.empty()) {
        throw FitError("log histogram of an empty sample");
    }
    for (double v : values) {
        if (!(v > 0.0)) {
            throw FitError("log histogram requires strictly positive values");
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    return histogram_with_edges(values,
                                log_edges(*lo_it, *hi_it, bins_per_decade, integer_align));
}

Histogram granularity_histogram(const std::vector<GranularitySample>& samples,
                                int n_bins) {
    std::vector<double> values;
    values.reserve(samples.size());
    for (const GranularitySample& s : samples) {
        if (s.valid) values.push_back(s.g);
    }
    if (values.empty()) {
        throw FitError("no valid granularity samples to bin");
    }
    if (n_bins < 1) {
        throw FitError("granularity histogram needs at least one bin");
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> edges;
    if (lo == hi) {
        edges = {0.95 * lo, 1.05 * lo};
    } else {
        edges.reserve(static_cast<std::size_t>(n_bins) + 1);
        for (int i = 0; i <= n_bins; ++i) {
            edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / n_bins));
        }
        edges.back() = hi;
    }
    return histogram_with_edges(values, edges);
}

} // namespace lobsim
