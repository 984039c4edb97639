#pragma once

#include <cstdint>
#include <vector>

#include "lobsim/metrics.hpp"

namespace lobsim {

// One observation for a power-law fit. sigma_y <= 0 marks the point as
// carrying no error estimate; a fit is weighted only when every point in
// range has sigma_y > 0, otherwise it falls back to ordinary least squares.
struct FitPoint {
    double x = 0.0;
    double y = 0.0;
    double sigma_y = 0.0;
};

struct PowerLawFit {
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double amplitude = 0.0;   // y ~ amplitude * x^exponent
    double r_squared = 0.0;
    double range_lo = 0.0;    // min/max x actually used
    double range_hi = 0.0;
    std::size_t n_points = 0;
};

// Least squares on (log x, log y) restricted to x in [range_lo, range_hi]:
// exponent = slope, amplitude = exp(intercept). Weighted by 1/sigma_log^2
// when error bars are supplied (sigma_log = sigma_y / y), with the exponent
// standard error taken from the fit covariance; unweighted fits scale the
// covariance by the residual variance instead. Throws FitError on fewer
// than 4 usable points, nonpositive x or y in range, or all-equal x.
PowerLawFit fit_powerlaw(const std::vector<FitPoint>& points,
                         double range_lo, double range_hi);
PowerLawFit fit_powerlaw(const std::vector<FitPoint>& points);

enum class TailMethod : std::uint8_t { Hill, LogLogRegression };

struct TailFit {
    double gamma = 0.0;          // PDF tail exponent, negative for heavy tails
    double stderr_gamma = 0.0;
    double tail_fraction = 0.0;  // top order-statistic fraction (Hill only)
    TailMethod method = TailMethod::Hill;
};

// Both tail estimates side by side, plus the diagnostics needed to judge
// whether a power-law description is warranted at all.
struct TailEstimate {
    TailFit hill;
    TailFit regression;
    double r_squared = 0.0;       // of the log-log regression
    double zero_fraction = 0.0;   // returns exactly zero (excluded from fits)
    std::size_t n_nonzero = 0;
    std::size_t n_bins_used = 0;  // populated histogram bins in the fit
    double fit_lo = 0.0;          // regression window edges
    double fit_hi = 0.0;
    bool decade_span = false;     // window covers at least one decade
    bool degraded = false;        // too few populated bins for a trustworthy line
    bool is_power_law = false;    // r_squared >= threshold and decade_span
};

// Tail exponent gamma of the return PDF, p(|r|) ~ |r|^gamma, from pooled
// absolute returns (left and right tails pooled by symmetry; exact zeros
// excluded and reported). Two estimators:
//   - Hill on the top `tail_fraction` order statistics, converted from the
//     survival-function index alpha to the PDF exponent gamma = -(alpha+1),
//     with stderr alpha/sqrt(k);
//   - unweighted log-log regression of the log-binned density over all
//     populated bins (integer-aligned bins, `bins_per_decade` resolution).
// Throws FitError when fewer than 1000 nonzero returns are available.
TailEstimate tail_exponent(const std::vector<std::int64_t>& returns,
                           double tail_fraction = 0.01,
                           int bins_per_decade = 12,
                           double r2_threshold = 0.95);

} // namespace lobsim
