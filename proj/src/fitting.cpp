#include "lobsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lobsim/errors.hpp"

namespace lobsim {

PowerLawFit fit_powerlaw(const std::vector<FitPoint>& points,
                         double range_lo, double range_hi) {
    std::vector<FitPoint> used;
    used.reserve(points.size());
    bool all_weighted = true;
    for (const FitPoint& p : points) {
        if (p.x < range_lo || p.x > range_hi) continue;
        if (!(p.x > 0.0) || !(p.y > 0.0)) {
            throw FitError("power-law fit requires positive x and y in range");
        }
        used.push_back(p);
        if (!(p.sigma_y > 0.0)) all_weighted = false;
    }
    if (used.size() < 4) {
        throw FitError("power-law fit needs at least 4 points in range (got " +
                       std::to_string(used.size()) + ")");
    }

    const std::size_t n = used.size();
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -std::numeric_limits<double>::infinity();
    for (const FitPoint& p : used) {
        const double lx = std::log(p.x);
        const double ly = std::log(p.y);
        const double sigma_log = all_weighted ? p.sigma_y / p.y : 1.0;
        const double w = 1.0 / (sigma_log * sigma_log);
        sw += w;
        sx += w * lx;
        sy += w * ly;
        sxx += w * lx * lx;
        sxy += w * lx * ly;
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 0.0) || x_lo == x_hi) {
        throw FitError("power-law fit is degenerate: all x equal");
    }
    const double slope = (sw * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / sw;

    double ss_res = 0.0;
    double ss_tot = 0.0;
    const double mean_ly = sy / sw;
    for (const FitPoint& p : used) {
        const double lx = std::log(p.x);
        const double ly = std::log(p.y);
        const double sigma_log = all_weighted ? p.sigma_y / p.y : 1.0;
        const double w = 1.0 / (sigma_log * sigma_log);
        const double resid = ly - (intercept + slope * lx);
        ss_res += w * resid * resid;
        ss_tot += w * (ly - mean_ly) * (ly - mean_ly);
    }

    // Covariance of the linear fit, scaled by the reduced chi-square (the
    // numpy/gnuplot convention): with per-point errors the scaling folds
    // lack-of-fit into the parameter error, so "within n sigma" statements
    // stay meaningful when the data deviate systematically from a power law;
    // without errors it reduces to the classic OLS residual formula.
    const double slope_var = (sw / det) * (ss_res / static_cast<double>(n - 2));

    PowerLawFit fit;
    fit.exponent = slope;
    fit.exponent_stderr = std::sqrt(std::max(0.0, slope_var));
    fit.amplitude = std::exp(intercept);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.range_lo = x_lo;
    fit.range_hi = x_hi;
    fit.n_points = n;
    return fit;
}

PowerLawFit fit_powerlaw(const std::vector<FitPoint>& points) {
    return fit_powerlaw(points, -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
}

TailEstimate tail_exponent(const std::vector<std::int64_t>& returns,
                           double tail_fraction, int bins_per_decade,
                           double r2_threshold) {
    if (!(tail_fraction > 0.0) || tail_fraction > 0.5) {
        throw FitError("tail_fraction must lie in (0, 0.5]");
    }
    std::vector<double> magnitudes;
    magnitudes.reserve(returns.size());
    std::size_t zeros = 0;
    for (std::int64_t r : returns) {
        if (r == 0) {
            ++zeros;
        } else {
            magnitudes.push_back(std::abs(static_cast<double>(r)));
        }
    }

    TailEstimate est;
    est.n_nonzero = magnitudes.size();
    est.zero_fraction = returns.empty()
                            ? 0.0
                            : static_cast<double>(zeros) / static_cast<double>(returns.size());
    if (magnitudes.size() < 1000) {
        throw FitError("tail estimation needs at least 1000 nonzero returns (got " +
                       std::to_string(magnitudes.size()) + ")");
    }

    // Hill estimator on the top-k order statistics.
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    const auto k = static_cast<std::size_t>(
        std::max(1.0, std::floor(tail_fraction * static_cast<double>(magnitudes.size()))));
    double log_sum = 0.0;
    const double x_ref = magnitudes[k];  // the (k+1)-th largest
    for (std::size_t i = 0; i < k; ++i) {
        log_sum += std::log(magnitudes[i] / x_ref);
    }
    const double hill_alpha = static_cast<double>(k) / log_sum;
    est.hill.gamma = -(hill_alpha + 1.0);
    est.hill.stderr_gamma = hill_alpha / std::sqrt(static_cast<double>(k));
    est.hill.tail_fraction = tail_fraction;
    est.hill.method = TailMethod::Hill;

    // Log-log regression over the binned density. Unweighted, matching a
    // straight-line fit to the plotted PDF.
    const Histogram hist = log_histogram(magnitudes, bins_per_decade, true);
    std::vector<FitPoint> pts;
    for (const HistogramBin& bin : hist.bins) {
        if (bin.count == 0) continue;
        pts.push_back(FitPoint{std::sqrt(bin.lo * bin.hi), bin.density, 0.0});
    }
    est.n_bins_used = pts.size();
    est.regression.method = TailMethod::LogLogRegression;
    est.regression.tail_fraction = 0.0;
    if (pts.size() >= 2) {
        est.fit_lo = pts.front().x;
        est.fit_hi = pts.back().x;
        est.decade_span = pts.back().x / pts.front().x >= 10.0;
    }
    est.degraded = pts.size() < 8 || !est.decade_span;
    if (pts.size() >= 4) {
        const PowerLawFit fit = fit_powerlaw(pts);
        est.regression.gamma = fit.exponent;
        est.regression.stderr_gamma = fit.exponent_stderr;
        est.r_squared = fit.r_squared;
    } else {
        est.regression.gamma = std::numeric_limits<double>::quiet_NaN();
        est.regression.stderr_gamma = std::numeric_limits<double>::quiet_NaN();
        est.r_squared = 0.0;
    }
    est.is_power_law = !est.degraded && est.r_squared >= r2_threshold;
    return est;
}

} // namespace lobsim
