#include "lobsim/impact.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "lobsim/errors.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

ProbeResult probe(Book& book, Side aggressor, int volume) {
    ProbeResult result;
    result.time = book.time();
    result.omega = volume;
    result.side = aggressor;

    const std::int64_t mid_before = book.mid_halfticks();  // throws if side empty
    const BookSnapshot snapshot(book);
    const GranularitySample gs = measure_granularity(book, opposite(aggressor));
    result.g = gs.g;
    result.g_valid = gs.valid;

    const ExecutionReport report = book.execute_market(aggressor, volume);
    if (report.filled < volume || !report.new_best) {
        result.censored = true;
    } else {
        const std::int64_t mid_after = book.mid_halfticks();
        result.delta_p_halfticks = aggressor == Side::Buy ? mid_after - mid_before
                                                          : mid_before - mid_after;
        if (result.delta_p_halfticks < 0) {
            throw InvariantViolation("probe moved the mid against the aggressor");
        }
    }
    snapshot.restore(book);
    return result;
}

ProbeSet collect_probes(Engine& engine, const SurfaceSettings& settings) {
    ProbeSet out;
    out.omega_grid = settings.omega_grid;
    out.censored_by_omega.assign(settings.omega_grid.size(), 0);

    const MechanismConfig& config = engine.config();
    for (std::int64_t i = 0; i < config.warmup; ++i) {
        engine.step();
    }
    out.first_time = engine.time() + 1;
    out.last_time = engine.time() + config.steps;

    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    std::uint64_t probe_time_index = 0;

    for (std::int64_t i = 1; i <= config.steps; ++i) {
        engine.step();
        if (i % settings.probe_period != 0) continue;

        const Side aggressor = probe_time_index % 2 == 0 ? Side::Buy : Side::Sell;
        ++probe_time_index;
        ++out.probe_times;

        Book& book = engine.book();
        if (book.side_empty(Side::Buy) || book.side_empty(Side::Sell)) {
            ++out.undefined_times;
            continue;
        }
        if (!measure_granularity(book, opposite(aggressor)).valid) {
            ++out.invalid_g_times;
            continue;
        }
        for (std::size_t w = 0; w < settings.omega_grid.size(); ++w) {
            ++out.probes_fired;
            const ProbeResult r = probe(book, aggressor, settings.omega_grid[w]);
            if (r.censored) {
                ++out.censored;
                ++out.censored_by_omega[w];
                continue;
            }
            g_min = std::min(g_min, r.g);
            g_max = std::max(g_max, r.g);
            out.samples.push_back(r);
        }
    }
    if (!out.samples.empty()) {
        out.g_min = g_min;
        out.g_max = g_max;
    }
    return out;
}

std::vector<ProbeSet> collect_probes_replicated(const MechanismConfig& config,
                                                const SurfaceSettings& settings,
                                                int replicas) {
    if (replicas < 1) {
        throw ConfigError("replicas must be at least 1");
    }
    std::vector<std::future<ProbeSet>> futures;
    futures.reserve(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r) {
        MechanismConfig replica_config = config;
        replica_config.seed = derive_replica_seed(config.seed, static_cast<std::uint64_t>(r));
        futures.push_back(std::async(std::launch::async, [replica_config, settings]() {
            Engine engine(replica_config);
            return collect_probes(engine, settings);
        }));
    }
    std::vector<ProbeSet> out;
    out.reserve(futures.size());
    for (auto& f : futures) {
        out.push_back(f.get());
    }
    return out;
}

double ImpactSurface::g_center(std::size_t bin) const {
    return std::sqrt(g_edges[bin] * g_edges[bin + 1]);
}

namespace {

std::size_t g_bin_index(const std::vector<double>& edges, double g) {
    // Bins are [lo, hi); the last bin also takes its upper edge.
    auto it = std::upper_bound(edges.begin(), edges.end(), g);
    std::size_t idx = static_cast<std::size_t>(it - edges.begin());
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= edges.size() - 1) idx = edges.size() - 2;
    return idx;
}

} // namespace

ImpactSurface bin_probes(const ProbeSet& probes, const std::vector<double>& g_edges,
                         const SurfaceSettings& settings) {
    if (g_edges.size() < 2) {
        throw FitError("surface binning needs at least one g bin");
    }
    ImpactSurface surface;
    surface.omega_grid = probes.omega_grid;
    surface.g_edges = g_edges;
    surface.min_samples = settings.min_samples;
    const std::size_t n_omega = probes.omega_grid.size();
    const std::size_t n_bins = g_edges.size() - 1;
    surface.cells.assign(n_omega, std::vector<SurfaceCell>(n_bins));

    const int n_batches = std::max(1, settings.batches);
    const double window = static_cast<double>(probes.last_time - probes.first_time + 1);

    struct CellAccum {
        double sum = 0.0;
        double sumsq = 0.0;
        std::uint64_t count = 0;
        std::vector<double> batch_sum;
        std::vector<std::uint64_t> batch_count;
    };
    std::vector<std::vector<CellAccum>> accum(n_omega, std::vector<CellAccum>(n_bins));
    for (auto& row : accum) {
        for (CellAccum& cell : row) {
            cell.batch_sum.assign(static_cast<std::size_t>(n_batches), 0.0);
            cell.batch_count.assign(static_cast<std::size_t>(n_batches), 0);
        }
    }

    auto find_omega = [&](int omega) {
        for (std::size_t i = 0; i < probes.omega_grid.size(); ++i) {
            if (probes.omega_grid[i] == omega) return i;
        }
        throw FitError("probe sample carries an omega not on the grid");
    };

    for (const ProbeResult& s : probes.samples) {
        const std::size_t iw = find_omega(s.omega);
        const std::size_t ib = g_bin_index(g_edges, s.g);
        auto batch = static_cast<std::size_t>(
            std::min<double>(n_batches - 1,
                             std::floor(static_cast<double>(s.time - probes.first_time) /
                                        window * n_batches)));
        CellAccum& cell = accum[iw][ib];
        const auto d = static_cast<double>(s.delta_p_halfticks);
        cell.sum += d;
        cell.sumsq += d * d;
        ++cell.count;
        cell.batch_sum[batch] += d;
        ++cell.batch_count[batch];
    }

    for (std::size_t iw = 0; iw < n_omega; ++iw) {
        for (std::size_t ib = 0; ib < n_bins; ++ib) {
            const CellAccum& cell = accum[iw][ib];
            SurfaceCell& out = surface.cells[iw][ib];
            out.count = cell.count;
            if (cell.count == 0) continue;
            out.phi = cell.sum / static_cast<double>(cell.count);

            RunningStats over_batches;
            for (int b = 0; b < n_batches; ++b) {
                if (cell.batch_count[static_cast<std::size_t>(b)] == 0) continue;
                over_batches.add(cell.batch_sum[static_cast<std::size_t>(b)] /
                                 static_cast<double>(cell.batch_count[static_cast<std::size_t>(b)]));
            }
            if (over_batches.count() >= 4) {
                out.stderr_phi = over_batches.stderr_mean();
            } else {
                // Too few occupied windows: fall back to the i.i.d. formula.
                const double mean = out.phi;
                const double var =
                    cell.count > 1
                        ? std::max(0.0, (cell.sumsq - mean * cell.sum) /
                                            static_cast<double>(cell.count - 1))
                        : 0.0;
                out.stderr_phi = std::sqrt(var / static_cast<double>(cell.count));
            }
        }
    }
    return surface;
}

ImpactSurface merge_surfaces(const ImpactSurface& a, const ImpactSurface& b) {
    if (a.omega_grid != b.omega_grid || a.g_edges != b.g_edges) {
        throw FitError("cannot merge surfaces with different grids");
    }
    ImpactSurface merged = a;
    for (std::size_t iw = 0; iw < a.cells.size(); ++iw) {
        for (std::size_t ib = 0; ib < a.cells[iw].size(); ++ib) {
            const SurfaceCell& ca = a.cells[iw][ib];
            const SurfaceCell& cb = b.cells[iw][ib];
            SurfaceCell& out = merged.cells[iw][ib];
            out.count = ca.count + cb.count;
            if (out.count == 0) continue;
            const auto wa = static_cast<double>(ca.count);
            const auto wb = static_cast<double>(cb.count);
            out.phi = (wa * ca.phi + wb * cb.phi) / (wa + wb);
            out.stderr_phi = std::sqrt(wa * wa * ca.stderr_phi * ca.stderr_phi +
                                       wb * wb * cb.stderr_phi * cb.stderr_phi) /
                             (wa + wb);
        }
    }
    return merged;
}

ImpactSurface build_surface(const std::vector<ProbeSet>& replicas,
                            const SurfaceSettings& settings) {
    if (replicas.empty()) {
        throw FitError("no probe sets to build a surface from");
    }
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const ProbeSet& p : replicas) {
        if (p.samples.empty()) continue;
        g_min = std::min(g_min, p.g_min);
        g_max = std::max(g_max, p.g_max);
        any = true;
    }
    if (!any) {
        throw FitError("no retained probe samples; cannot bin a surface");
    }

    std::vector<double> edges;
    if (g_min == g_max) {
        edges = {0.95 * g_min, 1.05 * g_min};
    } else {
        const int n = std::max(1, settings.g_bins);
        edges.reserve(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            edges.push_back(g_min * std::pow(g_max / g_min, static_cast<double>(i) / n));
        }
        edges.back() = g_max;
    }

    ImpactSurface surface = bin_probes(replicas.front(), edges, settings);
    for (std::size_t r = 1; r < replicas.size(); ++r) {
        surface = merge_surfaces(surface, bin_probes(replicas[r], edges, settings));
    }
    return surface;
}

std::vector<MeanImpactPoint> pooled_mean_curve(const std::vector<ProbeSet>& replicas,
                                               int batches) {
    if (replicas.empty()) return {};
    const std::vector<int>& grid = replicas.front().omega_grid;
    const int n_batches = std::max(1, batches);

    std::vector<MeanImpactPoint> curve(grid.size());
    for (std::size_t w = 0; w < grid.size(); ++w) {
        curve[w].omega = grid[w];
        double sum = 0.0;
        std::uint64_t count = 0;
        std::vector<double> batch_sum;
        std::vector<std::uint64_t> batch_count;
        batch_sum.assign(replicas.size() * static_cast<std::size_t>(n_batches), 0.0);
        batch_count.assign(batch_sum.size(), 0);

        for (std::size_t r = 0; r < replicas.size(); ++r) {
            const ProbeSet& p = replicas[r];
            if (p.omega_grid != grid) {
                throw FitError("replica probe sets use different omega grids");
            }
            const double window = static_cast<double>(p.last_time - p.first_time + 1);
            for (const ProbeResult& s : p.samples) {
                if (s.omega != grid[w]) continue;
                const auto b = static_cast<std::size_t>(
                    std::min<double>(n_batches - 1,
                                     std::floor(static_cast<double>(s.time - p.first_time) /
                                                window * n_batches)));
                const std::size_t slot = r * static_cast<std::size_t>(n_batches) + b;
                const auto d = static_cast<double>(s.delta_p_halfticks);
                sum += d;
                ++count;
                batch_sum[slot] += d;
                ++batch_count[slot];
            }
        }
        curve[w].count = count;
        if (count == 0) continue;
        curve[w].phi = sum / static_cast<double>(count);
        RunningStats over_batches;
        for (std::size_t slot = 0; slot < batch_sum.size(); ++slot) {
            if (batch_count[slot] == 0) continue;
            over_batches.add(batch_sum[slot] / static_cast<double>(batch_count[slot]));
        }
        if (over_batches.count() >= 4) {
            curve[w].stderr_phi = over_batches.stderr_mean();
        } else if (count > 1) {
            curve[w].stderr_phi = 0.0;  // degenerate batching; error bar unavailable
        }
    }
    return curve;
}

PowerLawFit slice_fixed_omega(const ImpactSurface& surface, std::size_t omega_idx) {
    std::vector<FitPoint> pts;
    for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
        if (!surface.populated(omega_idx, ib)) continue;
        const SurfaceCell& cell = surface.cells[omega_idx][ib];
        if (!(cell.phi > 0.0)) continue;  // log fit cannot use zero-impact cells
        pts.push_back(FitPoint{surface.g_center(ib), cell.phi, cell.stderr_phi});
    }
    if (pts.size() < 4) {
        throw FitError("fixed-omega slice omega=" +
                       std::to_string(surface.omega_grid[omega_idx]) +
                       " has fewer than 4 populated bins");
    }
    return fit_powerlaw(pts);
}

PowerLawFit slice_fixed_g(const ImpactSurface& surface, std::size_t g_bin) {
    std::vector<FitPoint> pts;
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        if (!surface.populated(iw, g_bin)) continue;
        const SurfaceCell& cell = surface.cells[iw][g_bin];
        if (!(cell.phi > 0.0)) continue;
        pts.push_back(FitPoint{static_cast<double>(surface.omega_grid[iw]), cell.phi,
                               cell.stderr_phi});
    }
    if (pts.size() < 4) {
        throw FitError("fixed-g slice bin=" + std::to_string(g_bin) +
                       " has fewer than 4 populated cells");
    }
    return fit_powerlaw(pts);
}

PooledExponent pooled_fixed_omega_exponent(const ImpactSurface& surface,
                                           std::size_t min_bins) {
    PooledExponent pooled;
    double weight_sum = 0.0;
    double weighted = 0.0;
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        std::size_t populated = 0;
        for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
            if (surface.populated(iw, ib) && surface.cells[iw][ib].phi > 0.0) ++populated;
        }
        if (populated < min_bins) continue;
        const PowerLawFit fit = slice_fixed_omega(surface, iw);
        if (!(fit.exponent_stderr > 0.0)) continue;
        const double w = 1.0 / (fit.exponent_stderr * fit.exponent_stderr);
        weighted += w * fit.exponent;
        weight_sum += w;
        ++pooled.n_slices;
    }
    if (pooled.n_slices == 0 || !(weight_sum > 0.0)) {
        throw FitError("no fixed-omega slice has enough populated bins to pool");
    }
    pooled.value = weighted / weight_sum;
    pooled.stderr_value = std::sqrt(1.0 / weight_sum);
    return pooled;
}

CollapseReport collapse_test(const ImpactSurface& surface, double delta,
                             int omega_max) {
    CollapseReport report;
    report.delta = delta;
    report.omega_max = omega_max;
    report.pass_all = true;
    report.pass_g_above_1 = true;

    for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
        std::vector<double> values;
        std::vector<double> sigmas;
        for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
            if (surface.omega_grid[iw] >= omega_max) continue;
            if (!surface.populated(iw, ib)) continue;
            const SurfaceCell& cell = surface.cells[iw][ib];
            const double scale = std::pow(static_cast<double>(surface.omega_grid[iw]), delta);
            values.push_back(cell.phi / scale);
            sigmas.push_back(cell.stderr_phi / scale);
        }
        if (values.empty()) continue;

        CollapseBin bin;
        bin.g_lo = surface.g_edges[ib];
        bin.g_hi = surface.g_edges[ib + 1];
        bin.n_curves = static_cast<int>(values.size());

        // Pooled mean: inverse-variance weighted when error bars exist.
        double mean = 0.0;
        double weight_sum = 0.0;
        bool weighted = true;
        for (double s : sigmas) {
            if (!(s > 0.0)) weighted = false;
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double w = weighted ? 1.0 / (sigmas[i] * sigmas[i]) : 1.0;
            mean += w * values[i];
            weight_sum += w;
        }
        mean /= weight_sum;

        double max_dev = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double dev = std::abs(values[i] - mean);
            if (dev == 0.0) continue;
            const double dev_sigma = sigmas[i] > 0.0
                                         ? dev / sigmas[i]
                                         : std::numeric_limits<double>::infinity();
            max_dev = std::max(max_dev, dev_sigma);
        }
        bin.max_dev_sigma = bin.n_curves >= 2 ? max_dev : 0.0;
        bin.agrees = bin.max_dev_sigma <= 2.0;

        if (bin.n_curves >= 2) {
            report.statistic = std::max(report.statistic, bin.max_dev_sigma);
        }
        if (!bin.agrees) {
            report.pass_all = false;
            if (std::sqrt(bin.g_lo * bin.g_hi) >= 1.0) {
                report.pass_g_above_1 = false;
            }
        }
        report.bins.push_back(bin);
    }
    return report;
}

} // namespace lobsim
