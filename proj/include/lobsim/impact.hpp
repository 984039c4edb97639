#pragma once

#include <cstdint>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/deposition.hpp"
#include "lobsim/engine.hpp"
#include "lobsim/fitting.hpp"
#include "lobsim/metrics.hpp"

namespace lobsim {

// Outcome of one virtual market probe. delta_p_halfticks is the mid-price
// displacement in the direction the probe pushes (asks recede upward under a
// buy, bids downward under a sell), so it is nonnegative by construction.
// Its mean over samples equals 2*E[dp in ticks] — the surface value directly.
struct ProbeResult {
    std::int64_t time = 0;
    int omega = 0;
    Side side = Side::Buy;            // aggressor side
    double g = 0.0;                   // granularity of the consumed side
    bool g_valid = false;             // N > 2 at probe time
    std::int64_t delta_p_halfticks = 0;
    bool censored = false;            // probe exhausted the consumed side
};

// Fire a market order of `volume` as a counterfactual: snapshot, measure the
// consumed side's granularity, execute, read the instantaneous mid change,
// then restore the snapshot so the dynamics are untouched. Consumes no
// randomness. Throws UndefinedPriceError when a side is empty beforehand.
ProbeResult probe(Book& book, Side aggressor, int volume);

struct SurfaceSettings {
    // Default probe volumes stop where censoring starts: at the calibrated
    // book depth (~80 orders/side) volumes above ~30 get censored at rates
    // far above the tolerated 0.1%, and the surviving probes form a
    // depth-conditioned ensemble that biases the fixed-volume slices.
    // Larger volumes remain available explicitly (--omega-grid).
    std::vector<int> omega_grid = {1, 2, 3, 5, 7, 10, 15, 20, 30};
    int g_bins = 16;                  // log-spaced over the observed g range
    std::int64_t probe_period = 10;   // steps between probe times (post-warmup)
    std::uint64_t min_samples = 50;   // cell population threshold for reporting
    int batches = 32;                 // batch-means windows per replica
};

// Raw probe measurements from one replica: every uncensored, valid-g sample
// plus the census of what was skipped or dropped.
struct ProbeSet {
    std::vector<int> omega_grid;
    std::vector<ProbeResult> samples;
    std::vector<std::uint64_t> censored_by_omega;  // aligned with omega_grid
    std::uint64_t censored = 0;
    std::uint64_t probes_fired = 0;
    std::uint64_t probe_times = 0;
    std::uint64_t invalid_g_times = 0;    // skipped: granularity undefined (N <= 2)
    std::uint64_t undefined_times = 0;    // skipped: a book side was empty
    std::int64_t first_time = 0;          // recorded window, for batching
    std::int64_t last_time = 0;
    double g_min = 0.0;                   // over retained samples
    double g_max = 0.0;
};

// Run the engine through warmup, then step it for config.steps; every
// probe_period steps fire one probe per omega in the grid, alternating the
// aggressor side between probe times. The engine's own dynamics are
// unaffected (probes restore state and use no randomness).
ProbeSet collect_probes(Engine& engine, const SurfaceSettings& settings);

// Replicated collection with seeds derived from config.seed; replica i runs
// config with derive_replica_seed(seed, i). Results are returned in replica
// order. Runs replicas concurrently.
std::vector<ProbeSet> collect_probes_replicated(const MechanismConfig& config,
                                                const SurfaceSettings& settings,
                                                int replicas);

struct SurfaceCell {
    std::uint64_t count = 0;
    double phi = 0.0;         // 2*E[dp | omega, g-bin], ticks
    double stderr_phi = 0.0;  // batch-means standard error
};

struct ImpactSurface {
    std::vector<int> omega_grid;
    std::vector<double> g_edges;                 // ascending, g_bins + 1 entries
    std::vector<std::vector<SurfaceCell>> cells; // [omega index][g bin]
    std::uint64_t min_samples = 50;

    std::size_t n_gbins() const noexcept { return g_edges.empty() ? 0 : g_edges.size() - 1; }
    double g_center(std::size_t bin) const;      // geometric bin center
    bool populated(std::size_t omega_idx, std::size_t bin) const {
        return cells[omega_idx][bin].count >= min_samples;
    }
};

// Bin one replica's samples onto the given g edges; standard errors come
// from batch means over `settings.batches` contiguous time windows.
ImpactSurface bin_probes(const ProbeSet& probes, const std::vector<double>& g_edges,
                         const SurfaceSettings& settings);

// Cell-wise merge: counts add, phi is the count-weighted mean, stderr the
// corresponding combination of independent errors. Grids must match.
ImpactSurface merge_surfaces(const ImpactSurface& a, const ImpactSurface& b);

// Shared g edges from the pooled sample range, then per-replica binning and
// a cell-wise merge, so the result is independent of how samples were split
// across replicas (up to the batch structure of the error bars).
ImpactSurface build_surface(const std::vector<ProbeSet>& replicas,
                            const SurfaceSettings& settings);

// The impact curve with g integrated out: per omega, the pooled mean of
// 2*dp over every retained sample, with batch-means errors taken across
// all replicas' windows.
struct MeanImpactPoint {
    int omega = 0;
    std::uint64_t count = 0;
    double phi = 0.0;
    double stderr_phi = 0.0;
};
std::vector<MeanImpactPoint> pooled_mean_curve(const std::vector<ProbeSet>& replicas,
                                               int batches);

// Power-law fits through surface slices (cells below min_samples ignored).
// Throw FitError naming the slice when fewer than 4 cells are populated.
PowerLawFit slice_fixed_omega(const ImpactSurface& surface, std::size_t omega_idx);
PowerLawFit slice_fixed_g(const ImpactSurface& surface, std::size_t g_bin);

// Inverse-variance pooling of the fixed-omega slice exponents across all
// slices with at least `min_bins` populated cells.
struct PooledExponent {
    double value = 0.0;
    double stderr_value = 0.0;
    std::size_t n_slices = 0;
};
PooledExponent pooled_fixed_omega_exponent(const ImpactSurface& surface,
                                           std::size_t min_bins);

// Factorization check: divide each fixed-omega curve by omega^delta and ask,
// per g-bin, whether the rescaled values agree across omega within 2 sigma.
struct CollapseBin {
    double g_lo = 0.0;
    double g_hi = 0.0;
    int n_curves = 0;
    double max_dev_sigma = 0.0;  // worst |value - pooled mean| / sigma in the bin
    bool agrees = false;
};
struct CollapseReport {
    double delta = 0.0;
    int omega_max = 30;
    std::vector<CollapseBin> bins;   // one per populated g-bin
    double statistic = 0.0;          // max deviation over constrained bins
    bool pass_all = false;           // every bin agrees
    bool pass_g_above_1 = false;     // every bin with center >= 1 agrees
};
CollapseReport collapse_test(const ImpactSurface& surface, double delta,
                             int omega_max = 30);

} // namespace lobsim
