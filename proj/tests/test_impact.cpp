#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lobsim/book.hpp"
#include "lobsim/engine.hpp"
#include "lobsim/errors.hpp"
#include "lobsim/impact.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

using namespace lobsim;

namespace {

// Bid at 9 and one-lot asks on every tick of [10, 10+depth).
Book compact_ask_book(int depth) {
    Book book;
    book.place_limit(Side::Buy, 9);
    for (int q = 10; q < 10 + depth; ++q) book.place_limit(Side::Sell, q);
    return book;
}

ImpactSurface synthetic_factorized_surface(double amplitude, double delta,
                                           double alpha) {
    ImpactSurface surface;
    surface.omega_grid = {1, 2, 3, 5, 7, 10, 15, 20, 30};
    surface.min_samples = 50;
    const int n_bins = 16;
    for (int i = 0; i <= n_bins; ++i) {
        surface.g_edges.push_back(0.25 * std::pow(64.0, static_cast<double>(i) / n_bins));
    }
    surface.cells.assign(surface.omega_grid.size(),
                         std::vector<SurfaceCell>(static_cast<std::size_t>(n_bins)));
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
            SurfaceCell& cell = surface.cells[iw][ib];
            cell.count = 1000;
            cell.phi = amplitude * std::pow(static_cast<double>(surface.omega_grid[iw]), delta) *
                       std::pow(surface.g_center(ib), alpha);
            cell.stderr_phi = 1e-8 * cell.phi;
        }
    }
    return surface;
}

// A probe set with constant outcomes: `n` samples per omega at g = 1.
ProbeSet constant_probe_set(const std::vector<int>& grid,
                            const std::vector<double>& deltas, int n) {
    ProbeSet probes;
    probes.omega_grid = grid;
    probes.censored_by_omega.assign(grid.size(), 0);
    probes.first_time = 1;
    probes.last_time = 1000;
    for (std::size_t w = 0; w < grid.size(); ++w) {
        for (int i = 0; i < n; ++i) {
            ProbeResult r;
            r.time = 1 + (i * 999) / std::max(1, n - 1);
            r.omega = grid[w];
            r.g = 1.0;
            r.g_valid = true;
            r.delta_p_halfticks = static_cast<std::int64_t>(deltas[w]);
            probes.samples.push_back(r);
        }
        probes.probes_fired += static_cast<std::uint64_t>(n);
    }
    probes.probe_times = static_cast<std::uint64_t>(n);
    probes.g_min = 1.0;
    probes.g_max = 1.0;
    return probes;
}

} // namespace

TEST_CASE("on a compact unit-density book the probe displacement equals the volume") {
    Book book = compact_ask_book(20);
    for (int omega = 1; omega <= 15; ++omega) {
        const ProbeResult r = probe(book, Side::Buy, omega);
        CHECK(!r.censored);
        CHECK(r.delta_p_halfticks == omega); // 2*dp in ticks == omega when g == 1
        CHECK(r.g == doctest::Approx(1.0));
        CHECK(r.g_valid);
        CHECK(r.omega == omega);
    }
}

TEST_CASE("a probe into a deep level does not move the mid") {
    Book book;
    book.place_limit(Side::Buy, 9);
    book.place_limit(Side::Sell, 10);
    book.place_limit(Side::Sell, 10);
    book.place_limit(Side::Sell, 10);
    const ProbeResult r = probe(book, Side::Buy, 2);
    CHECK(!r.censored);
    CHECK(r.delta_p_halfticks == 0);
}

TEST_CASE("a probe that empties the consumed side is censored") {
    Book book;
    book.place_limit(Side::Buy, 9);
    book.place_limit(Side::Sell, 10);
    book.place_limit(Side::Sell, 14);
    // Both lots fill, but no ask survives to define the after-mid.
    const ProbeResult full = probe(book, Side::Buy, 2);
    CHECK(full.censored);
    // More volume than the side holds is censored too.
    const ProbeResult over = probe(book, Side::Buy, 5);
    CHECK(over.censored);
    // One lot leaves a defined book: a 4-tick jump in the ask is a 4-half-tick
    // displacement of the mid.
    const ProbeResult ok = probe(book, Side::Buy, 1);
    CHECK(!ok.censored);
    CHECK(ok.delta_p_halfticks == 4);
}

TEST_CASE("sell probes mirror buy probes on a mirrored book") {
    Book book;
    book.place_limit(Side::Sell, 10);
    for (int q = 9; q > 9 - 20; --q) book.place_limit(Side::Buy, q);
    for (int omega = 1; omega <= 10; ++omega) {
        const ProbeResult r = probe(book, Side::Sell, omega);
        CHECK(!r.censored);
        CHECK(r.delta_p_halfticks == omega);
    }
}

TEST_CASE("probes leave no trace on the book") {
    Book book = compact_ask_book(20);
    const std::string before = book.serialize();
    const BookCounters counters = book.counters();
    for (int omega : {1, 5, 19, 25}) {
        probe(book, Side::Buy, omega); // includes a censored one (25 > depth)
        REQUIRE(book.serialize() == before);
        REQUIRE(book.counters() == counters);
    }
}

TEST_CASE("probing requires both best quotes") {
    Book book;
    CHECK_THROWS_AS(probe(book, Side::Buy, 1), UndefinedPriceError);
    book.place_limit(Side::Sell, 10);
    CHECK_THROWS_AS(probe(book, Side::Buy, 1), UndefinedPriceError);
}

TEST_CASE("within one book state the displacement is monotone in volume") {
    MechanismConfig config = MechanismConfig::defaults_for(2);
    config.seed = 501;
    Engine engine(config);
    for (int i = 0; i < 10'000; ++i) engine.step();
    int tested = 0;
    for (int snap = 0; snap < 20; ++snap) {
        for (int i = 0; i < 500; ++i) engine.step();
        std::int64_t last = 0;
        bool usable = true;
        for (int omega = 1; omega <= 10 && usable; ++omega) {
            const ProbeResult r = probe(engine.book(), Side::Buy, omega);
            if (r.censored) {
                usable = false;
                break;
            }
            REQUIRE(r.delta_p_halfticks >= last);
            last = r.delta_p_halfticks;
        }
        tested += usable;
    }
    CHECK(tested > 10);
}

TEST_CASE("an engine probed mid-run stays on the unprobed trajectory") {
    MechanismConfig config = MechanismConfig::defaults_for(2);
    config.seed = 503;
    Engine probed(config), control(config);
    for (int i = 1; i <= 20'000; ++i) {
        const StepRecord a = probed.step();
        const StepRecord b = control.step();
        REQUIRE(a.mid_halfticks == b.mid_halfticks);
        REQUIRE(a.n_bid == b.n_bid);
        REQUIRE(a.n_ask == b.n_ask);
        if (i % 100 == 0) {
            for (int omega : {1, 5, 10, 30, 200}) {
                probe(probed.book(), i % 200 == 0 ? Side::Buy : Side::Sell, omega);
            }
        }
    }
    CHECK(probed.book().serialize() == control.book().serialize());
}

TEST_CASE("probe collection accounts for every probe time and sample") {
    MechanismConfig config = MechanismConfig::defaults_for(2);
    config.seed = 507;
    config.warmup = 2'000;
    config.steps = 10'000;
    SurfaceSettings settings;
    settings.probe_period = 10;
    Engine engine(config);
    const ProbeSet probes = collect_probes(engine, settings);

    CHECK(probes.probe_times == 1'000);
    CHECK(probes.first_time == config.warmup + 1);
    CHECK(probes.last_time == config.warmup + config.steps);
    const std::uint64_t usable = probes.probe_times - probes.undefined_times -
                                 probes.invalid_g_times;
    CHECK(probes.probes_fired == usable * settings.omega_grid.size());
    CHECK(probes.samples.size() + probes.censored == probes.probes_fired);
    std::uint64_t censored_sum = 0;
    for (std::uint64_t c : probes.censored_by_omega) censored_sum += c;
    CHECK(censored_sum == probes.censored);
    CHECK(probes.g_min > 0.0);
    CHECK(probes.g_max >= probes.g_min);

    // One aggressor side per probe time, and the sides alternate overall.
    std::map<std::int64_t, std::set<Side>> sides_by_time;
    for (const ProbeResult& s : probes.samples) {
        CHECK(s.time % settings.probe_period == 0);
        sides_by_time[s.time].insert(s.side);
        CHECK(s.g_valid);
        CHECK(!s.censored);
    }
    std::size_t buy_times = 0;
    for (const auto& [time, sides] : sides_by_time) {
        (void)time;
        REQUIRE(sides.size() == 1);
        buy_times += sides.count(Side::Buy);
    }
    CHECK(buy_times > sides_by_time.size() * 2 / 5);
    CHECK(buy_times < sides_by_time.size() * 3 / 5);
}

TEST_CASE("replicated collection reproduces each replica from its derived seed") {
    MechanismConfig config = MechanismConfig::defaults_for(2);
    config.seed = 509;
    config.warmup = 2'000;
    config.steps = 5'000;
    SurfaceSettings settings;
    const std::vector<ProbeSet> replicas = collect_probes_replicated(config, settings, 2);
    REQUIRE(replicas.size() == 2);

    MechanismConfig manual = config;
    manual.seed = derive_replica_seed(config.seed, 0);
    Engine engine(manual);
    const ProbeSet expect = collect_probes(engine, settings);
    REQUIRE(replicas[0].samples.size() == expect.samples.size());
    CHECK(replicas[0].probes_fired == expect.probes_fired);
    CHECK(replicas[0].censored == expect.censored);
    for (std::size_t i = 0; i < expect.samples.size(); ++i) {
        REQUIRE(replicas[0].samples[i].time == expect.samples[i].time);
        REQUIRE(replicas[0].samples[i].omega == expect.samples[i].omega);
        REQUIRE(replicas[0].samples[i].delta_p_halfticks ==
                expect.samples[i].delta_p_halfticks);
        REQUIRE(replicas[0].samples[i].g == expect.samples[i].g);
    }
    // Distinct replicas genuinely differ (sample counts may coincide, the
    // measured displacements cannot all match).
    std::int64_t delta_sum_0 = 0, delta_sum_1 = 0;
    for (const ProbeResult& s : replicas[0].samples) delta_sum_0 += s.delta_p_halfticks;
    for (const ProbeResult& s : replicas[1].samples) delta_sum_1 += s.delta_p_halfticks;
    CHECK(delta_sum_0 != delta_sum_1);

    CHECK_THROWS_AS(collect_probes_replicated(config, settings, 0), ConfigError);
}

TEST_CASE("binning probes averages displacements per cell") {
    SurfaceSettings settings;
    settings.min_samples = 50;
    settings.batches = 8;
    const ProbeSet probes = constant_probe_set({1, 2}, {2.0, 4.0}, 320);
    const ImpactSurface surface = bin_probes(probes, {0.5, 2.0}, settings);
    REQUIRE(surface.n_gbins() == 1);
    CHECK(surface.cells[0][0].count == 320);
    CHECK(surface.cells[0][0].phi == doctest::Approx(2.0));
    CHECK(surface.cells[0][0].stderr_phi == doctest::Approx(0.0));
    CHECK(surface.cells[1][0].phi == doctest::Approx(4.0));
    CHECK(surface.populated(0, 0));
    CHECK(surface.g_center(0) == doctest::Approx(1.0));

    ImpactSurface doubled = merge_surfaces(surface, surface);
    CHECK(doubled.cells[0][0].count == 640);
    CHECK(doubled.cells[0][0].phi == doctest::Approx(2.0));

    ImpactSurface other = surface;
    other.g_edges = {0.5, 3.0};
    CHECK_THROWS_AS(merge_surfaces(surface, other), FitError);
    CHECK_THROWS_AS(bin_probes(probes, {1.0}, settings), FitError);
}

TEST_CASE("merging weighted cells preserves totals under uneven splits") {
    SurfaceSettings settings;
    settings.batches = 4;
    const ProbeSet small = constant_probe_set({1}, {1.0}, 100);
    const ProbeSet large = constant_probe_set({1}, {5.0}, 300);
    const std::vector<double> edges{0.5, 2.0};
    const ImpactSurface merged = merge_surfaces(bin_probes(small, edges, settings),
                                                bin_probes(large, edges, settings));
    CHECK(merged.cells[0][0].count == 400);
    // Count-weighted mean: (100*1 + 300*5) / 400.
    CHECK(merged.cells[0][0].phi == doctest::Approx(4.0));
}

TEST_CASE("building a surface pools the g range across replicas") {
    SurfaceSettings settings;
    settings.g_bins = 8;
    ProbeSet lo = constant_probe_set({1}, {2.0}, 200);
    for (ProbeResult& s : lo.samples) s.g = 0.5;
    lo.g_min = lo.g_max = 0.5;
    ProbeSet hi = constant_probe_set({1}, {6.0}, 200);
    for (ProbeResult& s : hi.samples) s.g = 8.0;
    hi.g_min = hi.g_max = 8.0;

    const ImpactSurface surface = build_surface({lo, hi}, settings);
    REQUIRE(surface.n_gbins() == 8);
    CHECK(surface.g_edges.front() == doctest::Approx(0.5));
    CHECK(surface.g_edges.back() == doctest::Approx(8.0));
    std::uint64_t total = 0;
    for (const auto& row : surface.cells) {
        for (const SurfaceCell& cell : row) total += cell.count;
    }
    CHECK(total == 400);
    CHECK(surface.cells[0][0].phi == doctest::Approx(2.0));       // g = 0.5 bin
    CHECK(surface.cells[0].back().phi == doctest::Approx(6.0));   // g = 8 bin

    CHECK_THROWS_AS(build_surface({}, settings), FitError);
    ProbeSet empty;
    empty.omega_grid = {1};
    CHECK_THROWS_AS(build_surface({empty}, settings), FitError);
}

TEST_CASE("a perfectly factorized surface is recovered exactly") {
    const ImpactSurface surface = synthetic_factorized_surface(2.5, 0.6, -1.0);

    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        const PowerLawFit fit = slice_fixed_omega(surface, iw);
        REQUIRE(fit.exponent == doctest::Approx(-1.0).epsilon(1e-6));
        REQUIRE(fit.amplitude ==
                doctest::Approx(2.5 * std::pow(surface.omega_grid[iw], 0.6)).epsilon(1e-6));
    }
    for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
        const PowerLawFit fit = slice_fixed_g(surface, ib);
        REQUIRE(fit.exponent == doctest::Approx(0.6).epsilon(1e-6));
    }
    const PooledExponent pooled = pooled_fixed_omega_exponent(surface, 4);
    CHECK(pooled.value == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(pooled.n_slices == surface.omega_grid.size());

    const CollapseReport collapse = collapse_test(surface, 0.6, 30);
    CHECK(collapse.pass_all);
    CHECK(collapse.pass_g_above_1);
    CHECK(collapse.statistic == doctest::Approx(0.0));
    CHECK(collapse.bins.size() == surface.n_gbins());
    for (const CollapseBin& bin : collapse.bins) {
        REQUIRE(bin.agrees);
        REQUIRE(bin.n_curves == 8); // grid values strictly below omega_max = 30
    }

    // The same surface rescaled with the wrong exponent cannot collapse.
    const CollapseReport wrong = collapse_test(surface, 0.3, 30);
    CHECK(!wrong.pass_all);
    CHECK(wrong.statistic > 100.0);
}

TEST_CASE("surface slices refuse to fit sparse data") {
    ImpactSurface surface = synthetic_factorized_surface(2.5, 0.6, -1.0);
    // Depopulate everything except three bins of the first omega row.
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
            if (!(iw == 0 && ib < 3)) surface.cells[iw][ib].count = 0;
        }
    }
    CHECK_THROWS_AS(slice_fixed_omega(surface, 0), FitError);
    CHECK_THROWS_AS(slice_fixed_g(surface, 0), FitError);
    CHECK_THROWS_AS(pooled_fixed_omega_exponent(surface, 4), FitError);
}

TEST_CASE("cells below the population threshold are ignored by fits") {
    ImpactSurface surface = synthetic_factorized_surface(2.5, 0.6, -1.0);
    // Corrupt one cell but leave it underpopulated: fits must not move.
    ImpactSurface corrupted = surface;
    corrupted.cells[0][0].count = 10; // below min_samples = 50
    corrupted.cells[0][0].phi = 1e6;
    const PowerLawFit clean = slice_fixed_omega(surface, 0);
    const PowerLawFit guarded = slice_fixed_omega(corrupted, 0);
    CHECK(surface.populated(0, 0));
    CHECK(!corrupted.populated(0, 0));
    CHECK(guarded.n_points == clean.n_points - 1);
    CHECK(guarded.exponent == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("the pooled mean curve averages every retained sample per volume") {
    const ProbeSet probes = constant_probe_set({1, 2, 3, 5}, {1.0, 2.0, 3.0, 5.0}, 200);
    const std::vector<MeanImpactPoint> curve = pooled_mean_curve({probes, probes}, 8);
    REQUIRE(curve.size() == 4);
    for (std::size_t w = 0; w < curve.size(); ++w) {
        CHECK(curve[w].omega == probes.omega_grid[w]);
        CHECK(curve[w].count == 400);
        CHECK(curve[w].phi == doctest::Approx(static_cast<double>(probes.omega_grid[w])));
        CHECK(curve[w].stderr_phi == doctest::Approx(0.0));
    }
    ProbeSet mismatched = probes;
    mismatched.omega_grid = {1, 2, 3, 7};
    CHECK_THROWS_AS(pooled_mean_curve({probes, mismatched}, 8), FitError);
    CHECK(pooled_mean_curve({}, 8).empty());
}

TEST_CASE("small end-to-end surface has the expected shape") {
    MechanismConfig config = MechanismConfig::defaults_for(2);
    config.seed = 511;
    config.warmup = 5'000;
    config.steps = 200'000;
    SurfaceSettings settings;
    const std::vector<ProbeSet> replicas = collect_probes_replicated(config, settings, 2);
    const ImpactSurface surface = build_surface(replicas, settings);

    // Volume dependence: the pooled curve rises sublinearly.
    const std::vector<MeanImpactPoint> curve = pooled_mean_curve(replicas, settings.batches);
    std::vector<FitPoint> pts;
    for (const MeanImpactPoint& p : curve) {
        REQUIRE(p.count > 1000);
        REQUIRE(p.phi > 0.0);
        pts.push_back(FitPoint{static_cast<double>(p.omega), p.phi, p.stderr_phi});
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        REQUIRE(curve[i].phi > curve[i - 1].phi);
    }
    const PowerLawFit delta_fit = fit_powerlaw(pts, 1.0, 30.0);
    CHECK(delta_fit.exponent > 0.40);
    CHECK(delta_fit.exponent < 0.80);

    // Density dependence: fixed-volume slices fall with g, near 1/g.
    const PooledExponent alpha = pooled_fixed_omega_exponent(surface, 6);
    CHECK(alpha.n_slices >= 4);
    CHECK(alpha.value > -1.35);
    CHECK(alpha.value < -0.65);

    // Monotonicity across g at fixed omega, allowing statistical slack: a
    // denser book always damps the displacement.
    const std::size_t iw = 5; // omega = 10
    for (std::size_t ib = 1; ib < surface.n_gbins(); ++ib) {
        if (!surface.populated(iw, ib) || !surface.populated(iw, ib - 1)) continue;
        const SurfaceCell& dense = surface.cells[iw][ib];
        const SurfaceCell& sparse = surface.cells[iw][ib - 1];
        const double slack =
            2.0 * std::sqrt(dense.stderr_phi * dense.stderr_phi +
                            sparse.stderr_phi * sparse.stderr_phi);
        REQUIRE(dense.phi <= sparse.phi + slack);
    }
}
