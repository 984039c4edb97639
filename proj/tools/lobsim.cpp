// lobsim — batch front-end for the order-book simulator.
//
// Subcommands: run, impact, granularity, tails, sweep. Common flags may be
// given before or after the subcommand and can also come from a flat
// `key = value` config file (--config FILE); command-line flags override
// file values. Exit codes: 0 success, 1 configuration error, 2 runtime
// failure.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "lobsim/book.hpp"
#include "lobsim/deposition.hpp"
#include "lobsim/engine.hpp"
#include "lobsim/errors.hpp"
#include "lobsim/fitting.hpp"
#include "lobsim/impact.hpp"
#include "lobsim/io.hpp"
#include "lobsim/metrics.hpp"
#include "lobsim/rng.hpp"

namespace fs = std::filesystem;
using namespace lobsim;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOptions {
    int mechanism = 2;
    double pi = 1.0 / 3.0;
    int L = -1;  // -1: use the per-mechanism default (200 for case 1, 100 for case 3)
    int k = 4;
    std::int64_t tau = 400;
    std::int64_t steps = 1'000'000;
    std::int64_t warmup = 5'000;
    std::uint64_t seed = 1;
    int replicas = 1;
    std::string out_dir = "out";
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--case", opt.mechanism, "Deposition mechanism: 1, 2, or 3")
        ->capture_default_str();
    cmd->add_option("--pi", opt.pi, "Market-order probability (cases 1 and 2)")
        ->capture_default_str();
    cmd->add_option("--L", opt.L,
                    "Deposition band half-width in ticks (cases 1 and 3; "
                    "default 200 for case 1, 100 for case 3)");
    cmd->add_option("--k", opt.k, "Deposition band width in spreads (case 2)")
        ->capture_default_str();
    cmd->add_option("--tau", opt.tau, "Resting-order lifetime in steps")
        ->capture_default_str();
    cmd->add_option("--steps", opt.steps, "Recorded steps after warmup")
        ->capture_default_str();
    cmd->add_option("--warmup", opt.warmup, "Discarded steps before recording")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Master seed (replica seeds derive from it)")
        ->capture_default_str();
    cmd->add_option("--replicas", opt.replicas, "Independent replicas to run and merge")
        ->capture_default_str();
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
}

MechanismConfig to_mechanism(const CommonOptions& opt) {
    MechanismConfig cfg = MechanismConfig::defaults_for(opt.mechanism);
    cfg.pi = opt.pi;
    cfg.k = opt.k;
    if (opt.L >= 0) cfg.L = opt.L;
    cfg.tau = opt.tau;
    cfg.steps = opt.steps;
    cfg.warmup = opt.warmup;
    cfg.seed = opt.seed;  // replica r actually runs derive_replica_seed(seed, r)
    cfg.validate();
    if (opt.replicas < 1) {
        throw ConfigError("replicas must be at least 1");
    }
    return cfg;
}

MechanismConfig replica_config(const MechanismConfig& base, std::uint64_t master_seed,
                               std::uint64_t index) {
    MechanismConfig cfg = base;
    cfg.seed = derive_replica_seed(master_seed, index);
    return cfg;
}

std::string iso_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> meta_common(const std::string& command, const CommonOptions& opt,
                                     const MechanismConfig& cfg) {
    std::vector<std::string> m;
    m.push_back("tool=lobsim");
    m.push_back(std::string("version=") + kVersion);
    m.push_back("timestamp=" + iso_timestamp());
    m.push_back("command=" + command);
    m.push_back("case=" + std::to_string(cfg.mechanism));
    m.push_back("pi=" + format_double(cfg.pi));
    m.push_back("L=" + std::to_string(cfg.L));
    m.push_back("k=" + std::to_string(cfg.k));
    m.push_back("tau=" + std::to_string(cfg.tau));
    m.push_back("steps=" + std::to_string(cfg.steps));
    m.push_back("warmup=" + std::to_string(cfg.warmup));
    m.push_back("replicas=" + std::to_string(opt.replicas));
    m.push_back("master_seed=" + std::to_string(opt.seed));
    std::string seeds;
    for (int r = 0; r < opt.replicas; ++r) {
        if (r > 0) seeds += ',';
        seeds += std::to_string(derive_replica_seed(opt.seed, static_cast<std::uint64_t>(r)));
    }
    m.push_back("replica_seeds=" + seeds);
    m.push_back("rng=pcg32 xsh-rr 64/32 (oneseq); replica seeds from a splitmix64 stream "
                "over the master seed");
    return m;
}

fs::path prepare_out_dir(const CommonOptions& opt) {
    fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir.string() + ": " +
                          ec.message());
    }
    return dir;
}

// ---------------------------------------------------------------------------

int cmd_run(const CommonOptions& opt, std::int64_t decimate) {
    const MechanismConfig base = to_mechanism(opt);
    const fs::path dir = prepare_out_dir(opt);

    std::vector<RunSummary> summaries(static_cast<std::size_t>(opt.replicas));
    std::vector<std::future<RunSummary>> futures;
    for (int r = 1; r < opt.replicas; ++r) {
        const MechanismConfig cfg = replica_config(base, opt.seed, static_cast<std::uint64_t>(r));
        futures.push_back(std::async(std::launch::async, [cfg] {
            Engine engine(cfg);
            return run_simulation(engine);
        }));
    }
    {
        Engine engine(replica_config(base, opt.seed, 0));
        StepCsvSink sink(dir / "run_series.csv", decimate);
        summaries[0] = run_simulation(engine, sink);
    }
    for (int r = 1; r < opt.replicas; ++r) {
        summaries[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r - 1)].get();
    }

    std::vector<std::pair<std::string, RunSummary>> rows;
    for (int r = 0; r < opt.replicas; ++r) {
        rows.emplace_back(std::to_string(r), summaries[static_cast<std::size_t>(r)]);
    }
    const RunSummary merged = merge_summaries(summaries);
    rows.emplace_back("merged", merged);
    write_summary_csv(dir / "run_summary.csv", rows);

    auto meta = meta_common("run", opt, base);
    meta.push_back("decimate=" + std::to_string(decimate));
    meta.push_back("series_replica=0");
    write_text(dir / "meta.txt", meta);

    std::cout << "run: steps=" << merged.steps << " mean_orders_per_side="
              << format_double(merged.mean_orders_per_side) << " mean_spread="
              << format_double(merged.mean_spread) << " market_order_fraction="
              << format_double(merged.market_order_fraction) << " cross_match_pairs="
              << merged.cross_match_pairs << " depletions=" << merged.depletion_count
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct GranularityHarvest {
    std::vector<GranularitySample> samples;
    RunSummary summary;
    std::uint64_t skipped_undefined = 0;
};

GranularityHarvest collect_granularity(const MechanismConfig& cfg, std::int64_t period) {
    GranularityHarvest harvest;
    Engine engine(cfg);
    harvest.summary = run_simulation(engine, [&](const StepRecord& rec) {
        if (rec.time % period != 0) return;
        const Book& book = engine.book();
        if (book.side_empty(Side::Buy) || book.side_empty(Side::Sell)) {
            ++harvest.skipped_undefined;
            return;
        }
        harvest.samples.push_back(measure_granularity(book, Side::Buy));
        harvest.samples.push_back(measure_granularity(book, Side::Sell));
    });
    return harvest;
}

int cmd_granularity(const CommonOptions& opt, std::int64_t period, int bins) {
    if (period < 1) throw ConfigError("sample period must be at least 1");
    if (bins < 1) throw ConfigError("histogram bins must be at least 1");
    const MechanismConfig base = to_mechanism(opt);
    const fs::path dir = prepare_out_dir(opt);

    std::vector<std::future<GranularityHarvest>> futures;
    for (int r = 1; r < opt.replicas; ++r) {
        const MechanismConfig cfg = replica_config(base, opt.seed, static_cast<std::uint64_t>(r));
        futures.push_back(std::async(std::launch::async,
                                     [cfg, period] { return collect_granularity(cfg, period); }));
    }
    std::vector<GranularityHarvest> harvests;
    harvests.push_back(collect_granularity(replica_config(base, opt.seed, 0), period));
    for (auto& f : futures) harvests.push_back(f.get());

    write_granularity_csv(dir / "granularity_samples.csv", harvests.front().samples);

    std::vector<GranularitySample> pooled;
    std::uint64_t valid = 0;
    for (const GranularityHarvest& h : harvests) {
        for (const GranularitySample& s : h.samples) {
            pooled.push_back(s);
            if (s.valid) ++valid;
        }
    }
    write_histogram_csv(dir / "granularity_histogram.csv", granularity_histogram(pooled, bins));

    auto meta = meta_common("granularity", opt, base);
    meta.push_back("sample_period=" + std::to_string(period));
    meta.push_back("histogram_bins=" + std::to_string(bins));
    meta.push_back("samples_csv_replica=0");
    meta.push_back("histogram_pooled_over_replicas=" + std::to_string(opt.replicas));
    meta.push_back("valid_samples=" + std::to_string(valid));
    meta.push_back("total_samples=" + std::to_string(pooled.size()));
    write_text(dir / "meta.txt", meta);

    std::cout << "granularity: samples=" << pooled.size() << " valid=" << valid << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> collect_mid_series(const MechanismConfig& cfg) {
    Engine engine(cfg);
    std::vector<std::int64_t> mids;
    mids.reserve(static_cast<std::size_t>(cfg.steps));
    run_simulation(engine, [&](const StepRecord& rec) { mids.push_back(rec.mid_halfticks); });
    return mids;
}

int cmd_tails(const CommonOptions& opt, std::int64_t lag, double tail_fraction,
              int bins_per_decade) {
    const MechanismConfig base = to_mechanism(opt);
    const fs::path dir = prepare_out_dir(opt);

    std::vector<std::future<std::vector<std::int64_t>>> futures;
    for (int r = 1; r < opt.replicas; ++r) {
        const MechanismConfig cfg = replica_config(base, opt.seed, static_cast<std::uint64_t>(r));
        futures.push_back(std::async(std::launch::async, [cfg] { return collect_mid_series(cfg); }));
    }
    std::vector<std::int64_t> pooled_returns;
    {
        const std::vector<std::int64_t> mids = collect_mid_series(replica_config(base, opt.seed, 0));
        pooled_returns = returns(mids, lag);
    }
    for (auto& f : futures) {
        const std::vector<std::int64_t> rs = returns(f.get(), lag);
        pooled_returns.insert(pooled_returns.end(), rs.begin(), rs.end());
    }

    const TailEstimate est = tail_exponent(pooled_returns, tail_fraction, bins_per_decade);

    std::vector<double> magnitudes;
    magnitudes.reserve(pooled_returns.size());
    for (std::int64_t r : pooled_returns) {
        if (r != 0) magnitudes.push_back(std::abs(static_cast<double>(r)));
    }
    write_histogram_csv(dir / "tails_histogram.csv",
                        log_histogram(magnitudes, bins_per_decade, true));

    {
        TextFile file(dir / "tails_fit.csv");
        file.line("method,gamma,stderr,tail_fraction,r_squared,fit_lo,fit_hi,n_bins,"
                  "zero_fraction,n_nonzero,is_power_law,degraded");
        file.line("hill," + format_double(est.hill.gamma) + ',' +
                  format_double(est.hill.stderr_gamma) + ',' +
                  format_double(est.hill.tail_fraction) + ",,,,," +
                  format_double(est.zero_fraction) + ',' + std::to_string(est.n_nonzero) +
                  ",,");
        file.line("regression," + format_double(est.regression.gamma) + ',' +
                  format_double(est.regression.stderr_gamma) + ",," +
                  format_double(est.r_squared) + ',' + format_double(est.fit_lo) + ',' +
                  format_double(est.fit_hi) + ',' + std::to_string(est.n_bins_used) + ',' +
                  format_double(est.zero_fraction) + ',' + std::to_string(est.n_nonzero) +
                  ',' + (est.is_power_law ? '1' : '0') + ',' + (est.degraded ? '1' : '0'));
    }

    auto meta = meta_common("tails", opt, base);
    meta.push_back("lag=" + std::to_string(lag));
    meta.push_back("tail_fraction=" + format_double(tail_fraction));
    meta.push_back("bins_per_decade=" + std::to_string(bins_per_decade));
    meta.push_back("pooled_returns=" + std::to_string(pooled_returns.size()));
    write_text(dir / "meta.txt", meta);

    std::cout << "tails: gamma_regression=" << format_double(est.regression.gamma)
              << " (r2=" << format_double(est.r_squared) << ") gamma_hill="
              << format_double(est.hill.gamma) << " zero_fraction="
              << format_double(est.zero_fraction) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_impact(const CommonOptions& opt, SurfaceSettings settings, int omega_max,
               int collapse_omega_max, std::size_t min_slice_bins, double delta_fit_lo,
               double delta_fit_hi) {
    MechanismConfig base = to_mechanism(opt);
    const fs::path dir = prepare_out_dir(opt);

    if (omega_max > 0) {
        std::vector<int> filtered;
        for (int w : settings.omega_grid) {
            if (w <= omega_max) filtered.push_back(w);
        }
        if (filtered.empty()) {
            throw ConfigError("--omega-max removed every probe volume from the grid");
        }
        settings.omega_grid = std::move(filtered);
    }

    const std::vector<ProbeSet> sets = collect_probes_replicated(base, settings, opt.replicas);
    const ImpactSurface surface = build_surface(sets, settings);
    const std::vector<MeanImpactPoint> curve = pooled_mean_curve(sets, settings.batches);

    // Volume-direction exponent from the g-integrated curve.
    std::vector<FitPoint> delta_points;
    for (const MeanImpactPoint& p : curve) {
        if (p.count >= settings.min_samples && p.phi > 0.0) {
            delta_points.push_back(FitPoint{static_cast<double>(p.omega), p.phi, p.stderr_phi});
        }
    }
    const PowerLawFit delta_fit = fit_powerlaw(delta_points, delta_fit_lo, delta_fit_hi);

    std::vector<SliceFitRow> slice_rows;
    slice_rows.push_back(SliceFitRow{"pooled", "omega", delta_fit});
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        try {
            const PowerLawFit fit = slice_fixed_omega(surface, iw);
            slice_rows.push_back(SliceFitRow{
                "omega=" + std::to_string(surface.omega_grid[iw]), "g", fit});
        } catch (const FitError&) {
            // Under-populated slice: absent from the fit table.
        }
    }
    for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
        try {
            const PowerLawFit fit = slice_fixed_g(surface, ib);
            slice_rows.push_back(SliceFitRow{
                "g=[" + format_double(surface.g_edges[ib]) + ';' +
                    format_double(surface.g_edges[ib + 1]) + ']',
                "omega", fit});
        } catch (const FitError&) {
        }
    }

    const PooledExponent alpha = pooled_fixed_omega_exponent(surface, min_slice_bins);
    const CollapseReport collapse = collapse_test(surface, delta_fit.exponent,
                                                  collapse_omega_max);

    write_surface_csv(dir / "impact_surface.csv", surface);
    write_mean_curve_csv(dir / "impact_mean.csv", curve);
    write_slice_fits_csv(dir / "impact_slices.csv", slice_rows);
    write_collapse_csv(dir / "impact_collapse.csv", collapse);

    std::uint64_t fired = 0, censored = 0, invalid_g = 0, undefined = 0, retained = 0;
    for (const ProbeSet& p : sets) {
        fired += p.probes_fired;
        censored += p.censored;
        invalid_g += p.invalid_g_times;
        undefined += p.undefined_times;
        retained += p.samples.size();
    }

    std::vector<std::string> verdict;
    verdict.push_back("delta=" + format_double(delta_fit.exponent) + " stderr=" +
                      format_double(delta_fit.exponent_stderr) + " r2=" +
                      format_double(delta_fit.r_squared) + " omega_range=[" +
                      format_double(delta_fit.range_lo) + ',' +
                      format_double(delta_fit.range_hi) + "] n_points=" +
                      std::to_string(delta_fit.n_points));
    verdict.push_back("alpha_pooled=" + format_double(alpha.value) + " stderr=" +
                      format_double(alpha.stderr_value) + " n_slices=" +
                      std::to_string(alpha.n_slices) + " min_bins_per_slice=" +
                      std::to_string(min_slice_bins));
    verdict.push_back(std::string("collapse=") + (collapse.pass_all ? "PASS" : "FAIL") +
                      " collapse_g_above_1=" + (collapse.pass_g_above_1 ? "PASS" : "FAIL") +
                      " statistic=" + format_double(collapse.statistic) + " omega_max=" +
                      std::to_string(collapse.omega_max) + " delta_used=" +
                      format_double(collapse.delta));
    verdict.push_back("probes_fired=" + std::to_string(fired) + " retained=" +
                      std::to_string(retained) + " censored=" + std::to_string(censored) +
                      " censored_fraction=" +
                      format_double(fired > 0 ? static_cast<double>(censored) /
                                                    static_cast<double>(fired)
                                              : 0.0));
    verdict.push_back("skipped_probe_times_invalid_g=" + std::to_string(invalid_g) +
                      " skipped_probe_times_side_empty=" + std::to_string(undefined));
    std::string per_omega = "censored_by_omega=";
    for (std::size_t w = 0; w < settings.omega_grid.size(); ++w) {
        std::uint64_t c = 0;
        for (const ProbeSet& p : sets) c += p.censored_by_omega[w];
        if (w > 0) per_omega += ' ';
        per_omega += std::to_string(settings.omega_grid[w]) + ':' + std::to_string(c);
    }
    verdict.push_back(per_omega);
    write_text(dir / "impact_verdict.txt", verdict);

    auto meta = meta_common("impact", opt, base);
    std::string grid;
    for (std::size_t w = 0; w < settings.omega_grid.size(); ++w) {
        if (w > 0) grid += ',';
        grid += std::to_string(settings.omega_grid[w]);
    }
    meta.push_back("omega_grid=" + grid);
    meta.push_back("g_bins=" + std::to_string(settings.g_bins));
    meta.push_back("probe_period=" + std::to_string(settings.probe_period));
    meta.push_back("min_samples=" + std::to_string(settings.min_samples));
    meta.push_back("batches=" + std::to_string(settings.batches));
    meta.push_back("collapse_omega_max=" + std::to_string(collapse_omega_max));
    meta.push_back("delta_fit_range=[" + format_double(delta_fit_lo) + ',' +
                   format_double(delta_fit_hi) + ']');
    write_text(dir / "meta.txt", meta);

    for (const std::string& line : verdict) {
        std::cout << line << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const CommonOptions& opt, const std::vector<int>& cases,
              const std::vector<std::int64_t>& taus) {
    if (cases.empty() || taus.empty()) {
        throw ConfigError("sweep requires non-empty --cases and --taus");
    }
    const fs::path dir = prepare_out_dir(opt);

    TextFile file(dir / "sweep_cells.csv");
    file.line("case,tau,pi,L,k,steps,warmup,mean_orders_per_side,mean_spread,"
              "market_order_fraction,cross_match_pairs,depletion_count");

    std::uint64_t cell_index = 0;
    for (int mechanism : cases) {
        for (std::int64_t tau : taus) {
            CommonOptions cell_opt = opt;
            cell_opt.mechanism = mechanism;
            cell_opt.tau = tau;
            const MechanismConfig base = to_mechanism(cell_opt);

            std::vector<std::future<RunSummary>> futures;
            for (int r = 0; r < opt.replicas; ++r) {
                const MechanismConfig cfg = replica_config(
                    base, opt.seed,
                    cell_index * static_cast<std::uint64_t>(opt.replicas) +
                        static_cast<std::uint64_t>(r));
                futures.push_back(std::async(std::launch::async, [cfg] {
                    Engine engine(cfg);
                    return run_simulation(engine);
                }));
            }
            std::vector<RunSummary> summaries;
            for (auto& f : futures) summaries.push_back(f.get());
            const RunSummary merged = merge_summaries(summaries);

            file.line(std::to_string(mechanism) + ',' + std::to_string(tau) + ',' +
                      format_double(base.pi) + ',' + std::to_string(base.L) + ',' +
                      std::to_string(base.k) + ',' + std::to_string(merged.steps) + ',' +
                      std::to_string(merged.warmup) + ',' +
                      format_double(merged.mean_orders_per_side) + ',' +
                      format_double(merged.mean_spread) + ',' +
                      format_double(merged.market_order_fraction) + ',' +
                      std::to_string(merged.cross_match_pairs) + ',' +
                      std::to_string(merged.depletion_count));
            std::cout << "sweep case=" << mechanism << " tau=" << tau << " n="
                      << format_double(merged.mean_orders_per_side) << " spread="
                      << format_double(merged.mean_spread) << '\n';
            ++cell_index;
        }
    }

    auto meta = meta_common("sweep", opt, to_mechanism(opt));
    std::string case_list;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (i > 0) case_list += ',';
        case_list += std::to_string(cases[i]);
    }
    std::string tau_list;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (i > 0) tau_list += ',';
        tau_list += std::to_string(taus[i]);
    }
    meta.push_back("sweep_cases=" + case_list);
    meta.push_back("sweep_taus=" + tau_list);
    meta.push_back("cell_seed_rule=replica_seed(master, cell_index*replicas + r)");
    write_text(dir / "meta.txt", meta);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lobsim: zero-intelligence limit-order-book simulator"};
    app.fallthrough();
    app.set_config("--config", "", "Flat key = value config file (# comments allowed); "
                                   "command-line flags override file values");

    CommonOptions opt;
    add_common_flags(&app, opt);
    app.require_subcommand(1);

    CLI::App* run_cmd = app.add_subcommand("run", "Simulate and write the time series + summary");
    std::int64_t decimate = 1;
    run_cmd->add_option("--decimate", decimate, "Keep every Nth series record")
        ->capture_default_str();

    CLI::App* impact_cmd =
        app.add_subcommand("impact", "Measure the price-impact surface, fits, and collapse");
    SurfaceSettings settings;
    int omega_max = 0;
    int collapse_omega_max = 30;
    std::size_t min_slice_bins = 6;
    double delta_fit_lo = 0.0;
    double delta_fit_hi = 30.0;  // default: the censoring-free part of the default grid
    impact_cmd->add_option("--omega-grid", settings.omega_grid, "Probe volumes")
        ->delimiter(',')
        ->capture_default_str();
    impact_cmd->add_option("--omega-max", omega_max,
                           "Drop probe volumes above this (0 keeps the full grid)")
        ->capture_default_str();
    impact_cmd->add_option("--g-bins", settings.g_bins, "Log-spaced granularity bins")
        ->capture_default_str();
    impact_cmd->add_option("--probe-period", settings.probe_period, "Steps between probe times")
        ->capture_default_str();
    impact_cmd->add_option("--min-samples", settings.min_samples,
                           "Cell population needed to report it")
        ->capture_default_str();
    impact_cmd->add_option("--batches", settings.batches, "Batch-means windows per replica")
        ->capture_default_str();
    impact_cmd->add_option("--collapse-omega-max", collapse_omega_max,
                           "Collapse test restricted to omega below this")
        ->capture_default_str();
    impact_cmd->add_option("--min-slice-bins", min_slice_bins,
                           "Populated bins required to pool a fixed-omega slice")
        ->capture_default_str();
    impact_cmd->add_option("--delta-fit-lo", delta_fit_lo, "Lower omega bound of the delta fit")
        ->capture_default_str();
    impact_cmd->add_option("--delta-fit-hi", delta_fit_hi,
                           "Upper omega bound of the delta fit (default keeps the "
                           "censoring-free volumes)")
        ->capture_default_str();

    CLI::App* gran_cmd =
        app.add_subcommand("granularity", "Sample the granularity estimator and its density");
    std::int64_t sample_period = 10;
    int gran_bins = 24;
    gran_cmd->add_option("--sample-period", sample_period, "Steps between samples")
        ->capture_default_str();
    gran_cmd->add_option("--bins", gran_bins, "Histogram bins")->capture_default_str();

    CLI::App* tails_cmd =
        app.add_subcommand("tails", "Estimate the return-distribution tail exponent");
    std::int64_t lag = 1;
    double tail_fraction = 0.01;
    int bins_per_decade = 12;
    tails_cmd->add_option("--lag", lag, "Return lag in steps")->capture_default_str();
    tails_cmd->add_option("--tail-fraction", tail_fraction, "Hill order-statistic fraction")
        ->capture_default_str();
    tails_cmd->add_option("--bins-per-decade", bins_per_decade, "Histogram resolution")
        ->capture_default_str();

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run a (case, tau) grid and tabulate steady-state stats");
    std::vector<int> sweep_cases;
    std::vector<std::int64_t> sweep_taus;
    sweep_cmd->add_option("--cases", sweep_cases, "Mechanisms to sweep")
        ->delimiter(',')
        ->required();
    sweep_cmd->add_option("--taus", sweep_taus, "Lifetimes to sweep")
        ->delimiter(',')
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(run_cmd)) return cmd_run(opt, decimate);
        if (app.got_subcommand(impact_cmd)) {
            return cmd_impact(opt, settings, omega_max, collapse_omega_max, min_slice_bins,
                              delta_fit_lo, delta_fit_hi);
        }
        if (app.got_subcommand(gran_cmd)) return cmd_granularity(opt, sample_period, gran_bins);
        if (app.got_subcommand(tails_cmd)) return cmd_tails(opt, lag, tail_fraction, bins_per_decade);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(opt, sweep_cases, sweep_taus);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
