#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lobsim/engine.hpp"
#include "lobsim/fitting.hpp"
#include "lobsim/impact.hpp"
#include "lobsim/metrics.hpp"

namespace lobsim {

// Shortest round-trip decimal form (std::to_chars), so identical doubles
// always print identically and reruns stay byte-for-byte reproducible.
std::string format_double(double v);

// A text file that fails loudly: throws lobsim::Error on open or write
// problems instead of silently truncating output.
class TextFile {
public:
    explicit TextFile(const std::filesystem::path& path);
    void line(const std::string& text);
    std::ofstream& stream() noexcept { return out_; }

private:
    std::ofstream out_;
};

// Streaming sink for the simulated time series; keeps every decimation-th
// record. Usable directly as the sink argument of run_simulation.
class StepCsvSink {
public:
    StepCsvSink(const std::filesystem::path& path, std::int64_t decimate);
    void operator()(const StepRecord& rec);

private:
    TextFile file_;
    std::int64_t decimate_;
    std::int64_t seen_ = 0;
};

struct SliceFitRow {
    std::string slice;  // e.g. "omega=10", "g=[0.52,0.71]", "pooled"
    std::string param;  // the abscissa: "g" or "omega"
    PowerLawFit fit;
};

// Summaries, one row per entry; `label` distinguishes replicas ("0", "1",
// ...) from the merged row ("merged").
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, RunSummary>>& rows);

void write_granularity_csv(const std::filesystem::path& path,
                           const std::vector<GranularitySample>& samples);

void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist);

// Only cells meeting the surface's min_samples threshold are written;
// under-populated cells are absent rather than zero.
void write_surface_csv(const std::filesystem::path& path, const ImpactSurface& surface);

void write_mean_curve_csv(const std::filesystem::path& path,
                          const std::vector<MeanImpactPoint>& curve);

void write_slice_fits_csv(const std::filesystem::path& path,
                          const std::vector<SliceFitRow>& rows);

void write_collapse_csv(const std::filesystem::path& path, const CollapseReport& report);

void write_text(const std::filesystem::path& path, const std::vector<std::string>& lines);

} // namespace lobsim
