#include "lobsim/io.hpp"

#include <array>
#include <charconv>
#include <system_error>

#include "lobsim/errors.hpp"

namespace lobsim {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const std::to_chars_result res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (res.ec != std::errc()) {
        throw Error("failed to format a double");
    }
    return std::string(buf.data(), res.ptr);
}

TextFile::TextFile(const std::filesystem::path& path) : out_(path) {
    if (!out_) {
        throw Error("cannot open output file: " + path.string());
    }
    out_.exceptions(std::ofstream::badbit | std::ofstream::failbit);
}

void TextFile::line(const std::string& text) {
    out_ << text << '\n';
}

StepCsvSink::StepCsvSink(const std::filesystem::path& path, std::int64_t decimate)
    : file_(path), decimate_(decimate < 1 ? 1 : decimate) {
    file_.line("time,mid_halfticks,spread,n_bid,n_ask,event,depleted");
}

void StepCsvSink::operator()(const StepRecord& rec) {
    if (seen_++ % decimate_ != 0) return;
    std::string row;
    row.reserve(64);
    row += std::to_string(rec.time);
    row += ',';
    row += std::to_string(rec.mid_halfticks);
    row += ',';
    row += std::to_string(rec.spread);
    row += ',';
    row += std::to_string(rec.n_bid);
    row += ',';
    row += std::to_string(rec.n_ask);
    row += ',';
    row += rec.event;
    row += ',';
    row += rec.depleted ? '1' : '0';
    file_.line(row);
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, RunSummary>>& rows) {
    TextFile file(path);
    file.line(
        "replica,steps,warmup,mean_spread,mean_orders_per_side,market_order_fraction,"
        "market_orders,cross_match_pairs,depletion_count");
    for (const auto& [label, s] : rows) {
        file.line(label + ',' + std::to_string(s.steps) + ',' + std::to_string(s.warmup) +
                  ',' + format_double(s.mean_spread) + ',' +
                  format_double(s.mean_orders_per_side) + ',' +
                  format_double(s.market_order_fraction) + ',' +
                  std::to_string(s.market_orders) + ',' +
                  std::to_string(s.cross_match_pairs) + ',' +
                  std::to_string(s.depletion_count));
    }
}

void write_granularity_csv(const std::filesystem::path& path,
                           const std::vector<GranularitySample>& samples) {
    TextFile file(path);
    file.line("time,side,s,N,omega,g,valid");
    for (const GranularitySample& s : samples) {
        std::string row;
        row.reserve(48);
        row += std::to_string(s.time);
        row += ',';
        row += side_char(s.side);
        row += ',';
        row += std::to_string(s.s);
        row += ',';
        row += std::to_string(s.N);
        row += ',';
        row += std::to_string(s.omega);
        row += ',';
        row += format_double(s.g);
        row += ',';
        row += s.valid ? '1' : '0';
        file.line(row);
    }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist) {
    TextFile file(path);
    file.line("bin_lo,bin_hi,count,density");
    for (const HistogramBin& bin : hist.bins) {
        file.line(format_double(bin.lo) + ',' + format_double(bin.hi) + ',' +
                  std::to_string(bin.count) + ',' + format_double(bin.density));
    }
}

void write_surface_csv(const std::filesystem::path& path, const ImpactSurface& surface) {
    TextFile file(path);
    file.line("omega,g_lo,g_hi,phi,stderr,count");
    for (std::size_t iw = 0; iw < surface.omega_grid.size(); ++iw) {
        for (std::size_t ib = 0; ib < surface.n_gbins(); ++ib) {
            if (!surface.populated(iw, ib)) continue;
            const SurfaceCell& cell = surface.cells[iw][ib];
            file.line(std::to_string(surface.omega_grid[iw]) + ',' +
                      format_double(surface.g_edges[ib]) + ',' +
                      format_double(surface.g_edges[ib + 1]) + ',' +
                      format_double(cell.phi) + ',' + format_double(cell.stderr_phi) +
                      ',' + std::to_string(cell.count));
        }
    }
}

void write_mean_curve_csv(const std::filesystem::path& path,
                          const std::vector<MeanImpactPoint>& curve) {
    TextFile file(path);
    file.line("omega,phi,stderr,count");
    for (const MeanImpactPoint& p : curve) {
        file.line(std::to_string(p.omega) + ',' + format_double(p.phi) + ',' +
                  format_double(p.stderr_phi) + ',' + std::to_string(p.count));
    }
}

void write_slice_fits_csv(const std::filesystem::path& path,
                          const std::vector<SliceFitRow>& rows) {
    TextFile file(path);
    file.line("slice,param,exponent,stderr,amplitude,range_lo,range_hi");
    for (const SliceFitRow& row : rows) {
        file.line(row.slice + ',' + row.param + ',' + format_double(row.fit.exponent) +
                  ',' + format_double(row.fit.exponent_stderr) + ',' +
                  format_double(row.fit.amplitude) + ',' +
                  format_double(row.fit.range_lo) + ',' + format_double(row.fit.range_hi));
    }
}

void write_collapse_csv(const std::filesystem::path& path, const CollapseReport& report) {
    TextFile file(path);
    file.line("g_lo,g_hi,n_curves,max_dev_sigma,agrees");
    for (const CollapseBin& bin : report.bins) {
        file.line(format_double(bin.g_lo) + ',' + format_double(bin.g_hi) + ',' +
                  std::to_string(bin.n_curves) + ',' + format_double(bin.max_dev_sigma) +
                  ',' + (bin.agrees ? "1" : "0"));
    }
}

void write_text(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    TextFile file(path);
    for (const std::string& l : lines) {
        file.line(l);
    }
}

} // namespace lobsim
