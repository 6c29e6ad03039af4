#pragma once

// Magnitude rasters (binary PGM) and CSV writers for solver and training output.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "asc/metrics.hpp"

namespace asc::io {

enum class MagnitudeScale {
    linear,
    db,  // 20 log10 relative to the peak, clipped at -40 dB
};

/// 8-bit grey levels of |img|, row-major. Linear maps the peak to 255; dB maps
/// 0 dB to 255 and -40 dB (or less) to 0. A zero image is all black.
inline std::vector<std::uint8_t> magnitude_levels(const ComplexImage& img, MagnitudeScale scale = MagnitudeScale::linear)
{
    require(img.pixels.allFinite(), "magnitude_levels: image has non-finite pixels");
    const Eigen::MatrixXd mag = img.pixels.cwiseAbs();
    const double peak = mag.size() ? mag.maxCoeff() : 0.0;
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(mag.size()));
    for (Eigen::Index r = 0; r < mag.rows(); ++r) {
        for (Eigen::Index c = 0; c < mag.cols(); ++c) {
            double v = 0.0;
            if (peak > 0.0) {
                if (scale == MagnitudeScale::linear) {
                    v = mag(r, c) / peak;
                } else {
                    const double db = mag(r, c) > 0.0 ? 20.0 * std::log10(mag(r, c) / peak) : -40.0;
                    v = (std::max(db, -40.0) + 40.0) / 40.0;
                }
            }
            out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
        }
    }
    return out;
}

inline void write_pgm(std::ostream& os, const ComplexImage& img, MagnitudeScale scale = MagnitudeScale::linear)
{
    const auto levels = magnitude_levels(img, scale);
    os << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
    os.write(reinterpret_cast<const char*>(levels.data()), static_cast<std::streamsize>(levels.size()));
}

inline void export_magnitude_image(const ComplexImage& img, const std::filesystem::path& path,
                                   MagnitudeScale scale = MagnitudeScale::linear)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_pgm(os, img, scale);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

// -- CSV ---------------------------------------------------------------------

inline std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    return os;
}

inline void write_trace_csv(std::ostream& os, const SolverTrace& trace)
{
    os << "iter,objective,residual_l2,l1_norm,wallclock_ns\n";
    for (const auto& e : trace)
        os << e.iter << ',' << e.objective << ',' << e.residual_l2 << ',' << e.l1_norm << ',' << e.wallclock_ns << '\n';
}

inline void write_train_log_csv(std::ostream& os, const std::vector<EpochLog>& log)
{
    os << "epoch,train_loss,val_loss,lr,wallclock_ms\n";
    for (const auto& e : log)
        os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.lr << ',' << e.wallclock_ms << '\n';
}

inline std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows)
{
    os << "method,residual_loss,inference_time,diverged,images,config\n";
    for (const auto& r : rows)
        os << csv_quote(r.method) << ',' << r.residual_loss << ',' << r.inference_time << ',' << (r.diverged ? 1 : 0) << ','
           << r.images << ',' << csv_quote(r.config) << '\n';
}

inline void write_asc_csv(std::ostream& os, const std::vector<ExtractedAsc>& ascs)
{
    os << "rank,grid_index,x,y,amp_re,amp_im,magnitude\n";
    for (std::size_t i = 0; i < ascs.size(); ++i) {
        const auto& a = ascs[i];
        os << i << ',' << a.grid_index << ',' << a.x << ',' << a.y << ',' << a.amplitude.real() << ','
           << a.amplitude.imag() << ',' << std::abs(a.amplitude) << '\n';
    }
}

} // namespace asc::io
