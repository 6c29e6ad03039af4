#pragma once

// Attributed scattering center forward model and the signal -> image mapping.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "asc/common.hpp"

namespace asc {

/// Frequency/aspect sampling of the radar measurement.
///
/// Samples are cell-centred on the open intervals (f_c - B/2, f_c + B/2) and
/// (-phi_syn/2, phi_syn/2), so the frequency step is exactly B/P and the
/// aspect step is exactly phi_syn/Q.
struct RadarGrid {
    double f_center = 10e9;
    double bandwidth = 500e6;
    double synth_angle = 2.86 * kPi / 180.0;
    std::size_t n_freq = 16;
    std::size_t n_aspect = 16;

    void validate() const
    {
        require(n_freq >= 2 && n_aspect >= 2, "RadarGrid: need at least 2 frequency and 2 aspect samples");
        require(std::isfinite(bandwidth) && bandwidth > 0.0, "RadarGrid: bandwidth must be positive");
        require(std::isfinite(f_center) && f_center > bandwidth / 2.0,
                "RadarGrid: centre frequency must exceed half the bandwidth");
        require(std::isfinite(synth_angle) && synth_angle > 0.0, "RadarGrid: synthetic angle must be positive");
    }

    double freq_step() const { return bandwidth / static_cast<double>(n_freq); }
    double aspect_step() const { return synth_angle / static_cast<double>(n_aspect); }

    std::vector<double> frequencies() const
    {
        std::vector<double> f(n_freq);
        for (std::size_t p = 0; p < n_freq; ++p)
            f[p] = f_center - bandwidth / 2.0 + (static_cast<double>(p) + 0.5) * freq_step();
        return f;
    }

    std::vector<double> aspects() const
    {
        std::vector<double> phi(n_aspect);
        for (std::size_t q = 0; q < n_aspect; ++q)
            phi[q] = -synth_angle / 2.0 + (static_cast<double>(q) + 0.5) * aspect_step();
        return phi;
    }

    bool operator==(const RadarGrid&) const = default;
};

/// Candidate scatterer positions. Coordinate i sits at (i - floor(M/2)) * spacing,
/// so index floor(M/2) is the origin, matching the fftshift convention of the
/// image transform.
struct SpatialGrid {
    std::size_t m = 16;
    std::size_t n = 16;
    double x_spacing = kSpeedOfLight / (2.0 * 500e6);
    double y_spacing = kSpeedOfLight / (2.0 * 10e9 * (2.86 * kPi / 180.0));

    /// Grid whose cells coincide with the image pixels of `radar`: M = P,
    /// N = Q, range spacing c/(2B) and cross-range spacing c/(2 f_c phi_syn).
    static SpatialGrid aligned_to(const RadarGrid& radar)
    {
        SpatialGrid g;
        g.m = radar.n_freq;
        g.n = radar.n_aspect;
        g.x_spacing = kSpeedOfLight / (2.0 * radar.bandwidth);
        g.y_spacing = kSpeedOfLight / (2.0 * radar.f_center * radar.synth_angle);
        return g;
    }

    void validate() const
    {
        require(m >= 1 && n >= 1, "SpatialGrid: need at least one sample per axis");
        require(std::isfinite(x_spacing) && x_spacing > 0.0 && std::isfinite(y_spacing) && y_spacing > 0.0,
                "SpatialGrid: spacings must be positive");
    }

    double x_extent() const { return x_spacing * static_cast<double>(m); }
    double y_extent() const { return y_spacing * static_cast<double>(n); }

    double x_at(std::size_t i) const
    {
        return (static_cast<double>(i) - static_cast<double>(m / 2)) * x_spacing;
    }
    double y_at(std::size_t i) const
    {
        return (static_cast<double>(i) - static_cast<double>(n / 2)) * y_spacing;
    }

    std::vector<double> xs() const
    {
        std::vector<double> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = x_at(i);
        return v;
    }
    std::vector<double> ys() const
    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = y_at(i);
        return v;
    }

    bool contains(double x, double y) const
    {
        const double x_lo = x_at(0) - x_spacing / 2.0, x_hi = x_at(m - 1) + x_spacing / 2.0;
        const double y_lo = y_at(0) - y_spacing / 2.0, y_hi = y_at(n - 1) + y_spacing / 2.0;
        return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
    }

    bool operator==(const SpatialGrid&) const = default;
};

/// One scatterer: complex amplitude, frequency-dependence exponent, position.
struct AscParams {
    cplx amplitude{1.0, 0.0};
    double alpha = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// P x Q echo E(f, phi); row p is frequency f_p, column q is aspect phi_q.
struct SignalMatrix {
    CMatrix entries;
    RadarGrid grid;
};

/// Complex image slice. Vectorisation stacks columns (row index fastest).
struct ComplexImage {
    CMatrix pixels;

    std::size_t rows() const { return static_cast<std::size_t>(pixels.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(pixels.cols()); }

    CVector vec() const { return Eigen::Map<const CVector>(pixels.data(), pixels.size()); }

    static ComplexImage from_vector(const CVector& v, std::size_t rows, std::size_t cols)
    {
        require(static_cast<std::size_t>(v.size()) == rows * cols, "ComplexImage: vector length does not match shape");
        ComplexImage img;
        img.pixels = Eigen::Map<const CMatrix>(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        return img;
    }
};

/// E_i(f, phi) = A (j f/f_c)^alpha exp(-j 4 pi f / c (x cos phi + y sin phi)).
inline SignalMatrix evaluate_asc(const AscParams& params, const RadarGrid& grid)
{
    grid.validate();
    require(std::isfinite(params.amplitude.real()) && std::isfinite(params.amplitude.imag()) &&
                std::isfinite(params.alpha) && std::isfinite(params.x) && std::isfinite(params.y),
            "evaluate_asc: non-finite scatterer parameters");

    const auto f = grid.frequencies();
    const auto phi = grid.aspects();
    SignalMatrix out{CMatrix(static_cast<Eigen::Index>(grid.n_freq), static_cast<Eigen::Index>(grid.n_aspect)), grid};

    for (std::size_t p = 0; p < grid.n_freq; ++p) {
        const cplx freq_term = params.alpha == 0.0 ? cplx{1.0, 0.0}
                                                   : std::pow(cplx{0.0, f[p] / grid.f_center}, params.alpha);
        const cplx scale = params.amplitude * freq_term;
        const double k = 4.0 * kPi * f[p] / kSpeedOfLight;
        for (std::size_t q = 0; q < grid.n_aspect; ++q) {
            const double phase = -k * (params.x * std::cos(phi[q]) + params.y * std::sin(phi[q]));
            out.entries(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = scale * std::polar(1.0, phase);
        }
    }
    if (!out.entries.allFinite())
        throw ContractError("evaluate_asc: non-finite response (alpha too extreme for this grid)");
    return out;
}

/// Superposition of the scene's scatterers plus circular complex Gaussian
/// noise of standard deviation `noise_sigma` per entry (E|n|^2 = sigma^2).
inline SignalMatrix synthesize_signal(const std::vector<AscParams>& scene, const RadarGrid& grid, double noise_sigma,
                                      std::uint64_t seed = 0)
{
    grid.validate();
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "synthesize_signal: noise sigma must be >= 0");

    SignalMatrix out{CMatrix::Zero(static_cast<Eigen::Index>(grid.n_freq), static_cast<Eigen::Index>(grid.n_aspect)),
                     grid};
    for (const auto& s : scene) out.entries += evaluate_asc(s, grid).entries;

    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, noise_sigma / std::sqrt(2.0));
        for (Eigen::Index q = 0; q < out.entries.cols(); ++q)
            for (Eigen::Index p = 0; p < out.entries.rows(); ++p) {
                const double re = normal(rng);
                const double im = normal(rng);
                out.entries(p, q) += cplx{re, im};
            }
    }
    return out;
}

/// Scaling of the inverse DFT that maps signals to images.
enum class DftNorm {
    backward,  // 1/(PQ) on the inverse transform, the usual ifft2 convention
    unitary,   // 1/sqrt(PQ); preserves energy
};

/// fftshifted 2-D inverse DFT between a P x Q signal and a P x Q image.
///
/// image = T_P * E * T_Q^T with T_n(i, l) = c_n exp(+j 2 pi ((i - n/2) mod n) l / n),
/// so the zero-coordinate scatterer lands on pixel (P/2, Q/2). c_n is 1/n for
/// the backward convention and 1/sqrt(n) for the unitary one.
class ImageTransform {
public:
    ImageTransform(std::size_t rows, std::size_t cols, DftNorm norm = DftNorm::backward)
        : rows_(shifted_idft(rows, norm)), cols_t_(shifted_idft(cols, norm).transpose()), norm_(norm)
    {
    }

    std::size_t rows() const { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(cols_t_.cols()); }
    DftNorm norm() const { return norm_; }

    CMatrix forward(const CMatrix& signal) const
    {
        require(signal.rows() == rows_.cols() && signal.cols() == cols_t_.rows(), "ImageTransform: shape mismatch");
        return rows_ * signal * cols_t_;
    }

    CMatrix inverse(const CMatrix& image) const
    {
        require(image.rows() == rows_.rows() && image.cols() == cols_t_.cols(), "ImageTransform: shape mismatch");
        CMatrix out = rows_.adjoint() * image * cols_t_.adjoint();
        if (norm_ == DftNorm::backward) out *= static_cast<double>(rows() * cols());
        return out;
    }

private:
    static CMatrix shifted_idft(std::size_t n, DftNorm norm)
    {
        const auto ni = static_cast<Eigen::Index>(n);
        CMatrix t(ni, ni);
        const double scale = norm == DftNorm::unitary ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = (i + n - n / 2) % n;
            for (std::size_t l = 0; l < n; ++l) {
                // reduce k*l mod n first so the angle stays small and exact
                const double ang = 2.0 * kPi * static_cast<double>((k * l) % n) / static_cast<double>(n);
                t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = std::polar(scale, ang);
            }
        }
        return t;
    }

    CMatrix rows_;
    CMatrix cols_t_;
    DftNorm norm_;
};

inline ComplexImage signal_to_image(const SignalMatrix& sig, DftNorm norm = DftNorm::backward)
{
    require(sig.entries.allFinite(), "signal_to_image: non-finite signal");
    const ImageTransform tf(static_cast<std::size_t>(sig.entries.rows()), static_cast<std::size_t>(sig.entries.cols()), norm);
    return ComplexImage{tf.forward(sig.entries)};
}

} // namespace asc
