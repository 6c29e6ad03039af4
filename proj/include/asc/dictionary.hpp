#pragma once

// Position dictionary in the signal domain and its image-domain counterpart.

#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include "asc/asc_model.hpp"

namespace asc {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;

/// Column k of a grid dictionary corresponds to x index k % M and y index k / M,
/// i.e. the x index runs fastest. On aligned grids this puts each column's
/// impulse on the matrix diagonal.
struct ColumnCoord {
    std::size_t x_index;
    std::size_t y_index;
    double x;
    double y;
};

inline ColumnCoord column_coord(std::size_t k, const SpatialGrid& spatial)
{
    require(k < spatial.m * spatial.n, "column_coord: column index out of range");
    const std::size_t xi = k % spatial.m, yi = k / spatial.m;
    return {xi, yi, spatial.x_at(xi), spatial.y_at(yi)};
}

inline std::size_t column_index(std::size_t x_index, std::size_t y_index, const SpatialGrid& spatial)
{
    require(x_index < spatial.m && y_index < spatial.n, "column_index: grid index out of range");
    return x_index + spatial.m * y_index;
}

struct DictionaryGeometry {
    RadarGrid radar;
    SpatialGrid spatial;
    DftNorm norm = DftNorm::backward;

    bool operator==(const DictionaryGeometry&) const = default;
};

/// FNV-1a over the geometry's sizes and parameters. Used to tie checkpoints
/// and cache files to the dictionary they were produced with.
inline std::uint64_t fingerprint(const DictionaryGeometry& g)
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    const std::uint64_t sizes[4] = {g.radar.n_freq, g.radar.n_aspect, g.spatial.m, g.spatial.n};
    const double params[5] = {g.radar.f_center, g.radar.bandwidth, g.radar.synth_angle, g.spatial.x_spacing,
                              g.spatial.y_spacing};
    const std::uint32_t norm = static_cast<std::uint32_t>(g.norm);
    mix(sizes, sizeof sizes);
    mix(params, sizeof params);
    mix(&norm, sizeof norm);
    return h;
}

inline std::size_t dictionary_bytes(const RadarGrid& grid, const SpatialGrid& spatial)
{
    return grid.n_freq * grid.n_aspect * spatial.m * spatial.n * sizeof(cplx);
}

inline void check_memory_budget(const RadarGrid& grid, const SpatialGrid& spatial, std::size_t budget)
{
    const std::size_t need = dictionary_bytes(grid, spatial);
    if (need > budget) {
        std::ostringstream msg;
        msg << "dictionary of " << grid.n_freq * grid.n_aspect << " x " << spatial.m * spatial.n << " needs " << need
            << " bytes, over the memory budget of " << budget << " bytes";
        throw ContractError(msg.str());
    }
}

/// Signal-domain dictionary: column k = vec(exp(-j 4 pi f/c (x_k cos phi + y_k sin phi)))
/// with column-stacked (frequency-fastest) vectorisation.
inline CMatrix build_signal_dictionary(const RadarGrid& grid, const SpatialGrid& spatial,
                                       std::size_t memory_budget = kDefaultMemoryBudget)
{
    grid.validate();
    spatial.validate();
    check_memory_budget(grid, spatial, memory_budget);

    const auto f = grid.frequencies();
    const auto phi = grid.aspects();
    const std::size_t P = grid.n_freq, Q = grid.n_aspect;
    std::vector<double> wave(P), cs(Q), sn(Q);
    for (std::size_t p = 0; p < P; ++p) wave[p] = 4.0 * kPi * f[p] / kSpeedOfLight;
    for (std::size_t q = 0; q < Q; ++q) {
        cs[q] = std::cos(phi[q]);
        sn[q] = std::sin(phi[q]);
    }

    CMatrix out(static_cast<Eigen::Index>(P * Q), static_cast<Eigen::Index>(spatial.m * spatial.n));
    for (std::size_t k = 0; k < spatial.m * spatial.n; ++k) {
        const auto c = column_coord(k, spatial);
        for (std::size_t q = 0; q < Q; ++q) {
            const double proj = c.x * cs[q] + c.y * sn[q];
            for (std::size_t p = 0; p < P; ++p)
                out(static_cast<Eigen::Index>(p + P * q), static_cast<Eigen::Index>(k)) = std::polar(1.0, -wave[p] * proj);
        }
    }
    return out;
}

/// Immutable image-domain dictionary Phi with apply / apply_adjoint access.
///
/// Grid dictionaries carry their geometry; `from_matrix` wraps an arbitrary
/// matrix (e.g. a random sensing matrix) for solver testing.
class Dictionary {
public:
    Dictionary() = default;

    static Dictionary from_matrix(CMatrix phi)
    {
        require(phi.size() > 0, "Dictionary: empty matrix");
        require(phi.allFinite(), "Dictionary: non-finite entries");
        Dictionary d;
        d.phi_ = std::move(phi);
        return d;
    }

    static Dictionary from_matrix(CMatrix phi, const DictionaryGeometry& geometry)
    {
        require(static_cast<std::size_t>(phi.rows()) == geometry.radar.n_freq * geometry.radar.n_aspect &&
                    static_cast<std::size_t>(phi.cols()) == geometry.spatial.m * geometry.spatial.n,
                "Dictionary: matrix shape does not match geometry");
        Dictionary d = from_matrix(std::move(phi));
        d.geometry_ = geometry;
        return d;
    }

    std::size_t rows() const { return static_cast<std::size_t>(phi_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(phi_.cols()); }
    const CMatrix& matrix() const { return phi_; }
    const std::optional<DictionaryGeometry>& geometry() const { return geometry_; }

    CVector apply(const CVector& z) const
    {
        require(static_cast<std::size_t>(z.size()) == cols(), "Dictionary::apply: code length mismatch");
        return phi_ * z;
    }

    CVector apply_adjoint(const CVector& r) const
    {
        require(static_cast<std::size_t>(r.size()) == rows(), "Dictionary::apply_adjoint: vector length mismatch");
        return phi_.adjoint() * r;
    }

    /// Phi^H Phi v without forming the Gram matrix.
    CVector gram_apply(const CVector& v) const { return apply_adjoint(apply(v)); }

    ColumnCoord column_coords(std::size_t k) const
    {
        require(geometry_.has_value(), "Dictionary: column coordinates need a grid dictionary");
        return column_coord(k, geometry_->spatial);
    }

    std::uint64_t grid_fingerprint() const { return geometry_ ? fingerprint(*geometry_) : 0; }

private:
    CMatrix phi_;
    std::optional<DictionaryGeometry> geometry_;
};

/// Maps each signal-domain column through the image transform in place.
inline Dictionary build_image_dictionary(CMatrix signal_dict, const RadarGrid& grid, const SpatialGrid& spatial,
                                         DftNorm norm = DftNorm::backward)
{
    grid.validate();
    spatial.validate();
    const std::size_t P = grid.n_freq, Q = grid.n_aspect;
    require(static_cast<std::size_t>(signal_dict.rows()) == P * Q &&
                static_cast<std::size_t>(signal_dict.cols()) == spatial.m * spatial.n,
            "build_image_dictionary: signal dictionary shape does not match grids");

    const ImageTransform tf(P, Q, norm);
    for (Eigen::Index k = 0; k < signal_dict.cols(); ++k) {
        Eigen::Map<CMatrix> col(signal_dict.col(k).data(), static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(Q));
        col = tf.forward(col);
    }
    return Dictionary::from_matrix(std::move(signal_dict), DictionaryGeometry{grid, spatial, norm});
}

inline Dictionary make_dictionary(const RadarGrid& grid, const SpatialGrid& spatial,
                                  std::size_t memory_budget = kDefaultMemoryBudget, DftNorm norm = DftNorm::backward)
{
    return build_image_dictionary(build_signal_dictionary(grid, spatial, memory_budget), grid, spatial, norm);
}

struct SpectralEstimate {
    double value = 0.0;     // Rayleigh quotient of Phi^H Phi after the last iteration
    double residual = 0.0;  // ||Gv - value v|| for the final unit vector v
};

/// Largest eigenvalue of Phi^H Phi by power iteration from a seeded start.
inline SpectralEstimate spectral_step_bound(const Dictionary& dict, std::size_t iterations = 100,
                                            std::uint64_t seed = 0x5eedULL)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector v(static_cast<Eigen::Index>(dict.cols()));
    for (auto& e : v) e = cplx{normal(rng), normal(rng)};
    v.normalize();

    SpectralEstimate est;
    for (std::size_t it = 0; it < iterations; ++it) {
        CVector w = dict.gram_apply(v);
        const double nrm = w.norm();
        if (nrm == 0.0) return {0.0, 0.0};
        v = w / nrm;
    }
    const CVector w = dict.gram_apply(v);
    est.value = v.dot(w).real();
    est.residual = (w - est.value * v).norm();
    return est;
}

} // namespace asc
