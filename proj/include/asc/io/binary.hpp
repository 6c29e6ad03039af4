#pragma once

// Little-endian binary formats: complex images, checkpoints, dictionary cache.
//
// Image file
//   char[4] "ASCI", u32 version, u64 height, u64 width,
//   height*width pixels row-major, each (f64 re, f64 im)
// Checkpoint
//   char[4] "ASCK", u32 version, u64 stages, f64 t[stages], f64 rho[stages],
//   u64 dictionary fingerprint
// Dictionary cache
//   char[4] "ASCD", u32 version, u64 P, Q, M, N,
//   f64 f_center, bandwidth, synth_angle, x_spacing, y_spacing,
//   u32 column-order tag, u32 transform-norm tag,
//   (P*Q) x (M*N) entries row-major, each (f64 re, f64 im)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "asc/dictionary.hpp"
#include "asc/unfolded/network.hpp"

namespace asc::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kImageVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kDictionaryVersion = 1;
inline constexpr std::uint32_t kColumnOrderXFastest = 0;

namespace detail {

template <class T>
T to_le(T v)
{
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> b;
        std::memcpy(b.data(), &v, sizeof(T));
        std::reverse(b.begin(), b.end());
        std::memcpy(&v, b.data(), sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& os, T v)
{
    v = to_le(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const char* what)
{
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(std::string("truncated file while reading ") + what);
    return to_le(v);
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5], const char* kind)
{
    char buf[4];
    if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
        throw FormatError(std::string("not a ") + kind + " file (bad magic)");
}

inline void put_cplx(std::ostream& os, cplx v)
{
    put(os, v.real());
    put(os, v.imag());
}

inline cplx get_cplx(std::istream& is)
{
    const double re = get<double>(is, "payload");
    const double im = get<double>(is, "payload");
    return {re, im};
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

inline std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return is;
}

inline void expect_eof(std::istream& is, const char* kind)
{
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError(std::string("trailing bytes in ") + kind + " file");
}

} // namespace detail

// -- images ------------------------------------------------------------------

inline void write_image(std::ostream& os, const ComplexImage& img)
{
    detail::put_magic(os, "ASCI");
    detail::put<std::uint32_t>(os, kImageVersion);
    detail::put<std::uint64_t>(os, img.rows());
    detail::put<std::uint64_t>(os, img.cols());
    for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
        for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) detail::put_cplx(os, img.pixels(r, c));
}

inline ComplexImage read_image(std::istream& is)
{
    detail::expect_magic(is, "ASCI", "complex image");
    const auto version = detail::get<std::uint32_t>(is, "version");
    if (version != kImageVersion) throw FormatError("unsupported image version " + std::to_string(version));
    const auto h = detail::get<std::uint64_t>(is, "height");
    const auto w = detail::get<std::uint64_t>(is, "width");
    if (h == 0 || w == 0) throw FormatError("image header has zero dimension");
    if (h > (1u << 20) || w > (1u << 20)) throw FormatError("image header dimensions implausibly large");
    ComplexImage img{CMatrix(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w))};
    for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
        for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) img.pixels(r, c) = detail::get_cplx(is);
    return img;
}

inline void save_image(const std::filesystem::path& path, const ComplexImage& img)
{
    auto os = detail::open_out(path);
    write_image(os, img);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline ComplexImage load_image(const std::filesystem::path& path)
{
    auto is = detail::open_in(path);
    auto img = read_image(is);
    detail::expect_eof(is, "image");
    return img;
}

// -- checkpoints -------------------------------------------------------------

struct Checkpoint {
    StageParams params;
    std::uint64_t fingerprint = 0;
};

inline void write_checkpoint(std::ostream& os, const StageParams& params, std::uint64_t fingerprint)
{
    params.validate();
    detail::put_magic(os, "ASCK");
    detail::put<std::uint32_t>(os, kCheckpointVersion);
    detail::put<std::uint64_t>(os, params.stages());
    for (double t : params.t) detail::put(os, t);
    for (double r : params.rho) detail::put(os, r);
    detail::put<std::uint64_t>(os, fingerprint);
}

inline Checkpoint read_checkpoint(std::istream& is)
{
    detail::expect_magic(is, "ASCK", "checkpoint");
    const auto version = detail::get<std::uint32_t>(is, "version");
    if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
    const auto n = detail::get<std::uint64_t>(is, "stage count");
    if (n == 0 || n > 4096) throw FormatError("checkpoint stage count out of range");
    Checkpoint ck;
    ck.params.t.resize(n);
    ck.params.rho.resize(n);
    for (auto& t : ck.params.t) t = detail::get<double>(is, "step sizes");
    for (auto& r : ck.params.rho) r = detail::get<double>(is, "thresholds");
    ck.fingerprint = detail::get<std::uint64_t>(is, "fingerprint");
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const StageParams& params, std::uint64_t fingerprint)
{
    auto os = detail::open_out(path);
    write_checkpoint(os, params, fingerprint);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// Loads a checkpoint and refuses it if it was trained against a different dictionary.
inline StageParams load_checkpoint(const std::filesystem::path& path, const Dictionary& dict)
{
    auto is = detail::open_in(path);
    const auto ck = read_checkpoint(is);
    detail::expect_eof(is, "checkpoint");
    if (ck.fingerprint != dict.grid_fingerprint())
        throw FormatError("checkpoint " + path.string() + " was trained against a different dictionary geometry");
    return ck.params;
}

// -- dictionary cache --------------------------------------------------------

inline void write_dictionary(std::ostream& os, const Dictionary& dict)
{
    require(dict.geometry().has_value(), "write_dictionary: only grid dictionaries can be cached");
    const auto& g = *dict.geometry();
    detail::put_magic(os, "ASCD");
    detail::put<std::uint32_t>(os, kDictionaryVersion);
    for (std::uint64_t v : {std::uint64_t{g.radar.n_freq}, std::uint64_t{g.radar.n_aspect}, std::uint64_t{g.spatial.m},
                            std::uint64_t{g.spatial.n}})
        detail::put(os, v);
    for (double v : {g.radar.f_center, g.radar.bandwidth, g.radar.synth_angle, g.spatial.x_spacing, g.spatial.y_spacing})
        detail::put(os, v);
    detail::put<std::uint32_t>(os, kColumnOrderXFastest);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.norm));
    const CMatrix& phi = dict.matrix();
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < phi.cols(); ++c) detail::put_cplx(os, phi(r, c));
}

inline Dictionary read_dictionary(std::istream& is, std::size_t memory_budget = kDefaultMemoryBudget)
{
    detail::expect_magic(is, "ASCD", "dictionary");
    const auto version = detail::get<std::uint32_t>(is, "version");
    if (version != kDictionaryVersion) throw FormatError("unsupported dictionary version " + std::to_string(version));
    DictionaryGeometry g;
    g.radar.n_freq = detail::get<std::uint64_t>(is, "P");
    g.radar.n_aspect = detail::get<std::uint64_t>(is, "Q");
    g.spatial.m = detail::get<std::uint64_t>(is, "M");
    g.spatial.n = detail::get<std::uint64_t>(is, "N");
    g.radar.f_center = detail::get<double>(is, "f_center");
    g.radar.bandwidth = detail::get<double>(is, "bandwidth");
    g.radar.synth_angle = detail::get<double>(is, "synth_angle");
    g.spatial.x_spacing = detail::get<double>(is, "x_spacing");
    g.spatial.y_spacing = detail::get<double>(is, "y_spacing");
    if (detail::get<std::uint32_t>(is, "column order") != kColumnOrderXFastest)
        throw FormatError("unknown dictionary column order");
    const auto norm = detail::get<std::uint32_t>(is, "norm tag");
    if (norm > static_cast<std::uint32_t>(DftNorm::unitary)) throw FormatError("unknown dictionary transform tag");
    g.norm = static_cast<DftNorm>(norm);
    g.radar.validate();
    g.spatial.validate();
    check_memory_budget(g.radar, g.spatial, memory_budget);

    CMatrix phi(static_cast<Eigen::Index>(g.radar.n_freq * g.radar.n_aspect), static_cast<Eigen::Index>(g.spatial.m * g.spatial.n));
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < phi.cols(); ++c) phi(r, c) = detail::get_cplx(is);
    return Dictionary::from_matrix(std::move(phi), g);
}

inline void save_dictionary(const std::filesystem::path& path, const Dictionary& dict)
{
    auto os = detail::open_out(path);
    write_dictionary(os, dict);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline Dictionary load_dictionary(const std::filesystem::path& path, std::size_t memory_budget = kDefaultMemoryBudget)
{
    auto is = detail::open_in(path);
    auto d = read_dictionary(is, memory_budget);
    detail::expect_eof(is, "dictionary");
    return d;
}

} // namespace asc::io
