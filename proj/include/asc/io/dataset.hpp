#pragma once

// Preprocessing, synthetic scene datasets and their JSON manifests.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "asc/asc_model.hpp"
#include "asc/io/binary.hpp"

namespace asc::io {

/// Centre crop to crop x crop (offset floor((H - crop) / 2)) and scale to unit L2 norm.
/// crop = 0 keeps the full image.
inline ComplexImage preprocess(const ComplexImage& img, std::size_t crop, double* scale_out = nullptr)
{
    const std::size_t h = img.rows(), w = img.cols();
    if (crop == 0) crop = std::min(h, w);
    require(crop <= std::min(h, w), "preprocess: crop larger than image");
    const auto r0 = static_cast<Eigen::Index>((h - crop) / 2);
    const auto c0 = static_cast<Eigen::Index>((w - crop) / 2);
    const auto n = static_cast<Eigen::Index>(crop);
    ComplexImage out{img.pixels.block(r0, c0, n, n)};
    const double energy = out.pixels.norm();
    require(energy > 0.0 && std::isfinite(energy), "preprocess: zero-energy image cannot be normalised");
    out.pixels /= energy;
    if (scale_out) *scale_out = 1.0 / energy;
    return out;
}

// -- scene text files ---------------------------------------------------------

/// One scatterer per line: A_re,A_im,alpha,x,y. A header line and '#' comments are allowed.
inline void write_scene(std::ostream& os, const std::vector<AscParams>& scene)
{
    os << "A_re,A_im,alpha,x,y\n" << std::setprecision(17);
    for (const auto& s : scene)
        os << s.amplitude.real() << ',' << s.amplitude.imag() << ',' << s.alpha << ',' << s.x << ',' << s.y << '\n';
}

inline std::vector<AscParams> read_scene(std::istream& is)
{
    std::vector<AscParams> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("A_re", 0) == 0) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double re, im, alpha, x, y;
        if (!(ls >> re >> im >> alpha >> x >> y)) throw FormatError("scene file line " + std::to_string(lineno) + ": expected 5 numbers");
        std::string rest;
        if (ls >> rest) throw FormatError("scene file line " + std::to_string(lineno) + ": trailing fields");
        out.push_back({{re, im}, alpha, x, y});
    }
    return out;
}

// -- synthetic datasets -------------------------------------------------------

struct SceneDistribution {
    std::size_t k_min = 3;
    std::size_t k_max = 8;
    double amp_min = 0.5;
    double amp_max = 1.5;
    double noise_sigma = 0.5;      // per signal-domain entry
    double jitter = 0.0;           // off-grid offset, uniform in +-jitter/2 cells
    double empty_probability = 0.0;

    void validate() const
    {
        require(k_min >= 1 && k_min <= k_max, "SceneDistribution: need 1 <= k_min <= k_max");
        require(amp_min > 0.0 && amp_min <= amp_max, "SceneDistribution: need 0 < amp_min <= amp_max");
        require(noise_sigma >= 0.0, "SceneDistribution: noise must be non-negative");
        require(jitter >= 0.0 && jitter <= 1.0, "SceneDistribution: jitter must lie in [0, 1]");
        require(empty_probability >= 0.0 && empty_probability < 1.0, "SceneDistribution: empty probability in [0, 1)");
        require(empty_probability == 0.0 || noise_sigma > 0.0, "SceneDistribution: empty scenes need noise");
    }

    bool operator==(const SceneDistribution&) const = default;
};

/// Train/validation scenes come from `train`; the test split uses the shifted
/// `test` distribution (more scatterers, different noise, off-grid positions),
/// standing in for a change of acquisition geometry.
struct DatasetSpec {
    SceneDistribution train{};
    SceneDistribution test{8, 14, 0.5, 1.5, 1.0, 1.0, 0.0};
    std::size_t n_train = 200;
    std::size_t n_val = 50;
    std::size_t n_test = 50;
    std::size_t crop = 0;
    std::uint64_t seed = 7;

    bool operator==(const DatasetSpec&) const = default;
};

struct ManifestEntry {
    std::string split;
    std::size_t index = 0;        // within the split
    std::string file;             // relative to the dataset root
    std::uint64_t noise_seed = 0;
    double noise_sigma = 0.0;
    double scale = 1.0;           // normalisation factor applied after imaging
    std::vector<AscParams> scene;
};

struct Manifest {
    RadarGrid radar;
    SpatialGrid spatial;
    DftNorm norm = DftNorm::backward;
    std::size_t crop = 0;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::size_t global_index) { return seed + global_index; }

inline std::vector<AscParams> draw_scene(const SceneDistribution& dist, const SpatialGrid& spatial, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (dist.empty_probability > 0.0 && u01(rng) < dist.empty_probability) return {};
    const std::size_t cells = spatial.m * spatial.n;
    std::uniform_int_distribution<std::size_t> kd(dist.k_min, std::min(dist.k_max, cells));
    const std::size_t k = kd(rng);

    // distinct cells: partial Fisher-Yates over cell indices
    std::vector<std::size_t> idx(cells);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }

    std::vector<AscParams> scene;
    scene.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t xi = idx[i] % spatial.m, yi = idx[i] / spatial.m;
        AscParams p;
        const double mag = dist.amp_min + (dist.amp_max - dist.amp_min) * u01(rng);
        const double ph = 2.0 * kPi * u01(rng);
        p.amplitude = std::polar(mag, ph);
        const double jx = dist.jitter * (u01(rng) - 0.5), jy = dist.jitter * (u01(rng) - 0.5);
        p.x = spatial.x_at(xi) + jx * spatial.x_spacing;
        p.y = spatial.y_at(yi) + jy * spatial.y_spacing;
        scene.push_back(p);
    }
    return scene;
}

/// Recomputes an image from its manifest record.
inline ComplexImage render_entry(const ManifestEntry& e, const RadarGrid& radar, DftNorm norm, std::size_t crop,
                                 double* scale_out = nullptr)
{
    const auto sig = synthesize_signal(e.scene, radar, e.noise_sigma, e.noise_seed);
    return preprocess(signal_to_image(sig, norm), crop, scale_out);
}

inline nlohmann::json to_json(const Manifest& m)
{
    using nlohmann::json;
    json j;
    j["version"] = 1;
    j["radar"] = {{"f_center", m.radar.f_center},
                  {"bandwidth", m.radar.bandwidth},
                  {"synth_angle", m.radar.synth_angle},
                  {"n_freq", m.radar.n_freq},
                  {"n_aspect", m.radar.n_aspect}};
    j["spatial"] = {{"m", m.spatial.m}, {"n", m.spatial.n}, {"x_spacing", m.spatial.x_spacing}, {"y_spacing", m.spatial.y_spacing}};
    j["norm"] = m.norm == DftNorm::unitary ? "unitary" : "backward";
    j["crop"] = m.crop;
    j["seed"] = m.seed;
    json entries = json::array();
    for (const auto& e : m.entries) {
        json sc = json::array();
        for (const auto& s : e.scene)
            sc.push_back({{"A_re", s.amplitude.real()}, {"A_im", s.amplitude.imag()}, {"alpha", s.alpha}, {"x", s.x}, {"y", s.y}});
        entries.push_back({{"split", e.split},
                           {"index", e.index},
                           {"file", e.file},
                           {"noise_seed", e.noise_seed},
                           {"noise_sigma", e.noise_sigma},
                           {"scale", e.scale},
                           {"scene", sc}});
    }
    j["entries"] = entries;
    return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j)
{
    if (j.value("version", 0) != 1) throw FormatError("unsupported manifest version");
    Manifest m;
    const auto& r = j.at("radar");
    m.radar.f_center = r.at("f_center");
    m.radar.bandwidth = r.at("bandwidth");
    m.radar.synth_angle = r.at("synth_angle");
    m.radar.n_freq = r.at("n_freq");
    m.radar.n_aspect = r.at("n_aspect");
    const auto& sp = j.at("spatial");
    m.spatial.m = sp.at("m");
    m.spatial.n = sp.at("n");
    m.spatial.x_spacing = sp.at("x_spacing");
    m.spatial.y_spacing = sp.at("y_spacing");
    m.norm = j.at("norm").get<std::string>() == "unitary" ? DftNorm::unitary : DftNorm::backward;
    m.crop = j.at("crop");
    m.seed = j.at("seed");
    for (const auto& e : j.at("entries")) {
        ManifestEntry me;
        me.split = e.at("split");
        me.index = e.at("index");
        me.file = e.at("file");
        me.noise_seed = e.at("noise_seed");
        me.noise_sigma = e.at("noise_sigma");
        me.scale = e.at("scale");
        for (const auto& s : e.at("scene"))
            me.scene.push_back({{s.at("A_re").get<double>(), s.at("A_im").get<double>()}, s.at("alpha"), s.at("x"), s.at("y")});
        m.entries.push_back(std::move(me));
    }
    return m;
}

inline void save_manifest(const std::filesystem::path& path, const Manifest& m)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << std::setw(1) << to_json(m) << "\n";
}

inline Manifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

/// Thread count from the ASC_THREADS environment variable, else hardware concurrency.
inline std::size_t default_thread_count()
{
    if (const char* env = std::getenv("ASC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Draws and writes train/val/test splits under `root` plus root/manifest.json.
/// Scene i (counted across splits) uses seed + i, so output does not depend on
/// the number of worker threads.
inline Manifest synthesize_dataset(const DatasetSpec& spec, const RadarGrid& radar, const SpatialGrid& spatial,
                                   const std::filesystem::path& root, DftNorm norm = DftNorm::backward,
                                   std::size_t threads = 1)
{
    require(spec.n_train >= 1 && spec.n_val >= 1 && spec.n_test >= 1, "synthesize_dataset: split sizes must be >= 1");
    spec.train.validate();
    spec.test.validate();
    radar.validate();
    spatial.validate();

    Manifest m;
    m.radar = radar;
    m.spatial = spatial;
    m.norm = norm;
    m.crop = spec.crop;
    m.seed = spec.seed;

    struct Job {
        std::string split;
        std::size_t index;
        const SceneDistribution* dist;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < spec.n_train; ++i) jobs.push_back({"train", i, &spec.train});
    for (std::size_t i = 0; i < spec.n_val; ++i) jobs.push_back({"val", i, &spec.train});
    for (std::size_t i = 0; i < spec.n_test; ++i) jobs.push_back({"test", i, &spec.test});

    for (const char* split : {"train", "val", "test"}) std::filesystem::create_directories(root / split);
    m.entries.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        try {
            for (std::size_t g = next++; g < jobs.size(); g = next++) {
                const auto& job = jobs[g];
                const std::uint64_t s = derive_seed(spec.seed, g);
                std::mt19937_64 rng(s);
                ManifestEntry e;
                e.split = job.split;
                e.index = job.index;
                std::ostringstream name;
                name << job.split << "/" << std::setw(6) << std::setfill('0') << job.index << ".bin";
                e.file = name.str();
                e.noise_seed = s ^ 0x9E3779B97F4A7C15ULL;
                e.noise_sigma = job.dist->noise_sigma;
                e.scene = draw_scene(*job.dist, spatial, rng);
                const auto img = render_entry(e, radar, norm, spec.crop, &e.scale);
                save_image(root / e.file, img);
                m.entries[g] = std::move(e);
            }
        } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
        }
    };

    threads = std::max<std::size_t>(1, threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    save_manifest(root / "manifest.json", m);
    return m;
}

/// Images of one split in index order.
inline std::vector<ComplexImage> load_split(const std::filesystem::path& root, const Manifest& m, const std::string& split)
{
    std::vector<ComplexImage> out;
    for (const auto& e : m.entries)
        if (e.split == split) out.push_back(load_image(root / e.file));
    return out;
}

} // namespace asc::io
