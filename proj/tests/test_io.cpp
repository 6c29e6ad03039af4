#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "test_util.hpp"

using namespace asc;
using asc::test::rel_diff;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("asc_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes)
{
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << bytes;
}

io::DatasetSpec small_spec()
{
    io::DatasetSpec spec;
    spec.n_train = 6;
    spec.n_val = 2;
    spec.n_test = 3;
    spec.train.noise_sigma = 0.2;
    spec.test.noise_sigma = 0.4;
    spec.seed = 1234;
    return spec;
}

} // namespace

TEST(Preprocess, CropSizedUnitImageIsUnchanged)
{
    std::mt19937_64 rng(100);
    CMatrix m = asc::test::random_cmatrix(16, 16, rng);
    m /= m.norm();
    const ComplexImage img{m};
    EXPECT_LT((io::preprocess(img, 16).pixels - m).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((io::preprocess(img, 0).pixels - m).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Preprocess, CentreCropKeepsMiddleRows)
{
    CMatrix m(100, 100);
    for (Eigen::Index c = 0; c < 100; ++c)
        for (Eigen::Index r = 0; r < 100; ++r) m(r, c) = cplx(static_cast<double>(r), static_cast<double>(c));
    double scale = 0.0;
    const auto out = io::preprocess(ComplexImage{m}, 80, &scale);
    ASSERT_EQ(out.rows(), 80u);
    ASSERT_EQ(out.cols(), 80u);
    EXPECT_NEAR(out.pixels.norm(), 1.0, 1e-12);
    EXPECT_NEAR(out.pixels(0, 0).real() / scale, 10.0, 1e-9);
    EXPECT_NEAR(out.pixels(79, 79).imag() / scale, 89.0, 1e-9);

    // odd residual: floor-biased offset
    const auto odd = io::preprocess(ComplexImage{m.topLeftCorner(99, 99)}, 80, &scale);
    EXPECT_NEAR(odd.pixels(0, 0).real() / scale, 9.0, 1e-9);
}

TEST(Preprocess, Errors)
{
    EXPECT_THROW(io::preprocess(ComplexImage{CMatrix::Zero(8, 8)}, 4), ContractError);
    EXPECT_THROW(io::preprocess(ComplexImage{CMatrix::Ones(8, 8)}, 9), ContractError);
}

TEST(SceneFile, RoundTrip)
{
    const std::vector<AscParams> scene = {{{1.5, -0.25}, 0.5, 1.0 / 3.0, -2.0}, {{0.0, 1e-17}, -1.0, 0.0, 7.25}};
    std::stringstream ss;
    io::write_scene(ss, scene);
    const auto back = io::read_scene(ss);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].amplitude, scene[i].amplitude);
        EXPECT_EQ(back[i].alpha, scene[i].alpha);
        EXPECT_EQ(back[i].x, scene[i].x);
        EXPECT_EQ(back[i].y, scene[i].y);
    }
    std::stringstream bad("A_re,A_im,alpha,x,y\n1,2,3\n");
    EXPECT_THROW(io::read_scene(bad), io::FormatError);
}

TEST(ImageFile, BitExactRoundTrip)
{
    TempDir tmp;
    std::mt19937_64 rng(101);
    const ComplexImage img{asc::test::random_cmatrix(7, 5, rng)};
    io::save_image(tmp.path / "a.bin", img);
    const auto back = io::load_image(tmp.path / "a.bin");
    ASSERT_EQ(back.rows(), 7u);
    ASSERT_EQ(back.cols(), 5u);
    EXPECT_EQ(std::memcmp(back.pixels.data(), img.pixels.data(), sizeof(cplx) * 35), 0);
    EXPECT_EQ(fs::file_size(tmp.path / "a.bin"), 4u + 4 + 8 + 8 + 16 * 35);
    io::save_image(tmp.path / "b.bin", back);
    EXPECT_EQ(slurp(tmp.path / "a.bin"), slurp(tmp.path / "b.bin"));
}

TEST(ImageFile, LayoutIsRowMajorLittleEndian)
{
    CMatrix m(2, 2);
    m << cplx(1, 2), cplx(3, 4), cplx(5, 6), cplx(7, 8);
    std::stringstream ss;
    io::write_image(ss, ComplexImage{m});
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.substr(0, 4), "ASCI");
    double v[8];
    std::memcpy(v, bytes.data() + 24, sizeof v);
    for (int i = 0; i < 8; ++i) EXPECT_EQ(v[i], i + 1.0);
}

TEST(ImageFile, RejectsMalformedInput)
{
    TempDir tmp;
    const ComplexImage img{CMatrix::Ones(3, 3)};
    io::save_image(tmp.path / "ok.bin", img);
    const std::string good = slurp(tmp.path / "ok.bin");

    spit(tmp.path / "magic.bin", "XXXX" + good.substr(4));
    EXPECT_THROW(io::load_image(tmp.path / "magic.bin"), io::FormatError);
    spit(tmp.path / "short.bin", good.substr(0, good.size() - 3));
    EXPECT_THROW(io::load_image(tmp.path / "short.bin"), io::FormatError);
    spit(tmp.path / "long.bin", good + "z");
    EXPECT_THROW(io::load_image(tmp.path / "long.bin"), io::FormatError);
    std::string ver = good;
    ver[4] = 9;
    spit(tmp.path / "ver.bin", ver);
    EXPECT_THROW(io::load_image(tmp.path / "ver.bin"), io::FormatError);
    std::string zero = good;
    std::memset(zero.data() + 8, 0, 8);
    spit(tmp.path / "zero.bin", zero);
    EXPECT_THROW(io::load_image(tmp.path / "zero.bin"), io::FormatError);
    EXPECT_THROW(io::load_image(tmp.path / "missing.bin"), std::runtime_error);
}

TEST(Checkpoint, RoundTripAndFingerprintCheck)
{
    TempDir tmp;
    const auto& d8 = asc::test::aligned_dictionary(8);
    const auto& d16 = asc::test::aligned_dictionary(16);
    const StageParams p{{0.1, 0.2 / 3.0, 1e-300}, {0.0, 0.005, 0.123456789}};
    io::save_checkpoint(tmp.path / "c.ckpt", p, d8.grid_fingerprint());
    EXPECT_EQ(io::load_checkpoint(tmp.path / "c.ckpt", d8), p);
    EXPECT_THROW(io::load_checkpoint(tmp.path / "c.ckpt", d16), io::FormatError);
    io::save_checkpoint(tmp.path / "d.ckpt", io::load_checkpoint(tmp.path / "c.ckpt", d8), d8.grid_fingerprint());
    EXPECT_EQ(slurp(tmp.path / "c.ckpt"), slurp(tmp.path / "d.ckpt"));
}

TEST(DictionaryCache, RoundTrip)
{
    TempDir tmp;
    const auto& d = asc::test::aligned_dictionary(8);
    io::save_dictionary(tmp.path / "d.bin", d);
    const auto back = io::load_dictionary(tmp.path / "d.bin");
    EXPECT_EQ(back.geometry(), d.geometry());
    EXPECT_EQ(back.grid_fingerprint(), d.grid_fingerprint());
    EXPECT_EQ(std::memcmp(back.matrix().data(), d.matrix().data(), sizeof(cplx) * d.matrix().size()), 0);
    EXPECT_THROW(io::load_dictionary(tmp.path / "d.bin", 1000), ContractError);
    EXPECT_THROW(io::save_dictionary(tmp.path / "x.bin", Dictionary::from_matrix(CMatrix::Ones(2, 2))), ContractError);
}

TEST(Dataset, SingleScattererPeaksAtItsCell)
{
    TempDir tmp;
    io::DatasetSpec spec;
    spec.n_train = spec.n_val = spec.n_test = 1;
    spec.train = {1, 1, 1.0, 1.0, 0.0, 0.0, 0.0};
    spec.test = spec.train;
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    const auto m = io::synthesize_dataset(spec, g, sp, tmp.path);
    ASSERT_EQ(m.entries.size(), 3u);
    for (const auto& e : m.entries) {
        ASSERT_EQ(e.scene.size(), 1u);
        const auto img = io::load_image(tmp.path / e.file);
        Eigen::Index r, c;
        img.pixels.cwiseAbs().maxCoeff(&r, &c);
        EXPECT_NEAR(sp.x_at(static_cast<std::size_t>(r)), e.scene[0].x, 1e-12);
        EXPECT_NEAR(sp.y_at(static_cast<std::size_t>(c)), e.scene[0].y, 1e-12);
        EXPECT_NEAR(img.pixels.norm(), 1.0, 1e-12);
    }
}

TEST(Dataset, SameSeedIsByteIdenticalAcrossThreadCounts)
{
    TempDir a, b;
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    const auto ma = io::synthesize_dataset(small_spec(), g, sp, a.path, DftNorm::backward, 1);
    const auto mb = io::synthesize_dataset(small_spec(), g, sp, b.path, DftNorm::backward, 3);
    EXPECT_EQ(slurp(a.path / "manifest.json"), slurp(b.path / "manifest.json"));
    for (const auto& e : ma.entries) EXPECT_EQ(slurp(a.path / e.file), slurp(b.path / e.file)) << e.file;

    TempDir c;
    auto other = small_spec();
    other.seed = 99;
    io::synthesize_dataset(other, g, sp, c.path);
    EXPECT_NE(slurp(a.path / ma.entries[0].file), slurp(c.path / ma.entries[0].file));
}

TEST(Dataset, SplitsFollowTheirDistributions)
{
    TempDir tmp;
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    auto spec = small_spec();
    spec.train.noise_sigma = 0.0;
    const auto m = io::synthesize_dataset(spec, g, sp, tmp.path);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& e : m.entries) {
        const auto& dist = e.split == "test" ? spec.test : spec.train;
        EXPECT_GE(e.scene.size(), dist.k_min);
        EXPECT_LE(e.scene.size(), dist.k_max);
        EXPECT_EQ(e.noise_sigma, dist.noise_sigma);
        counts[e.split == "train" ? 0 : e.split == "val" ? 1 : 2]++;
        std::set<std::pair<double, double>> cells;
        for (const auto& p : e.scene) {
            EXPECT_TRUE(sp.contains(p.x, p.y));
            cells.emplace(std::round(p.x / sp.x_spacing), std::round(p.y / sp.y_spacing));
        }
        EXPECT_EQ(cells.size(), e.scene.size());
        EXPECT_GT(io::load_image(tmp.path / e.file).pixels.norm(), 0.0);
    }
    EXPECT_EQ(counts[0], 6u);
    EXPECT_EQ(counts[1], 2u);
    EXPECT_EQ(counts[2], 3u);
    EXPECT_EQ(io::load_split(tmp.path, m, "val").size(), 2u);
}

TEST(Dataset, ManifestRegeneratesEveryImage)
{
    TempDir tmp;
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    io::synthesize_dataset(small_spec(), g, sp, tmp.path);
    const auto m = io::load_manifest(tmp.path / "manifest.json");
    EXPECT_EQ(m.radar, g);
    EXPECT_EQ(m.spatial, sp);
    for (const auto& e : m.entries) {
        const auto regen = io::render_entry(e, m.radar, m.norm, m.crop);
        const auto disk = io::load_image(tmp.path / e.file);
        EXPECT_LT(rel_diff(regen.pixels, disk.pixels), 1e-12);
    }
}

TEST(Dataset, RejectsBadSpecs)
{
    TempDir tmp;
    const RadarGrid g;
    auto spec = small_spec();
    spec.n_test = 0;
    EXPECT_THROW(io::synthesize_dataset(spec, g, SpatialGrid::aligned_to(g), tmp.path), ContractError);
    spec = small_spec();
    spec.train.empty_probability = 0.5;
    spec.train.noise_sigma = 0.0;
    EXPECT_THROW(io::synthesize_dataset(spec, g, SpatialGrid::aligned_to(g), tmp.path), ContractError);
}

TEST(Config, RoundTripAndStrictKeys)
{
    TempDir tmp;
    auto c = io::ExperimentConfig::desk();
    c.train.epochs = 7;
    c.ista.max_iters = 33;
    c.amp.policy = AmpThreshold::fixed;
    c.dataset.test.jitter = 0.25;
    c.set_seed(42);
    io::save_config(tmp.path / "c.json", c);
    const auto back = io::load_config(tmp.path / "c.json");
    EXPECT_EQ(back.train, c.train);
    EXPECT_EQ(back.dataset, c.dataset);
    EXPECT_EQ(back.ista.max_iters, 33u);
    EXPECT_EQ(back.amp.policy, AmpThreshold::fixed);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_NEAR(back.radar.synth_angle, c.radar.synth_angle, 1e-15);

    EXPECT_THROW(io::config_from_json(nlohmann::json::parse(R"({"version": 1, "trian": {}})")), io::ConfigError);
    EXPECT_THROW(io::config_from_json(nlohmann::json::parse(R"({"version": 1, "train": {"lamda": 1}})")), io::ConfigError);
    EXPECT_THROW(io::config_from_json(nlohmann::json::parse(R"({"train": {}})")), io::ConfigError);
    EXPECT_THROW(io::config_from_json(nlohmann::json::parse(R"({"version": 1, "train": {"epochs": "many"}})")),
                 io::ConfigError);
    EXPECT_THROW(io::config_from_json(nlohmann::json::parse(R"({"version": 1, "train": {"epochs": 0}})")),
                 io::ConfigError);
    const auto partial = io::config_from_json(nlohmann::json::parse(R"({"version": 1, "omp": {"sparsity": 12}})"));
    EXPECT_EQ(partial.omp_sparsity, 12u);
    EXPECT_EQ(partial.train.lambda, io::kDeskLambda);
}

TEST(Config, PaperScale)
{
    const auto c = io::ExperimentConfig::full_scale();
    EXPECT_EQ(c.radar.n_freq, 80u);
    EXPECT_EQ(c.spatial_grid().m, 80u);
    EXPECT_EQ(dictionary_bytes(c.radar, c.spatial_grid()), 6400u * 6400u * 16u);
}

TEST(Pgm, ZeroImageIsBlack)
{
    const auto lv = io::magnitude_levels(ComplexImage{CMatrix::Zero(4, 3)});
    for (auto v : lv) EXPECT_EQ(v, 0);
}

TEST(Pgm, ImpulseHasOneMaximalPixel)
{
    CMatrix m = CMatrix::Zero(5, 5);
    m(2, 3) = cplx(0, -3);
    for (auto scale : {io::MagnitudeScale::linear, io::MagnitudeScale::db}) {
        const auto lv = io::magnitude_levels(ComplexImage{m}, scale);
        EXPECT_EQ(std::count(lv.begin(), lv.end(), 255), 1);
        EXPECT_EQ(lv[2 * 5 + 3], 255);
    }
}

TEST(Pgm, LinearPeakIs255AndDbFloor)
{
    std::mt19937_64 rng(102);
    const ComplexImage img{asc::test::random_cmatrix(6, 9, rng, 1e-3)};
    const auto lv = io::magnitude_levels(img);
    EXPECT_EQ(*std::max_element(lv.begin(), lv.end()), 255);

    CMatrix m(1, 3);
    m << 1.0, 0.1, 1e-5;  // 0 dB, -20 dB, -100 dB
    const auto db = io::magnitude_levels(ComplexImage{m}, io::MagnitudeScale::db);
    EXPECT_EQ(db[0], 255);
    EXPECT_EQ(db[1], 128);
    EXPECT_EQ(db[2], 0);
}

TEST(Pgm, FileHeader)
{
    TempDir tmp;
    io::export_magnitude_image(ComplexImage{CMatrix::Ones(2, 3)}, tmp.path / "x.pgm");
    const auto bytes = slurp(tmp.path / "x.pgm");
    EXPECT_EQ(bytes.substr(0, 11), "P5\n3 2\n255\n");
    EXPECT_EQ(bytes.size(), 11u + 6u);
}

TEST(Csv, Headers)
{
    std::ostringstream a, b, c, d;
    io::write_trace_csv(a, {{0, 1.0, 1.0, 0.0, 5}});
    io::write_train_log_csv(b, {{1, 0.5, 0.6, 1e-3, 2.0}});
    io::write_benchmark_csv(c, {{"ISTA", 0.5, 0.1, "ista t=0.01", false, 2}});
    io::write_asc_csv(d, {{1.0, 2.0, cplx(3, 4), 7}});
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "iter,objective,residual_l2,l1_norm,wallclock_ns");
    EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "epoch,train_loss,val_loss,lr,wallclock_ms");
    EXPECT_NE(c.str().find("\"ISTA\",0.5,0.1,0,2,\"ista t=0.01\""), std::string::npos);
    EXPECT_NE(d.str().find("0,7,1,2,3,4,5"), std::string::npos);
}
