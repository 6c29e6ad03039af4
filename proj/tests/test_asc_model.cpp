#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace asc;
using asc::test::rel_diff;

TEST(RadarGrid, SamplesAreIncreasingAndInsideTheBand)
{
    const RadarGrid g;
    const auto f = g.frequencies();
    const auto phi = g.aspects();
    ASSERT_EQ(f.size(), 16u);
    for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GT(f[i], f[i - 1]);
    for (std::size_t i = 1; i < phi.size(); ++i) EXPECT_GT(phi[i], phi[i - 1]);
    EXPECT_GT(f.front(), g.f_center - g.bandwidth / 2);
    EXPECT_LT(f.back(), g.f_center + g.bandwidth / 2);
    EXPECT_GT(phi.front(), -g.synth_angle / 2);
    EXPECT_LT(phi.back(), g.synth_angle / 2);
    EXPECT_NEAR(f[1] - f[0], g.bandwidth / 16, 1e-3);
}

TEST(RadarGrid, RejectsInvalidGrids)
{
    RadarGrid g;
    g.n_freq = 1;
    EXPECT_THROW(g.validate(), ContractError);
    g = RadarGrid{};
    g.bandwidth = 0;
    EXPECT_THROW(g.validate(), ContractError);
    g = RadarGrid{};
    g.f_center = g.bandwidth / 4;
    EXPECT_THROW(g.validate(), ContractError);
}

TEST(SpatialGrid, AlignedSpacingMatchesResolution)
{
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    EXPECT_EQ(sp.m, 16u);
    EXPECT_NEAR(sp.x_spacing, 0.299792458, 1e-12);
    EXPECT_DOUBLE_EQ(sp.x_at(8), 0.0);
    EXPECT_DOUBLE_EQ(sp.y_at(8), 0.0);
    EXPECT_DOUBLE_EQ(sp.x_at(9) - sp.x_at(8), sp.x_spacing);
    EXPECT_TRUE(sp.contains(0.0, 0.0));
    EXPECT_FALSE(sp.contains(100.0, 0.0));
}

TEST(EvaluateAsc, OriginScattererIsAllOnes)
{
    const RadarGrid g;
    const auto e = evaluate_asc({{1, 0}, 0.0, 0.0, 0.0}, g).entries;
    EXPECT_LT((e - CMatrix::Ones(16, 16)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EvaluateAsc, MatchesScalarEvaluationOffOrigin)
{
    const RadarGrid g;
    const double x0 = 1.37;
    const auto e = evaluate_asc({{1, 0}, 0.0, x0, 0.0}, g).entries;
    const auto f = g.frequencies();
    const auto phi = g.aspects();
    for (std::size_t p = 0; p < 16; p += 5)
        for (std::size_t q = 0; q < 16; q += 3) {
            const long double arg = -4.0L * 3.141592653589793238462643383279L * f[p] * x0 * std::cos((long double)phi[q]) /
                                    299792458.0L;
            const cplx want{static_cast<double>(std::cos(arg)), static_cast<double>(std::sin(arg))};
            EXPECT_LT(std::abs(e(p, q) - want), 1e-10) << p << "," << q;
        }
}

TEST(EvaluateAsc, AlphaOneAtCentreFrequencyGivesJ)
{
    RadarGrid g;
    g.n_freq = 3;  // the middle sample sits exactly on f_c
    const auto e = evaluate_asc({{2, 0}, 1.0, 0.0, 0.0}, g).entries;
    EXPECT_DOUBLE_EQ(g.frequencies()[1], g.f_center);
    for (Eigen::Index q = 0; q < e.cols(); ++q) EXPECT_LT(std::abs(e(1, q) - cplx(0, 2)), 1e-14);
}

TEST(EvaluateAsc, RejectsOverflow)
{
    const RadarGrid g;
    EXPECT_THROW(evaluate_asc({{1, 0}, 1e5, 0.0, 0.0}, g), ContractError);
    EXPECT_THROW(evaluate_asc({{1, 0}, 0.0, std::nan(""), 0.0}, g), ContractError);
}

TEST(SynthesizeSignal, EmptyNoiselessSceneIsZero)
{
    const auto e = synthesize_signal({}, RadarGrid{}, 0.0).entries;
    EXPECT_EQ(e.norm(), 0.0);
}

TEST(SynthesizeSignal, TwoUnitScatterersEqualOneDouble)
{
    const RadarGrid g;
    const AscParams a{{1, 0}, 0.0, 0.6, -1.2};
    AscParams b = a;
    b.amplitude = 2.0;
    EXPECT_LT(rel_diff(synthesize_signal({a, a}, g, 0.0).entries, synthesize_signal({b}, g, 0.0).entries), 1e-15);
}

TEST(SynthesizeSignal, SuperpositionOfRandomScatterers)
{
    std::mt19937_64 rng(3);
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    std::uniform_int_distribution<std::size_t> cell(0, 255);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<AscParams> scene;
        CMatrix sum = CMatrix::Zero(16, 16);
        for (int i = 0; i < 3; ++i) {
            const auto c = column_coord(cell(rng), sp);
            AscParams p{{u(rng), u(rng)}, 0.5 * u(rng), c.x, c.y};
            scene.push_back(p);
            sum += evaluate_asc(p, g).entries;
        }
        EXPECT_LT(rel_diff(synthesize_signal(scene, g, 0.0).entries, sum), 1e-12);
    }
}

TEST(SynthesizeSignal, SeededNoiseIsReproducibleWithRequestedPower)
{
    RadarGrid g;
    g.n_freq = g.n_aspect = 64;
    const auto a = synthesize_signal({}, g, 0.5, 11).entries;
    const auto b = synthesize_signal({}, g, 0.5, 11).entries;
    const auto c = synthesize_signal({}, g, 0.5, 12).entries;
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(cplx) * a.size()), 0);
    EXPECT_GT((a - c).norm(), 0.0);
    const double power = a.squaredNorm() / static_cast<double>(a.size());
    EXPECT_NEAR(power, 0.25, 0.02);
    // circular: real and imaginary parts carry equal power
    EXPECT_NEAR(a.real().squaredNorm() / a.size(), 0.125, 0.01);
}

TEST(SignalToImage, ConstantSignalIsCentreImpulse)
{
    const RadarGrid g;
    const auto img = signal_to_image(evaluate_asc({{1, 0}, 0.0, 0.0, 0.0}, g)).pixels;
    EXPECT_LT(std::abs(img(8, 8) - cplx(1, 0)), 1e-14);
    CMatrix rest = img;
    rest(8, 8) = 0;
    EXPECT_LT(rest.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SignalToImage, OnGridScattererPeaksAtItsPixel)
{
    const RadarGrid g;
    const auto sp = SpatialGrid::aligned_to(g);
    for (std::size_t xi = 0; xi < sp.m; ++xi)
        for (std::size_t yi = 0; yi < sp.n; ++yi) {
            const auto img = signal_to_image(evaluate_asc({{1, 0}, 0.0, sp.x_at(xi), sp.y_at(yi)}, g)).pixels;
            Eigen::Index r, c;
            img.cwiseAbs().maxCoeff(&r, &c);
            EXPECT_EQ(static_cast<std::size_t>(r), xi);
            EXPECT_EQ(static_cast<std::size_t>(c), yi);
        }
}

TEST(SignalToImage, IsLinear)
{
    std::mt19937_64 rng(5);
    const RadarGrid g;
    const SignalMatrix e1{asc::test::random_cmatrix(16, 16, rng), g};
    const SignalMatrix e2{asc::test::random_cmatrix(16, 16, rng), g};
    const cplx a{0.3, -1.1}, b{2.0, 0.4};
    const SignalMatrix mix{a * e1.entries + b * e2.entries, g};
    const CMatrix lhs = signal_to_image(mix).pixels;
    const CMatrix rhs = a * signal_to_image(e1).pixels + b * signal_to_image(e2).pixels;
    EXPECT_LT(rel_diff(lhs, rhs), 1e-13);
}

TEST(SignalToImage, UnitaryTransformPreservesEnergy)
{
    std::mt19937_64 rng(8);
    for (std::size_t n : {2u, 7u, 16u, 33u}) {
        RadarGrid g;
        g.n_freq = n;
        g.n_aspect = n + 3;
        const SignalMatrix e{asc::test::random_cmatrix(n, n + 3, rng), g};
        const double ein = e.entries.squaredNorm();
        const double eout = signal_to_image(e, DftNorm::unitary).pixels.squaredNorm();
        EXPECT_NEAR(eout / ein, 1.0, 1e-12);
    }
}

TEST(ImageTransform, InverseUndoesForward)
{
    std::mt19937_64 rng(9);
    for (auto norm : {DftNorm::backward, DftNorm::unitary}) {
        const ImageTransform tf(12, 9, norm);
        const CMatrix x = asc::test::random_cmatrix(12, 9, rng);
        EXPECT_LT(rel_diff(tf.inverse(tf.forward(x)), x), 1e-13);
    }
}
