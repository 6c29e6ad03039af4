#pragma once

// Scatterer readout from sparse codes, residual metric and the method benchmark.

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "asc/solvers/amp.hpp"
#include "asc/solvers/ista.hpp"
#include "asc/solvers/omp.hpp"
#include "asc/unfolded/train.hpp"

namespace asc {

struct ExtractedAsc {
    double x = 0.0;
    double y = 0.0;
    cplx amplitude;  // raw code entry; alpha is not undone
    std::size_t grid_index = 0;
};

inline double default_magnitude_floor(const CVector& z)
{
    return z.size() == 0 ? 0.0 : 0.1 * z.cwiseAbs().maxCoeff();
}

/// Entries with |z_i| > floor, strongest first (ties by column index).
inline std::vector<ExtractedAsc> extract_ascs(const CVector& z, const Dictionary& dict, double magnitude_floor)
{
    require(magnitude_floor >= 0.0, "extract_ascs: magnitude floor must be non-negative");
    require(static_cast<std::size_t>(z.size()) == dict.cols(), "extract_ascs: code length mismatch");

    std::vector<std::size_t> idx;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (std::abs(z[i]) > magnitude_floor) idx.push_back(static_cast<std::size_t>(i));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(z[static_cast<Eigen::Index>(a)]) > std::abs(z[static_cast<Eigen::Index>(b)]);
    });

    std::vector<ExtractedAsc> out;
    out.reserve(idx.size());
    for (std::size_t k : idx) {
        const auto c = dict.column_coords(k);
        out.push_back({c.x, c.y, z[static_cast<Eigen::Index>(k)], k});
    }
    return out;
}

inline double residual_loss(const CVector& s, const CVector& recon)
{
    require(s.size() == recon.size(), "residual_loss: shape mismatch");
    return (s - recon).norm();
}

// ---------------------------------------------------------------------------
// Benchmark

struct IstaMethod {
    IstaConfig config;
};
struct OmpMethod {
    std::size_t sparsity = 40;
};
struct AmpMethod {
    AmpConfig config;
};
struct UnfoldedMethod {
    StageParams params;
};

struct MethodSpec {
    std::string name;
    std::variant<IstaMethod, OmpMethod, AmpMethod, UnfoldedMethod> method;
};

struct BenchmarkRow {
    std::string method;
    double residual_loss = 0.0;   // mean over images; +inf when the method diverged
    double inference_time = 0.0;  // mean seconds per image
    std::string config;
    bool diverged = false;
    std::size_t images = 0;
};

inline std::string describe(const MethodSpec& m)
{
    std::ostringstream os;
    os << std::setprecision(6);
    std::visit(
        [&os](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, IstaMethod>) {
                os << "ista t=" << v.config.step << " rho=" << v.config.threshold << " iters=" << v.config.max_iters
                   << (v.config.start_from_adjoint ? " init=adjoint" : " init=zero");
            } else if constexpr (std::is_same_v<T, OmpMethod>) {
                os << "omp K=" << v.sparsity;
            } else if constexpr (std::is_same_v<T, AmpMethod>) {
                os << "amp damping=" << v.config.damping << " threshold=" << v.config.threshold
                   << " iters=" << v.config.max_iters;
            } else {
                os << "unfolded stages=" << v.params.stages() << " t=[";
                for (std::size_t k = 0; k < v.params.stages(); ++k) os << (k ? "," : "") << v.params.t[k];
                os << "] rho=[";
                for (std::size_t k = 0; k < v.params.stages(); ++k) os << (k ? "," : "") << v.params.rho[k];
                os << "]";
            }
        },
        m.method);
    return os.str();
}

/// Runs a single method on one image and returns the code.
inline CVector run_method(const MethodSpec& m, const Dictionary& dict, const CVector& s, std::optional<double> lipschitz)
{
    return std::visit(
        [&](const auto& v) -> CVector {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, IstaMethod>) {
                return ista_solve(dict, s, v.config, lipschitz).z;
            } else if constexpr (std::is_same_v<T, OmpMethod>) {
                return omp_solve(dict, s, v.sparsity).z;
            } else if constexpr (std::is_same_v<T, AmpMethod>) {
                return amp_solve(dict, s, v.config).z;
            } else {
                return forward_network(v.params, dict, s).z;
            }
        },
        m.method);
}

/// Mean residual loss and mean per-image wall clock for each method, run
/// sequentially. One untimed warm-up solve precedes each method's timed pass.
/// The reconstruction is part of the timed region; dictionary build and
/// model loading are not.
inline std::vector<BenchmarkRow> run_benchmark(const std::vector<CVector>& dataset, const std::vector<MethodSpec>& methods,
                                               const Dictionary& dict, std::optional<double> lipschitz = std::nullopt)
{
    require(!dataset.empty(), "run_benchmark: empty dataset");
    const double L = lipschitz ? *lipschitz : spectral_step_bound(dict).value;

    std::vector<BenchmarkRow> rows;
    for (const auto& m : methods) {
        BenchmarkRow row;
        row.method = m.name;
        row.config = describe(m);
        row.images = dataset.size();
        try {
            (void)run_method(m, dict, dataset.front(), L);
            double res = 0.0, secs = 0.0;
            for (const auto& s : dataset) {
                const auto t0 = std::chrono::steady_clock::now();
                const CVector z = run_method(m, dict, s, L);
                const CVector recon = dict.apply(z);
                secs += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                res += residual_loss(s, recon);
            }
            row.residual_loss = res / static_cast<double>(dataset.size());
            row.inference_time = secs / static_cast<double>(dataset.size());
        } catch (const DivergenceError&) {
            row.diverged = true;
            row.residual_loss = std::numeric_limits<double>::infinity();
            row.inference_time = std::numeric_limits<double>::infinity();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct StageSweepResult {
    std::vector<BenchmarkRow> rows;
    std::vector<StageParams> params;
};

/// Trains one network per stage count on `train_set` and benchmarks each on `test_set`.
inline StageSweepResult run_stage_sweep(const std::vector<CVector>& train_set, const std::vector<CVector>& val_set,
                                        const std::vector<CVector>& test_set, const std::vector<std::size_t>& stage_counts,
                                        TrainConfig cfg, const Dictionary& dict)
{
    StageSweepResult out;
    std::vector<MethodSpec> methods;
    for (std::size_t n : stage_counts) {
        cfg.stages = n;
        auto trained = train(train_set, val_set, cfg, dict);
        methods.push_back({"stages=" + std::to_string(n), UnfoldedMethod{trained.params}});
        out.params.push_back(std::move(trained.params));
    }
    out.rows = run_benchmark(test_set, methods, dict);
    return out;
}

/// Two-row table with one column per method, in the layout
///
///   Method              | AMP    | OMP    | ...
///   Residual Loss       | ...
///   Inference Time (s)  | ...
inline std::string format_table(const std::vector<BenchmarkRow>& rows, const std::string& header = "Method")
{
    auto fmt = [](double v) {
        std::ostringstream os;
        if (std::isfinite(v))
            os << std::fixed << std::setprecision(4) << v;
        else
            os << "diverged";
        return os.str();
    };
    std::vector<std::vector<std::string>> cells(3);
    cells[0].push_back(header);
    cells[1].push_back("Residual Loss");
    cells[2].push_back("Inference Time (s)");
    for (const auto& r : rows) {
        cells[0].push_back(r.method);
        cells[1].push_back(fmt(r.residual_loss));
        cells[2].push_back(fmt(r.inference_time));
    }
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::ostringstream os;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) os << " | ";
            os << std::left << std::setw(static_cast<int>(width[c])) << line[c];
        }
        os << "\n";
    }
    return os.str();
}

} // namespace asc
