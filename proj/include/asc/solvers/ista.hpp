#pragma once

// Complex soft-thresholding and the classical ISTA iteration.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>

#include "asc/dictionary.hpp"
#include "asc/solvers/trace.hpp"

namespace asc {

/// S_rho(x) = sign(x) max(|x| - rho, 0) with sign(x) = x/|x| and sign(0) = 0.
inline cplx soft_threshold(cplx x, double rho)
{
    const double mag = std::abs(x);
    if (mag <= rho || mag == 0.0) return {0.0, 0.0};
    return x * ((mag - rho) / mag);
}

inline CVector soft_threshold(const CVector& x, double rho)
{
    require(rho >= 0.0, "soft_threshold: threshold must be non-negative");
    CVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], rho);
    return out;
}

/// One proximal-gradient step z' = S_rho(z - t Phi^H (Phi z - s)).
/// `pre` receives the pre-threshold point, `grad` the data-term gradient and
/// `residual` the vector Phi z - s. Shared by the classical solver and the
/// unrolled network so both paths are numerically identical.
inline CVector ista_step(const Dictionary& dict, const CVector& z, const CVector& s, double t, double rho,
                         CVector* pre = nullptr, CVector* grad = nullptr, CVector* residual = nullptr)
{
    CVector r = dict.apply(z) - s;
    CVector g = dict.apply_adjoint(r);
    CVector x = z - t * g;
    CVector out = soft_threshold(x, rho);
    if (pre) *pre = std::move(x);
    if (grad) *grad = std::move(g);
    if (residual) *residual = std::move(r);
    return out;
}

struct IstaConfig {
    double step = 0.01;        // t
    double threshold = 0.005;  // rho
    std::size_t max_iters = 100;
    double stop_tol = 0.0;     // relative change in z; 0 disables early stop
    double lambda = 0.0;       // L1 weight used only for the objective trace
    std::optional<CVector> initial;  // defaults to z = 0
    bool start_from_adjoint = false;  // z = Phi^H s when no initial code is given

    void validate() const
    {
        require(std::isfinite(step) && step > 0.0, "IstaConfig: step must be positive");
        require(std::isfinite(threshold) && threshold >= 0.0, "IstaConfig: threshold must be non-negative");
        require(max_iters >= 1, "IstaConfig: max_iters must be at least 1");
        require(stop_tol >= 0.0, "IstaConfig: stop_tol must be non-negative");
    }
};

struct IstaResult {
    CVector z;
    SolverTrace trace;  // entry i is the objective at iterate i (entry 0 = initial point)
    std::size_t iterations = 0;
    std::vector<std::string> warnings;
};

/// Classical ISTA. `lipschitz` is the largest eigenvalue of Phi^H Phi; it is
/// estimated by power iteration when not supplied and only used to warn
/// about steps at or beyond 2/L.
inline IstaResult ista_solve(const Dictionary& dict, const CVector& s, const IstaConfig& cfg,
                             std::optional<double> lipschitz = std::nullopt)
{
    cfg.validate();
    require(static_cast<std::size_t>(s.size()) == dict.rows(), "ista_solve: signal length mismatch");

    IstaResult res;
    const double L = lipschitz ? *lipschitz : spectral_step_bound(dict).value;
    if (cfg.step >= 2.0 / L) {
        std::ostringstream w;
        w << "step " << cfg.step << " >= 2/L = " << 2.0 / L << "; iteration may diverge";
        res.warnings.push_back(w.str());
    }

    CVector z = cfg.initial              ? *cfg.initial
                : cfg.start_from_adjoint ? dict.apply_adjoint(s)
                                         : CVector(CVector::Zero(static_cast<Eigen::Index>(dict.cols())));
    require(static_cast<std::size_t>(z.size()) == dict.cols(), "ista_solve: initial code length mismatch");

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
        CVector r;
        CVector next = ista_step(dict, z, s, cfg.step, cfg.threshold, nullptr, nullptr, &r);
        res.trace.push_back(make_trace_entry(k - 1, r, z, cfg.lambda, start));
        if (!next.allFinite()) {
            std::ostringstream msg;
            msg << "ista_solve: non-finite iterate at iteration " << k;
            throw DivergenceError(msg.str(), k);
        }
        const double change = (next - z).norm();
        const double scale = z.norm();
        z = std::move(next);
        res.iterations = k;
        if (cfg.stop_tol > 0.0 && change <= cfg.stop_tol * std::max(scale, 1e-300)) break;
    }
    res.trace.push_back(make_trace_entry(res.iterations, dict.apply(z) - s, z, cfg.lambda, start));
    res.z = std::move(z);
    return res;
}

} // namespace asc
