#pragma once

// Complex approximate message passing with Onsager correction.

#include <sstream>
#include <string>

#include "asc/solvers/ista.hpp"

namespace asc {

enum class AmpThreshold {
    fixed,            // theta = threshold every iteration
    residual_scaled,  // theta = threshold * ||r|| / sqrt(rows)
};

struct AmpConfig {
    double damping = 0.1;  // fraction of the new iterate mixed in per step; 1 = undamped
    std::size_t max_iters = 200;
    double stop_tol = 1e-6;  // relative iterate change
    AmpThreshold policy = AmpThreshold::residual_scaled;
    double threshold = 1.5;
    double lambda = 0.0;     // objective trace weight

    void validate() const
    {
        require(damping > 0.0 && damping <= 1.0, "AmpConfig: damping must lie in (0, 1]");
        require(max_iters >= 1, "AmpConfig: max_iters must be at least 1");
        require(stop_tol >= 0.0, "AmpConfig: stop_tol must be non-negative");
        require(std::isfinite(threshold) && threshold >= 0.0, "AmpConfig: threshold must be non-negative");
    }
};

struct AmpResult {
    CVector z;
    SolverTrace trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// AMP on Phi / c with c^2 the mean squared column norm, so the normalised
/// operator has unit-energy columns as the state-evolution analysis assumes.
/// The returned code is rescaled to the original dictionary.
///
///   v     = x + A^H r
///   x'    = (1 - d) x + d eta(v; theta)
///   r'    = s - A x' + (N/M) <eta'(v; theta)> r
///
/// with the complex soft-threshold divergence <eta'> = mean over |v| > theta
/// of (1 - theta / (2|v|)).
inline AmpResult amp_solve(const Dictionary& dict, const CVector& s, const AmpConfig& cfg)
{
    cfg.validate();
    require(static_cast<std::size_t>(s.size()) == dict.rows(), "amp_solve: signal length mismatch");

    const double m = static_cast<double>(dict.rows());
    const double n = static_cast<double>(dict.cols());
    const double c = std::sqrt(dict.matrix().squaredNorm() / n);
    require(c > 0.0, "amp_solve: zero dictionary");
    const double s_norm = s.norm();

    AmpResult res;
    CVector x = CVector::Zero(static_cast<Eigen::Index>(dict.cols()));
    CVector r = s;
    const auto start = std::chrono::steady_clock::now();
    res.trace.push_back(make_trace_entry(0, -r, x / c, cfg.lambda, start));

    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        const CVector v = x + dict.apply_adjoint(r) / c;
        const double theta =
            cfg.policy == AmpThreshold::fixed ? cfg.threshold : cfg.threshold * r.norm() / std::sqrt(m);

        CVector eta(v.size());
        double div = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double mag = std::abs(v[i]);
            eta[i] = soft_threshold(v[i], theta);
            if (mag > theta) div += 1.0 - theta / (2.0 * mag);
        }
        div /= n;

        CVector x_next = (1.0 - cfg.damping) * x + cfg.damping * eta;
        const CVector fit = s - dict.apply(x_next) / c;
        r = fit + (n / m) * div * r;

        res.iterations = it;
        res.trace.push_back(make_trace_entry(it, -fit, x_next / c, cfg.lambda, start));

        const double xn = x_next.norm();
        if (!x_next.allFinite() || !r.allFinite() || xn / c > 1e6 * std::max(s_norm, 1e-300)) {
            std::ostringstream msg;
            msg << "amp_solve: iterate diverged at iteration " << it;
            throw DivergenceError(msg.str(), it);
        }
        const double change = (x_next - x).norm();
        x = std::move(x_next);
        if (change <= cfg.stop_tol * xn) {
            res.converged = true;
            break;
        }
    }
    res.z = x / c;
    return res;
}

} // namespace asc
