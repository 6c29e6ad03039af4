#pragma once

// Unrolled ISTA with per-stage step size and threshold, plus its reverse pass.

#include <sstream>
#include <vector>

#include "asc/solvers/ista.hpp"

namespace asc {

/// Learnable (t, rho) per stage.
struct StageParams {
    std::vector<double> t;
    std::vector<double> rho;

    static StageParams uniform(std::size_t stages, double t0, double rho0)
    {
        return {std::vector<double>(stages, t0), std::vector<double>(stages, rho0)};
    }

    std::size_t stages() const { return t.size(); }

    void validate() const
    {
        require(!t.empty() && t.size() == rho.size(), "StageParams: need matching non-empty t and rho lists");
        for (std::size_t k = 0; k < t.size(); ++k) {
            require(std::isfinite(t[k]), "StageParams: non-finite step size");
            require(std::isfinite(rho[k]) && rho[k] >= 0.0, "StageParams: thresholds must be finite and >= 0");
        }
    }

    bool operator==(const StageParams&) const = default;
};

enum class LossMode {
    norm,     // ||s - s_hat||_2
    squared,  // ||s - s_hat||_2^2
};

struct TapeEntry {
    double t = 0.0;
    double rho = 0.0;
    CVector grad;  // Phi^H (Phi z_prev - s)
    CVector pre;   // z_prev - t grad
    CVector z;     // S_rho(pre)
};

struct ForwardTape {
    CVector z0;
    std::vector<TapeEntry> stages;
    CVector recon;

    const CVector& input_of(std::size_t k) const { return k == 0 ? z0 : stages[k - 1].z; }
};

struct ForwardResult {
    CVector z;
    CVector recon;
    ForwardTape tape;
};

/// z0 = Phi^H s.
inline CVector init_code(const Dictionary& dict, const CVector& s)
{
    require(static_cast<std::size_t>(s.size()) == dict.rows(), "init_code: signal length mismatch");
    return dict.apply_adjoint(s);
}

/// One unrolled stage. Uses the descent sign z - t Phi^H (Phi z - s).
inline TapeEntry forward_stage(const CVector& z_prev, const CVector& s, double t, double rho, const Dictionary& dict,
                               std::size_t stage_index = 0)
{
    require(rho >= 0.0, "forward_stage: threshold must be non-negative");
    TapeEntry e;
    e.t = t;
    e.rho = rho;
    e.z = ista_step(dict, z_prev, s, t, rho, &e.pre, &e.grad);
    if (!e.z.allFinite()) {
        std::ostringstream msg;
        msg << "forward_stage: non-finite output at stage " << stage_index + 1;
        throw DivergenceError(msg.str(), stage_index + 1);
    }
    return e;
}

inline ForwardResult forward_network(const StageParams& params, const Dictionary& dict, const CVector& s)
{
    params.validate();
    ForwardResult out;
    out.tape.z0 = init_code(dict, s);
    out.tape.stages.reserve(params.stages());
    for (std::size_t k = 0; k < params.stages(); ++k)
        out.tape.stages.push_back(forward_stage(out.tape.input_of(k), s, params.t[k], params.rho[k], dict, k));
    out.z = out.tape.stages.back().z;
    out.tape.recon = dict.apply(out.z);
    out.recon = out.tape.recon;
    return out;
}

/// ||s - s_hat|| (or its square) + lambda * sum |z_i|.
inline double compute_loss(const CVector& s, const CVector& recon, const CVector& z, double lambda,
                           LossMode mode = LossMode::norm)
{
    require(s.size() == recon.size(), "compute_loss: shape mismatch");
    require(lambda >= 0.0, "compute_loss: lambda must be non-negative");
    const double res = (s - recon).norm();
    return (mode == LossMode::norm ? res : res * res) + lambda * l1_norm(z);
}

struct StageGradients {
    std::vector<double> d_t;
    std::vector<double> d_rho;
    double loss = 0.0;
    bool near_kink = false;  // some |pre_i| within the kink margin of its threshold
};

/// Reverse-mode gradients of the loss w.r.t. every (t_k, rho_k).
///
/// Complex vectors are treated as pairs of reals; the adjoint of a vector v
/// is carried as g_v = dL/dRe(v) + j dL/dIm(v), so dL = Re(g_v^H dv) and a
/// linear map v = A u pulls back as g_u = A^H g_v.
///
/// Soft-threshold at |x| > rho with u = x/|x|:
///   g_x    = (1 - rho/|x|) g_z + (rho/|x|) Re(conj(u) g_z) u
///   dL/drho -= Re(conj(u) g_z)
/// and zero where |x| <= rho. The L1 subgradient and the norm-loss gradient
/// are taken as 0 at z_i = 0 and at a zero residual respectively.
inline StageGradients backward(const ForwardTape& tape, const Dictionary& dict, const CVector& s, double lambda,
                               LossMode mode = LossMode::norm, double kink_margin = 1e-9)
{
    const std::size_t n_stages = tape.stages.size();
    require(n_stages >= 1, "backward: empty tape");
    const CVector& z_final = tape.stages.back().z;

    StageGradients out;
    out.d_t.assign(n_stages, 0.0);
    out.d_rho.assign(n_stages, 0.0);
    out.loss = compute_loss(s, tape.recon, z_final, lambda, mode);

    const CVector diff = tape.recon - s;
    CVector g_recon;
    if (mode == LossMode::squared) {
        g_recon = 2.0 * diff;
    } else {
        const double nrm = diff.norm();
        g_recon = nrm > 0.0 ? CVector(diff / nrm) : CVector(CVector::Zero(diff.size()));
    }

    CVector g_z = dict.apply_adjoint(g_recon);
    if (lambda != 0.0) {
        for (Eigen::Index i = 0; i < z_final.size(); ++i) {
            const double mag = std::abs(z_final[i]);
            if (mag > 0.0) g_z[i] += lambda * (z_final[i] / mag);
        }
    }

    for (std::size_t k = n_stages; k-- > 0;) {
        const TapeEntry& st = tape.stages[k];
        CVector g_x = CVector::Zero(st.pre.size());
        double d_rho = 0.0;
        for (Eigen::Index i = 0; i < st.pre.size(); ++i) {
            const double mag = std::abs(st.pre[i]);
            if (std::abs(mag - st.rho) <= kink_margin) out.near_kink = true;
            if (mag <= st.rho || mag == 0.0) continue;
            const cplx u = st.pre[i] / mag;
            const double radial = (std::conj(u) * g_z[i]).real();
            const double ratio = st.rho / mag;
            g_x[i] = (1.0 - ratio) * g_z[i] + ratio * radial * u;
            d_rho -= radial;
        }
        out.d_rho[k] = d_rho;
        // pre = z_prev - t * grad, grad = Phi^H Phi z_prev - Phi^H s
        out.d_t[k] = -g_x.dot(st.grad).real();
        if (k > 0) g_z = g_x - st.t * dict.gram_apply(g_x);
    }
    return out;
}

} // namespace asc
