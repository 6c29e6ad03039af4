#pragma once

// Orthogonal matching pursuit over a (possibly unnormalised) dictionary.

#include <string>
#include <vector>

#include "asc/dictionary.hpp"

namespace asc {

struct OmpResult {
    CVector z;
    std::vector<std::size_t> support;   // in selection order
    std::vector<double> residual_norms; // ||s - Phi z|| after each selection (entry 0 = ||s||)
    std::vector<std::string> warnings;
};

namespace detail {

inline CVector least_squares(const CMatrix& a, const CVector& b, std::vector<std::string>& warnings)
{
    Eigen::ColPivHouseholderQR<CMatrix> qr(a);
    if (qr.rank() == a.cols()) return qr.solve(b);
    warnings.push_back("omp: rank-deficient active set, using Tikhonov-regularised solve (1e-12)");
    const CMatrix gram = a.adjoint() * a + 1e-12 * CMatrix::Identity(a.cols(), a.cols());
    return gram.ldlt().solve(a.adjoint() * b);
}

} // namespace detail

/// Greedy selection of the column with the largest normalised correlation
/// |Phi_k^H r| / ||Phi_k||, followed by a least-squares refit on the active set.
/// Stops early once the residual vanishes.
inline OmpResult omp_solve(const Dictionary& dict, const CVector& s, std::size_t sparsity)
{
    require(static_cast<std::size_t>(s.size()) == dict.rows(), "omp_solve: signal length mismatch");
    require(sparsity <= dict.cols(), "omp_solve: sparsity exceeds dictionary size");

    const CMatrix& phi = dict.matrix();
    const RVector col_norm = phi.colwise().norm().transpose();

    OmpResult res;
    res.z = CVector::Zero(static_cast<Eigen::Index>(dict.cols()));
    CVector r = s;
    res.residual_norms.push_back(r.norm());
    std::vector<bool> active(dict.cols(), false);
    CVector coef;

    for (std::size_t it = 0; it < sparsity; ++it) {
        const CVector corr = dict.apply_adjoint(r);
        Eigen::Index best = -1;
        double best_val = 0.0;
        for (Eigen::Index k = 0; k < corr.size(); ++k) {
            if (active[static_cast<std::size_t>(k)] || col_norm[k] == 0.0) continue;
            const double v = std::abs(corr[k]) / col_norm[k];
            if (v > best_val) {
                best_val = v;
                best = k;
            }
        }
        if (best < 0) break;  // residual orthogonal to every remaining column

        active[static_cast<std::size_t>(best)] = true;
        res.support.push_back(static_cast<std::size_t>(best));

        CMatrix sub(phi.rows(), static_cast<Eigen::Index>(res.support.size()));
        for (std::size_t j = 0; j < res.support.size(); ++j)
            sub.col(static_cast<Eigen::Index>(j)) = phi.col(static_cast<Eigen::Index>(res.support[j]));
        coef = detail::least_squares(sub, s, res.warnings);
        r = s - sub * coef;
        res.residual_norms.push_back(r.norm());
    }

    for (std::size_t j = 0; j < res.support.size(); ++j)
        res.z[static_cast<Eigen::Index>(res.support[j])] = coef[static_cast<Eigen::Index>(j)];
    return res;
}

} // namespace asc
