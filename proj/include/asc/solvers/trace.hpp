#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "asc/common.hpp"

namespace asc {

struct TraceEntry {
    std::size_t iter = 0;
    double objective = 0.0;    // ||Phi z - s||_2 + lambda ||z||_1
    double residual_l2 = 0.0;  // ||Phi z - s||_2
    double l1_norm = 0.0;      // sum |z_i|
    std::int64_t wallclock_ns = 0;
};

using SolverTrace = std::vector<TraceEntry>;

inline double l1_norm(const CVector& z) { return z.cwiseAbs().sum(); }

inline TraceEntry make_trace_entry(std::size_t iter, const CVector& residual, const CVector& z, double lambda,
                                   std::chrono::steady_clock::time_point start)
{
    TraceEntry e;
    e.iter = iter;
    e.residual_l2 = residual.norm();
    e.l1_norm = l1_norm(z);
    e.objective = e.residual_l2 + lambda * e.l1_norm;
    e.wallclock_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    return e;
}

} // namespace asc
