#pragma once

#include <cstddef>
#include <vector>

#include "blockcells/csr.hpp"
#include "blockcells/reduction.hpp"

namespace blockcells {

/// Scratch state for bicg_solve, reusable across calls of the same size
/// without reallocation.
struct BicgWorkspace {
    DenseVector r, r_shadow, p, p_shadow, ap, atp_shadow;
    std::vector<double> tree_scratch;     // shared-memory slot model
    std::vector<double> per_block_error;  // squared-residual partial per block

    void resize(std::size_t n, std::size_t n_blocks);

    /// Auxiliary length-n arrays held per solve, for the memory estimator.
    /// The tree slots model shared memory and are not counted.
    static constexpr std::size_t aux_array_count() { return 6; }
};

struct SolveOutcome {
    DenseVector x;
    std::size_t iterations = 0;
    double final_residual_rms = 0.0;
    bool converged = false;
    bool breakdown = false;
};

/// Unpreconditioned two-sided BiCG on one sparse system.
///
/// Every inner product and the convergence test reduce through `reduction`,
/// so the floating-point result is a pure function of the inputs and the
/// plan. Convergence is RMS of the residual <= tol, monitored on the
/// recurrence residual and confirmed against a freshly computed b - Ax before
/// reporting success; final_residual_rms is always the fresh value.
/// Breakdown (a vanishing or non-finite BiCG scalar) is flagged, never
/// thrown; the caller decides the fallback.
SolveOutcome bicg_solve(const CsrMatrix& a, const DenseVector& b,
                        const DenseVector& x0, double tol,
                        std::size_t max_iter, const ReductionPlan& reduction);
SolveOutcome bicg_solve(const CsrMatrix& a, const DenseVector& b,
                        const DenseVector& x0, double tol,
                        std::size_t max_iter, const ReductionPlan& reduction,
                        BicgWorkspace& ws);

/// flag[b] = sqrt(per_block_error[b] / n_per_block[b]) <= tol.
std::vector<bool> block_converged_mask(const std::vector<double>& per_block_error,
                                       const std::vector<std::size_t>& n_per_block,
                                       double tol);

}  // namespace blockcells
