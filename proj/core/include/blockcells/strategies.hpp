#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "blockcells/bicg.hpp"
#include "blockcells/csr.hpp"
#include "blockcells/exec_model.hpp"

namespace blockcells {

/// A batch of per-cell linear systems sharing one sparsity pattern.
struct BatchedSystem {
    std::size_t species = 0;
    std::size_t cells = 0;
    std::vector<CsrMatrix> per_cell_matrices;
    std::vector<DenseVector> per_cell_rhs;

    /// Throws std::invalid_argument on shape or pattern disagreement.
    void check() const;
};

/// Strategy plus its configuration knobs. For BlockCells, cells_per_block is
/// the requested k; nullopt selects the floor(block/species) rule ("N").
struct StrategyConfig {
    Strategy kind = Strategy::OneCell;
    std::optional<std::size_t> cells_per_block;

    std::string label() const;
};

/// Per-strategy outcome over one batch.
struct SolveReport {
    Strategy strategy = Strategy::OneCell;
    double cells_per_block = 1;
    /// Iterations of the last block to finish: max over per_block_iterations.
    std::size_t iterations_effective = 0;
    /// Sum over blocks; for OneCell this is the sequential-solve total.
    std::size_t iterations_sum = 0;
    std::vector<std::size_t> per_block_iterations;
    double max_residual_rms = 0.0;
    std::int64_t wall_time_ns = 0;
    std::size_t breakdown_fallbacks = 0;
    /// Solution per cell, in batch order.
    std::vector<DenseVector> per_cell_x;
};

/// Block-diagonal assembly of the cells in [range.begin, range.end): the
/// per-cell matrices on the diagonal in cell order, rhs concatenated.
struct AssembledSystem {
    CsrMatrix a;
    DenseVector b;
};
AssembledSystem assemble_block_diagonal(const BatchedSystem& system,
                                        IndexRange cell_range);

/// Cells solved sequentially, each with its own single-block reduction.
SolveReport solve_one_cell(const BatchedSystem& system, double tol,
                           std::size_t max_iter, const DeviceSpec& device = {});

/// One block-diagonal system over all cells with a single global convergence
/// test; the reduction runs per block plus the sequential host stage.
SolveReport solve_multi_cells(const BatchedSystem& system,
                              const DeviceSpec& device, double tol,
                              std::size_t max_iter);

/// Cells partitioned into groups of k (plus a remainder group), each group
/// solved independently with a purely in-block reduction. Groups are
/// dispatched to `worker_count` workers; results merge in group order, so the
/// outcome is identical for any worker count. worker_count 0 means one worker
/// per hardware thread.
SolveReport solve_block_cells(const BatchedSystem& system,
                              std::optional<std::size_t> cells_per_block,
                              const DeviceSpec& device, double tol,
                              std::size_t max_iter, std::size_t worker_count = 1);

/// Dispatch on config.kind.
SolveReport run_strategy(const BatchedSystem& system, const StrategyConfig& config,
                         const DeviceSpec& device, double tol,
                         std::size_t max_iter, std::size_t worker_count = 1);

/// iterations_effective(b) / iterations_effective(a); both reports must come
/// from the same system. With a = Block-cells(1) and b = Block-cells(N) this
/// is the N-over-1 iteration ratio.
double iteration_reduction_ratio(const SolveReport& report_a,
                                 const SolveReport& report_b);

}  // namespace blockcells
