#include "blockcells/strategies.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "blockcells/dense_lu.hpp"

namespace blockcells {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() -
                                                                start)
        .count();
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Outcome of solving one group of cells as a single block-diagonal system.
struct GroupResult {
    std::vector<DenseVector> per_cell_x;
    std::size_t iterations = 0;
    double residual_rms = 0.0;
    bool fell_back = false;
};

GroupResult solve_group(const BatchedSystem& system, IndexRange cell_range,
                        const ReductionPlan& reduction, double tol,
                        std::size_t max_iter, BicgWorkspace& ws) {
    const auto [a, b] = assemble_block_diagonal(system, cell_range);
    const DenseVector x0(b.size(), 0.0);
    SolveOutcome outcome = bicg_solve(a, b, x0, tol, max_iter, reduction, ws);

    GroupResult result;
    result.iterations = outcome.iterations;
    if (outcome.breakdown) {
        outcome.x = lu_solve(a, b);
        result.fell_back = true;
        // Residual of the fallback solution, same reduction semantics.
        DenseVector ax = spmv(a, outcome.x);
        std::vector<double> scratch;
        const double sq = plan_reduce_map(
            b.size(),
            [&](std::size_t i) {
                const double ri = b[i] - ax[i];
                return ri * ri;
            },
            reduction, scratch);
        outcome.final_residual_rms = std::sqrt(sq / static_cast<double>(b.size()));
    }
    result.residual_rms = outcome.final_residual_rms;

    result.per_cell_x.reserve(cell_range.size());
    for (std::size_t c = 0; c < cell_range.size(); ++c) {
        const auto begin = outcome.x.begin() + c * system.species;
        result.per_cell_x.emplace_back(begin, begin + system.species);
    }
    return result;
}

SolveReport merge_groups(Strategy strategy, double cells_per_block,
                         const std::vector<GroupResult>& groups) {
    SolveReport report;
    report.strategy = strategy;
    report.cells_per_block = cells_per_block;
    report.per_block_iterations.reserve(groups.size());
    for (const GroupResult& g : groups) {
        report.per_block_iterations.push_back(g.iterations);
        report.iterations_sum += g.iterations;
        report.iterations_effective = std::max(report.iterations_effective,
                                               g.iterations);
        report.max_residual_rms = std::max(report.max_residual_rms, g.residual_rms);
        report.breakdown_fallbacks += g.fell_back ? 1 : 0;
        for (const DenseVector& x : g.per_cell_x) report.per_cell_x.push_back(x);
    }
    return report;
}

}  // namespace

void BatchedSystem::check() const {
    if (cells == 0) throw std::invalid_argument("batched system: no cells");
    if (species == 0) throw std::invalid_argument("batched system: no species");
    if (per_cell_matrices.size() != cells || per_cell_rhs.size() != cells)
        throw std::invalid_argument("batched system: per-cell arrays mismatch");
    const CsrMatrix& first = per_cell_matrices.front();
    for (const CsrMatrix& m : per_cell_matrices) {
        if (m.n_rows != species || m.n_cols != species)
            throw std::invalid_argument("batched system: cell matrix dimension");
        if (m.row_ptr != first.row_ptr || m.col_idx != first.col_idx)
            throw std::invalid_argument(
                "batched system: cells do not share one sparsity pattern");
    }
    for (const DenseVector& b : per_cell_rhs)
        if (b.size() != species)
            throw std::invalid_argument("batched system: rhs dimension");
}

std::string StrategyConfig::label() const {
    switch (kind) {
        case Strategy::OneCell: return "one-cell";
        case Strategy::MultiCells: return "multi-cells";
        case Strategy::BlockCells:
            return cells_per_block
                       ? "block-cells(" + std::to_string(*cells_per_block) + ")"
                       : "block-cells(N)";
    }
    return "?";
}

AssembledSystem assemble_block_diagonal(const BatchedSystem& system,
                                        IndexRange cell_range) {
    if (cell_range.size() == 0)
        throw std::invalid_argument("assemble_block_diagonal: empty cell range");
    if (cell_range.end > system.cells)
        throw std::invalid_argument("assemble_block_diagonal: range out of bounds");

    const std::size_t s = system.species;
    const std::size_t n = cell_range.size() * s;
    std::size_t nnz = 0;
    for (std::size_t c = cell_range.begin; c < cell_range.end; ++c)
        nnz += system.per_cell_matrices[c].nnz();

    AssembledSystem out;
    out.a.n_rows = out.a.n_cols = n;
    out.a.row_ptr.reserve(n + 1);
    out.a.row_ptr.push_back(0);
    out.a.col_idx.reserve(nnz);
    out.a.values.reserve(nnz);
    out.b.reserve(n);

    for (std::size_t c = cell_range.begin; c < cell_range.end; ++c) {
        const CsrMatrix& m = system.per_cell_matrices[c];
        const std::size_t col_shift = (c - cell_range.begin) * s;
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = m.row_ptr[i]; j < m.row_ptr[i + 1]; ++j) {
                out.a.col_idx.push_back(m.col_idx[j] + col_shift);
                out.a.values.push_back(m.values[j]);
            }
            out.a.row_ptr.push_back(out.a.col_idx.size());
        }
        const DenseVector& rhs = system.per_cell_rhs[c];
        out.b.insert(out.b.end(), rhs.begin(), rhs.end());
    }
    return out;
}

SolveReport solve_one_cell(const BatchedSystem& system, double tol,
                           std::size_t max_iter, const DeviceSpec& device) {
    system.check();
    const auto start = Clock::now();
    const KernelPlan plan =
        plan_kernel(Strategy::OneCell, system.cells, system.species, device);
    const ReductionPlan reduction = build_reduction_plan(plan, system.species);

    std::vector<GroupResult> groups(system.cells);
    BicgWorkspace ws;  // reused across cells, same size throughout
    for (std::size_t c = 0; c < system.cells; ++c)
        groups[c] = solve_group(system, {c, c + 1}, reduction, tol, max_iter, ws);

    SolveReport report = merge_groups(Strategy::OneCell, 1, groups);
    report.wall_time_ns = elapsed_ns(start);
    return report;
}

SolveReport solve_multi_cells(const BatchedSystem& system,
                              const DeviceSpec& device, double tol,
                              std::size_t max_iter) {
    system.check();
    const auto start = Clock::now();
    const KernelPlan plan =
        plan_kernel(Strategy::MultiCells, system.cells, system.species, device);
    const std::size_t n = system.cells * system.species;
    const ReductionPlan reduction = build_reduction_plan(plan, n);

    BicgWorkspace ws;
    std::vector<GroupResult> groups = {
        solve_group(system, {0, system.cells}, reduction, tol, max_iter, ws)};

    SolveReport report =
        merge_groups(Strategy::MultiCells, plan.cells_per_block, groups);
    report.wall_time_ns = elapsed_ns(start);
    return report;
}

SolveReport solve_block_cells(const BatchedSystem& system,
                              std::optional<std::size_t> cells_per_block,
                              const DeviceSpec& device, double tol,
                              std::size_t max_iter, std::size_t worker_count) {
    system.check();
    const auto start = Clock::now();
    const KernelPlan plan = plan_kernel(Strategy::BlockCells, system.cells,
                                        system.species, device, cells_per_block);
    const std::size_t k = static_cast<std::size_t>(plan.cells_per_block);
    if (k == 0) throw InvalidGrouping("block-cells: species exceed the block size");

    // Full groups of k cells, then the leftover cells as a separate group
    // with its own smaller geometry.
    std::vector<IndexRange> group_ranges;
    for (std::size_t c = 0; c + k <= system.cells; c += k)
        group_ranges.push_back({c, c + k});
    if (const std::size_t leftover = system.cells % k; leftover != 0)
        group_ranges.push_back({system.cells - leftover, system.cells});

    const ReductionPlan full_reduction =
        build_reduction_plan(plan, k * system.species);
    ReductionPlan remainder_reduction;
    if (plan.remainder)
        remainder_reduction = ReductionPlan::single_block(plan.remainder->threads);

    std::vector<GroupResult> groups(group_ranges.size());
    const std::size_t workers =
        std::min(resolve_workers(worker_count), group_ranges.size());
    std::atomic<std::size_t> next_group{0};
    auto work = [&] {
        BicgWorkspace ws;
        for (;;) {
            const std::size_t g = next_group.fetch_add(1);
            if (g >= group_ranges.size()) return;
            const IndexRange range = group_ranges[g];
            const ReductionPlan& reduction =
                range.size() == k ? full_reduction : remainder_reduction;
            groups[g] = solve_group(system, range, reduction, tol, max_iter, ws);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    SolveReport report =
        merge_groups(Strategy::BlockCells, plan.cells_per_block, groups);
    report.wall_time_ns = elapsed_ns(start);
    return report;
}

SolveReport run_strategy(const BatchedSystem& system, const StrategyConfig& config,
                         const DeviceSpec& device, double tol,
                         std::size_t max_iter, std::size_t worker_count) {
    switch (config.kind) {
        case Strategy::OneCell:
            return solve_one_cell(system, tol, max_iter, device);
        case Strategy::MultiCells:
            return solve_multi_cells(system, device, tol, max_iter);
        case Strategy::BlockCells:
            return solve_block_cells(system, config.cells_per_block, device, tol,
                                     max_iter, worker_count);
    }
    throw std::invalid_argument("run_strategy: unknown strategy");
}

double iteration_reduction_ratio(const SolveReport& report_a,
                                 const SolveReport& report_b) {
    if (report_a.iterations_effective == 0)
        throw std::invalid_argument("iteration_reduction_ratio: zero denominator");
    return static_cast<double>(report_b.iterations_effective) /
           static_cast<double>(report_a.iterations_effective);
}

}  // namespace blockcells
