#include "blockcells/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "blockcells/dense_lu.hpp"

namespace blockcells {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::size_t> diagonal_slots(const CsrMatrix& pattern) {
    std::vector<std::size_t> slots(pattern.n_rows);
    for (std::size_t i = 0; i < pattern.n_rows; ++i) {
        for (std::size_t j = pattern.row_ptr[i]; j < pattern.row_ptr[i + 1]; ++j) {
            if (pattern.col_idx[j] == i) {
                slots[i] = j;
                break;
            }
        }
    }
    return slots;
}

/// A = I - h*J(y) and b = -(y - y_prev - h*f(y)), written in place.
void fill_newton_system(const MechanismEvaluator& eval,
                        std::span<const double> rates,
                        const std::vector<std::size_t>& diag,
                        std::span<const double> y, std::span<const double> y_prev,
                        double h, CsrMatrix& a, DenseVector& b,
                        DenseVector& f_scratch) {
    eval.rhs_into(rates, y, f_scratch);
    eval.jacobian_into(rates, y, a);
    for (double& v : a.values) v = -h * v;
    for (std::size_t slot : diag) a.values[slot] += 1.0;
    b.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        b[i] = -(y[i] - y_prev[i] - h * f_scratch[i]);
}

}  // namespace

NewtonSystem newton_system(const MechanismSpec& mech, const CellConditions& cond,
                           const CellState& y, const CellState& y_prev,
                           double h_seconds) {
    if (!(h_seconds > 0.0))
        throw std::invalid_argument("newton_system: step size must be positive");
    if (y.concentrations.size() != mech.n_species ||
        y_prev.concentrations.size() != mech.n_species)
        throw std::invalid_argument("newton_system: state dimension mismatch");

    MechanismEvaluator eval(mech);
    NewtonSystem sys;
    sys.gamma = h_seconds;
    sys.a = eval.pattern();
    const auto rates = eval.rate_constants(cond);
    DenseVector f;
    fill_newton_system(eval, rates, diagonal_slots(sys.a), y.concentrations,
                       y_prev.concentrations, h_seconds, sys.a, sys.b, f);
    return sys;
}

std::vector<CellState> default_initial_states(std::size_t cells,
                                              std::size_t n_species) {
    return std::vector<CellState>(cells,
                                  CellState{DenseVector(n_species, 1.0)});
}

SimulationResult run_simulation(const MechanismSpec& mech,
                                const SimulationConfig& config,
                                const std::vector<CellState>& initial_states) {
    if (config.cells == 0)
        throw std::invalid_argument("run_simulation: cells must be >= 1");
    if (!(config.dt_seconds > 0.0))
        throw std::invalid_argument("run_simulation: dt must be positive");
    if (initial_states.size() != config.cells)
        throw std::invalid_argument("run_simulation: one initial state per cell");
    for (const CellState& s : initial_states)
        if (s.concentrations.size() != mech.n_species)
            throw std::invalid_argument("run_simulation: state dimension mismatch");

    const MechanismEvaluator eval(mech);
    const std::vector<std::size_t> diag = diagonal_slots(eval.pattern());

    std::vector<std::vector<double>> rates(config.cells);
    for (std::size_t c = 0; c < config.cells; ++c)
        rates[c] =
            eval.rate_constants(cell_conditions(c, config.cells, config.mode));

    SimulationResult result;
    result.final_states = initial_states;
    auto& states = result.final_states;
    std::vector<CellState> prev_states = states;

    BatchedSystem system;
    system.cells = config.cells;
    system.species = mech.n_species;
    system.per_cell_matrices.assign(config.cells, eval.pattern());
    system.per_cell_rhs.assign(config.cells, DenseVector(mech.n_species, 0.0));

    DenseVector f_scratch;
    const double h = config.dt_seconds;

    for (std::size_t step = 0; step < config.steps; ++step) {
        prev_states = states;
        StepStats stats;
        stats.step = step;

        for (std::size_t newton = 1; newton <= config.max_newton_iterations;
             ++newton) {
            for (std::size_t c = 0; c < config.cells; ++c)
                fill_newton_system(eval, rates[c], diag,
                                   states[c].concentrations,
                                   prev_states[c].concentrations, h,
                                   system.per_cell_matrices[c],
                                   system.per_cell_rhs[c], f_scratch);

            double update_inf = 0.0;
            if (config.solver.use_direct_reference) {
                const auto start = Clock::now();
                for (std::size_t c = 0; c < config.cells; ++c) {
                    const DenseVector delta = lu_solve(system.per_cell_matrices[c],
                                                       system.per_cell_rhs[c]);
                    for (std::size_t i = 0; i < delta.size(); ++i) {
                        states[c].concentrations[i] += delta[i];
                        update_inf = std::max(update_inf, std::abs(delta[i]));
                    }
                }
                stats.wall_time_ns +=
                    std::chrono::duration_cast<std::chrono::nanoseconds>(
                        Clock::now() - start)
                        .count();
            } else {
                SolveReport report =
                    run_strategy(system, config.solver.strategy, config.device,
                                 config.tol, config.max_iter,
                                 config.worker_count);
                for (std::size_t c = 0; c < config.cells; ++c) {
                    const DenseVector& delta = report.per_cell_x[c];
                    for (std::size_t i = 0; i < delta.size(); ++i) {
                        states[c].concentrations[i] += delta[i];
                        update_inf = std::max(update_inf, std::abs(delta[i]));
                    }
                }
                stats.iterations_effective += report.iterations_effective;
                stats.iterations_sum += report.iterations_sum;
                stats.max_residual_rms =
                    std::max(stats.max_residual_rms, report.max_residual_rms);
                stats.wall_time_ns += report.wall_time_ns;
                stats.breakdown_fallbacks += report.breakdown_fallbacks;
            }
            stats.newton_iterations = newton;

            double state_inf = 0.0;
            for (const CellState& s : states)
                for (double v : s.concentrations) {
                    if (!std::isfinite(v))
                        throw SolverAbort(step,
                                          "non-finite concentration at step " +
                                              std::to_string(step));
                    state_inf = std::max(state_inf, std::abs(v));
                }
            if (update_inf < config.newton_rtol * state_inf) break;
        }

        for (CellState& s : states)
            for (double& v : s.concentrations)
                if (v < 0.0) {
                    v = 0.0;
                    ++stats.clip_events;
                }
        result.per_step.push_back(stats);
    }
    return result;
}

}  // namespace blockcells
