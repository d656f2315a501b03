#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "blockcells/csr.hpp"
#include "blockcells/mechanism.hpp"
#include "blockcells/strategies.hpp"

namespace blockcells {

/// A concentration went non-finite; carries the offending step.
struct SolverAbort : std::runtime_error {
    std::size_t step;
    SolverAbort(std::size_t step_, const std::string& what_)
        : std::runtime_error(what_), step(step_) {}
};

/// One backward-Euler Newton system A*dy = b with A = I - gamma*J(y) and
/// b = -(y - y_prev - gamma*f(y)).
struct NewtonSystem {
    double gamma = 0.0;  // time-step multiplier, seconds
    CsrMatrix a;
    DenseVector b;
};

NewtonSystem newton_system(const MechanismSpec& mech, const CellConditions& cond,
                           const CellState& y, const CellState& y_prev,
                           double h_seconds);

/// How the per-cell linear systems are solved inside the Newton loop:
/// one of the batch strategies, or the dense-LU reference path.
struct LinearSolverChoice {
    bool use_direct_reference = false;
    StrategyConfig strategy;
};

struct SimulationConfig {
    std::size_t cells = 1;
    ConditionMode mode = ConditionMode::Ideal;
    std::size_t steps = 720;
    double dt_seconds = 120.0;
    double tol = 1e-30;
    std::size_t max_iter = 1000;
    std::size_t worker_count = 1;
    LinearSolverChoice solver;
    DeviceSpec device;
    /// Newton stops when the update satisfies |dy|_inf < newton_rtol * |y|_inf
    /// across the whole batch, or after max_newton_iterations.
    double newton_rtol = 1e-10;
    std::size_t max_newton_iterations = 10;
};

/// Per-step record, aggregated over the step's Newton iterations: iteration
/// fields and wall time summed, residual maxed, clips counted post-step.
struct StepStats {
    std::size_t step = 0;
    std::size_t newton_iterations = 0;
    std::size_t iterations_effective = 0;
    std::size_t iterations_sum = 0;
    double max_residual_rms = 0.0;
    std::int64_t wall_time_ns = 0;
    std::size_t breakdown_fallbacks = 0;
    std::size_t clip_events = 0;
};

struct SimulationResult {
    std::vector<StepStats> per_step;
    std::vector<CellState> final_states;
};

/// Advances all cells over config.steps backward-Euler steps, building the
/// batched Newton system each iteration and solving it with the configured
/// strategy. Negative concentrations are clipped to zero at step boundaries
/// (counted); a non-finite state raises SolverAbort with the step index.
SimulationResult run_simulation(const MechanismSpec& mech,
                                const SimulationConfig& config,
                                const std::vector<CellState>& initial_states);

/// Default initial condition: every species at 1.0 in every cell.
std::vector<CellState> default_initial_states(std::size_t cells,
                                              std::size_t n_species);

}  // namespace blockcells
