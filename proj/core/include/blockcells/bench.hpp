#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockcells/exec_model.hpp"
#include "blockcells/mechanism.hpp"
#include "blockcells/simulate.hpp"
#include "blockcells/strategies.hpp"

namespace blockcells::bench {

struct ExperimentConfig {
    std::size_t cells = 1000;
    std::size_t species = 156;
    std::size_t steps = 720;
    double dt_seconds = 120.0;
    ConditionMode mode = ConditionMode::Realistic;
    std::vector<StrategyConfig> strategies;
    double tol = 1e-30;
    std::size_t max_iter = 1000;
    std::uint64_t seed = 0;
    std::size_t worker_count = 1;
    std::string output_path;  // directory for results.csv / summary.json
    DeviceSpec device;

    /// Reactions generated per mechanism; the default reproduces the
    /// 3*species sizing used throughout.
    std::size_t n_reactions() const { return 3 * species; }

    void check() const;
};

/// One row of the raw per-step table (the CSV schema, in column order).
struct StepRecord {
    std::size_t step = 0;
    std::string strategy;
    std::size_t cells = 0;
    std::size_t species = 0;
    double cells_per_block = 0.0;
    std::size_t iterations_effective = 0;
    std::size_t iterations_sum = 0;
    std::int64_t wall_ns = 0;
    double max_residual_rms = 0.0;
    std::size_t breakdown_fallbacks = 0;
    std::size_t clip_events = 0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Two-pass mean and population standard deviation; a constant series has
/// std exactly 0.
MeanStd mean_std(const std::vector<double>& xs);

/// Per-strategy aggregate over the run's steps.
struct StrategyStats {
    StrategyConfig config;
    KernelPlan plan;
    OccupancyEstimate occupancy;
    std::uint64_t memory_bytes_paper_census = 0;  // aux arrays = 9
    std::uint64_t memory_bytes_actual_census = 0; // aux arrays from the workspace
    MeanStd iterations_effective;
    MeanStd wall_ns;
    /// Solve-time speedup of this strategy over the one-cell baseline
    /// (present when the baseline ran).
    std::optional<double> speedup_vs_baseline;
    /// Mean/std over steps of iterations_effective divided by the
    /// block-cells(1) comparator's (present when the comparator ran).
    std::optional<MeanStd> iteration_reduction_vs_block1;
};

struct AggregateStats {
    std::vector<StrategyStats> per_strategy;
};

struct ExperimentResult {
    AggregateStats stats;
    std::vector<StepRecord> raw;
    std::vector<std::vector<CellState>> final_states_per_strategy;
};

/// Runs every configured strategy over the same generated problem. All
/// non-timing outputs are deterministic functions of the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV with the exact header
/// step,strategy,cells,species,cells_per_block,iterations_effective,
/// iterations_sum,wall_ns,max_residual_rms,breakdown_fallbacks,clip_events
/// (one line), LF endings, shortest round-trip real formatting.
void emit_csv(const std::vector<StepRecord>& raw, const std::string& path);
std::string to_csv(const std::vector<StepRecord>& raw);
std::vector<StepRecord> parse_csv(const std::string& text);

/// JSON summary embedding the config, per-strategy stats, kernel plans and
/// the memory/occupancy estimates, with stable key order.
void emit_summary_json(const ExperimentConfig& config, const AggregateStats& stats,
                       const std::string& path);
std::string summary_to_json(const ExperimentConfig& config,
                            const AggregateStats& stats);

/// Reads back the per-strategy aggregates written by emit_summary_json.
AggregateStats summary_stats_from_json(const std::string& json_text);

}  // namespace blockcells::bench
