#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "blockcells/reduction.hpp"

namespace blockcells {

/// Requested mechanism does not fit the device (species > threads per block).
struct UnsupportedMechanism : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested cells-per-block grouping does not fit the device.
struct InvalidGrouping : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Strategy { OneCell, MultiCells, BlockCells };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

/// Launch-geometry limits of the modeled device. Defaults model a Volta-class
/// part (V100). None of the limits are hard-coded elsewhere, so the model is
/// not bound to one piece of hardware.
struct DeviceSpec {
    std::size_t max_threads_per_block = 1024;
    std::size_t warp_size = 32;
    std::size_t max_warps_per_sm = 64;
    std::size_t max_blocks_per_sm = 32;
    std::size_t max_threads_per_sm = 2048;
    std::size_t shared_mem_per_sm = 96 * 1024;  // bytes
    std::size_t shared_slot_bytes = 8;          // one real64 slot

    /// Throws std::invalid_argument on a non-positive limit or
    /// max_threads_per_block > max_threads_per_sm.
    void check() const;
};

/// Parse a plain key=value file ('#' starts a comment). Unknown keys and
/// malformed lines are errors.
DeviceSpec load_device_spec(const std::string& path);

/// Simulated launch geometry for one strategy.
struct KernelPlan {
    Strategy strategy = Strategy::OneCell;
    /// Whole cells per block; fractional for MultiCells, where a cell may
    /// straddle two blocks.
    double cells_per_block = 1;
    std::size_t threads_per_block = 0;
    std::size_t shared_slots = 0;  // power of two
    std::size_t full_blocks = 0;

    struct Remainder {
        std::size_t cells = 0;
        std::size_t threads = 0;
        std::size_t shared_slots = 0;
        friend bool operator==(const Remainder&, const Remainder&) = default;
    };
    /// Present iff total_cells mod cells_per_block != 0 (BlockCells only);
    /// modeled as a separate launch with its own shared-memory size.
    std::optional<Remainder> remainder;

    std::size_t total_blocks() const {
        return full_blocks + (remainder ? 1 : 0);
    }
    friend bool operator==(const KernelPlan&, const KernelPlan&) = default;
};

/// JSON round-trip for KernelPlan (field names as in the struct).
std::string kernel_plan_to_json(const KernelPlan& plan);
KernelPlan kernel_plan_from_json(const std::string& json_text);

/// Smallest power of two >= n. n must be >= 1.
std::size_t next_pow2(std::size_t n);

struct WarpPadding {
    std::size_t warps = 0;
    std::size_t idle = 0;
    friend bool operator==(const WarpPadding&, const WarpPadding&) = default;
};

/// Threads are launched in whole warps; idle = warps*warp_size - threads.
WarpPadding warp_padding(std::size_t threads, std::size_t warp_size = 32);

/// Builds the launch geometry for a strategy over total_cells systems of
/// `species` unknowns each.
///
/// BlockCells with a requested k packs k whole cells per block; cells left
/// over go to a separate remainder launch. BlockCells without a request uses
/// k = floor(max_threads_per_block / species). MultiCells fills maximum-size
/// blocks and lets cells straddle block boundaries. OneCell launches one
/// block of `species` threads per cell.
KernelPlan plan_kernel(Strategy strategy, std::size_t total_cells,
                       std::size_t species, const DeviceSpec& device = {},
                       std::optional<std::size_t> cells_per_block_request = {});

struct OccupancyEstimate {
    double value = 0.0;               // active / maximum warps per SM, in [0,1]
    bool shared_mem_exceeded = false; // plan cannot fit even one block
};

/// Analytic occupancy: blocks per SM limited by the block, thread and
/// shared-memory budgets; occupancy = resident warps / max warps. Register
/// pressure is not modeled.
OccupancyEstimate occupancy_estimate(const KernelPlan& plan,
                                     const DeviceSpec& device = {});

/// Solver-state footprint in bytes: (2 + aux_array_count) arrays of
/// cells*species reals, one convergence scalar per block, and for MultiCells
/// the two host-stage buffers of one entry per cell.
std::uint64_t memory_estimate(Strategy strategy, std::size_t cells,
                              std::size_t species, std::size_t aux_array_count,
                              const DeviceSpec& device = {},
                              std::optional<std::size_t> cells_per_block_request = {});

/// One reduction interval per block of the plan, covering system_length
/// indices in launch order; the host stage is present only for MultiCells.
ReductionPlan build_reduction_plan(const KernelPlan& plan,
                                   std::size_t system_length);

}  // namespace blockcells
