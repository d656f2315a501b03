#include "blockcells/exec_model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace blockcells {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::OneCell: return "one-cell";
        case Strategy::MultiCells: return "multi-cells";
        case Strategy::BlockCells: return "block-cells";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "one-cell") return Strategy::OneCell;
    if (name == "multi-cells") return Strategy::MultiCells;
    if (name == "block-cells") return Strategy::BlockCells;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

void DeviceSpec::check() const {
    require(max_threads_per_block > 0 && warp_size > 0 && max_warps_per_sm > 0 &&
                max_blocks_per_sm > 0 && max_threads_per_sm > 0 &&
                shared_mem_per_sm > 0 && shared_slot_bytes > 0,
            "device spec: limits must be positive");
    require(max_threads_per_block <= max_threads_per_sm,
            "device spec: max_threads_per_block > max_threads_per_sm");
}

DeviceSpec load_device_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open device spec " + path);
    DeviceSpec spec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        auto fail = [&](const char* why) {
            std::ostringstream os;
            os << path << ":" << lineno << ": " << why;
            throw std::runtime_error(os.str());
        };
        if (eq == std::string::npos) fail("expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::size_t parsed = 0;
        try {
            parsed = std::stoull(value);
        } catch (const std::exception&) {
            fail("value is not a non-negative integer");
        }
        if (key == "max_threads_per_block") spec.max_threads_per_block = parsed;
        else if (key == "warp_size") spec.warp_size = parsed;
        else if (key == "max_warps_per_sm") spec.max_warps_per_sm = parsed;
        else if (key == "max_blocks_per_sm") spec.max_blocks_per_sm = parsed;
        else if (key == "max_threads_per_sm") spec.max_threads_per_sm = parsed;
        else if (key == "shared_mem_per_sm") spec.shared_mem_per_sm = parsed;
        else if (key == "shared_slot_bytes") spec.shared_slot_bytes = parsed;
        else fail("unknown device spec key");
    }
    spec.check();
    return spec;
}

std::size_t next_pow2(std::size_t n) {
    require(n >= 1, "next_pow2: n must be >= 1");
    return std::bit_ceil(n);
}

WarpPadding warp_padding(std::size_t threads, std::size_t warp_size) {
    require(threads >= 1, "warp_padding: threads must be >= 1");
    require(warp_size >= 1, "warp_padding: warp size must be >= 1");
    const std::size_t warps = (threads + warp_size - 1) / warp_size;
    return {warps, warps * warp_size - threads};
}

KernelPlan plan_kernel(Strategy strategy, std::size_t total_cells,
                       std::size_t species, const DeviceSpec& device,
                       std::optional<std::size_t> cells_per_block_request) {
    device.check();
    require(total_cells >= 1, "plan_kernel: total_cells must be >= 1");
    require(species >= 1, "plan_kernel: species must be >= 1");
    if (species > device.max_threads_per_block)
        throw UnsupportedMechanism(
            "mechanism needs more threads per cell than a block provides");

    KernelPlan plan;
    plan.strategy = strategy;
    switch (strategy) {
        case Strategy::OneCell: {
            // One launch per cell, each a single block of `species` threads.
            plan.cells_per_block = 1;
            plan.threads_per_block = species;
            plan.shared_slots = next_pow2(species);
            plan.full_blocks = total_cells;
            break;
        }
        case Strategy::MultiCells: {
            plan.threads_per_block = device.max_threads_per_block;
            plan.shared_slots = next_pow2(device.max_threads_per_block);
            plan.cells_per_block =
                static_cast<double>(device.max_threads_per_block) /
                static_cast<double>(species);
            const std::size_t total_threads = total_cells * species;
            plan.full_blocks = (total_threads + device.max_threads_per_block - 1) /
                               device.max_threads_per_block;
            break;
        }
        case Strategy::BlockCells: {
            std::size_t k;
            if (cells_per_block_request) {
                k = *cells_per_block_request;
                require(k >= 1, "plan_kernel: cells per block must be >= 1");
                if (k * species > device.max_threads_per_block)
                    throw InvalidGrouping(
                        "requested cells per block exceeds the thread budget");
            } else {
                k = device.max_threads_per_block / species;
            }
            plan.cells_per_block = static_cast<double>(k);
            plan.threads_per_block = k * species;
            plan.shared_slots = next_pow2(plan.threads_per_block);
            plan.full_blocks = total_cells / k;
            const std::size_t leftover = total_cells % k;
            if (leftover != 0) {
                KernelPlan::Remainder rem;
                rem.cells = leftover;
                rem.threads = leftover * species;
                rem.shared_slots = next_pow2(rem.threads);
                plan.remainder = rem;
            }
            break;
        }
    }
    return plan;
}

OccupancyEstimate occupancy_estimate(const KernelPlan& plan,
                                     const DeviceSpec& device) {
    device.check();
    const WarpPadding pad = warp_padding(plan.threads_per_block, device.warp_size);
    const std::size_t padded_threads = pad.warps * device.warp_size;
    const std::size_t shared_bytes = plan.shared_slots * device.shared_slot_bytes;

    OccupancyEstimate est;
    if (shared_bytes > device.shared_mem_per_sm ||
        padded_threads > device.max_threads_per_sm) {
        est.shared_mem_exceeded = shared_bytes > device.shared_mem_per_sm;
        return est;  // not even one resident block
    }
    const std::size_t blocks_per_sm =
        std::min({device.max_blocks_per_sm,
                  device.max_threads_per_sm / padded_threads,
                  device.shared_mem_per_sm / shared_bytes});
    const double occupancy = static_cast<double>(blocks_per_sm * pad.warps) /
                             static_cast<double>(device.max_warps_per_sm);
    est.value = std::min(occupancy, 1.0);
    return est;
}

std::uint64_t memory_estimate(Strategy strategy, std::size_t cells,
                              std::size_t species, std::size_t aux_array_count,
                              const DeviceSpec& device,
                              std::optional<std::size_t> cells_per_block_request) {
    require(cells >= 1, "memory_estimate: cells must be >= 1");
    require(species >= 1, "memory_estimate: species must be >= 1");
    const KernelPlan plan =
        plan_kernel(strategy, cells, species, device, cells_per_block_request);
    std::uint64_t bytes =
        std::uint64_t(2 + aux_array_count) * cells * species * sizeof(double);
    bytes += std::uint64_t(plan.total_blocks()) * sizeof(double);
    if (strategy == Strategy::MultiCells)
        bytes += std::uint64_t(2) * cells * sizeof(double);  // host-stage buffers
    return bytes;
}

ReductionPlan build_reduction_plan(const KernelPlan& plan,
                                   std::size_t system_length) {
    require(system_length >= 1, "build_reduction_plan: empty system");
    require(plan.threads_per_block >= 1, "build_reduction_plan: empty plan");
    if (plan.strategy != Strategy::MultiCells &&
        system_length % plan.threads_per_block != 0)
        throw std::invalid_argument(
            "build_reduction_plan: system length inconsistent with plan geometry");

    ReductionPlan reduction;
    for (std::size_t begin = 0; begin < system_length;
         begin += plan.threads_per_block) {
        const std::size_t end =
            std::min(system_length, begin + plan.threads_per_block);
        reduction.block_ranges.push_back({begin, end});
    }
    reduction.host_stage = plan.strategy == Strategy::MultiCells;
    return reduction;
}

std::string kernel_plan_to_json(const KernelPlan& plan) {
    nlohmann::ordered_json j;
    j["strategy"] = to_string(plan.strategy);
    j["cells_per_block"] = plan.cells_per_block;
    j["threads_per_block"] = plan.threads_per_block;
    j["shared_slots"] = plan.shared_slots;
    j["full_blocks"] = plan.full_blocks;
    if (plan.remainder) {
        j["remainder"] = {{"cells", plan.remainder->cells},
                          {"threads", plan.remainder->threads},
                          {"shared_slots", plan.remainder->shared_slots}};
    } else {
        j["remainder"] = nullptr;
    }
    return j.dump(2);
}

KernelPlan kernel_plan_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    KernelPlan plan;
    plan.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    plan.cells_per_block = j.at("cells_per_block").get<double>();
    plan.threads_per_block = j.at("threads_per_block").get<std::size_t>();
    plan.shared_slots = j.at("shared_slots").get<std::size_t>();
    plan.full_blocks = j.at("full_blocks").get<std::size_t>();
    if (!j.at("remainder").is_null()) {
        KernelPlan::Remainder rem;
        rem.cells = j["remainder"].at("cells").get<std::size_t>();
        rem.threads = j["remainder"].at("threads").get<std::size_t>();
        rem.shared_slots = j["remainder"].at("shared_slots").get<std::size_t>();
        plan.remainder = rem;
    }
    return plan;
}

}  // namespace blockcells
