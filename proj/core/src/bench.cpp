#include "blockcells/bench.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "blockcells/bicg.hpp"
#include "blockcells/format.hpp"

namespace blockcells::bench {

namespace {

constexpr const char* kCsvHeader =
    "step,strategy,cells,species,cells_per_block,iterations_effective,"
    "iterations_sum,wall_ns,max_residual_rms,breakdown_fallbacks,clip_events";

constexpr std::size_t kPaperAuxArrayCount = 9;

std::size_t parse_size(const std::string& field) {
    std::size_t v = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("csv: bad count field '" + field + "'");
    return v;
}

std::int64_t parse_i64(const std::string& field) {
    std::int64_t v = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("csv: bad integer field '" + field + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

nlohmann::ordered_json mean_std_json(const MeanStd& ms) {
    return {{"mean", ms.mean}, {"std", ms.std}};
}

MeanStd mean_std_from_json(const nlohmann::json& j) {
    return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

void ExperimentConfig::check() const {
    if (cells < 1) throw std::invalid_argument("experiment: cells must be >= 1");
    if (species < 2) throw std::invalid_argument("experiment: species must be >= 2");
    if (!(dt_seconds > 0.0))
        throw std::invalid_argument("experiment: dt must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("experiment: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("experiment: max_iter must be >= 1");
    if (strategies.empty())
        throw std::invalid_argument("experiment: no strategies configured");
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    if (xs.empty()) return ms;
    double sum = 0.0;
    for (double x : xs) sum += x;
    ms.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(sq / static_cast<double>(xs.size()));
    return ms;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.check();
    const MechanismSpec mech =
        generate_mechanism(config.species, config.n_reactions(), config.seed);
    const auto initial = default_initial_states(config.cells, config.species);

    ExperimentResult result;
    std::vector<std::vector<double>> iters_per_strategy;
    std::vector<std::vector<double>> wall_per_strategy;

    for (const StrategyConfig& strategy : config.strategies) {
        SimulationConfig sim;
        sim.cells = config.cells;
        sim.mode = config.mode;
        sim.steps = config.steps;
        sim.dt_seconds = config.dt_seconds;
        sim.tol = config.tol;
        sim.max_iter = config.max_iter;
        sim.worker_count = config.worker_count;
        sim.solver.strategy = strategy;
        sim.device = config.device;

        const SimulationResult sim_result = run_simulation(mech, sim, initial);

        const KernelPlan plan =
            plan_kernel(strategy.kind, config.cells, config.species, config.device,
                        strategy.kind == Strategy::BlockCells
                            ? strategy.cells_per_block
                            : std::nullopt);

        std::vector<double> iters, wall;
        for (const StepStats& s : sim_result.per_step) {
            StepRecord row;
            row.step = s.step;
            row.strategy = to_string(strategy.kind);
            row.cells = config.cells;
            row.species = config.species;
            row.cells_per_block = plan.cells_per_block;
            row.iterations_effective = s.iterations_effective;
            row.iterations_sum = s.iterations_sum;
            row.wall_ns = s.wall_time_ns;
            row.max_residual_rms = s.max_residual_rms;
            row.breakdown_fallbacks = s.breakdown_fallbacks;
            row.clip_events = s.clip_events;
            result.raw.push_back(std::move(row));
            iters.push_back(static_cast<double>(s.iterations_effective));
            wall.push_back(static_cast<double>(s.wall_time_ns));
        }

        StrategyStats stats;
        stats.config = strategy;
        stats.plan = plan;
        stats.occupancy = occupancy_estimate(plan, config.device);
        stats.memory_bytes_paper_census = memory_estimate(
            strategy.kind, config.cells, config.species, kPaperAuxArrayCount,
            config.device,
            strategy.kind == Strategy::BlockCells ? strategy.cells_per_block
                                                  : std::nullopt);
        stats.memory_bytes_actual_census = memory_estimate(
            strategy.kind, config.cells, config.species,
            BicgWorkspace::aux_array_count(), config.device,
            strategy.kind == Strategy::BlockCells ? strategy.cells_per_block
                                                  : std::nullopt);
        stats.iterations_effective = mean_std(iters);
        stats.wall_ns = mean_std(wall);
        result.stats.per_strategy.push_back(std::move(stats));
        result.final_states_per_strategy.push_back(sim_result.final_states);
        iters_per_strategy.push_back(std::move(iters));
        wall_per_strategy.push_back(std::move(wall));
    }

    // Speedup against the one-cell baseline, when the baseline ran.
    std::ptrdiff_t baseline = -1, block1 = -1;
    for (std::size_t i = 0; i < config.strategies.size(); ++i) {
        const StrategyConfig& s = config.strategies[i];
        if (s.kind == Strategy::OneCell && baseline < 0)
            baseline = static_cast<std::ptrdiff_t>(i);
        if (s.kind == Strategy::BlockCells && s.cells_per_block == 1 && block1 < 0)
            block1 = static_cast<std::ptrdiff_t>(i);
    }
    for (std::size_t i = 0; i < result.stats.per_strategy.size(); ++i) {
        StrategyStats& stats = result.stats.per_strategy[i];
        if (baseline >= 0 && stats.wall_ns.mean > 0.0) {
            stats.speedup_vs_baseline =
                result.stats.per_strategy[static_cast<std::size_t>(baseline)]
                    .wall_ns.mean /
                stats.wall_ns.mean;
        }
        if (block1 >= 0) {
            const auto& denom =
                iters_per_strategy[static_cast<std::size_t>(block1)];
            const auto& numer = iters_per_strategy[i];
            std::vector<double> ratios;
            for (std::size_t t = 0; t < numer.size() && t < denom.size(); ++t)
                if (denom[t] > 0.0) ratios.push_back(numer[t] / denom[t]);
            if (!ratios.empty())
                stats.iteration_reduction_vs_block1 = mean_std(ratios);
        }
    }
    return result;
}

std::string to_csv(const std::vector<StepRecord>& raw) {
    if (raw.empty()) throw std::invalid_argument("emit_csv: empty table");
    std::string out = kCsvHeader;
    out.push_back('\n');
    for (const StepRecord& r : raw) {
        out += std::to_string(r.step);
        out.push_back(',');
        out += r.strategy;
        out.push_back(',');
        out += std::to_string(r.cells);
        out.push_back(',');
        out += std::to_string(r.species);
        out.push_back(',');
        out += format_double(r.cells_per_block);
        out.push_back(',');
        out += std::to_string(r.iterations_effective);
        out.push_back(',');
        out += std::to_string(r.iterations_sum);
        out.push_back(',');
        out += std::to_string(r.wall_ns);
        out.push_back(',');
        out += format_double(r.max_residual_rms);
        out.push_back(',');
        out += std::to_string(r.breakdown_fallbacks);
        out.push_back(',');
        out += std::to_string(r.clip_events);
        out.push_back('\n');
    }
    return out;
}

void emit_csv(const std::vector<StepRecord>& raw, const std::string& path) {
    const std::string text = to_csv(raw);
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<StepRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::invalid_argument("csv: missing or unexpected header");
    std::vector<StepRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 11)
            throw std::invalid_argument("csv: expected 11 fields, got " +
                                        std::to_string(fields.size()));
        StepRecord r;
        r.step = parse_size(fields[0]);
        r.strategy = fields[1];
        r.cells = parse_size(fields[2]);
        r.species = parse_size(fields[3]);
        r.cells_per_block = parse_double(fields[4]);
        r.iterations_effective = parse_size(fields[5]);
        r.iterations_sum = parse_size(fields[6]);
        r.wall_ns = parse_i64(fields[7]);
        r.max_residual_rms = parse_double(fields[8]);
        r.breakdown_fallbacks = parse_size(fields[9]);
        r.clip_events = parse_size(fields[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

nlohmann::ordered_json strategy_config_json(const StrategyConfig& s) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(s.kind);
    if (s.kind == Strategy::BlockCells)
        j["cells_per_block"] =
            s.cells_per_block ? nlohmann::ordered_json(*s.cells_per_block)
                              : nlohmann::ordered_json("N");
    return j;
}

StrategyConfig strategy_config_from_json(const nlohmann::json& j) {
    StrategyConfig s;
    s.kind = strategy_from_string(j.at("kind").get<std::string>());
    if (s.kind == Strategy::BlockCells && j.contains("cells_per_block") &&
        !j["cells_per_block"].is_string())
        s.cells_per_block = j["cells_per_block"].get<std::size_t>();
    return s;
}

}  // namespace

std::string summary_to_json(const ExperimentConfig& config,
                            const AggregateStats& stats) {
    if (stats.per_strategy.empty())
        throw std::invalid_argument("emit_summary_json: no strategies");

    nlohmann::ordered_json j;
    nlohmann::ordered_json jc;
    jc["cells"] = config.cells;
    jc["species"] = config.species;
    jc["steps"] = config.steps;
    jc["dt_seconds"] = config.dt_seconds;
    jc["mode"] = to_string(config.mode);
    jc["strategies"] = nlohmann::ordered_json::array();
    for (const StrategyConfig& s : config.strategies)
        jc["strategies"].push_back(strategy_config_json(s));
    jc["tol"] = config.tol;
    jc["max_iter"] = config.max_iter;
    jc["seed"] = config.seed;
    jc["worker_count"] = config.worker_count;
    jc["output_path"] = config.output_path;
    j["config"] = std::move(jc);

    j["strategies"] = nlohmann::ordered_json::array();
    for (const StrategyStats& s : stats.per_strategy) {
        nlohmann::ordered_json js;
        js["label"] = s.config.label();
        js["config"] = strategy_config_json(s.config);
        js["kernel_plan"] = nlohmann::ordered_json::parse(
            kernel_plan_to_json(s.plan));
        js["occupancy"] = s.occupancy.value;
        js["occupancy_shared_mem_exceeded"] = s.occupancy.shared_mem_exceeded;
        js["memory_bytes_paper_census"] = s.memory_bytes_paper_census;
        js["memory_bytes_actual_census"] = s.memory_bytes_actual_census;
        js["iterations_effective"] = mean_std_json(s.iterations_effective);
        js["wall_ns"] = mean_std_json(s.wall_ns);
        js["speedup_vs_baseline"] =
            s.speedup_vs_baseline ? nlohmann::ordered_json(*s.speedup_vs_baseline)
                                  : nlohmann::ordered_json(nullptr);
        js["iteration_reduction_vs_block1"] =
            s.iteration_reduction_vs_block1
                ? mean_std_json(*s.iteration_reduction_vs_block1)
                : nlohmann::ordered_json(nullptr);
        j["strategies"].push_back(std::move(js));
    }
    return j.dump(2);
}

void emit_summary_json(const ExperimentConfig& config, const AggregateStats& stats,
                       const std::string& path) {
    const std::string text = summary_to_json(config, stats);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

AggregateStats summary_stats_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    AggregateStats stats;
    for (const auto& js : j.at("strategies")) {
        StrategyStats s;
        s.config = strategy_config_from_json(js.at("config"));
        s.plan = kernel_plan_from_json(js.at("kernel_plan").dump());
        s.occupancy.value = js.at("occupancy").get<double>();
        s.occupancy.shared_mem_exceeded =
            js.at("occupancy_shared_mem_exceeded").get<bool>();
        s.memory_bytes_paper_census =
            js.at("memory_bytes_paper_census").get<std::uint64_t>();
        s.memory_bytes_actual_census =
            js.at("memory_bytes_actual_census").get<std::uint64_t>();
        s.iterations_effective = mean_std_from_json(js.at("iterations_effective"));
        s.wall_ns = mean_std_from_json(js.at("wall_ns"));
        if (!js.at("speedup_vs_baseline").is_null())
            s.speedup_vs_baseline = js["speedup_vs_baseline"].get<double>();
        if (!js.at("iteration_reduction_vs_block1").is_null())
            s.iteration_reduction_vs_block1 =
                mean_std_from_json(js["iteration_reduction_vs_block1"]);
        stats.per_strategy.push_back(std::move(s));
    }
    return stats;
}

}  // namespace blockcells::bench
