#include "blockcells/mechanism.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "blockcells/format.hpp"

namespace blockcells {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

constexpr double kReferenceTemperature = 300.0;  // K
constexpr double kSurfacePressure = 1000.0;      // hPa
constexpr double kTopPressure = 100.0;           // hPa
constexpr double kDryAdiabatKappa = 0.2854;      // Poisson exponent, dry air
constexpr double kRateCoeffLo = 1e-6;
constexpr double kRateCoeffHi = 1e2;
constexpr double kTempExponentSpan = 2.0;  // temp_exponent in [-2, 2]
constexpr double kEmissionFraction = 0.1;

// The standard distributions are implementation-defined, so sampling is
// hand-rolled on the (bit-exact) mt19937_64 stream.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::min(static_cast<std::size_t>(uniform01(rng) * n), n - 1);
}

/// Picks `count` distinct species, excluding `exclude` unless that would
/// empty the pool.
std::vector<std::size_t> pick_species(std::mt19937_64& rng, std::size_t n_species,
                                      std::size_t count,
                                      const std::vector<std::size_t>& exclude) {
    std::vector<std::size_t> pool;
    pool.reserve(n_species);
    for (std::size_t s = 0; s < n_species; ++s)
        if (std::find(exclude.begin(), exclude.end(), s) == exclude.end())
            pool.push_back(s);
    if (pool.size() < count) {
        pool.resize(n_species);
        for (std::size_t s = 0; s < n_species; ++s) pool[s] = s;
    }
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = uniform_index(rng, pool.size());
        picked.push_back(pool[at]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
    }
    return picked;
}

}  // namespace

const char* to_string(ReactionKind k) {
    switch (k) {
        case ReactionKind::Emission: return "Emission";
        case ReactionKind::Unimolecular: return "Unimolecular";
        case ReactionKind::Bimolecular: return "Bimolecular";
    }
    return "?";
}

ReactionKind reaction_kind_from_string(const std::string& name) {
    if (name == "Emission") return ReactionKind::Emission;
    if (name == "Unimolecular") return ReactionKind::Unimolecular;
    if (name == "Bimolecular") return ReactionKind::Bimolecular;
    throw std::invalid_argument("unknown reaction kind '" + name + "'");
}

const char* to_string(ConditionMode m) {
    return m == ConditionMode::Ideal ? "ideal" : "realistic";
}

ConditionMode condition_mode_from_string(const std::string& name) {
    if (name == "ideal") return ConditionMode::Ideal;
    if (name == "realistic") return ConditionMode::Realistic;
    throw std::invalid_argument("unknown condition mode '" + name + "'");
}

void MechanismSpec::check_invariants() const {
    require(n_species >= 1, "mechanism: n_species must be >= 1");
    require(!reactions.empty(), "mechanism: no reactions");
    for (const Reaction& r : reactions) {
        const std::size_t expected_reactants =
            r.kind == ReactionKind::Emission      ? 0
            : r.kind == ReactionKind::Unimolecular ? 1
                                                   : 2;
        require(r.reactants.size() == expected_reactants,
                "mechanism: reactant arity does not match kind");
        require(r.products.size() == 1 || r.products.size() == 2,
                "mechanism: reactions must have 1 or 2 products");
        for (std::size_t s : r.reactants)
            require(s < n_species, "mechanism: reactant index out of range");
        for (std::size_t s : r.products)
            require(s < n_species, "mechanism: product index out of range");
        require(r.rate_coeff > 0.0 && std::isfinite(r.rate_coeff),
                "mechanism: rate_coeff must be positive");
        require(std::isfinite(r.temp_exponent),
                "mechanism: temp_exponent must be finite");
    }
}

MechanismSpec generate_mechanism(std::size_t n_species, std::size_t n_reactions,
                                 std::uint64_t seed) {
    require(n_species >= 2, "generate_mechanism: need at least 2 species");
    require(n_reactions >= 1, "generate_mechanism: need at least 1 reaction");

    std::mt19937_64 rng(seed);
    MechanismSpec mech;
    mech.n_species = n_species;
    mech.reactions.reserve(n_reactions);

    for (std::size_t i = 0; i < n_reactions; ++i) {
        Reaction r;
        const double kind_draw = uniform01(rng);
        if (kind_draw < kEmissionFraction) r.kind = ReactionKind::Emission;
        else if (kind_draw < 0.55) r.kind = ReactionKind::Unimolecular;
        else r.kind = ReactionKind::Bimolecular;

        const std::size_t n_reactants =
            r.kind == ReactionKind::Emission      ? 0
            : r.kind == ReactionKind::Unimolecular ? 1
                                                   : 2;
        r.reactants = pick_species(rng, n_species, n_reactants, {});
        const std::size_t n_products = uniform01(rng) < 0.5 ? 1 : 2;
        r.products = pick_species(rng, n_species, n_products, r.reactants);

        const double log_lo = std::log10(kRateCoeffLo);
        const double log_hi = std::log10(kRateCoeffHi);
        r.rate_coeff = std::pow(10.0, log_lo + uniform01(rng) * (log_hi - log_lo));
        r.temp_exponent = (2.0 * uniform01(rng) - 1.0) * kTempExponentSpan;
        mech.reactions.push_back(std::move(r));
    }
    mech.check_invariants();
    return mech;
}

CellConditions cell_conditions(std::size_t cell_index, std::size_t total_cells,
                               ConditionMode mode) {
    require(cell_index < total_cells, "cell_conditions: index out of range");
    if (mode == ConditionMode::Ideal)
        return {kSurfacePressure, kReferenceTemperature, 1.0};

    const double fraction =
        total_cells == 1 ? 0.0
                         : static_cast<double>(cell_index) /
                               static_cast<double>(total_cells - 1);
    CellConditions cond;
    cond.pressure_hpa =
        kSurfacePressure - (kSurfacePressure - kTopPressure) * fraction;
    cond.emission_scale = 1.0 - fraction;
    cond.temperature_k =
        kReferenceTemperature *
        std::pow(cond.pressure_hpa / kSurfacePressure, kDryAdiabatKappa);
    return cond;
}

MechanismEvaluator::MechanismEvaluator(MechanismSpec mech) : mech_(std::move(mech)) {
    mech_.check_invariants();
    const std::size_t n = mech_.n_species;

    std::vector<std::size_t> rows, cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {  // full diagonal, always stored
        rows.push_back(i);
        cols.push_back(i);
        vals.push_back(0.0);
    }
    for (const Reaction& r : mech_.reactions) {
        for (std::size_t col : r.reactants) {
            for (std::size_t row : r.reactants) {
                rows.push_back(row);
                cols.push_back(col);
                vals.push_back(0.0);
            }
            for (std::size_t row : r.products) {
                rows.push_back(row);
                cols.push_back(col);
                vals.push_back(0.0);
            }
        }
    }
    pattern_ = CsrMatrix::from_triplets(n, n, rows, cols, vals);

    auto slot_of = [&](std::size_t row, std::size_t col) {
        const auto begin = pattern_.col_idx.begin() +
                           static_cast<std::ptrdiff_t>(pattern_.row_ptr[row]);
        const auto end = pattern_.col_idx.begin() +
                         static_cast<std::ptrdiff_t>(pattern_.row_ptr[row + 1]);
        const auto it = std::lower_bound(begin, end, col);
        return static_cast<std::size_t>(it - pattern_.col_idx.begin());
    };

    stamps_.resize(mech_.reactions.size());
    for (std::size_t j = 0; j < mech_.reactions.size(); ++j) {
        const Reaction& r = mech_.reactions[j];
        for (std::size_t pos = 0; pos < r.reactants.size(); ++pos) {
            const std::size_t col = r.reactants[pos];
            for (std::size_t row : r.reactants)
                stamps_[j].push_back({slot_of(row, col), -1.0, pos});
            for (std::size_t row : r.products)
                stamps_[j].push_back({slot_of(row, col), +1.0, pos});
        }
    }
}

std::vector<double> MechanismEvaluator::rate_constants(
    const CellConditions& cond) const {
    std::vector<double> rates(mech_.reactions.size());
    for (std::size_t j = 0; j < rates.size(); ++j) {
        const Reaction& r = mech_.reactions[j];
        double k = r.rate_coeff *
                   std::pow(cond.temperature_k / kReferenceTemperature,
                            r.temp_exponent);
        if (r.kind == ReactionKind::Emission) k *= cond.emission_scale;
        rates[j] = k;
    }
    return rates;
}

void MechanismEvaluator::rhs_into(std::span<const double> rates,
                                  std::span<const double> y,
                                  DenseVector& f) const {
    require(y.size() == mech_.n_species, "rhs: state dimension mismatch");
    f.assign(mech_.n_species, 0.0);
    for (std::size_t j = 0; j < mech_.reactions.size(); ++j) {
        const Reaction& r = mech_.reactions[j];
        double rate = rates[j];
        for (std::size_t s : r.reactants) rate *= y[s];
        for (std::size_t s : r.reactants) f[s] -= rate;
        for (std::size_t s : r.products) f[s] += rate;
    }
}

void MechanismEvaluator::jacobian_into(std::span<const double> rates,
                                       std::span<const double> y,
                                       CsrMatrix& jac) const {
    require(y.size() == mech_.n_species, "jacobian: state dimension mismatch");
    require(jac.values.size() == pattern_.values.size(),
            "jacobian: matrix does not carry the mechanism pattern");
    std::fill(jac.values.begin(), jac.values.end(), 0.0);
    for (std::size_t j = 0; j < mech_.reactions.size(); ++j) {
        const Reaction& r = mech_.reactions[j];
        if (r.kind == ReactionKind::Emission) continue;
        for (const Stamp& stamp : stamps_[j]) {
            // d(rate)/d(reactant diff_pos): the rate with that factor removed.
            double partial = rates[j];
            for (std::size_t pos = 0; pos < r.reactants.size(); ++pos)
                if (pos != stamp.diff_pos) partial *= y[r.reactants[pos]];
            jac.values[stamp.slot] += stamp.sign * partial;
        }
    }
}

DenseVector rhs(const MechanismSpec& mech, const CellConditions& cond,
                const CellState& y) {
    MechanismEvaluator eval(mech);
    DenseVector f;
    eval.rhs_into(eval.rate_constants(cond), y.concentrations, f);
    return f;
}

CsrMatrix jacobian(const MechanismSpec& mech, const CellConditions& cond,
                   const CellState& y) {
    MechanismEvaluator eval(mech);
    CsrMatrix jac = eval.pattern();
    eval.jacobian_into(eval.rate_constants(cond), y.concentrations, jac);
    return jac;
}

CsrMatrix jacobian_pattern(const MechanismSpec& mech) {
    return MechanismEvaluator(mech).pattern();
}

std::string mechanism_to_json(const MechanismSpec& mech) {
    nlohmann::ordered_json j;
    j["n_species"] = mech.n_species;
    j["reactions"] = nlohmann::ordered_json::array();
    for (const Reaction& r : mech.reactions) {
        nlohmann::ordered_json jr;
        jr["kind"] = to_string(r.kind);
        jr["reactants"] = r.reactants;
        jr["products"] = r.products;
        jr["rate_coeff"] = r.rate_coeff;
        jr["temp_exponent"] = r.temp_exponent;
        j["reactions"].push_back(std::move(jr));
    }
    return j.dump(2);
}

MechanismSpec mechanism_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    MechanismSpec mech;
    mech.n_species = j.at("n_species").get<std::size_t>();
    for (const auto& jr : j.at("reactions")) {
        Reaction r;
        r.kind = reaction_kind_from_string(jr.at("kind").get<std::string>());
        r.reactants = jr.at("reactants").get<std::vector<std::size_t>>();
        r.products = jr.at("products").get<std::vector<std::size_t>>();
        r.rate_coeff = jr.at("rate_coeff").get<double>();
        r.temp_exponent = jr.at("temp_exponent").get<double>();
        mech.reactions.push_back(std::move(r));
    }
    mech.check_invariants();
    return mech;
}

void save_mechanism(const MechanismSpec& mech, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << mechanism_to_json(mech) << "\n";
}

MechanismSpec load_mechanism(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open mechanism file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return mechanism_from_json(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed mechanism JSON in " + path + ": " +
                                    e.what());
    }
}

std::vector<CellState> load_initial_states_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open initial states " + path);
    std::vector<CellState> states;
    std::string line;
    std::size_t lineno = 0;
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        CellState state;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) {
            const double v = parse_double(field);
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument(
                    path + ":" + std::to_string(lineno) +
                    ": concentrations must be finite and non-negative");
            state.concentrations.push_back(v);
        }
        if (n_cols == 0) n_cols = state.concentrations.size();
        if (state.concentrations.empty() || state.concentrations.size() != n_cols)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": ragged CSV row");
        states.push_back(std::move(state));
    }
    if (states.empty()) throw std::invalid_argument(path + ": no rows");
    return states;
}

}  // namespace blockcells
