#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockcells/csr.hpp"

namespace blockcells {

enum class ReactionKind { Emission, Unimolecular, Bimolecular };

const char* to_string(ReactionKind k);
ReactionKind reaction_kind_from_string(const std::string& name);

/// One mass-action reaction. Emission has no reactants and injects products
/// at a constant rate; Unimolecular and Bimolecular consume their reactants.
struct Reaction {
    ReactionKind kind = ReactionKind::Unimolecular;
    std::vector<std::size_t> reactants;  // 0, 1 or 2 species indices
    std::vector<std::size_t> products;   // 1 or 2 species indices
    double rate_coeff = 0.0;             // at the 300 K reference temperature
    double temp_exponent = 0.0;          // k(T) = rate_coeff * (T/300)^temp_exponent

    friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Synthetic reaction network standing in for a full gas-phase mechanism.
struct MechanismSpec {
    std::size_t n_species = 0;
    std::vector<Reaction> reactions;

    friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;

    /// Throws std::invalid_argument when an invariant fails (index range,
    /// reactant/product arity, non-positive rate).
    void check_invariants() const;
};

/// Deterministic random mechanism: ~10% emissions, log-uniform rate
/// coefficients over [1e-6, 1e2], temperature exponents in [-2, 2], uniform
/// species choices without self-loops.
MechanismSpec generate_mechanism(std::size_t n_species, std::size_t n_reactions,
                                 std::uint64_t seed);

std::string mechanism_to_json(const MechanismSpec& mech);
MechanismSpec mechanism_from_json(const std::string& json_text);
void save_mechanism(const MechanismSpec& mech, const std::string& path);
MechanismSpec load_mechanism(const std::string& path);

enum class ConditionMode { Ideal, Realistic };

const char* to_string(ConditionMode m);
ConditionMode condition_mode_from_string(const std::string& name);

/// Atmospheric knobs for one cell.
struct CellConditions {
    double pressure_hpa = 1000.0;
    double temperature_k = 300.0;
    double emission_scale = 1.0;  // in [0, 1]

    friend bool operator==(const CellConditions&, const CellConditions&) = default;
};

/// Ideal: every cell at surface conditions. Realistic: pressure falls
/// linearly 1000 -> 100 hPa across the cell index, emissions fall 1 -> 0, and
/// temperature follows the dry adiabat T = 300 * (p/1000)^0.2854.
CellConditions cell_conditions(std::size_t cell_index, std::size_t total_cells,
                               ConditionMode mode);

/// Species concentrations for one cell.
struct CellState {
    DenseVector concentrations;
};

/// dy/dt from mass action: emission k*scale, unimolecular k*y_r,
/// bimolecular k*y_a*y_b, with k = rate_coeff * (T/300)^temp_exponent.
DenseVector rhs(const MechanismSpec& mech, const CellConditions& cond,
                const CellState& y);

/// Analytic Jacobian d(rhs)/dy on a fixed sparsity pattern (full diagonal
/// plus every reactant-coupling the mechanism can touch); entries that are
/// currently zero stay stored so the pattern never depends on y.
CsrMatrix jacobian(const MechanismSpec& mech, const CellConditions& cond,
                   const CellState& y);

/// The y-independent pattern used by jacobian(), as a zero-valued skeleton.
CsrMatrix jacobian_pattern(const MechanismSpec& mech);

/// Precomputed evaluation tables for one mechanism: the Jacobian skeleton and
/// the per-reaction stamp slots into it. Use this in loops; the free rhs()
/// and jacobian() wrappers rebuild the tables on every call.
class MechanismEvaluator {
  public:
    explicit MechanismEvaluator(MechanismSpec mech);

    const MechanismSpec& mech() const { return mech_; }
    const CsrMatrix& pattern() const { return pattern_; }

    /// Effective rate constant per reaction at the cell's conditions:
    /// rate_coeff * (T/300)^temp_exponent, with the emission scale folded
    /// into Emission reactions.
    std::vector<double> rate_constants(const CellConditions& cond) const;

    void rhs_into(std::span<const double> rates, std::span<const double> y,
                  DenseVector& f) const;

    /// Writes Jacobian values into `jac`, which must carry pattern()'s
    /// structure (values are overwritten, structure untouched).
    void jacobian_into(std::span<const double> rates, std::span<const double> y,
                       CsrMatrix& jac) const;

  private:
    struct Stamp {
        std::size_t slot;      // index into pattern values
        double sign;           // +1 gain, -1 loss
        std::size_t diff_pos;  // which reactant the derivative is taken in
    };

    MechanismSpec mech_;
    CsrMatrix pattern_;
    std::vector<std::vector<Stamp>> stamps_;  // per reaction
};

/// Initial states from CSV: one row per cell, one column per species.
/// Rejects ragged rows, non-finite and negative values.
std::vector<CellState> load_initial_states_csv(const std::string& path);

}  // namespace blockcells
