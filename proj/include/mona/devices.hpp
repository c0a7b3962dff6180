#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "mona/netlist.hpp"
#include "mona/types.hpp"

namespace mona {

/// Largest exponent fed to exp(); larger arguments are clamped and flagged.
inline constexpr Real kExpClamp = 700.0;

/// Linear resistor as a conductance: i = conductance · v.
struct LinearConductance {
    Real conductance = 0.0;
};

/// Exponential diode law i = saturation · (exp(slope · v) + 1).
struct ShockleyDiode {
    Real saturation = 0.0;  // is
    Real slope = 0.0;       // k
};

using ResistiveBranch = std::variant<LinearConductance, ShockleyDiode>;

/// Quadratic energy ½ yᵀ W⁻¹ y of a linear storage bank with SPD matrix W
/// (the capacitance or inductance matrix).
struct LinearStorage {
    Matrix storage;
    Matrix inverse;
};

/// Energy functional given directly; enables nonlinear storage banks.
struct FunctionalStorage {
    std::function<Real(const Vector&)> energy;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
};

using StorageModel = std::variant<LinearStorage, FunctionalStorage>;

/// Constitutive models for one circuit: branch current laws for the
/// resistive class, energy functionals for the storage banks, and source
/// waveforms. Immutable after construction.
struct DeviceModels {
    std::vector<ResistiveBranch> resistive;  // netlist order, diodes included
    StorageModel capacitive;                 // over the stacked capacitor charges
    StorageModel inductive;                  // over the stacked flux linkages
    std::vector<Waveform> vsrc;
    std::vector<Waveform> isrc;

    [[nodiscard]] Index num_resistive() const { return static_cast<Index>(resistive.size()); }

    [[nodiscard]] Vector v_src(Real t) const;
    [[nodiscard]] Vector i_src(Real t) const;
    [[nodiscard]] Vector v_src_rate(Real t) const;
    [[nodiscard]] Vector i_src_rate(Real t) const;
};

/// Builds models from a circuit graph: conductances from R lines, diode laws
/// from D lines, diagonal capacitance matrix, inductance matrix with mutual
/// couplings folded in. Throws ModelError on nonpositive parameters or a
/// non-SPD inductance matrix.
DeviceModels build_models(const CircuitGraph& graph);

/// Branch currents of the resistive class at branch voltages v. Sets
/// *clamped when any diode exponent hit the overflow clamp.
Vector eval_conductance_current(const DeviceModels& models, const Vector& v,
                                bool* clamped = nullptr);

/// Differential conductances di/dv, the diagonal of G(v).
Vector eval_conductance_slopes(const DeviceModels& models, const Vector& v,
                               bool* clamped = nullptr);

/// Total stored energy ε_L(φ) + ε_C(q).
Real eval_energy(const DeviceModels& models, const Vector& phi, const Vector& q);

/// Energy gradients: (∇ε_L(φ), ∇ε_C(q)) = (inductor currents, capacitor voltages).
std::pair<Vector, Vector> eval_energy_gradient(const DeviceModels& models, const Vector& phi,
                                               const Vector& q);

/// Energy Hessians: (∇²ε_L(φ), ∇²ε_C(q)); for linear banks the constant
/// inverse storage matrices. Throws ModelError when a Hessian is not SPD.
std::pair<Matrix, Matrix> eval_energy_hessian(const DeviceModels& models, const Vector& phi,
                                              const Vector& q);

/// Forward maps of linear storage banks: q = C·v_C and φ = L·i_L.
/// Throws ModelError for functional (nonlinear) banks.
Vector charge_of_voltage(const DeviceModels& models, const Vector& v_c);
Vector flux_of_current(const DeviceModels& models, const Vector& i_l);

/// True when every resistive branch is a linear conductance and both storage
/// banks are linear (the circuit DAE is then linear time-invariant).
bool is_linear(const DeviceModels& models);

/// True when both storage banks are linear (forward maps available).
bool has_linear_storage(const DeviceModels& models);

}  // namespace mona
