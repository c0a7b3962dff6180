#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mona/devices.hpp"
#include "mona/topology.hpp"
#include "mona/trajectory.hpp"
#include "mona/types.hpp"

namespace mona {

/// Block structure and component names of the stacked unknown vector.
/// Conventional unknowns: x = (e, i_L, i_V); charge-flux unknowns:
/// x = (ψ, q_C, q_V). The middle block belongs to the storage elements,
/// the trailing block to the voltage sources.
struct UnknownLayout {
    Formulation formulation = Formulation::Mna;
    Index nodes = 0;
    Index storage = 0;  // inductors (MNA) or capacitors (MONA)
    Index sources = 0;  // voltage sources

    std::vector<std::string> names;  // one per component, CSV column order

    [[nodiscard]] Index size() const { return nodes + storage + sources; }

    /// Node-potential block (e or ψ).
    template <typename Derived>
    [[nodiscard]] auto node_block(const Eigen::MatrixBase<Derived>& x) const {
        return x.segment(0, nodes);
    }
    template <typename Derived>
    [[nodiscard]] auto node_block(Eigen::MatrixBase<Derived>& x) const {
        return x.segment(0, nodes);
    }
    /// Storage-element block (i_L or q_C).
    template <typename Derived>
    [[nodiscard]] auto storage_block(const Eigen::MatrixBase<Derived>& x) const {
        return x.segment(nodes, storage);
    }
    template <typename Derived>
    [[nodiscard]] auto storage_block(Eigen::MatrixBase<Derived>& x) const {
        return x.segment(nodes, storage);
    }
    /// Voltage-source block (i_V or q_V).
    template <typename Derived>
    [[nodiscard]] auto source_block(const Eigen::MatrixBase<Derived>& x) const {
        return x.segment(nodes + storage, sources);
    }
    template <typename Derived>
    [[nodiscard]] auto source_block(Eigen::MatrixBase<Derived>& x) const {
        return x.segment(nodes + storage, sources);
    }
};

/// Fully-implicit network DAE F(t, x, x′) = 0 for one formulation.
/// Immutable after assembly; evaluation is pure.
struct ImplicitDAE {
    Formulation formulation = Formulation::Mna;
    UnknownLayout layout;
    DeviceModels models;

    // Class incidence blocks as real matrices.
    Matrix a_c, a_l, a_r, a_v, a_i;

    // Constant storage products of the conventional formulation:
    // node mass A_C C A_Cᵀ and the inductance matrix L.
    Matrix node_mass;
    Matrix inductance;

    [[nodiscard]] Index size() const { return layout.size(); }
};

/// Assembles the conventional formulation with unknowns (e, i_L, i_V):
/// (i)  A_C C A_Cᵀ e′ + A_R g(A_Rᵀe) + A_L i_L + A_V i_V + A_I i_src(t)
/// (ii) L i_L′ − A_Lᵀ e
/// (iii) −A_Vᵀ e + v_src(t).
/// Requires linear storage banks; throws ModelError otherwise or on any
/// model/incidence dimension mismatch.
ImplicitDAE assemble_mna(const IncidenceDecomposition& inc, DeviceModels models);

/// Assembles the charge-flux formulation with unknowns (ψ, q_C, q_V):
/// (i)  A_R g(A_Rᵀψ′) + A_C q_C′ + A_V q_V′ + A_L ∇ε_L(A_Lᵀψ) + A_I i_src(t)
/// (ii) −A_Cᵀ ψ′ + ∇ε_C(q_C)
/// (iii) −A_Vᵀ ψ′ + v_src(t).
/// The conductance argument is the derivative ψ′.
ImplicitDAE assemble_mona(const IncidenceDecomposition& inc, DeviceModels models);

/// Residual F(t, x, x′). Sets *clamped when a diode exponent was clamped.
/// Throws SolverError when the result is not finite, naming the first
/// offending row.
Vector residual(const ImplicitDAE& dae, Real t, const Vector& x, const Vector& xdot,
                bool* clamped = nullptr);

/// Analytic Jacobians (∂F/∂x, ∂F/∂x′) at the given point.
std::pair<Matrix, Matrix> jacobians(const ImplicitDAE& dae, Real t, const Vector& x,
                                    const Vector& xdot);

/// Matrix pencil (E, A) = (∂F/∂x′, ∂F/∂x) of the linearization at the given
/// point (defaults: zero state and derivative). For linear circuits this is
/// the exact constant pencil E x′ + A x = b(t).
struct Pencil {
    Matrix E;
    Matrix A;
};
Pencil linearized_pencil(const ImplicitDAE& dae, Real t = 0.0, const Vector& x = Vector(),
                         const Vector& xdot = Vector());

/// Least-squares consistent derivative at (t0, x0): minimizes
/// ‖F(t0, x0, x′)‖ over x′ by Gauss–Newton on the x′-Jacobian. The state
/// counts as consistent when the minimized residual is ≤ 1e−10·(1+‖x0‖).
struct ConsistencyResult {
    bool consistent = false;
    Real residual_norm = 0.0;
    Vector xdot0;
};
ConsistencyResult check_consistency(const ImplicitDAE& dae, Real t0, const Vector& x0);

/// Electric quantities recovered from a charge-flux trajectory. Node
/// potentials are the solved derivative stages e_n = (ψ′)_n, never finite
/// differences of ψ. One row per sample.
struct ElectricReconstruction {
    Matrix e;      // node potentials
    Matrix phi_l;  // flux linkages A_Lᵀψ
    Matrix i_l;    // inductor currents ∇ε_L(A_Lᵀψ)
    Matrix v_c;    // capacitor voltages A_Cᵀψ′
    Matrix i_c;    // capacitor currents q_C′
    Matrix i_v;    // voltage-source currents q_V′
};
ElectricReconstruction reconstruct_electric(const ImplicitDAE& dae, const Trajectory& traj);

}  // namespace mona
