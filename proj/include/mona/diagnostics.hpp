#pragma once

#include <vector>

#include "mona/dae.hpp"
#include "mona/solver.hpp"
#include "mona/trajectory.hpp"
#include "mona/types.hpp"

namespace mona {

/// Discrete energy bookkeeping along a trajectory. Stored energy, dissipated
/// power, and source power are sampled at every accepted stage; the balance
/// residual is one entry per step.
struct EnergyReport {
    Vector stored;            // ε_L + ε_C at each sample
    Vector dissipation;       // ⟨g(v_R), v_R⟩ at each sample's stage values
    Vector source_power;      // ⟨A_Iᵀe, i_src⟩ + ⟨i_V, v_src⟩ at each sample
    Vector balance_residual;  // per step: Δε + step quadrature of the flows
};

/// Energy balance of a simulated trajectory. The step quadrature matches the
/// integrator: right endpoint for implicit Euler, trapezoid for the
/// trapezoidal rule; the first startup_ie_steps steps always use the
/// right-endpoint rule. Conventional-formulation energy goes through the
/// linear forward maps q = C·v_C and φ = L·i_L, so it requires linear
/// storage banks (ModelError otherwise).
EnergyReport energy_balance(const ImplicitDAE& dae, const Trajectory& traj, Scheme scheme,
                            Index startup_ie_steps = 0);

/// Observables every formulation can produce, one row per sample: node
/// potentials, inductor currents, voltage-source currents. Charge-flux
/// trajectories map through e = ψ′, i_L = ∇ε_L(A_Lᵀψ), i_V = q_V′.
struct ObservableSeries {
    Matrix e;
    Matrix i_l;
    Matrix i_v;
};
ObservableSeries extract_observables(const ImplicitDAE& dae, const Trajectory& traj);

/// Differences of two runs of the same circuit mapped to the common
/// observables. Max entries are componentwise max-norms over time.
struct ComparisonReport {
    Vector e_max;    // one entry per node
    Vector i_l_max;  // one entry per inductor
    Vector i_v_max;  // one entry per voltage source
    Matrix e_diff;   // full difference series, one row per sample
    Matrix i_l_diff;
    Matrix i_v_diff;
};

/// Compares two trajectories observable-by-observable. Throws SolverError
/// when the time grids differ or the observable shapes do not match.
ComparisonReport compare_trajectories(const ImplicitDAE& dae_a, const Trajectory& traj_a,
                                      const ImplicitDAE& dae_b, const Trajectory& traj_b);

/// Least-squares slope of log(error) against log(τ): the observed
/// convergence order of a step-size study. Throws SolverError unless both
/// lists have the same length ≥ 2 and strictly positive entries.
Real estimate_order(const std::vector<Real>& taus, const std::vector<Real>& errors);

/// Zigzag statistics of a sampled series. alternation_fraction is the
/// fraction of first differences opposed in sign to both neighbors: an
/// isolated turning point of a smooth series scores 0, a (−1)ⁿ parasite
/// scores 1. amplitude is the median |first difference| over the second half
/// of the series. Throws SolverError for series shorter than 3.
struct OscillationMetric {
    Real alternation_fraction = 0.0;
    Real amplitude = 0.0;
};
OscillationMetric oscillation_metric(const Vector& series);

}  // namespace mona
