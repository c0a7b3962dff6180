#pragma once

#include <functional>
#include <string>

#include "mona/dae.hpp"
#include "mona/linalg.hpp"
#include "mona/trajectory.hpp"
#include "mona/types.hpp"

namespace mona {

/// Implicit one-step schemes supported by the fixed-step integrator.
enum class Scheme { ImplicitEuler, Trapezoidal };

std::string to_string(Scheme scheme);

/// Fixed-step integration settings. `startup_ie_steps` forces the first
/// few steps onto implicit Euler regardless of `scheme`, which damps the
/// derivative transients a trapezoidal start amplifies.
struct IntegratorConfig {
    Scheme scheme = Scheme::Trapezoidal;
    Real tau = 0.1;
    Real t_start = 0.0;
    Real t_end = 1.0;
    Real newton_tol = 1e-10;
    int newton_max_iter = 50;
    int startup_ie_steps = 0;
    bool strict = true;  // abort the run on a failed step instead of keeping the iterate
};

using ResidualMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<Matrix(const Vector&)>;

/// Outcome of a Newton iteration; `x` is the last iterate even on failure.
struct NewtonResult {
    enum class Status { Converged, MaxIterations, SingularJacobian, EvaluationFailure };

    Vector x;
    int iterations = 0;
    Real residual_norm = 0.0;
    Status status = Status::Converged;
    std::string message;

    [[nodiscard]] bool converged() const { return status == Status::Converged; }
};

/// Full-step Newton until ‖F(x)‖ ≤ tol·(1+‖x‖); never throws — failures are
/// reported in the result so callers can keep the last iterate.
NewtonResult newton_iterate(const ResidualMap& f, const JacobianMap& j, const Vector& guess,
                            Real tol = 1e-10, int max_iter = 50);

/// Throwing wrapper around newton_iterate for callers that need the root.
NewtonResult newton_solve(const ResidualMap& f, const JacobianMap& j, const Vector& guess,
                          Real tol = 1e-10, int max_iter = 50);

/// One accepted (or attempted) implicit step; `xdot` is the stage derivative
/// the scheme committed to, `clamped` reports any exponent clamp on the way.
struct StepResult {
    Vector x;
    Vector xdot;
    NewtonResult newton;
    bool clamped = false;
};

/// Advance one step without throwing; Newton failures are left in `newton`.
StepResult step_core(const ImplicitDAE& dae, Scheme scheme, Real t_n, const Vector& x_n,
                     const Vector& xdot_n, Real tau, Real newton_tol = 1e-10,
                     int newton_max_iter = 50);

/// Advance one step; throws SolverError when the stage solve fails.
StepResult step(const ImplicitDAE& dae, Scheme scheme, Real t_n, const Vector& x_n,
                const Vector& xdot_n, Real tau, Real newton_tol = 1e-10,
                int newton_max_iter = 50);

/// Integrate from x0 over the uniform grid t_n = t_start + n·τ. The initial
/// derivative row comes from check_consistency (the trapezoidal stage needs
/// it; an inconsistent x0 is deliberately kept, not repaired).
Trajectory simulate(const ImplicitDAE& dae, const IntegratorConfig& config, const Vector& x0);

/// Differentiation index of the regular pencil λE + A by the shuffle
/// algorithm: row-rotate E to expose its algebraic rows, replace them with
/// the matching rows of A (differentiation), repeat until E is regular.
/// Throws SolverError when the pencil is not regular.
int numerical_index(const Matrix& e, const Matrix& a, Real tol = kRankTolerance);

}  // namespace mona
