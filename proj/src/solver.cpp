#include "mona/solver.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>

#include "mona/errors.hpp"

namespace mona {

namespace {

std::string format_real(Real value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.3g", value);
    return buffer;
}

}  // namespace

std::string to_string(Scheme scheme) {
    return scheme == Scheme::ImplicitEuler ? "ie" : "tr";
}

NewtonResult newton_iterate(const ResidualMap& f, const JacobianMap& j, const Vector& guess,
                            Real tol, int max_iter) {
    NewtonResult result;
    result.x = guess;
    try {
        for (result.iterations = 0; result.iterations <= max_iter; ++result.iterations) {
            const Vector fx = f(result.x);
            result.residual_norm = fx.norm();
            if (result.residual_norm <= tol * (1.0 + result.x.norm())) return result;
            if (result.iterations == max_iter) break;

            Eigen::FullPivLU<Matrix> lu(j(result.x));
            lu.setThreshold(kRankTolerance);
            if (!lu.isInvertible()) {
                result.status = NewtonResult::Status::SingularJacobian;
                result.message = "singular iteration matrix after " +
                                 std::to_string(result.iterations) + " update(s), residual " +
                                 format_real(result.residual_norm);
                return result;
            }
            result.x -= lu.solve(fx);
        }
        result.status = NewtonResult::Status::MaxIterations;
        result.message = "no convergence within " + std::to_string(max_iter) +
                         " iterations, residual " + format_real(result.residual_norm);
    } catch (const std::exception& failure) {
        result.status = NewtonResult::Status::EvaluationFailure;
        result.message = failure.what();
    }
    return result;
}

NewtonResult newton_solve(const ResidualMap& f, const JacobianMap& j, const Vector& guess,
                          Real tol, int max_iter) {
    NewtonResult result = newton_iterate(f, j, guess, tol, max_iter);
    if (!result.converged()) throw SolverError("newton solve failed: " + result.message);
    return result;
}

StepResult step_core(const ImplicitDAE& dae, Scheme scheme, Real t_n, const Vector& x_n,
                     const Vector& xdot_n, Real tau, Real newton_tol, int newton_max_iter) {
    if (!(tau > 0.0)) throw SolverError("step size must be positive");
    if (x_n.size() != dae.size()) throw SolverError("state has wrong dimension");
    if (scheme == Scheme::Trapezoidal && xdot_n.size() != dae.size())
        throw SolverError("trapezoidal step needs the previous stage derivative");

    const Real t_next = t_n + tau;
    const Real shift = scheme == Scheme::ImplicitEuler ? 1.0 / tau : 2.0 / tau;
    const auto stage_derivative = [&](const Vector& x) -> Vector {
        if (scheme == Scheme::ImplicitEuler) return (x - x_n) / tau;
        return (2.0 / tau) * (x - x_n) - xdot_n;
    };

    StepResult result;
    const ResidualMap f = [&](const Vector& x) {
        bool clamped = false;
        Vector r = residual(dae, t_next, x, stage_derivative(x), &clamped);
        result.clamped = result.clamped || clamped;
        return r;
    };
    const JacobianMap jac = [&](const Vector& x) {
        const auto [j_x, j_xdot] = jacobians(dae, t_next, x, stage_derivative(x));
        return Matrix(j_x + shift * j_xdot);
    };

    result.newton = newton_iterate(f, jac, x_n, newton_tol, newton_max_iter);
    result.x = result.newton.x;
    result.xdot = stage_derivative(result.x);
    return result;
}

StepResult step(const ImplicitDAE& dae, Scheme scheme, Real t_n, const Vector& x_n,
                const Vector& xdot_n, Real tau, Real newton_tol, int newton_max_iter) {
    StepResult result =
        step_core(dae, scheme, t_n, x_n, xdot_n, tau, newton_tol, newton_max_iter);
    if (!result.newton.converged())
        throw SolverError("step to t = " + format_real(t_n + tau) + " failed: " +
                          result.newton.message);
    return result;
}

Trajectory simulate(const ImplicitDAE& dae, const IntegratorConfig& config, const Vector& x0) {
    if (!(config.tau > 0.0)) throw SolverError("step size must be positive");
    if (!(config.t_end > config.t_start)) throw SolverError("end time must exceed start time");
    if (!(config.newton_tol > 0.0)) throw SolverError("newton tolerance must be positive");
    if (config.newton_max_iter <= 0) throw SolverError("newton iteration cap must be positive");
    if (config.startup_ie_steps < 0) throw SolverError("startup step count must be nonnegative");
    if (x0.size() != dae.size()) throw SolverError("initial state has wrong dimension");

    const auto steps = static_cast<Index>(
        std::ceil((config.t_end - config.t_start) / config.tau - 1e-9));

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(steps + 1, dae.size());
    traj.derivatives.resize(steps + 1, dae.size());
    traj.newton_iterations.reserve(steps);

    const ConsistencyResult initial = check_consistency(dae, config.t_start, x0);
    traj.times[0] = config.t_start;
    traj.states.row(0) = x0.transpose();
    traj.derivatives.row(0) = initial.xdot0.transpose();

    Vector x = x0;
    Vector xdot = initial.xdot0;
    Index n = 0;
    for (; n < steps; ++n) {
        const Real t_n = config.t_start + static_cast<Real>(n) * config.tau;
        const Scheme scheme =
            n < config.startup_ie_steps ? Scheme::ImplicitEuler : config.scheme;
        const StepResult r = step_core(dae, scheme, t_n, x, xdot, config.tau,
                                       config.newton_tol, config.newton_max_iter);
        traj.clamp_activated = traj.clamp_activated || r.clamped;
        if (!r.newton.converged()) {
            if (config.strict) {
                traj.aborted = true;
                traj.abort_time = t_n + config.tau;
                break;
            }
            traj.failed_steps.push_back(n + 1);
        }
        x = r.x;
        xdot = r.xdot;
        traj.times[n + 1] = config.t_start + static_cast<Real>(n + 1) * config.tau;
        traj.states.row(n + 1) = x.transpose();
        traj.derivatives.row(n + 1) = xdot.transpose();
        traj.newton_iterations.push_back(r.newton.iterations);
    }
    if (traj.aborted) {
        traj.times.resize(n + 1);
        traj.states.conservativeResize(n + 1, Eigen::NoChange);
        traj.derivatives.conservativeResize(n + 1, Eigen::NoChange);
    }
    return traj;
}

int numerical_index(const Matrix& e, const Matrix& a, Real tol) {
    if (e.rows() != e.cols() || a.rows() != a.cols() || e.rows() != a.rows())
        throw SolverError("pencil matrices must be square and equally sized");
    const Index n = e.rows();
    if (n == 0) return 0;

    Matrix lead = e;
    Matrix trail = a;
    for (int shuffles = 0; shuffles <= static_cast<int>(n) + 1; ++shuffles) {
        // Row equilibration: a left diagonal scaling never changes the index
        // but keeps rank decisions meaningful when henry-scale storage rows
        // meet siemens-scale conductance rows.
        for (Index row = 0; row < n; ++row) {
            const Real scale = std::max(lead.row(row).cwiseAbs().maxCoeff(),
                                        trail.row(row).cwiseAbs().maxCoeff());
            if (scale > 0.0) {
                lead.row(row) /= scale;
                trail.row(row) /= scale;
            }
        }

        Eigen::JacobiSVD<Matrix> svd(lead, Eigen::ComputeFullU);
        const Vector& sigma = svd.singularValues();
        const Real sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
        Index rank = 0;
        for (Index i = 0; i < sigma.size(); ++i)
            if (sigma(i) > tol * sigma_max) ++rank;
        if (rank == n) return shuffles;

        // Rotate the algebraic rows to the bottom, then differentiate them:
        // their lead part becomes the matching trail rows, their trail part 0.
        const Matrix rotated_lead = svd.matrixU().transpose() * lead;
        const Matrix rotated_trail = svd.matrixU().transpose() * trail;
        lead.topRows(rank) = rotated_lead.topRows(rank);
        lead.bottomRows(n - rank) = rotated_trail.bottomRows(n - rank);
        trail.topRows(rank) = rotated_trail.topRows(rank);
        trail.bottomRows(n - rank).setZero();
    }
    throw SolverError("pencil is not regular: shuffle reduction did not terminate");
}

}  // namespace mona
