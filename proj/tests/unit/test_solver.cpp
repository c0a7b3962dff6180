#include <doctest.h>

#include <cmath>

#include "mona/dae.hpp"
#include "mona/errors.hpp"
#include "mona/netlist.hpp"
#include "mona/solver.hpp"
#include "mona/topology.hpp"

using namespace mona;

namespace {

const char* kLadder =
    "V1 1 0 sin 1 pi\n"
    "R1 1 0 1\n"
    "C1 1 2 1\n"
    "R2 2 0 1\n"
    "C2 2 0 1\n"
    "R3 2 3 1\n"
    "C3 3 0 1\n";

const char* kRectifier =
    "V1 1 0 sin 1 pi\n"
    "L1 1 0 27.46e-6\n"
    "L2 2 3 27.75e-6\n"
    "K1 L1 L2 27.57e-6\n"
    "D1 0 2 2.5 4\n"
    "D2 2 4 2.5 4\n"
    "D3 0 3 2.5 4\n"
    "D4 3 4 2.5 4\n"
    "R1 4 0 1\n";

// Parallel RC with unit values: the node potential obeys e′ = −e.
const char* kUnitRc =
    "C1 1 0 1\n"
    "R1 1 0 1\n";

// Driven series RC: index-1, smooth solution, used for order studies.
const char* kDrivenRc =
    "V1 1 0 sin 1 1\n"
    "R1 1 2 1\n"
    "C1 2 0 1\n";

// A current source feeding a dead-end node: every iteration matrix is 0.
const char* kBareSource = "I1 1 0 dc 1\n";

struct Assembled {
    IncidenceDecomposition inc;
    DeviceModels models;
};

Assembled prepare(const char* text) {
    const CircuitGraph graph = build_graph(parse_netlist(text));
    return {build_incidence(graph), build_models(graph)};
}

ImplicitDAE mna_of(const char* text) {
    const Assembled a = prepare(text);
    return assemble_mna(a.inc, a.models);
}

ImplicitDAE mona_of(const char* text) {
    const Assembled a = prepare(text);
    return assemble_mona(a.inc, a.models);
}

/// Fraction of first differences with the opposite sign to both neighbors:
/// zigzag density. An isolated turning point of a smooth series scores 0.
Real alternation_fraction(const Vector& series) {
    Index interior = 0;
    Index alternating = 0;
    for (Index i = 0; i + 3 < series.size(); ++i) {
        const Real d0 = series(i + 1) - series(i);
        const Real d1 = series(i + 2) - series(i + 1);
        const Real d2 = series(i + 3) - series(i + 2);
        ++interior;
        if (d0 * d1 < 0.0 && d1 * d2 < 0.0) ++alternating;
    }
    return interior > 0 ? static_cast<Real>(alternating) / static_cast<Real>(interior) : 0.0;
}

Vector column_of(const ImplicitDAE& dae, const Matrix& rows, Index source_component) {
    Vector series(rows.rows());
    for (Index n = 0; n < rows.rows(); ++n) {
        const Vector x = rows.row(n).transpose();
        series(n) = dae.layout.source_block(x)(source_component);
    }
    return series;
}

}  // namespace

TEST_CASE("scheme names match the CLI vocabulary") {
    CHECK(to_string(Scheme::ImplicitEuler) == "ie");
    CHECK(to_string(Scheme::Trapezoidal) == "tr");
}

TEST_CASE("newton solves a linear system in one iteration") {
    Matrix m(2, 2);
    m << 4.0, 1.0, 1.0, 3.0;
    Vector b(2);
    b << 1.0, 2.0;
    const ResidualMap f = [&](const Vector& x) { return Vector(m * x - b); };
    const JacobianMap j = [&](const Vector&) { return m; };

    const NewtonResult result = newton_solve(f, j, Vector::Zero(2));
    CHECK(result.iterations == 1);
    CHECK((m * result.x - b).norm() <= 1e-12);
}

TEST_CASE("newton finds the scalar logarithm") {
    const ResidualMap f = [](const Vector& x) {
        Vector r(1);
        r(0) = std::exp(x(0)) - 2.0;
        return r;
    };
    const JacobianMap j = [](const Vector& x) {
        Matrix m(1, 1);
        m(0, 0) = std::exp(x(0));
        return m;
    };

    const NewtonResult result = newton_solve(f, j, Vector::Zero(1));
    CHECK(result.x(0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(result.iterations <= 10);
}

TEST_CASE("newton reports a singular iteration matrix") {
    const ResidualMap f = [](const Vector& x) {
        Vector r(1);
        r(0) = x(0) * x(0) + 1.0;
        return r;
    };
    const JacobianMap j = [](const Vector& x) {
        Matrix m(1, 1);
        m(0, 0) = 2.0 * x(0);
        return m;
    };

    const NewtonResult outcome = newton_iterate(f, j, Vector::Zero(1));
    CHECK(outcome.status == NewtonResult::Status::SingularJacobian);
    CHECK(outcome.x(0) == 0.0);  // last iterate kept
    CHECK_THROWS_AS(newton_solve(f, j, Vector::Zero(1)), SolverError);
}

TEST_CASE("newton reports iteration exhaustion with the last residual") {
    const ResidualMap f = [](const Vector& x) {
        Vector r(1);
        r(0) = std::exp(x(0)) - 2.0;
        return r;
    };
    const JacobianMap j = [](const Vector& x) {
        Matrix m(1, 1);
        m(0, 0) = std::exp(x(0));
        return m;
    };

    const NewtonResult outcome = newton_iterate(f, j, Vector::Zero(1), 1e-10, 1);
    CHECK(outcome.status == NewtonResult::Status::MaxIterations);
    CHECK(outcome.residual_norm > 0.0);
    CHECK_THROWS_WITH_AS(newton_solve(f, j, Vector::Zero(1), 1e-10, 1),
                         doctest::Contains("no convergence within 1"), SolverError);
}

TEST_CASE("implicit euler reproduces the parallel-RC closed form") {
    const Real tau = 0.1;

    SUBCASE("conventional unknowns") {
        const ImplicitDAE dae = mna_of(kUnitRc);
        Vector x(1);
        x << 1.0;
        const StepResult r = step(dae, Scheme::ImplicitEuler, 0.0, x, Vector(), tau);
        CHECK(r.x(0) == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
        CHECK(r.xdot(0) == doctest::Approx((r.x(0) - 1.0) / tau).epsilon(1e-12));

        Vector state = x;
        for (int n = 0; n < 10; ++n)
            state = step(dae, Scheme::ImplicitEuler, n * tau, state, Vector(), tau).x;
        CHECK(state(0) == doctest::Approx(std::pow(1.0 / 1.1, 10)).epsilon(1e-12));
    }

    SUBCASE("charge-flux unknowns") {
        const ImplicitDAE dae = mona_of(kUnitRc);
        Vector x(2);
        x << 0.0, 1.0;  // zero flux potential, unit charge = unit voltage
        const StepResult r = step(dae, Scheme::ImplicitEuler, 0.0, x, Vector(), tau);
        CHECK(dae.layout.storage_block(r.x)(0) == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
        // The reconstructed potential is the stage derivative of the flux row.
        CHECK(dae.layout.node_block(r.xdot)(0) == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
    }
}

TEST_CASE("trapezoidal rule reproduces the parallel-RC closed form") {
    const Real tau = 0.1;
    const Real growth = (1.0 - tau / 2.0) / (1.0 + tau / 2.0);

    SUBCASE("conventional unknowns") {
        const ImplicitDAE dae = mna_of(kUnitRc);
        Vector x(1);
        x << 1.0;
        const Vector xdot0 = check_consistency(dae, 0.0, x).xdot0;
        CHECK(xdot0(0) == doctest::Approx(-1.0).epsilon(1e-10));

        const StepResult r = step(dae, Scheme::Trapezoidal, 0.0, x, xdot0, tau);
        CHECK(r.x(0) == doctest::Approx(growth).epsilon(1e-12));
    }

    SUBCASE("charge-flux unknowns") {
        const ImplicitDAE dae = mona_of(kUnitRc);
        Vector x(2);
        x << 0.0, 1.0;
        const Vector xdot0 = check_consistency(dae, 0.0, x).xdot0;
        const StepResult r = step(dae, Scheme::Trapezoidal, 0.0, x, xdot0, tau);
        CHECK(dae.layout.storage_block(r.x)(0) == doctest::Approx(growth).epsilon(1e-12));
        CHECK(dae.layout.node_block(r.xdot)(0) == doctest::Approx(growth).epsilon(1e-12));
    }
}

TEST_CASE("first trapezoidal stage honors the source row") {
    const Real tau = 0.1;

    const ImplicitDAE mona = mona_of(kLadder);
    const Vector zero7 = Vector::Zero(7);
    const Vector xdot0 = check_consistency(mona, 0.0, zero7).xdot0;
    const StepResult r = step(mona, Scheme::Trapezoidal, 0.0, zero7, xdot0, tau);
    CHECK(mona.layout.node_block(r.xdot)(0) ==
          doctest::Approx(std::sin(0.1 * std::acos(-1.0))).epsilon(1e-9));

    const ImplicitDAE mna = mna_of(kLadder);
    const Vector zero4 = Vector::Zero(4);
    const StepResult s =
        step(mna, Scheme::Trapezoidal, 0.0, zero4, check_consistency(mna, 0.0, zero4).xdot0, tau);
    CHECK(mna.layout.node_block(s.x)(0) ==
          doctest::Approx(std::sin(0.1 * std::acos(-1.0))).epsilon(1e-9));
}

TEST_CASE("step validates its inputs") {
    const ImplicitDAE dae = mna_of(kUnitRc);
    Vector x(1);
    x << 1.0;
    CHECK_THROWS_AS(step(dae, Scheme::ImplicitEuler, 0.0, x, Vector(), 0.0), SolverError);
    CHECK_THROWS_AS(step(dae, Scheme::ImplicitEuler, 0.0, Vector::Zero(3), Vector(), 0.1),
                    SolverError);
    CHECK_THROWS_AS(step(dae, Scheme::Trapezoidal, 0.0, x, Vector(), 0.1), SolverError);
}

TEST_CASE("simulate leaves an unexcited circuit at rest") {
    const char* text =
        "R1 1 0 1\n"
        "C1 1 2 1\n"
        "L1 2 0 1\n";
    for (const Scheme scheme : {Scheme::ImplicitEuler, Scheme::Trapezoidal}) {
        IntegratorConfig config;
        config.scheme = scheme;
        config.tau = 0.1;
        config.t_end = 1.0;

        const ImplicitDAE mna = mna_of(text);
        const Trajectory a = simulate(mna, config, Vector::Zero(mna.size()));
        CHECK(a.num_samples() == 11);
        CHECK(a.states.cwiseAbs().maxCoeff() <= 1e-14);

        const ImplicitDAE mona = mona_of(text);
        const Trajectory b = simulate(mona, config, Vector::Zero(mona.size()));
        CHECK(b.states.cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(b.derivatives.cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("simulate builds the uniform grid that covers the end time") {
    const ImplicitDAE dae = mna_of(kUnitRc);
    Vector x0(1);
    x0 << 1.0;

    IntegratorConfig config;
    config.scheme = Scheme::ImplicitEuler;

    config.tau = 0.1;
    config.t_end = 1.0;
    Trajectory traj = simulate(dae, config, x0);
    CHECK(traj.num_samples() == 11);
    CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(static_cast<Index>(traj.newton_iterations.size()) == traj.num_samples() - 1);
    for (Index n = 0; n < traj.num_samples(); ++n)
        CHECK(traj.times[static_cast<std::size_t>(n)] ==
              doctest::Approx(0.1 * static_cast<Real>(n)).epsilon(1e-12));

    config.tau = 0.3;  // does not divide the horizon: final step passes t_end
    traj = simulate(dae, config, x0);
    CHECK(traj.num_samples() == 5);
    CHECK(traj.times.back() == doctest::Approx(1.2).epsilon(1e-12));

    config.tau = 0.25;  // divides exactly: no overshoot step
    traj = simulate(dae, config, x0);
    CHECK(traj.num_samples() == 5);
    CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simulate rejects degenerate configurations") {
    const ImplicitDAE dae = mna_of(kUnitRc);
    const Vector x0 = Vector::Ones(1);

    IntegratorConfig config;
    config.tau = 0.0;
    CHECK_THROWS_AS(simulate(dae, config, x0), SolverError);
    config.tau = 0.1;
    config.t_end = 0.0;
    CHECK_THROWS_AS(simulate(dae, config, x0), SolverError);
    config.t_end = 1.0;
    config.newton_tol = 0.0;
    CHECK_THROWS_AS(simulate(dae, config, x0), SolverError);
    config.newton_tol = 1e-10;
    config.newton_max_iter = 0;
    CHECK_THROWS_AS(simulate(dae, config, x0), SolverError);
    config.newton_max_iter = 50;
    config.startup_ie_steps = -1;
    CHECK_THROWS_AS(simulate(dae, config, x0), SolverError);
    config.startup_ie_steps = 0;
    CHECK_THROWS_AS(simulate(dae, config, Vector::Zero(2)), SolverError);
}

TEST_CASE("every accepted stage satisfies the full residual") {
    IntegratorConfig config;
    config.scheme = Scheme::Trapezoidal;
    config.tau = 0.1;
    config.t_end = 2.0;

    for (const ImplicitDAE& dae : {mna_of(kLadder), mona_of(kLadder)}) {
        const Trajectory traj = simulate(dae, config, Vector::Zero(dae.size()));
        REQUIRE(!traj.aborted);
        for (Index n = 1; n < traj.num_samples(); ++n) {
            const Vector x = traj.states.row(n).transpose();
            const Vector xdot = traj.derivatives.row(n).transpose();
            const Vector f = residual(dae, traj.times[static_cast<std::size_t>(n)], x, xdot);
            CHECK(f.norm() <= config.newton_tol * (1.0 + x.norm()));
        }
    }
}

TEST_CASE("algebraic source current oscillates in one formulation only") {
    IntegratorConfig config;
    config.scheme = Scheme::Trapezoidal;
    config.tau = 0.1;
    config.t_end = 10.0;

    const ImplicitDAE mna = mna_of(kLadder);
    const Trajectory a = simulate(mna, config, Vector::Zero(mna.size()));
    REQUIRE(!a.aborted);
    const Vector i_v_mna = column_of(mna, a.states, 0);
    const Index half = a.num_samples() / 2;
    CHECK(alternation_fraction(i_v_mna.tail(a.num_samples() - half)) > 0.5);

    const ImplicitDAE mona = mona_of(kLadder);
    const Trajectory b = simulate(mona, config, Vector::Zero(mona.size()));
    REQUIRE(!b.aborted);
    // The charge-flux image of the source current is the solved q̇_V stage.
    const Vector i_v_mona = column_of(mona, b.derivatives, 0);
    CHECK(alternation_fraction(i_v_mona.tail(b.num_samples() - half)) < 0.1);
}

TEST_CASE("startup option runs the first stages on implicit euler") {
    const ImplicitDAE dae = mna_of(kLadder);
    const Vector x0 = Vector::Zero(dae.size());

    IntegratorConfig mixed;
    mixed.scheme = Scheme::Trapezoidal;
    mixed.tau = 0.1;
    mixed.t_end = 1.0;
    mixed.startup_ie_steps = 1;

    IntegratorConfig euler = mixed;
    euler.scheme = Scheme::ImplicitEuler;
    euler.startup_ie_steps = 0;

    const Trajectory a = simulate(dae, mixed, x0);
    const Trajectory b = simulate(dae, euler, x0);
    CHECK((a.states.row(1) - b.states.row(1)).norm() <= 1e-12);   // same first step
    CHECK((a.states.row(2) - b.states.row(2)).norm() > 1e-8);     // then schemes diverge
}

TEST_CASE("strict runs abort on a failed stage and keep the prefix") {
    const ImplicitDAE dae = mna_of(kRectifier);

    IntegratorConfig config;
    config.scheme = Scheme::Trapezoidal;
    config.tau = 0.1;
    config.t_end = 1.0;
    config.newton_max_iter = 1;  // one update cannot resolve the diode branch laws

    const Trajectory strict = simulate(dae, config, Vector::Zero(dae.size()));
    CHECK(strict.aborted);
    CHECK(strict.abort_time == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(strict.num_samples() == 1);
    CHECK(strict.times.size() == 1);

    config.strict = false;
    const Trajectory tolerant = simulate(dae, config, Vector::Zero(dae.size()));
    CHECK(!tolerant.aborted);
    CHECK(tolerant.num_samples() == 11);
    CHECK(!tolerant.failed_steps.empty());
    CHECK(tolerant.failed_steps.front() == 1);
}

TEST_CASE("a structurally singular iteration matrix is reported") {
    const ImplicitDAE dae = mna_of(kBareSource);
    Vector x0(1);
    x0 << 0.0;
    CHECK_THROWS_WITH_AS(step(dae, Scheme::ImplicitEuler, 0.0, x0, Vector(), 0.1),
                         doctest::Contains("singular"), SolverError);

    IntegratorConfig config;
    config.scheme = Scheme::ImplicitEuler;
    config.tau = 0.1;
    config.t_end = 1.0;
    const Trajectory traj = simulate(dae, config, x0);
    CHECK(traj.aborted);
    CHECK(traj.abort_time == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("scheme orders observed against a refined reference") {
    const ImplicitDAE dae = mna_of(kDrivenRc);
    const Vector x0 = Vector::Zero(dae.size());

    const auto terminal_error = [&](Scheme scheme, Real tau) {
        IntegratorConfig config;
        config.scheme = scheme;
        config.tau = tau;
        config.t_end = 1.0;
        const Trajectory coarse = simulate(dae, config, x0);
        config.tau = tau / 64.0;
        const Trajectory fine = simulate(dae, config, x0);
        const Vector xc = coarse.states.row(coarse.num_samples() - 1).transpose();
        const Vector xf = fine.states.row(fine.num_samples() - 1).transpose();
        return (dae.layout.node_block(xc) - dae.layout.node_block(xf)).norm();
    };

    const Real ie_order =
        std::log2(terminal_error(Scheme::ImplicitEuler, 0.05) /
                  terminal_error(Scheme::ImplicitEuler, 0.025));
    CHECK(ie_order == doctest::Approx(1.0).epsilon(0.2));

    const Real tr_order =
        std::log2(terminal_error(Scheme::Trapezoidal, 0.05) /
                  terminal_error(Scheme::Trapezoidal, 0.025));
    CHECK(tr_order == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("shuffle index of canonical pencils") {
    const Matrix identity = Matrix::Identity(2, 2);
    CHECK(numerical_index(identity, identity) == 0);

    Matrix semi = Matrix::Zero(2, 2);
    semi(0, 0) = 1.0;
    CHECK(numerical_index(semi, identity) == 1);

    Matrix nilpotent = Matrix::Zero(2, 2);
    nilpotent(1, 0) = 1.0;  // x₁ algebraic, its derivative feeds the second row
    CHECK(numerical_index(nilpotent, identity) == 2);

    CHECK(numerical_index(Matrix::Identity(1, 1), 5.0 * Matrix::Identity(1, 1)) == 0);
    CHECK(numerical_index(Matrix(0, 0), Matrix(0, 0)) == 0);

    Matrix defective = Matrix::Zero(2, 2);
    defective(0, 0) = 1.0;
    CHECK_THROWS_WITH_AS(numerical_index(Matrix::Zero(2, 2), defective),
                         doctest::Contains("not regular"), SolverError);
    CHECK_THROWS_AS(numerical_index(Matrix::Zero(2, 3), Matrix::Zero(2, 3)), SolverError);
}

TEST_CASE("shuffle index agrees with the topological prediction") {
    const struct {
        const char* text;
        Formulation formulation;
    } cases[] = {
        {kLadder, Formulation::Mna},
        {kLadder, Formulation::Mona},
        {kRectifier, Formulation::Mna},
        {kRectifier, Formulation::Mona},
    };

    for (const auto& c : cases) {
        const Assembled a = prepare(c.text);
        const ImplicitDAE dae = c.formulation == Formulation::Mna
                                    ? assemble_mna(a.inc, a.models)
                                    : assemble_mona(a.inc, a.models);
        const Pencil pencil = linearized_pencil(dae);
        const IndexPrediction predicted = predict_index(check_conditions(a.inc), c.formulation);
        CHECK(numerical_index(pencil.E, pencil.A) == predicted.predicted_index);
    }
}
