#include "mona/dae.hpp"

#include <cmath>

#include "mona/errors.hpp"
#include "mona/linalg.hpp"

namespace mona {

namespace {

void validate_dimensions(const IncidenceDecomposition& inc, const DeviceModels& models) {
    if (models.num_resistive() != inc.A_R.cols())
        throw ModelError("resistive model count does not match the incidence block");
    if (static_cast<Index>(models.vsrc.size()) != inc.A_V.cols())
        throw ModelError("voltage-source count does not match the incidence block");
    if (static_cast<Index>(models.isrc.size()) != inc.A_I.cols())
        throw ModelError("current-source count does not match the incidence block");
    if (const auto* cap = std::get_if<LinearStorage>(&models.capacitive))
        if (cap->storage.rows() != inc.A_C.cols())
            throw ModelError("capacitance matrix size does not match the incidence block");
    if (const auto* ind = std::get_if<LinearStorage>(&models.inductive))
        if (ind->storage.rows() != inc.A_L.cols())
            throw ModelError("inductance matrix size does not match the incidence block");
}

ImplicitDAE assemble_common(Formulation formulation, const IncidenceDecomposition& inc,
                            DeviceModels models) {
    validate_dimensions(inc, models);

    ImplicitDAE dae;
    dae.formulation = formulation;
    dae.models = std::move(models);
    dae.a_c = inc.A_C.cast<Real>();
    dae.a_l = inc.A_L.cast<Real>();
    dae.a_r = inc.A_R.cast<Real>();
    dae.a_v = inc.A_V.cast<Real>();
    dae.a_i = inc.A_I.cast<Real>();

    UnknownLayout& layout = dae.layout;
    layout.formulation = formulation;
    layout.nodes = inc.num_nodes();
    layout.sources = inc.A_V.cols();
    const std::string node_prefix = formulation == Formulation::Mna ? "e_" : "psi_";
    for (const auto& node : inc.nodes) layout.names.push_back(node_prefix + node);
    if (formulation == Formulation::Mna) {
        layout.storage = inc.A_L.cols();
        for (const auto& name : inc.ind_names) layout.names.push_back("i_" + name);
        for (const auto& name : inc.vsrc_names) layout.names.push_back("i_" + name);
    } else {
        layout.storage = inc.A_C.cols();
        for (const auto& name : inc.cap_names) layout.names.push_back("q_" + name);
        for (const auto& name : inc.vsrc_names) layout.names.push_back("q_" + name);
    }
    return dae;
}

}  // namespace

ImplicitDAE assemble_mna(const IncidenceDecomposition& inc, DeviceModels models) {
    if (!has_linear_storage(models))
        throw ModelError(
            "conventional formulation requires linear storage banks "
            "(differential storage matrices and forward maps)");

    ImplicitDAE dae = assemble_common(Formulation::Mna, inc, std::move(models));
    const Matrix& c = std::get<LinearStorage>(dae.models.capacitive).storage;
    dae.node_mass = dae.a_c * c * dae.a_c.transpose();
    dae.inductance = std::get<LinearStorage>(dae.models.inductive).storage;
    return dae;
}

ImplicitDAE assemble_mona(const IncidenceDecomposition& inc, DeviceModels models) {
    return assemble_common(Formulation::Mona, inc, std::move(models));
}

namespace {

void require_sizes(const ImplicitDAE& dae, const Vector& x, const Vector& xdot) {
    if (x.size() != dae.size() || xdot.size() != dae.size())
        throw SolverError("state/derivative size does not match the unknown layout");
}

void require_finite(const ImplicitDAE& dae, const Vector& f) {
    if (f.allFinite()) return;
    for (Index i = 0; i < f.size(); ++i)
        if (!std::isfinite(f(i)))
            throw SolverError("non-finite residual in row " + std::to_string(i) + " (" +
                              dae.layout.names[static_cast<std::size_t>(i)] + " equation)");
}

Vector residual_mna(const ImplicitDAE& dae, Real t, const Vector& x, const Vector& xdot,
                    bool* clamped) {
    const auto& layout = dae.layout;
    const auto e = layout.node_block(x);
    const auto i_l = layout.storage_block(x);
    const auto i_v = layout.source_block(x);

    Vector f(dae.size());
    layout.node_block(f) = dae.node_mass * layout.node_block(xdot) +
                           dae.a_r * eval_conductance_current(dae.models, dae.a_r.transpose() * e,
                                                              clamped) +
                           dae.a_l * i_l + dae.a_v * i_v + dae.a_i * dae.models.i_src(t);
    layout.storage_block(f) =
        dae.inductance * layout.storage_block(xdot) - dae.a_l.transpose() * e;
    layout.source_block(f) = -dae.a_v.transpose() * e + dae.models.v_src(t);
    return f;
}

Vector residual_mona(const ImplicitDAE& dae, Real t, const Vector& x, const Vector& xdot,
                     bool* clamped) {
    const auto& layout = dae.layout;
    const auto psi = layout.node_block(x);
    const auto q_c = layout.storage_block(x);
    const auto psi_dot = layout.node_block(xdot);

    const auto [i_of_phi, v_of_q] =
        eval_energy_gradient(dae.models, dae.a_l.transpose() * psi, q_c);

    Vector f(dae.size());
    layout.node_block(f) =
        dae.a_r * eval_conductance_current(dae.models, dae.a_r.transpose() * psi_dot, clamped) +
        dae.a_c * layout.storage_block(xdot) + dae.a_v * layout.source_block(xdot) +
        dae.a_l * i_of_phi + dae.a_i * dae.models.i_src(t);
    layout.storage_block(f) = -dae.a_c.transpose() * psi_dot + v_of_q;
    layout.source_block(f) = -dae.a_v.transpose() * psi_dot + dae.models.v_src(t);
    return f;
}

}  // namespace

Vector residual(const ImplicitDAE& dae, Real t, const Vector& x, const Vector& xdot,
                bool* clamped) {
    require_sizes(dae, x, xdot);
    const Vector f = dae.formulation == Formulation::Mna
                         ? residual_mna(dae, t, x, xdot, clamped)
                         : residual_mona(dae, t, x, xdot, clamped);
    require_finite(dae, f);
    return f;
}

std::pair<Matrix, Matrix> jacobians(const ImplicitDAE& dae, Real t [[maybe_unused]],
                                    const Vector& x, const Vector& xdot) {
    require_sizes(dae, x, xdot);
    const auto& layout = dae.layout;
    const Index n = layout.nodes;
    const Index ns = layout.storage;
    const Index nv = layout.sources;

    Matrix j_x = Matrix::Zero(dae.size(), dae.size());
    Matrix j_xdot = Matrix::Zero(dae.size(), dae.size());

    if (dae.formulation == Formulation::Mna) {
        const Vector v_r = dae.a_r.transpose() * layout.node_block(x);
        const Vector slopes = eval_conductance_slopes(dae.models, v_r);

        j_x.topLeftCorner(n, n) = dae.a_r * slopes.asDiagonal() * dae.a_r.transpose();
        j_x.block(0, n, n, ns) = dae.a_l;
        j_x.block(0, n + ns, n, nv) = dae.a_v;
        j_x.block(n, 0, ns, n) = -dae.a_l.transpose();
        j_x.block(n + ns, 0, nv, n) = -dae.a_v.transpose();

        j_xdot.topLeftCorner(n, n) = dae.node_mass;
        j_xdot.block(n, n, ns, ns) = dae.inductance;
    } else {
        const Vector v_r = dae.a_r.transpose() * layout.node_block(xdot);
        const Vector slopes = eval_conductance_slopes(dae.models, v_r);
        const auto [hess_l, hess_c] =
            eval_energy_hessian(dae.models, dae.a_l.transpose() * layout.node_block(x),
                                layout.storage_block(x));

        j_x.topLeftCorner(n, n) = dae.a_l * hess_l * dae.a_l.transpose();
        j_x.block(n, n, ns, ns) = hess_c;

        j_xdot.topLeftCorner(n, n) = dae.a_r * slopes.asDiagonal() * dae.a_r.transpose();
        j_xdot.block(0, n, n, ns) = dae.a_c;
        j_xdot.block(0, n + ns, n, nv) = dae.a_v;
        j_xdot.block(n, 0, ns, n) = -dae.a_c.transpose();
        j_xdot.block(n + ns, 0, nv, n) = -dae.a_v.transpose();
    }
    return {std::move(j_x), std::move(j_xdot)};
}

Pencil linearized_pencil(const ImplicitDAE& dae, Real t, const Vector& x, const Vector& xdot) {
    const Vector x0 = x.size() ? x : Vector(Vector::Zero(dae.size()));
    const Vector xdot0 = xdot.size() ? xdot : Vector(Vector::Zero(dae.size()));
    auto [j_x, j_xdot] = jacobians(dae, t, x0, xdot0);
    return {std::move(j_xdot), std::move(j_x)};
}

namespace {

/// Explicit time derivative of the residual: only the source terms carry t.
Vector residual_time_rate(const ImplicitDAE& dae, Real t) {
    Vector rate = Vector::Zero(dae.size());
    dae.layout.node_block(rate) = dae.a_i * dae.models.i_src_rate(t);
    dae.layout.source_block(rate) = dae.models.v_src_rate(t);
    return rate;
}

}  // namespace

ConsistencyResult check_consistency(const ImplicitDAE& dae, Real t0, const Vector& x0) {
    // Gauss–Newton with backtracking: unlike the time stepper, this solve has
    // no warm start, so full steps can overshoot exponential branch laws.
    constexpr int kMaxIterations = 100;
    constexpr int kMaxBacktracks = 40;

    const Real target = 1e-12 * (1.0 + x0.norm());
    const auto descend = [&](Vector xdot) {
        Real norm = residual(dae, t0, x0, xdot).norm();
        for (int iter = 0; iter < kMaxIterations && norm > target; ++iter) {
            const Vector f = residual(dae, t0, x0, xdot);
            const Matrix j = jacobians(dae, t0, x0, xdot).second;
            const Vector delta = least_squares_solve<Real>(j, -f);
            if (delta.norm() <= 1e-13 * (1.0 + xdot.norm())) break;

            Real alpha = 1.0;
            bool improved = false;
            for (int bt = 0; bt < kMaxBacktracks; ++bt, alpha *= 0.5) {
                const Vector candidate = xdot + alpha * delta;
                const Real candidate_norm = residual(dae, t0, x0, candidate).norm();
                if (candidate_norm < norm) {
                    xdot = candidate;
                    norm = candidate_norm;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;  // stalled: x0 admits no better derivative fit
        }
        return xdot;
    };

    ConsistencyResult result;
    result.xdot0 = descend(Vector::Zero(dae.size()));

    // ‖F‖ pins the derivative only up to the kernel of ∂F/∂x′. Fix the free
    // components by differentiating the constraints the cokernel encodes:
    // uᵀ∂F/∂x′ = 0 turns d/dt(uᵀF) = 0 into uᵀ(F_t + F_x·x′) = 0. Left at
    // their least-norm default, those components seed the trapezoidal rule's
    // undamped stage-derivative mode.
    const auto [j_x, j_xdot] = jacobians(dae, t0, x0, result.xdot0);
    if (dae.size() > 0) {
        Eigen::JacobiSVD<Matrix> svd(j_xdot, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sigma = svd.singularValues();
        Index rank = 0;
        for (Index i = 0; i < sigma.size(); ++i)
            if (sigma(i) > kRankTolerance * sigma(0)) ++rank;
        if (const Index nullity = dae.size() - rank; nullity > 0) {
            const Matrix kernel = svd.matrixV().rightCols(nullity);
            const Matrix cokernel = svd.matrixU().rightCols(nullity);
            const Matrix coupling = cokernel.transpose() * j_x * kernel;
            const Vector drift =
                cokernel.transpose() * (residual_time_rate(dae, t0) + j_x * result.xdot0);
            result.xdot0 += kernel * least_squares_solve<Real>(coupling, -drift);
            result.xdot0 = descend(std::move(result.xdot0));
        }
    }

    result.residual_norm = residual(dae, t0, x0, result.xdot0).norm();
    result.consistent = result.residual_norm <= 1e-10 * (1.0 + x0.norm());
    return result;
}

ElectricReconstruction reconstruct_electric(const ImplicitDAE& dae, const Trajectory& traj) {
    if (dae.formulation != Formulation::Mona)
        throw ModelError("electric reconstruction requires the charge-flux formulation");
    if (traj.derivatives.rows() != traj.states.rows())
        throw SolverError("trajectory lacks derivative samples");

    const auto& layout = dae.layout;
    const Index samples = traj.states.rows();

    ElectricReconstruction rec;
    rec.e.resize(samples, layout.nodes);
    rec.phi_l.resize(samples, dae.a_l.cols());
    rec.i_l.resize(samples, dae.a_l.cols());
    rec.v_c.resize(samples, dae.a_c.cols());
    rec.i_c.resize(samples, layout.storage);
    rec.i_v.resize(samples, layout.sources);

    for (Index row = 0; row < samples; ++row) {
        const Vector x = traj.states.row(row).transpose();
        const Vector xdot = traj.derivatives.row(row).transpose();
        const Vector psi_dot = layout.node_block(xdot);
        const Vector phi = dae.a_l.transpose() * layout.node_block(x);
        rec.e.row(row) = psi_dot.transpose();
        rec.phi_l.row(row) = phi.transpose();
        rec.i_l.row(row) =
            eval_energy_gradient(dae.models, phi, layout.storage_block(x)).first.transpose();
        rec.v_c.row(row) = (dae.a_c.transpose() * psi_dot).transpose();
        rec.i_c.row(row) = layout.storage_block(xdot).transpose();
        rec.i_v.row(row) = layout.source_block(xdot).transpose();
    }
    return rec;
}

}  // namespace mona
