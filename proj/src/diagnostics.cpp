#include "mona/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mona/errors.hpp"

namespace mona {

namespace {

void require_samples(const Trajectory& traj) {
    if (traj.states.rows() != static_cast<Index>(traj.times.size()) ||
        traj.derivatives.rows() != traj.states.rows())
        throw SolverError("trajectory rows do not match its time grid");
}

/// Median of the absolute values of a segment.
Real median_abs(const Vector& values) {
    std::vector<Real> mags(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(values(i));
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    return n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

}  // namespace

EnergyReport energy_balance(const ImplicitDAE& dae, const Trajectory& traj, Scheme scheme,
                            Index startup_ie_steps) {
    require_samples(traj);
    const auto& layout = dae.layout;
    const Index samples = traj.states.rows();

    EnergyReport report;
    report.stored.resize(samples);
    report.dissipation.resize(samples);
    report.source_power.resize(samples);
    report.balance_residual.resize(std::max<Index>(samples - 1, 0));

    for (Index n = 0; n < samples; ++n) {
        const Real t = traj.times[static_cast<std::size_t>(n)];
        const Vector x = traj.states.row(n).transpose();
        const Vector xdot = traj.derivatives.row(n).transpose();

        Vector phi, charge, v_r, e_like;
        if (dae.formulation == Formulation::Mna) {
            const Vector e = layout.node_block(x);
            phi = flux_of_current(dae.models, layout.storage_block(x));
            charge = charge_of_voltage(dae.models, dae.a_c.transpose() * e);
            v_r = dae.a_r.transpose() * e;
            e_like = e;
        } else {
            const Vector psi_dot = layout.node_block(xdot);
            phi = dae.a_l.transpose() * layout.node_block(x);
            charge = layout.storage_block(x);
            v_r = dae.a_r.transpose() * psi_dot;
            e_like = psi_dot;
        }

        report.stored(n) = eval_energy(dae.models, phi, charge);
        report.dissipation(n) = eval_conductance_current(dae.models, v_r).dot(v_r);
        report.source_power(n) = (dae.a_i.transpose() * e_like).dot(dae.models.i_src(t)) +
                                 layout.source_block(dae.formulation == Formulation::Mna ? x : xdot)
                                     .dot(dae.models.v_src(t));
    }

    for (Index n = 0; n + 1 < samples; ++n) {
        const Real tau =
            traj.times[static_cast<std::size_t>(n) + 1] - traj.times[static_cast<std::size_t>(n)];
        const Real flow_next = report.dissipation(n + 1) + report.source_power(n + 1);
        const Real flow_here = report.dissipation(n) + report.source_power(n);
        const bool right_endpoint = scheme == Scheme::ImplicitEuler || n < startup_ie_steps;
        const Real quadrature =
            right_endpoint ? tau * flow_next : 0.5 * tau * (flow_here + flow_next);
        report.balance_residual(n) = report.stored(n + 1) - report.stored(n) + quadrature;
    }
    return report;
}

ObservableSeries extract_observables(const ImplicitDAE& dae, const Trajectory& traj) {
    require_samples(traj);
    const auto& layout = dae.layout;
    const Index samples = traj.states.rows();

    ObservableSeries obs;
    if (dae.formulation == Formulation::Mna) {
        obs.e.resize(samples, layout.nodes);
        obs.i_l.resize(samples, dae.a_l.cols());
        obs.i_v.resize(samples, layout.sources);
        for (Index n = 0; n < samples; ++n) {
            const Vector x = traj.states.row(n).transpose();
            obs.e.row(n) = layout.node_block(x).transpose();
            obs.i_l.row(n) = layout.storage_block(x).transpose();
            obs.i_v.row(n) = layout.source_block(x).transpose();
        }
    } else {
        const ElectricReconstruction rec = reconstruct_electric(dae, traj);
        obs.e = rec.e;
        obs.i_l = rec.i_l;
        obs.i_v = rec.i_v;
    }
    return obs;
}

namespace {

void require_same_grid(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size())
        throw SolverError("trajectories sample different numbers of points");
    for (std::size_t n = 0; n < a.times.size(); ++n)
        if (std::abs(a.times[n] - b.times[n]) > 1e-12 * (1.0 + std::abs(a.times[n])))
            throw SolverError("trajectories sample different time grids");
}

Vector columnwise_max_abs(const Matrix& m) {
    if (m.rows() == 0) return Vector::Zero(m.cols());
    return m.cwiseAbs().colwise().maxCoeff().transpose();
}

}  // namespace

ComparisonReport compare_trajectories(const ImplicitDAE& dae_a, const Trajectory& traj_a,
                                      const ImplicitDAE& dae_b, const Trajectory& traj_b) {
    require_same_grid(traj_a, traj_b);
    const ObservableSeries a = extract_observables(dae_a, traj_a);
    const ObservableSeries b = extract_observables(dae_b, traj_b);
    if (a.e.cols() != b.e.cols() || a.i_l.cols() != b.i_l.cols() || a.i_v.cols() != b.i_v.cols())
        throw SolverError("trajectories describe different circuits");

    ComparisonReport report;
    report.e_diff = a.e - b.e;
    report.i_l_diff = a.i_l - b.i_l;
    report.i_v_diff = a.i_v - b.i_v;
    report.e_max = columnwise_max_abs(report.e_diff);
    report.i_l_max = columnwise_max_abs(report.i_l_diff);
    report.i_v_max = columnwise_max_abs(report.i_v_diff);
    return report;
}

Real estimate_order(const std::vector<Real>& taus, const std::vector<Real>& errors) {
    if (taus.size() != errors.size())
        throw SolverError("order estimate needs one error per step size");
    if (taus.size() < 2) throw SolverError("order estimate needs at least two step sizes");
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (!(taus[i] > 0.0) || !(errors[i] > 0.0))
            throw SolverError("order estimate needs strictly positive step sizes and errors");

    const auto n = static_cast<Real>(taus.size());
    Real lt_mean = 0.0, le_mean = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        lt_mean += std::log(taus[i]);
        le_mean += std::log(errors[i]);
    }
    lt_mean /= n;
    le_mean /= n;

    Real cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const Real dt = std::log(taus[i]) - lt_mean;
        cov += dt * (std::log(errors[i]) - le_mean);
        var += dt * dt;
    }
    if (var == 0.0) throw SolverError("order estimate needs distinct step sizes");
    return cov / var;
}

OscillationMetric oscillation_metric(const Vector& series) {
    if (series.size() < 3) throw SolverError("oscillation metric needs at least 3 samples");

    const Index diffs = series.size() - 1;
    Vector d(diffs);
    for (Index i = 0; i < diffs; ++i) d(i) = series(i + 1) - series(i);

    OscillationMetric metric;
    const Index interior = diffs - 2;
    if (interior > 0) {
        Index alternating = 0;
        for (Index i = 1; i + 1 < diffs; ++i)
            if (d(i - 1) * d(i) < 0.0 && d(i) * d(i + 1) < 0.0) ++alternating;
        metric.alternation_fraction =
            static_cast<Real>(alternating) / static_cast<Real>(interior);
    }
    metric.amplitude = median_abs(d.tail(diffs - diffs / 2));
    return metric;
}

}  // namespace mona
