#include "mona/devices.hpp"

#include <cmath>

#include "mona/errors.hpp"

namespace mona {

namespace {

Real clamped_exp(Real arg, bool* clamped) {
    if (arg > kExpClamp) {
        if (clamped) *clamped = true;
        arg = kExpClamp;
    }
    return std::exp(arg);
}

void require_spd(const Matrix& m, const std::string& what) {
    if ((m - m.transpose()).norm() > 0)
        throw ModelError(what + " is not symmetric");
    if (m.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0)
        throw ModelError(what + " is not positive definite");
}

LinearStorage make_linear_storage(Matrix m, const std::string& what) {
    require_spd(m, what);
    LinearStorage bank;
    bank.inverse = m.rows() > 0 ? Matrix(m.inverse()) : Matrix(0, 0);
    bank.storage = std::move(m);
    return bank;
}

}  // namespace

Vector DeviceModels::v_src(Real t) const {
    Vector v(static_cast<Index>(vsrc.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = vsrc[static_cast<std::size_t>(i)](t);
    return v;
}

Vector DeviceModels::i_src(Real t) const {
    Vector v(static_cast<Index>(isrc.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = isrc[static_cast<std::size_t>(i)](t);
    return v;
}

Vector DeviceModels::v_src_rate(Real t) const {
    Vector v(static_cast<Index>(vsrc.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = vsrc[static_cast<std::size_t>(i)].rate(t);
    return v;
}

Vector DeviceModels::i_src_rate(Real t) const {
    Vector v(static_cast<Index>(isrc.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = isrc[static_cast<std::size_t>(i)].rate(t);
    return v;
}

DeviceModels build_models(const CircuitGraph& graph) {
    DeviceModels models;

    for (const Element& e : graph.resistors) {
        if (e.kind == ElementKind::R) {
            const Real r = e.params.at(0);
            if (r <= 0) throw ModelError("resistor " + e.name + " needs a positive resistance");
            models.resistive.push_back(LinearConductance{1.0 / r});
        } else {
            const Real is = e.params.at(0);
            const Real k = e.params.at(1);
            if (is <= 0 || k <= 0)
                throw ModelError("diode " + e.name + " needs positive saturation and slope");
            models.resistive.push_back(ShockleyDiode{is, k});
        }
    }

    const Index nc = static_cast<Index>(graph.capacitors.size());
    Matrix c = Matrix::Zero(nc, nc);
    for (Index i = 0; i < nc; ++i) {
        const Element& e = graph.capacitors[static_cast<std::size_t>(i)];
        if (e.params.at(0) <= 0)
            throw ModelError("capacitor " + e.name + " needs a positive capacitance");
        c(i, i) = e.params.at(0);
    }
    models.capacitive = make_linear_storage(std::move(c), "capacitance matrix");

    const Index nl = static_cast<Index>(graph.inductors.size());
    Matrix l = Matrix::Zero(nl, nl);
    for (Index i = 0; i < nl; ++i) {
        const Element& e = graph.inductors[static_cast<std::size_t>(i)];
        if (e.params.at(0) <= 0)
            throw ModelError("inductor " + e.name + " needs a positive inductance");
        l(i, i) = e.params.at(0);
    }
    for (const Coupling& k : graph.couplings) {
        l(k.first, k.second) = k.mutual;
        l(k.second, k.first) = k.mutual;
    }
    models.inductive = make_linear_storage(std::move(l), "inductance matrix");

    for (const Element& e : graph.vsources) models.vsrc.push_back(e.waveform);
    for (const Element& e : graph.isources) models.isrc.push_back(e.waveform);
    return models;
}

Vector eval_conductance_current(const DeviceModels& models, const Vector& v, bool* clamped) {
    Vector i(v.size());
    for (Index j = 0; j < v.size(); ++j) {
        const auto& branch = models.resistive[static_cast<std::size_t>(j)];
        if (const auto* lin = std::get_if<LinearConductance>(&branch))
            i(j) = lin->conductance * v(j);
        else {
            const auto& diode = std::get<ShockleyDiode>(branch);
            i(j) = diode.saturation * (clamped_exp(diode.slope * v(j), clamped) + 1.0);
        }
    }
    return i;
}

Vector eval_conductance_slopes(const DeviceModels& models, const Vector& v, bool* clamped) {
    Vector g(v.size());
    for (Index j = 0; j < v.size(); ++j) {
        const auto& branch = models.resistive[static_cast<std::size_t>(j)];
        if (const auto* lin = std::get_if<LinearConductance>(&branch))
            g(j) = lin->conductance;
        else {
            const auto& diode = std::get<ShockleyDiode>(branch);
            g(j) = diode.saturation * diode.slope * clamped_exp(diode.slope * v(j), clamped);
        }
    }
    return g;
}

namespace {

Real bank_energy(const StorageModel& bank, const Vector& y) {
    if (const auto* lin = std::get_if<LinearStorage>(&bank))
        return y.size() > 0 ? Real(0.5 * y.dot(lin->inverse * y)) : Real(0);
    return y.size() > 0 ? std::get<FunctionalStorage>(bank).energy(y) : Real(0);
}

Vector bank_gradient(const StorageModel& bank, const Vector& y) {
    if (const auto* lin = std::get_if<LinearStorage>(&bank)) return lin->inverse * y;
    if (y.size() == 0) return Vector(0);
    return std::get<FunctionalStorage>(bank).gradient(y);
}

Matrix bank_hessian(const StorageModel& bank, const Vector& y, const std::string& what) {
    if (const auto* lin = std::get_if<LinearStorage>(&bank)) return lin->inverse;
    if (y.size() == 0) return Matrix(0, 0);
    Matrix h = std::get<FunctionalStorage>(bank).hessian(y);
    require_spd(h, what);
    return h;
}

}  // namespace

Real eval_energy(const DeviceModels& models, const Vector& phi, const Vector& q) {
    return bank_energy(models.inductive, phi) + bank_energy(models.capacitive, q);
}

std::pair<Vector, Vector> eval_energy_gradient(const DeviceModels& models, const Vector& phi,
                                               const Vector& q) {
    return {bank_gradient(models.inductive, phi), bank_gradient(models.capacitive, q)};
}

std::pair<Matrix, Matrix> eval_energy_hessian(const DeviceModels& models, const Vector& phi,
                                              const Vector& q) {
    return {bank_hessian(models.inductive, phi, "inductive energy Hessian"),
            bank_hessian(models.capacitive, q, "capacitive energy Hessian")};
}

namespace {

Vector forward_map(const StorageModel& bank, const Vector& y, const std::string& what) {
    const auto* lin = std::get_if<LinearStorage>(&bank);
    if (!lin) throw ModelError(what + " requires a linear storage bank");
    return lin->storage * y;
}

}  // namespace

Vector charge_of_voltage(const DeviceModels& models, const Vector& v_c) {
    return forward_map(models.capacitive, v_c, "charge map q(v)");
}

Vector flux_of_current(const DeviceModels& models, const Vector& i_l) {
    return forward_map(models.inductive, i_l, "flux map phi(i)");
}

bool has_linear_storage(const DeviceModels& models) {
    return std::holds_alternative<LinearStorage>(models.capacitive) &&
           std::holds_alternative<LinearStorage>(models.inductive);
}

bool is_linear(const DeviceModels& models) {
    if (!has_linear_storage(models)) return false;
    for (const auto& branch : models.resistive)
        if (!std::holds_alternative<LinearConductance>(branch)) return false;
    return true;
}

}  // namespace mona
