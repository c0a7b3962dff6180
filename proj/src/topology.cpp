#include "mona/topology.hpp"

#include <sstream>

#include "mona/errors.hpp"

namespace mona {

namespace {

IntMatrix class_incidence(const CircuitGraph& graph, const std::vector<Element>& elems) {
    const Index n = graph.num_nodes();
    IntMatrix a = IntMatrix::Zero(n, static_cast<Index>(elems.size()));
    for (Index j = 0; j < a.cols(); ++j) {
        const Element& e = elems[static_cast<std::size_t>(j)];
        const Index plus = graph.node_index(e.node_plus);
        const Index minus = graph.node_index(e.node_minus);
        if (plus >= 0) a(plus, j) = 1;
        if (minus >= 0) a(minus, j) = -1;
    }
    return a;
}

std::vector<std::string> names_of(const std::vector<Element>& elems) {
    std::vector<std::string> names;
    names.reserve(elems.size());
    for (const auto& e : elems) names.push_back(e.name);
    return names;
}

NullSpaceCheck run_check(std::string label, const Matrix& m, Real tol) {
    NullSpaceCheck check;
    check.label = std::move(label);
    check.rows = m.rows();
    check.cols = m.cols();
    const auto ns = null_space_dim(m, tol);
    check.rank = ns.rank;
    check.witnesses = ns.basis;
    return check;
}

std::string witness_summary(const NullSpaceCheck& check) {
    std::ostringstream out;
    out << check.label << " (null-space dimension " << check.witnesses.cols()
        << ", witness [";
    for (Index i = 0; i < check.witnesses.rows(); ++i) {
        if (i > 0) out << ", ";
        out << check.witnesses(i, 0);
    }
    out << "])";
    return out.str();
}

}  // namespace

Matrix IncidenceDecomposition::reduced_incidence() const {
    return hcat(A_C.cast<Real>(), A_L.cast<Real>(), A_R.cast<Real>(),
                      A_V.cast<Real>(), A_I.cast<Real>());
}

IncidenceDecomposition build_incidence(const CircuitGraph& graph) {
    IncidenceDecomposition inc;
    inc.A_C = class_incidence(graph, graph.capacitors);
    inc.A_L = class_incidence(graph, graph.inductors);
    inc.A_R = class_incidence(graph, graph.resistors);
    inc.A_V = class_incidence(graph, graph.vsources);
    inc.A_I = class_incidence(graph, graph.isources);
    inc.nodes = graph.nodes;
    inc.cap_names = names_of(graph.capacitors);
    inc.ind_names = names_of(graph.inductors);
    inc.res_names = names_of(graph.resistors);
    inc.vsrc_names = names_of(graph.vsources);
    inc.isrc_names = names_of(graph.isources);
    return inc;
}

ConditionReport check_conditions(const IncidenceDecomposition& inc, Real tol) {
    const Matrix a_c = inc.A_C.cast<Real>();
    const Matrix a_l = inc.A_L.cast<Real>();
    const Matrix a_r = inc.A_R.cast<Real>();
    const Matrix a_v = inc.A_V.cast<Real>();

    ConditionReport report;
    report.tolerance = tol;
    report.source_cutset =
        run_check("current-source cutset", hcat(a_r, a_c, a_v, a_l).transpose(), tol);
    report.vsource_loop = run_check("voltage-source loop", a_v, tol);
    report.li_cutset = run_check("inductor/current-source cutset",
                                 hcat(a_r, a_c, a_v).transpose(), tol);
    report.cv_loop = run_check("capacitor/voltage-source loop", hcat(a_c, a_v), tol);
    return report;
}

std::string to_string(Formulation f) {
    return f == Formulation::Mna ? "mna" : "mona";
}

IndexPrediction predict_index(const ConditionReport& report, Formulation formulation) {
    if (!report.a1_holds()) {
        const NullSpaceCheck& failed =
            report.source_cutset.trivial() ? report.vsource_loop : report.source_cutset;
        throw TopologyError("ill-posed topology: " + witness_summary(failed));
    }

    IndexPrediction prediction;
    prediction.formulation = formulation;
    prediction.a1 = true;
    prediction.a2 = report.a2_holds();
    if (formulation == Formulation::Mna)
        prediction.predicted_index = prediction.a2 ? 1 : 2;
    else
        prediction.predicted_index = prediction.a2 ? 0 : 1;
    return prediction;
}

}  // namespace mona
