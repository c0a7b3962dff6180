#pragma once

#include <string>
#include <vector>

#include "mona/linalg.hpp"
#include "mona/netlist.hpp"
#include "mona/types.hpp"

namespace mona {

/// Reduced incidence matrix split by element class. Rows follow the graph's
/// non-ground node order; columns follow netlist order within each class.
struct IncidenceDecomposition {
    IntMatrix A_C;  // capacitors
    IntMatrix A_L;  // inductors
    IntMatrix A_R;  // resistors and diodes
    IntMatrix A_V;  // voltage sources
    IntMatrix A_I;  // current sources

    std::vector<std::string> nodes;
    std::vector<std::string> cap_names, ind_names, res_names, vsrc_names, isrc_names;

    [[nodiscard]] Index num_nodes() const { return A_C.rows(); }

    /// [A_C, A_L, A_R, A_V, A_I] as a real matrix.
    [[nodiscard]] Matrix reduced_incidence() const;
};

IncidenceDecomposition build_incidence(const CircuitGraph& graph);

/// One null-space test backing a topological condition. A nontrivial null
/// space is a structural defect; the basis columns are its witnesses.
struct NullSpaceCheck {
    std::string label;   // human-readable name of the defect a witness proves
    Index rows = 0;
    Index cols = 0;
    Index rank = 0;
    Matrix witnesses;    // orthonormal null-space basis; 0 columns when trivial

    [[nodiscard]] bool trivial() const { return witnesses.cols() == 0; }
};

/// Outcome of the two well-posedness conditions.
///
/// A1 (solvability): every cutset contains a branch that is not a current
/// source, and voltage sources form no loop. Tested as
/// N([A_R,A_C,A_V,A_L]ᵀ) = 0 and N(A_V) = 0.
///
/// A2 (index reduction): every cutset contains a branch that is neither an
/// inductor nor a current source, and capacitors/voltage sources form no
/// loop. Tested as N([A_R,A_C,A_V]ᵀ) = 0 and N([A_C,A_V]) = 0.
struct ConditionReport {
    NullSpaceCheck source_cutset;   // N([A_R,A_C,A_V,A_L]ᵀ): witness = I-cutset
    NullSpaceCheck vsource_loop;    // N(A_V): witness = V-loop
    NullSpaceCheck li_cutset;       // N([A_R,A_C,A_V]ᵀ): witness = LI-cutset
    NullSpaceCheck cv_loop;         // N([A_C,A_V]): witness = CV-loop
    Real tolerance = kRankTolerance;

    [[nodiscard]] bool a1_holds() const { return source_cutset.trivial() && vsource_loop.trivial(); }
    [[nodiscard]] bool a2_holds() const { return li_cutset.trivial() && cv_loop.trivial(); }
};

ConditionReport check_conditions(const IncidenceDecomposition& inc, Real tol = kRankTolerance);

/// Which network equations are assembled.
enum class Formulation { Mna, Mona };

std::string to_string(Formulation f);

/// Differentiation index implied by the conditions for one formulation.
struct IndexPrediction {
    Formulation formulation = Formulation::Mna;
    int predicted_index = 0;
    bool a1 = false;
    bool a2 = false;
};

/// Maps condition outcomes to the expected differentiation index:
/// MNA gets 1 under A1∧A2 and 2 under A1∧¬A2; MONA gets 0 under A1∧A2 and
/// 1 under A1∧¬A2. Throws TopologyError when A1 fails, naming the violated
/// sub-condition.
IndexPrediction predict_index(const ConditionReport& report, Formulation formulation);

}  // namespace mona
