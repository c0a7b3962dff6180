#pragma once

#include <string>
#include <vector>

#include "mona/errors.hpp"
#include "mona/types.hpp"
#include "mona/waveform.hpp"

namespace mona {

/// Element classes as they appear in a netlist. Diodes (D) are kept as their
/// own kind here and fold into the resistive class when the graph is built.
enum class ElementKind { R, C, L, D, V, I, K };

char kind_letter(ElementKind kind);

/// One netlist line. K entries reuse node_plus/node_minus to store the two
/// referenced inductor names.
struct Element {
    ElementKind kind = ElementKind::R;
    std::string name;
    std::string node_plus;
    std::string node_minus;
    std::vector<Real> params;  // R/C/L: value; D: is, k; K: mutual inductance
    Waveform waveform;         // V and I only

    bool operator==(const Element&) const = default;
};

/// Parsed netlist in file order, before any graph validation.
struct Netlist {
    std::vector<Element> elements;
};

/// Inductive coupling record resolved to inductor positions in the L class.
struct Coupling {
    std::string name;
    Index first = 0;   // index into the L-class branch list
    Index second = 0;
    Real mutual = 0.0;
};

/// Validated circuit graph: ordered nodes (ground excluded from the index
/// map), branches grouped by class in netlist order, couplings attached to
/// the inductor block.
struct CircuitGraph {
    std::vector<std::string> nodes;  // non-ground nodes, first-appearance order
    std::vector<Element> capacitors;
    std::vector<Element> inductors;
    std::vector<Element> resistors;  // R and D elements, netlist order
    std::vector<Element> vsources;
    std::vector<Element> isources;
    std::vector<Coupling> couplings;

    [[nodiscard]] Index num_nodes() const { return static_cast<Index>(nodes.size()); }

    /// Index of a non-ground node, or -1 for ground "0".
    [[nodiscard]] Index node_index(const std::string& id) const;
};

/// Parses netlist text. Lines starting with '*' are comments; blank lines are
/// allowed. Throws ParseError with the offending line number.
Netlist parse_netlist(const std::string& text);

/// Serializes a netlist back to text; parse_netlist(serialize_netlist(n)) is
/// element-wise identical to n.
std::string serialize_netlist(const Netlist& netlist);

/// Validates connectivity, ground presence, and couplings, and orders nodes
/// deterministically by first appearance.
CircuitGraph build_graph(const Netlist& netlist);

}  // namespace mona
