#include "mona/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mona {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream stream(line);
    std::string tok;
    while (stream >> tok) tokens.push_back(tok);
    return tokens;
}

Real parse_number(const std::string& token, int line) {
    if (token == "pi") return std::numbers::pi;
    if (token == "-pi") return -std::numbers::pi;
    if (token == "+pi") return std::numbers::pi;
    const char* begin = token.c_str();
    char* end = nullptr;
    const Real value = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError("expected a number, got '" + token + "'", line);
    return value;
}

std::string format_number(Real value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Waveform parse_waveform(const std::vector<std::string>& tokens, std::size_t pos, int line) {
    if (pos >= tokens.size())
        throw ParseError("missing waveform specification", line);
    const std::string& tag = tokens[pos];
    Waveform w;
    std::size_t expected = 0;
    if (tag == "dc") {
        w.kind = Waveform::Kind::Dc;
        expected = 1;
    } else if (tag == "sin") {
        w.kind = Waveform::Kind::Sin;
        expected = 2;
    } else if (tag == "cos") {
        w.kind = Waveform::Kind::Cos;
        expected = 2;
    } else if (tag == "square") {
        w.kind = Waveform::Kind::Square;
        expected = 2;
    } else {
        throw ParseError("unknown waveform '" + tag + "'", line);
    }
    if (tokens.size() != pos + 1 + expected)
        throw ParseError("waveform '" + tag + "' takes " + std::to_string(expected) +
                             " value(s)",
                         line);
    w.amplitude = parse_number(tokens[pos + 1], line);
    if (expected == 2) w.omega = parse_number(tokens[pos + 2], line);
    return w;
}

void expect_arity(const std::vector<std::string>& tokens, std::size_t n, int line) {
    if (tokens.size() != n)
        throw ParseError("element '" + tokens[0] + "' takes " + std::to_string(n - 1) +
                             " fields, got " + std::to_string(tokens.size() - 1),
                         line);
}

}  // namespace

char kind_letter(ElementKind kind) {
    switch (kind) {
        case ElementKind::R: return 'R';
        case ElementKind::C: return 'C';
        case ElementKind::L: return 'L';
        case ElementKind::D: return 'D';
        case ElementKind::V: return 'V';
        case ElementKind::I: return 'I';
        case ElementKind::K: return 'K';
    }
    return '?';
}

Netlist parse_netlist(const std::string& text) {
    Netlist netlist;
    std::set<std::string> names;
    std::set<std::string> inductor_names;

    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.front() == '*') continue;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        Element elem;
        elem.name = tokens[0];
        const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(tokens[0][0])));
        switch (letter) {
            case 'R': elem.kind = ElementKind::R; break;
            case 'C': elem.kind = ElementKind::C; break;
            case 'L': elem.kind = ElementKind::L; break;
            case 'D': elem.kind = ElementKind::D; break;
            case 'V': elem.kind = ElementKind::V; break;
            case 'I': elem.kind = ElementKind::I; break;
            case 'K': elem.kind = ElementKind::K; break;
            default:
                throw ParseError("unknown element kind '" + tokens[0] + "'", line_no);
        }

        if (names.count(elem.name))
            throw ParseError("duplicate element name '" + elem.name + "'", line_no);
        names.insert(elem.name);

        switch (elem.kind) {
            case ElementKind::R:
            case ElementKind::C:
            case ElementKind::L:
                expect_arity(tokens, 4, line_no);
                elem.node_plus = tokens[1];
                elem.node_minus = tokens[2];
                elem.params = {parse_number(tokens[3], line_no)};
                if (elem.kind == ElementKind::L) inductor_names.insert(elem.name);
                break;
            case ElementKind::D:
                expect_arity(tokens, 5, line_no);
                elem.node_plus = tokens[1];
                elem.node_minus = tokens[2];
                elem.params = {parse_number(tokens[3], line_no), parse_number(tokens[4], line_no)};
                break;
            case ElementKind::V:
            case ElementKind::I:
                if (tokens.size() < 4)
                    throw ParseError("element '" + tokens[0] + "' needs nodes and a waveform",
                                     line_no);
                elem.node_plus = tokens[1];
                elem.node_minus = tokens[2];
                elem.waveform = parse_waveform(tokens, 3, line_no);
                break;
            case ElementKind::K: {
                expect_arity(tokens, 4, line_no);
                elem.node_plus = tokens[1];   // first inductor name
                elem.node_minus = tokens[2];  // second inductor name
                elem.params = {parse_number(tokens[3], line_no)};
                if (elem.node_plus == elem.node_minus)
                    throw ParseError("coupling '" + elem.name + "' references the same inductor twice",
                                     line_no);
                for (const auto& ref : {elem.node_plus, elem.node_minus})
                    if (!inductor_names.count(ref))
                        throw ParseError("coupling '" + elem.name + "' references unknown inductor '" +
                                             ref + "'",
                                         line_no);
                break;
            }
        }

        if (elem.kind != ElementKind::K && elem.node_plus == elem.node_minus)
            throw ParseError("element '" + elem.name + "' connects a node to itself", line_no);

        netlist.elements.push_back(std::move(elem));
    }
    return netlist;
}

std::string serialize_netlist(const Netlist& netlist) {
    std::ostringstream out;
    for (const auto& e : netlist.elements) {
        out << e.name << ' ' << e.node_plus << ' ' << e.node_minus;
        if (e.kind == ElementKind::V || e.kind == ElementKind::I) {
            out << ' ' << to_string(e.waveform);
        } else {
            for (const Real p : e.params) out << ' ' << format_number(p);
        }
        out << '\n';
    }
    return out.str();
}

std::string to_string(const Waveform& w) {
    std::string tag;
    switch (w.kind) {
        case Waveform::Kind::Dc: tag = "dc"; break;
        case Waveform::Kind::Sin: tag = "sin"; break;
        case Waveform::Kind::Cos: tag = "cos"; break;
        case Waveform::Kind::Square: tag = "square"; break;
    }
    std::string out = tag + " " + format_number(w.amplitude);
    if (w.kind != Waveform::Kind::Dc) out += " " + format_number(w.omega);
    return out;
}

Index CircuitGraph::node_index(const std::string& id) const {
    if (id == "0") return -1;
    const auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw ParseError("unknown node '" + id + "'");
    return static_cast<Index>(it - nodes.begin());
}

CircuitGraph build_graph(const Netlist& netlist) {
    CircuitGraph graph;
    bool has_ground = false;
    std::map<std::string, Index> node_map;

    auto visit_node = [&](const std::string& id) {
        if (id == "0") {
            has_ground = true;
            return;
        }
        if (!node_map.count(id)) {
            node_map[id] = static_cast<Index>(graph.nodes.size());
            graph.nodes.push_back(id);
        }
    };

    std::map<std::string, Index> inductor_pos;
    for (const auto& e : netlist.elements) {
        if (e.kind == ElementKind::K) continue;
        if (e.node_plus == e.node_minus)
            throw ParseError("element '" + e.name + "' connects a node to itself");
        visit_node(e.node_plus);
        visit_node(e.node_minus);
        switch (e.kind) {
            case ElementKind::C: graph.capacitors.push_back(e); break;
            case ElementKind::L:
                inductor_pos[e.name] = static_cast<Index>(graph.inductors.size());
                graph.inductors.push_back(e);
                break;
            case ElementKind::R:
            case ElementKind::D: graph.resistors.push_back(e); break;
            case ElementKind::V: graph.vsources.push_back(e); break;
            case ElementKind::I: graph.isources.push_back(e); break;
            default: break;
        }
    }

    for (const auto& e : netlist.elements) {
        if (e.kind != ElementKind::K) continue;
        Coupling c;
        c.name = e.name;
        c.first = inductor_pos.at(e.node_plus);
        c.second = inductor_pos.at(e.node_minus);
        c.mutual = e.params.at(0);
        graph.couplings.push_back(c);
    }

    if (!has_ground) throw ParseError("ground node '0' is missing");

    // Connectivity: every node must reach ground through branches.
    const Index n = graph.num_nodes();
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n) + 1);  // slot n = ground
    auto slot = [&](const std::string& id) {
        return id == "0" ? n : node_map.at(id);
    };
    auto add_edge = [&](const Element& e) {
        const Index a = slot(e.node_plus);
        const Index b = slot(e.node_minus);
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    };
    for (const auto* group : {&graph.capacitors, &graph.inductors, &graph.resistors,
                              &graph.vsources, &graph.isources})
        for (const auto& e : *group) add_edge(e);

    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    std::vector<Index> stack = {n};
    seen[static_cast<std::size_t>(n)] = true;
    while (!stack.empty()) {
        const Index u = stack.back();
        stack.pop_back();
        for (const Index v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                stack.push_back(v);
            }
        }
    }
    for (Index i = 0; i < n; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw ParseError("node '" + graph.nodes[static_cast<std::size_t>(i)] +
                             "' is not connected to ground");

    return graph;
}

}  // namespace mona
