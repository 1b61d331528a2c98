// Circuit intermediate representation: ordered gate list with
// shared-parameter groups, structural metrics and a text format.

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qas/common.hpp"

namespace qas {

enum class GateKind { RX, RY, RZ, H, CNOT };

inline bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline const char *gate_name(GateKind k) {
    switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
    }
    return "?";
}

/// One gate. `control` is used only by CNOT, `param_slot` only by rotations;
/// both are -1 otherwise.
struct GateOp {
    GateKind kind = GateKind::RX;
    int target = 0;
    int control = -1;
    int param_slot = -1;

    static GateOp rx(int q, int slot = -1) { return {GateKind::RX, q, -1, slot}; }
    static GateOp ry(int q, int slot = -1) { return {GateKind::RY, q, -1, slot}; }
    static GateOp rz(int q, int slot = -1) { return {GateKind::RZ, q, -1, slot}; }
    static GateOp h(int q) { return {GateKind::H, q, -1, -1}; }
    static GateOp cnot(int control, int target) {
        return {GateKind::CNOT, target, control, -1};
    }

    bool operator==(const GateOp &) const = default;
};

/// Parameter values, one per shared-parameter group.
using ParamVector = std::vector<double>;

/// Ordered gate list over `n_qubits` qubits. Rotation gates bind to
/// parameter groups so several gates can share one variational angle.
/// `n_steps` records how many construction steps produced the circuit
/// (metadata; the environment marks one step per joint action).
struct Circuit {
    int n_qubits = 0;
    std::vector<GateOp> gates;
    int n_param_groups = 0;
    int n_steps = 0;

    explicit Circuit(int n = 0) : n_qubits(n) {}

    bool operator==(const Circuit &) const = default;
};

/// Appends a gate. Rotations allocate a fresh parameter group unless
/// `share_with` names an existing one.
inline void append_gate(Circuit &c, GateOp g,
                        std::optional<int> share_with = std::nullopt) {
    if (g.target < 0 || g.target >= c.n_qubits)
        throw UsageError("append_gate: target qubit out of range");
    if (g.kind == GateKind::CNOT) {
        if (g.control < 0 || g.control >= c.n_qubits)
            throw UsageError("append_gate: control qubit out of range");
        if (g.control == g.target)
            throw UsageError("append_gate: CNOT control equals target");
    }
    if (is_rotation(g.kind)) {
        if (share_with) {
            if (*share_with < 0 || *share_with >= c.n_param_groups)
                throw UsageError("append_gate: share_with names no existing group");
            g.param_slot = *share_with;
        } else {
            g.param_slot = c.n_param_groups++;
        }
    } else {
        g.param_slot = -1;
    }
    c.gates.push_back(g);
}

inline int cnot_count(const Circuit &c) {
    int k = 0;
    for (const auto &g : c.gates)
        if (g.kind == GateKind::CNOT) ++k;
    return k;
}

inline int param_count(const Circuit &c) { return c.n_param_groups; }

inline int depth_steps(const Circuit &c) { return c.n_steps; }

/// Text format: header lines (`qubits`, `groups`, `steps`), then one gate
/// per line, e.g. `RX q3 g2` or `CNOT q3 q4` (CNOT: control first).
inline void write_circuit(std::ostream &os, const Circuit &c) {
    os << "qubits " << c.n_qubits << "\n";
    os << "groups " << c.n_param_groups << "\n";
    os << "steps " << c.n_steps << "\n";
    for (const auto &g : c.gates) {
        os << gate_name(g.kind);
        if (g.kind == GateKind::CNOT)
            os << " q" << g.control << " q" << g.target;
        else if (is_rotation(g.kind))
            os << " q" << g.target << " g" << g.param_slot;
        else
            os << " q" << g.target;
        os << "\n";
    }
}

inline std::string circuit_to_string(const Circuit &c) {
    std::ostringstream os;
    write_circuit(os, c);
    return os.str();
}

namespace detail {
inline int parse_tagged_int(const std::string &tok, char tag, const char *what) {
    if (tok.size() < 2 || tok[0] != tag)
        throw ConfigError(std::string("circuit parse: expected ") + what +
                          " token, got '" + tok + "'");
    return std::stoi(tok.substr(1));
}
} // namespace detail

inline Circuit read_circuit(std::istream &is) {
    Circuit c;
    int declared_groups = -1;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "qubits") {
            ls >> c.n_qubits;
        } else if (head == "groups") {
            ls >> declared_groups;
        } else if (head == "steps") {
            ls >> c.n_steps;
        } else {
            GateOp g;
            std::string t1, t2;
            if (head == "RX") g.kind = GateKind::RX;
            else if (head == "RY") g.kind = GateKind::RY;
            else if (head == "RZ") g.kind = GateKind::RZ;
            else if (head == "H") g.kind = GateKind::H;
            else if (head == "CNOT") g.kind = GateKind::CNOT;
            else throw ConfigError("circuit parse: unknown gate '" + head + "'");
            if (g.kind == GateKind::CNOT) {
                ls >> t1 >> t2;
                g.control = detail::parse_tagged_int(t1, 'q', "control qubit");
                g.target = detail::parse_tagged_int(t2, 'q', "target qubit");
            } else if (is_rotation(g.kind)) {
                ls >> t1 >> t2;
                g.target = detail::parse_tagged_int(t1, 'q', "qubit");
                g.param_slot = detail::parse_tagged_int(t2, 'g', "group");
            } else {
                ls >> t1;
                g.target = detail::parse_tagged_int(t1, 'q', "qubit");
            }
            c.gates.push_back(g);
        }
    }
    for (const auto &g : c.gates) {
        if (g.target < 0 || g.target >= c.n_qubits ||
            (g.kind == GateKind::CNOT &&
             (g.control < 0 || g.control >= c.n_qubits)))
            throw ConfigError("circuit parse: qubit index out of range");
        if (is_rotation(g.kind))
            c.n_param_groups = std::max(c.n_param_groups, g.param_slot + 1);
    }
    if (declared_groups >= 0 && declared_groups != c.n_param_groups) {
        if (declared_groups < c.n_param_groups)
            throw ConfigError("circuit parse: group count below used groups");
        c.n_param_groups = declared_groups;
    }
    return c;
}

inline Circuit circuit_from_string(const std::string &text) {
    std::istringstream is(text);
    return read_circuit(is);
}

} // namespace qas
