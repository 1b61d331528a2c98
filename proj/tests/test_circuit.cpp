#include <catch_amalgamated.hpp>

#include "qas/circuit.hpp"
#include "qas/problems.hpp"

#include "oracles.hpp"

using namespace qas;

TEST_CASE("append_gate allocates and shares parameter groups") {
    Circuit c(3);
    append_gate(c, GateOp::rx(0));
    CHECK(c.n_param_groups == 1);
    CHECK(c.gates[0].param_slot == 0);

    SECTION("sharing binds to an existing group") {
        append_gate(c, GateOp::rx(1), 0);
        CHECK(c.n_param_groups == 1);
        CHECK(c.gates[1].param_slot == 0);
    }
    SECTION("CNOT leaves the group count unchanged") {
        append_gate(c, GateOp::cnot(0, 1));
        CHECK(c.n_param_groups == 1);
        CHECK(c.gates[1].param_slot == -1);
    }
    SECTION("invalid share target is rejected") {
        CHECK_THROWS_AS(append_gate(c, GateOp::ry(2), 5), UsageError);
        CHECK_THROWS_AS(append_gate(c, GateOp::ry(2), -1), UsageError);
    }
    SECTION("bad indices are rejected") {
        CHECK_THROWS_AS(append_gate(c, GateOp::rx(3)), UsageError);
        CHECK_THROWS_AS(append_gate(c, GateOp::cnot(1, 1)), UsageError);
        CHECK_THROWS_AS(append_gate(c, GateOp::cnot(5, 0)), UsageError);
    }
}

TEST_CASE("structural metrics") {
    SECTION("empty circuit") {
        Circuit c(2);
        CHECK(cnot_count(c) == 0);
        CHECK(param_count(c) == 0);
        CHECK(depth_steps(c) == 0);
    }
    SECTION("QAOA on K4 at p = 2") {
        Graph k4(4);
        for (int u = 0; u < 4; ++u)
            for (int v = u + 1; v < 4; ++v) k4.add_edge(u, v);
        const Circuit c = qaoa_circuit(k4, 2);
        CHECK(cnot_count(c) == 24);
        CHECK(param_count(c) == 4);
    }
    SECTION("HEA n = 8, L = 6") {
        const Circuit c = hea_circuit(8, 6);
        CHECK(cnot_count(c) == 48);
        CHECK(param_count(c) == 144);
    }
}

TEST_CASE("text format round-trips gate-for-gate") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const Circuit c = oracle::random_circuit(rng, 4, 12);
        const Circuit back = circuit_from_string(circuit_to_string(c));
        CHECK(back == c);
    }
}

TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(circuit_from_string("qubits 2\nFOO q0 g0\n"), ConfigError);
    CHECK_THROWS_AS(circuit_from_string("qubits 2\nRX q7 g0\n"), ConfigError);
    CHECK_THROWS_AS(circuit_from_string("qubits 2\ngroups 0\nRX q0 g0\n"),
                    ConfigError);
}

TEST_CASE("parsed metrics are traversal-stable") {
    // counts must agree between the built circuit and its parsed twin
    std::mt19937_64 rng(7);
    const Circuit c = oracle::random_circuit(rng, 5, 25);
    const Circuit p = circuit_from_string(circuit_to_string(c));
    CHECK(cnot_count(p) == cnot_count(c));
    CHECK(param_count(p) == param_count(c));
    CHECK(depth_steps(p) == depth_steps(c));
}
