#include <catch_amalgamated.hpp>

#include <numbers>

#include "qas/statevec.hpp"
#include "qas/problems.hpp"

#include "oracles.hpp"

using namespace qas;
using Catch::Approx;

namespace {

double amp_distance(const StateVector &psi, const std::vector<cdouble> &ref) {
    double d = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
        d = std::max(d, std::abs(psi.amplitudes[i] - ref[i]));
    return d;
}

} // namespace

TEST_CASE("new_zero_state") {
    const auto one = new_zero_state(1);
    REQUIRE(one.dim() == 2);
    CHECK(one.amplitudes[0] == cdouble{1.0, 0.0});
    CHECK(one.amplitudes[1] == cdouble{0.0, 0.0});

    const auto two = new_zero_state(2);
    REQUIRE(two.dim() == 4);
    CHECK(two.amplitudes[0] == cdouble{1.0, 0.0});
    for (int i = 1; i < 4; ++i) CHECK(two.amplitudes[i] == cdouble{0.0, 0.0});

    CHECK(new_zero_state(3).norm() == Approx(1.0).margin(1e-15));

    CHECK_THROWS_AS(new_zero_state(0), ConfigError);
    CHECK_THROWS_AS(new_zero_state(17), ConfigError);
}

TEST_CASE("single-gate actions") {
    SECTION("Rx(pi/2) maps |0> to -i|1>") {
        auto psi = new_zero_state(1);
        apply_gate(psi, GateOp::rx(0), std::numbers::pi / 2);
        CHECK(std::abs(psi.amplitudes[0]) < 1e-15);
        CHECK(std::abs(psi.amplitudes[1] - cdouble{0.0, -1.0}) < 1e-15);
    }
    SECTION("CNOT truth table: |10> (qubit 0 set) -> |11>") {
        auto psi = new_zero_state(2);
        apply_gate(psi, GateOp::rx(0), std::numbers::pi / 2); // -i|01>... qubit0=1
        apply_gate(psi, GateOp::cnot(0, 1));
        // basis index 0b11 = 3, global phase -i
        CHECK(std::abs(psi.amplitudes[3] - cdouble{0.0, -1.0}) < 1e-14);
    }
    SECTION("Ry followed by Ry with opposite angle is the identity") {
        std::mt19937_64 rng(5);
        auto c = oracle::random_circuit(rng, 3, 8);
        auto p = oracle::random_params(rng, c.n_param_groups);
        auto psi = apply_circuit(new_zero_state(3), c, p);
        const auto before = psi.amplitudes;
        apply_gate(psi, GateOp::ry(1), 0.7);
        apply_gate(psi, GateOp::ry(1), -0.7);
        CHECK(amp_distance(psi, before) < 1e-12);
    }
    SECTION("index out of bounds") {
        auto psi = new_zero_state(2);
        CHECK_THROWS_AS(apply_gate(psi, GateOp::rx(2), 0.1), UsageError);
        CHECK_THROWS_AS(apply_gate(psi, GateOp::cnot(0, 2)), UsageError);
    }
}

TEST_CASE("apply_circuit") {
    SECTION("empty circuit is the identity") {
        auto psi = new_zero_state(2);
        apply_gate(psi, GateOp::h(0));
        const auto before = psi.amplitudes;
        const Circuit empty(2);
        psi = apply_circuit(std::move(psi), empty, {});
        CHECK(amp_distance(psi, before) == 0.0);
    }
    SECTION("shared group drives both gates") {
        Circuit c(2);
        append_gate(c, GateOp::rx(0));
        append_gate(c, GateOp::rx(1), 0);
        auto psi = apply_circuit(new_zero_state(2), c, {std::numbers::pi / 2});
        // (-i)^2 |11>
        CHECK(std::abs(psi.amplitudes[3] - cdouble{-1.0, 0.0}) < 1e-14);
    }
    SECTION("parameter count mismatch") {
        Circuit c(1);
        append_gate(c, GateOp::rx(0));
        auto psi = new_zero_state(1);
        CHECK_THROWS_AS(run_circuit(psi, c, {}), UsageError);
    }
}

TEST_CASE("oracle equivalence on random circuits") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(trial % 3);
        const auto c = oracle::random_circuit(rng, n, 10);
        const auto params = oracle::random_params(rng, c.n_param_groups);
        const auto psi = apply_circuit(new_zero_state(n), c, params);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-10);

        const auto m = oracle::circuit_matrix(c, params);
        std::vector<cdouble> ref(std::size_t{1} << n, cdouble{0, 0});
        ref[0] = 1.0;
        ref = oracle::matvec(m, ref);
        CHECK(amp_distance(psi, ref) < 1e-10);
    }
}

TEST_CASE("expectation values") {
    SECTION("|0> under Z gives +1") {
        PauliHamiltonian h(1);
        h.add_term(1.0, "Z");
        CHECK(expectation(new_zero_state(1), h) == Approx(1.0).margin(1e-14));
    }
    SECTION("|+> under Z gives 0") {
        PauliHamiltonian h(1);
        h.add_term(1.0, "Z");
        auto psi = new_zero_state(1);
        apply_gate(psi, GateOp::h(0));
        CHECK(expectation(psi, h) == Approx(0.0).margin(1e-14));
    }
    SECTION("random states against the dense quadratic form") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 3;
            const auto c = oracle::random_circuit(rng, n, 12);
            const auto params = oracle::random_params(rng, c.n_param_groups);
            const auto psi = apply_circuit(new_zero_state(n), c, params);
            const auto h = oracle::random_hamiltonian(rng, n, 5);
            const double got = expectation(psi, h);
            const double want = oracle::expectation_dense(
                psi.amplitudes, oracle::hamiltonian_matrix(h));
            CHECK(got == Approx(want).margin(1e-10));
        }
    }
    SECTION("dimension mismatch") {
        PauliHamiltonian h(2);
        h.add_term(1.0, "ZZ");
        CHECK_THROWS_AS(expectation(new_zero_state(1), h), UsageError);
    }
}

TEST_CASE("norm preservation over long gate sequences") {
    std::mt19937_64 rng(2024);
    auto psi = new_zero_state(4);
    for (int i = 0; i < 200; ++i) {
        const auto c = oracle::random_circuit(rng, 4, 5);
        const auto params = oracle::random_params(rng, c.n_param_groups);
        run_circuit(psi, c, params);
        REQUIRE(std::abs(psi.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("extreme eigenvalues") {
    SECTION("single Z") {
        PauliHamiltonian h(1);
        h.add_term(1.0, "Z");
        const auto b = extreme_eigenvalues(h);
        CHECK(b.lambda_min == Approx(-1.0).margin(1e-12));
        CHECK(b.lambda_max == Approx(1.0).margin(1e-12));
    }
    SECTION("Max-Cut on K4 by brute force over bitstrings") {
        Graph k4(4);
        for (int u = 0; u < 4; ++u)
            for (int v = u + 1; v < 4; ++v) k4.add_edge(u, v);
        const auto h = maxcut_hamiltonian(k4);
        const auto b = extreme_eigenvalues(h);
        int best_cut = 0;
        for (std::uint32_t z = 0; z < 16; ++z)
            best_cut = std::max(best_cut, cut_value(k4, z));
        CHECK(b.lambda_min == Approx(-best_cut).margin(1e-12));
        CHECK(b.lambda_min == Approx(-4.0).margin(1e-12));
        CHECK(b.lambda_max == Approx(0.0).margin(1e-12));
    }
    SECTION("diagonal path equals the bitstring scan exactly") {
        std::mt19937_64 rng(7);
        PauliHamiltonian h(3);
        std::uniform_real_distribution<double> coeff(-1.5, 1.5);
        h.add_term(coeff(rng), "ZIZ");
        h.add_term(coeff(rng), "IZZ");
        h.add_term(coeff(rng), "ZII");
        h.add_term(coeff(rng), "III");
        const auto b = extreme_eigenvalues(h);
        double lo = 1e300, hi = -1e300;
        const auto m = oracle::hamiltonian_matrix(h);
        for (std::size_t z = 0; z < 8; ++z) {
            lo = std::min(lo, m(z, z).real());
            hi = std::max(hi, m(z, z).real());
        }
        CHECK(b.lambda_min == lo);
        CHECK(b.lambda_max == hi);
    }
    SECTION("dense and Lanczos paths agree on a general Hamiltonian") {
        std::mt19937_64 rng(11);
        const auto h = oracle::random_hamiltonian(rng, 4, 8);
        const auto dense = detail::dense_extreme(h);
        const double lo = detail::lanczos_min(h, 1, 400, 1e-10);
        CHECK(lo == Approx(dense.lambda_min).margin(1e-8));
    }
}
