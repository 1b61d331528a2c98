// Dense statevector simulation of the restricted gate set, Pauli-sum
// Hamiltonians, expectation values and exact spectrum bounds.
//
// Conventions:
//  - qubit 0 is the least-significant bit of the basis-state index;
//  - rotations carry no half-angle factor: R_alpha(theta) = exp(-i sigma_alpha theta).

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qas/circuit.hpp"
#include "qas/common.hpp"

namespace qas {

using cdouble = std::complex<double>;

/// 2^n complex amplitudes over n qubits.
struct StateVector {
    int n_qubits = 0;
    std::vector<cdouble> amplitudes;

    StateVector() = default;
    explicit StateVector(int n)
        : n_qubits(n), amplitudes(std::size_t{1} << n, cdouble{0.0, 0.0}) {}

    std::size_t dim() const { return amplitudes.size(); }

    double norm() const {
        double s = 0.0;
        for (const auto &a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }
};

inline StateVector new_zero_state(int n) {
    if (n < 1 || n > 16)
        throw ConfigError("new_zero_state: qubit count must be in [1, 16]");
    StateVector psi(n);
    psi.amplitudes[0] = 1.0;
    return psi;
}

namespace detail {

// Sweeps all index pairs (i0, i1) differing only in bit `q` and applies the
// 2x2 unitary [[u00, u01], [u10, u11]] in place.
inline void apply_single_qubit(StateVector &psi, int q, cdouble u00, cdouble u01,
                               cdouble u10, cdouble u11) {
    const std::size_t bit = std::size_t{1} << q;
    const std::size_t dim = psi.dim();
    auto *a = psi.amplitudes.data();
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
        for (std::size_t lo = base; lo < base + bit; ++lo) {
            const cdouble a0 = a[lo];
            const cdouble a1 = a[lo + bit];
            a[lo] = u00 * a0 + u01 * a1;
            a[lo + bit] = u10 * a0 + u11 * a1;
        }
    }
}

} // namespace detail

/// Applies one gate in place. `theta` is ignored by H and CNOT.
inline void apply_gate(StateVector &psi, const GateOp &g, double theta = 0.0) {
    const int n = psi.n_qubits;
    if (g.target < 0 || g.target >= n)
        throw UsageError("apply_gate: target qubit out of range");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    switch (g.kind) {
    case GateKind::RX: // exp(-i X theta)
        detail::apply_single_qubit(psi, g.target, {c, 0}, {0, -s}, {0, -s}, {c, 0});
        break;
    case GateKind::RY: // exp(-i Y theta)
        detail::apply_single_qubit(psi, g.target, {c, 0}, {-s, 0}, {s, 0}, {c, 0});
        break;
    case GateKind::RZ: // exp(-i Z theta)
        detail::apply_single_qubit(psi, g.target, {c, -s}, {0, 0}, {0, 0}, {c, s});
        break;
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        detail::apply_single_qubit(psi, g.target, {r, 0}, {r, 0}, {r, 0}, {-r, 0});
        break;
    }
    case GateKind::CNOT: {
        if (g.control < 0 || g.control >= n)
            throw UsageError("apply_gate: control qubit out of range");
        if (g.control == g.target)
            throw UsageError("apply_gate: CNOT control equals target");
        const std::size_t cbit = std::size_t{1} << g.control;
        const std::size_t tbit = std::size_t{1} << g.target;
        auto *a = psi.amplitudes.data();
        const std::size_t dim = psi.dim();
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cbit) && !(i & tbit)) std::swap(a[i], a[i | tbit]);
        }
        break;
    }
    }
}

/// Applies every gate in order, reading shared-group angles from `params`.
inline void run_circuit(StateVector &psi, const Circuit &c,
                        const ParamVector &params) {
    if (static_cast<int>(params.size()) != c.n_param_groups)
        throw UsageError("run_circuit: parameter count mismatch");
    if (psi.n_qubits != c.n_qubits)
        throw UsageError("run_circuit: qubit count mismatch");
    for (const auto &g : c.gates)
        apply_gate(psi, g, is_rotation(g.kind) ? params[g.param_slot] : 0.0);
}

inline StateVector apply_circuit(StateVector psi, const Circuit &c,
                                 const ParamVector &params) {
    run_circuit(psi, c, params);
    return psi;
}

/// One weighted Pauli string. Masks are precomputed for fast application:
/// P|z> = phase(z) |z ^ flip_mask> with
/// phase(z) = i^{n_y} * (-1)^{popcount(z & sign_mask)}.
struct PauliTerm {
    double coeff = 0.0;
    std::string paulis; // one of I,X,Y,Z per qubit; index = qubit
    std::uint32_t flip_mask = 0; // X and Y positions
    std::uint32_t sign_mask = 0; // Y and Z positions
    int n_y = 0;

    PauliTerm() = default;
    PauliTerm(double c, std::string p) : coeff(c), paulis(std::move(p)) {
        for (std::size_t q = 0; q < paulis.size(); ++q) {
            switch (paulis[q]) {
            case 'I': break;
            case 'X': flip_mask |= 1u << q; break;
            case 'Y': flip_mask |= 1u << q; sign_mask |= 1u << q; ++n_y; break;
            case 'Z': sign_mask |= 1u << q; break;
            default:
                throw UsageError("PauliTerm: invalid symbol in string");
            }
        }
    }

    bool is_diagonal() const { return flip_mask == 0; }
};

/// Weighted sum of Pauli strings; Hermitian by construction (real coeffs).
struct PauliHamiltonian {
    int n_qubits = 0;
    std::vector<PauliTerm> terms;

    PauliHamiltonian() = default;
    explicit PauliHamiltonian(int n) : n_qubits(n) {}

    void add_term(double coeff, const std::string &paulis) {
        if (static_cast<int>(paulis.size()) != n_qubits)
            throw UsageError("PauliHamiltonian: string length != n_qubits");
        terms.emplace_back(coeff, paulis);
    }

    bool is_diagonal() const {
        return std::all_of(terms.begin(), terms.end(),
                           [](const PauliTerm &t) { return t.is_diagonal(); });
    }
};

struct SpectrumBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

namespace detail {

inline cdouble i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
    }
}

// y += coeff * P x (matrix-free Pauli-term application).
inline void accumulate_term(const PauliTerm &t, const std::vector<cdouble> &x,
                            std::vector<cdouble> &y) {
    const cdouble pref = t.coeff * i_pow(t.n_y);
    const std::size_t dim = x.size();
    for (std::size_t z = 0; z < dim; ++z) {
        const bool neg = std::popcount(z & static_cast<std::size_t>(t.sign_mask)) & 1;
        const cdouble v = neg ? -pref * x[z] : pref * x[z];
        y[z ^ t.flip_mask] += v;
    }
}

inline void ham_matvec(const PauliHamiltonian &h, const std::vector<cdouble> &x,
                       std::vector<cdouble> &y) {
    std::fill(y.begin(), y.end(), cdouble{0, 0});
    for (const auto &t : h.terms) accumulate_term(t, x, y);
}

/// Diagonal entry <z|H|z> for a diagonal (I/Z-only) Hamiltonian.
inline double diagonal_energy(const PauliHamiltonian &h, std::size_t z) {
    double e = 0.0;
    for (const auto &t : h.terms) {
        const bool neg = std::popcount(z & static_cast<std::size_t>(t.sign_mask)) & 1;
        e += neg ? -t.coeff : t.coeff;
    }
    return e;
}

inline Eigen::MatrixXcd dense_matrix(const PauliHamiltonian &h) {
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &t : h.terms) {
        const cdouble pref = t.coeff * i_pow(t.n_y);
        for (std::size_t z = 0; z < dim; ++z) {
            const bool neg =
                std::popcount(z & static_cast<std::size_t>(t.sign_mask)) & 1;
            m(z ^ t.flip_mask, z) += neg ? -pref : pref;
        }
    }
    return m;
}

inline SpectrumBounds dense_extreme(const PauliHamiltonian &h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense_matrix(h),
                                                           Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("dense_extreme: eigensolver failed");
    const auto &ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

/// Smallest eigenvalue by Lanczos with full reorthogonalization on the
/// matrix-free Pauli matvec.
inline double lanczos_min(const PauliHamiltonian &h, std::uint64_t seed,
                          int max_iters, double tol) {
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    Rng rng(seed);
    std::vector<std::vector<cdouble>> basis;
    std::vector<double> alpha, beta;

    std::vector<cdouble> v(dim);
    for (auto &a : v) a = {uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)};
    double nrm = 0.0;
    for (const auto &a : v) nrm += std::norm(a);
    nrm = std::sqrt(nrm);
    for (auto &a : v) a /= nrm;

    std::vector<cdouble> w(dim);
    double prev_theta = 0.0;
    bool have_prev = false;
    double residual = 0.0;

    for (int k = 0; k < max_iters; ++k) {
        basis.push_back(v);
        ham_matvec(h, v, w);
        cdouble a{0, 0};
        for (std::size_t i = 0; i < dim; ++i) a += std::conj(v[i]) * w[i];
        alpha.push_back(a.real());
        // full reorthogonalization keeps the small Krylov basis clean
        for (const auto &b : basis) {
            cdouble proj{0, 0};
            for (std::size_t i = 0; i < dim; ++i) proj += std::conj(b[i]) * w[i];
            for (std::size_t i = 0; i < dim; ++i) w[i] -= proj * b[i];
        }
        double bnorm = 0.0;
        for (const auto &x : w) bnorm += std::norm(x);
        bnorm = std::sqrt(bnorm);

        // Ritz values of the tridiagonal projection
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const double theta = es.eigenvalues()(0);
        const double s_last = std::abs(es.eigenvectors()(m - 1, 0));
        residual = bnorm * s_last;
        if (have_prev && residual < tol && std::abs(theta - prev_theta) < tol)
            return theta;
        prev_theta = theta;
        have_prev = true;

        if (bnorm < 1e-14 || static_cast<std::size_t>(m) >= dim) return theta;
        beta.push_back(bnorm);
        for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / bnorm;
    }
    throw NumericalError("lanczos_min: no convergence after budget, residual " +
                         std::to_string(residual));
}

} // namespace detail

/// Expectation value <psi|H|psi>. The imaginary residue must vanish (the
/// Hamiltonian is Hermitian); anything above 1e-10 trips an error.
inline double expectation(const StateVector &psi, const PauliHamiltonian &h) {
    if (psi.n_qubits != h.n_qubits)
        throw UsageError("expectation: dimension mismatch");
    const std::size_t dim = psi.dim();
    const auto *a = psi.amplitudes.data();
    cdouble total{0, 0};
    for (const auto &t : h.terms) {
        const cdouble pref = t.coeff * detail::i_pow(t.n_y);
        cdouble acc{0, 0};
        for (std::size_t z = 0; z < dim; ++z) {
            const bool neg =
                std::popcount(z & static_cast<std::size_t>(t.sign_mask)) & 1;
            const cdouble v = std::conj(a[z ^ t.flip_mask]) * a[z];
            acc += neg ? -v : v;
        }
        total += pref * acc;
    }
    if (std::abs(total.imag()) > 1e-10)
        throw NumericalError("expectation: non-negligible imaginary part");
    return total.real();
}

/// Exact spectrum bounds. Diagonal Hamiltonians are scanned over basis
/// states; general ones use dense diagonalization up to 10 qubits and a
/// Lanczos iteration beyond.
inline SpectrumBounds extreme_eigenvalues(const PauliHamiltonian &h) {
    if (h.n_qubits < 1 || h.n_qubits > 16)
        throw ConfigError("extreme_eigenvalues: qubit count must be in [1, 16]");
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    if (h.is_diagonal()) {
        double lo = detail::diagonal_energy(h, 0);
        double hi = lo;
        for (std::size_t z = 1; z < dim; ++z) {
            const double e = detail::diagonal_energy(h, z);
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        return {lo, hi};
    }
    if (h.n_qubits <= 10) return detail::dense_extreme(h);

    constexpr int kMaxIters = 400;
    constexpr double kTol = 1e-9;
    const double lo = detail::lanczos_min(h, 0x9c0ffee1u, kMaxIters, kTol);
    PauliHamiltonian neg(h.n_qubits);
    for (const auto &t : h.terms) neg.add_term(-t.coeff, t.paulis);
    const double hi = -detail::lanczos_min(neg, 0x9c0ffee2u, kMaxIters, kTol);
    return {lo, hi};
}

} // namespace qas
