// Test-only brute-force oracles: dense matrices built from Kronecker
// products, dense circuit/Hamiltonian evaluation, finite differences and a
// few statistics helpers. Nothing here shares code with the library's
// bit-mask or backprop paths.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "qas/circuit.hpp"
#include "qas/statevec.hpp"

namespace oracle {

using qas::cdouble;

/// Dense column-major-agnostic square/rectangular complex matrix.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<cdouble> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, cdouble{0, 0}) {}

    cdouble &operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    cdouble operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Mat kron(const Mat &x, const Mat &y) {
    Mat out(x.rows * y.rows, x.cols * y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            for (std::size_t k = 0; k < y.rows; ++k)
                for (std::size_t l = 0; l < y.cols; ++l)
                    out(i * y.rows + k, j * y.cols + l) = x(i, j) * y(k, l);
    return out;
}

inline Mat matmul(const Mat &x, const Mat &y) {
    Mat out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const cdouble v = x(i, k);
            if (v == cdouble{0, 0}) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

inline std::vector<cdouble> matvec(const Mat &m, const std::vector<cdouble> &x) {
    std::vector<cdouble> y(m.rows, cdouble{0, 0});
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
    return y;
}

inline Mat pauli_matrix_1q(char p) {
    Mat m(2, 2);
    switch (p) {
    case 'I': m(0, 0) = 1; m(1, 1) = 1; break;
    case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': m(0, 1) = {0, -1}; m(1, 0) = {0, 1}; break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    }
    return m;
}

inline Mat gate_matrix_1q(qas::GateKind k, double theta) {
    Mat m(2, 2);
    const double c = std::cos(theta), s = std::sin(theta);
    switch (k) {
    case qas::GateKind::RX:
        m(0, 0) = c; m(0, 1) = {0, -s}; m(1, 0) = {0, -s}; m(1, 1) = c;
        break;
    case qas::GateKind::RY:
        m(0, 0) = c; m(0, 1) = -s; m(1, 0) = s; m(1, 1) = c;
        break;
    case qas::GateKind::RZ:
        m(0, 0) = {c, -s}; m(1, 1) = {c, s};
        break;
    case qas::GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        m(0, 0) = r; m(0, 1) = r; m(1, 0) = r; m(1, 1) = -r;
        break;
    }
    default:
        break;
    }
    return m;
}

/// Embeds a single-qubit matrix at qubit q (qubit 0 = least significant bit):
/// I_{2^(n-1-q)} (x) U (x) I_{2^q}.
inline Mat embed_1q(int n, int q, const Mat &u) {
    Mat m = Mat::identity(std::size_t{1} << q);
    m = kron(u, m);
    m = kron(Mat::identity(std::size_t{1} << (n - 1 - q)), m);
    return m;
}

inline Mat cnot_matrix(int n, int control, int target) {
    const std::size_t dim = std::size_t{1} << n;
    Mat m(dim, dim);
    for (std::size_t z = 0; z < dim; ++z) {
        std::size_t w = z;
        if ((z >> control) & 1u) w ^= std::size_t{1} << target;
        m(w, z) = 1.0;
    }
    return m;
}

inline Mat gate_matrix(int n, const qas::GateOp &g, double theta) {
    if (g.kind == qas::GateKind::CNOT) return cnot_matrix(n, g.control, g.target);
    return embed_1q(n, g.target, gate_matrix_1q(g.kind, theta));
}

inline Mat circuit_matrix(const qas::Circuit &c, const qas::ParamVector &params) {
    Mat m = Mat::identity(std::size_t{1} << c.n_qubits);
    for (const auto &g : c.gates) {
        const double theta = qas::is_rotation(g.kind) ? params[g.param_slot] : 0.0;
        m = matmul(gate_matrix(c.n_qubits, g, theta), m);
    }
    return m;
}

inline Mat pauli_term_matrix(int n, const std::string &paulis) {
    Mat m(1, 1);
    m(0, 0) = 1.0;
    // highest qubit leftmost in the Kronecker chain
    for (int q = n - 1; q >= 0; --q) m = kron(m, pauli_matrix_1q(paulis[q]));
    return m;
}

inline Mat hamiltonian_matrix(const qas::PauliHamiltonian &h) {
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    Mat m(dim, dim);
    for (const auto &t : h.terms) {
        Mat p = pauli_term_matrix(h.n_qubits, t.paulis);
        for (std::size_t i = 0; i < dim * dim; ++i) m.a[i] += t.coeff * p.a[i];
    }
    return m;
}

inline double expectation_dense(const std::vector<cdouble> &psi, const Mat &h) {
    const auto hpsi = matvec(h, psi);
    cdouble acc{0, 0};
    for (std::size_t i = 0; i < psi.size(); ++i) acc += std::conj(psi[i]) * hpsi[i];
    return acc.real();
}

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)> &f, double x,
                           double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Spearman rank correlation with average ranks on ties.
inline double spearman_rho(const std::vector<double> &xs,
                           const std::vector<double> &ys) {
    auto ranks = [](const std::vector<double> &v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(xs), ry = ranks(ys);
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// Random circuit over the full gate set, occasionally sharing groups.
inline qas::Circuit random_circuit(std::mt19937_64 &rng, int n, int n_gates) {
    qas::Circuit c(n);
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> qubit(0, n - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n_gates; ++i) {
        const int pick = kind(rng);
        switch (pick) {
        case 0:
        case 1:
        case 2: {
            const int q = qubit(rng);
            qas::GateOp g = pick == 0   ? qas::GateOp::rx(q)
                            : pick == 1 ? qas::GateOp::ry(q)
                                        : qas::GateOp::rz(q);
            if (c.n_param_groups > 0 && coin(rng) < 0.3) {
                std::uniform_int_distribution<int> grp(0, c.n_param_groups - 1);
                qas::append_gate(c, g, grp(rng));
            } else {
                qas::append_gate(c, g);
            }
            break;
        }
        case 3:
            qas::append_gate(c, qas::GateOp::h(qubit(rng)));
            break;
        default: {
            if (n < 2) {
                qas::append_gate(c, qas::GateOp::h(qubit(rng)));
                break;
            }
            int a = qubit(rng), b = qubit(rng);
            while (b == a) b = qubit(rng);
            qas::append_gate(c, qas::GateOp::cnot(a, b));
            break;
        }
        }
    }
    return c;
}

inline qas::ParamVector random_params(std::mt19937_64 &rng, int count) {
    qas::ParamVector p(count);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    for (auto &v : p) v = angle(rng);
    return p;
}

inline qas::PauliHamiltonian random_hamiltonian(std::mt19937_64 &rng, int n,
                                                int n_terms) {
    qas::PauliHamiltonian h(n);
    std::uniform_int_distribution<int> sym(0, 3);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    const char symbols[] = {'I', 'X', 'Y', 'Z'};
    for (int t = 0; t < n_terms; ++t) {
        std::string p(n, 'I');
        for (int q = 0; q < n; ++q) p[q] = symbols[sym(rng)];
        h.add_term(coeff(rng), p);
    }
    return h;
}

} // namespace oracle
