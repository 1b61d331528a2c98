// Inner-loop variational parameter optimization and quality metrics.
//
// Two optimizers are provided: a derivative-free linear-surrogate
// trust-region method (the COBYLA family: interpolation simplex, linear
// model, trust radius shrinking from rho_begin to rho_end) and ADAM driven
// by parameter-shift gradients. Rotations carry no half-angle factor, so
// the shift rule uses +-pi/4: dE/dtheta = E(theta + pi/4) - E(theta - pi/4).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qas/circuit.hpp"
#include "qas/common.hpp"
#include "qas/statevec.hpp"

namespace qas {

struct OptResult {
    ParamVector best_params;
    double best_energy = 0.0;
    int evaluations = 0;
};

enum class OptMethod { derivative_free, adam_paramshift };

struct OptConfig {
    OptMethod method = OptMethod::derivative_free;
    int max_evals = 150; // objective evaluations (derivative-free) or ADAM iterations
    int restarts = 1;
    double lr = 0.1;            // ADAM only
    double rho_begin = std::numbers::pi / 2.0;
    double rho_end = 1e-3;
    std::uint64_t seed = 0;
};

/// Reusable energy evaluator for one (circuit, Hamiltonian) pair.
class CircuitObjective {
  public:
    CircuitObjective(const Circuit &c, const PauliHamiltonian &h)
        : circuit_(&c), ham_(&h), scratch_(c.n_qubits > 0 ? c.n_qubits : 1) {
        if (c.n_qubits != h.n_qubits)
            throw UsageError("CircuitObjective: circuit/Hamiltonian size mismatch");
    }

    int dim() const { return circuit_->n_param_groups; }

    double operator()(const ParamVector &params) const {
        prepare(params);
        return expectation(scratch_, *ham_);
    }

    /// Energy with one gate's angle shifted by delta (others unchanged);
    /// used by the per-gate parameter-shift rule under shared groups.
    double shifted(const ParamVector &params, std::size_t gate_index,
                   double delta) const {
        reset_scratch();
        const auto &gates = circuit_->gates;
        for (std::size_t i = 0; i < gates.size(); ++i) {
            const auto &g = gates[i];
            double theta = is_rotation(g.kind) ? params[g.param_slot] : 0.0;
            if (i == gate_index) theta += delta;
            apply_gate(scratch_, g, theta);
        }
        return expectation(scratch_, *ham_);
    }

    const Circuit &circuit() const { return *circuit_; }

  private:
    void reset_scratch() const {
        std::fill(scratch_.amplitudes.begin(), scratch_.amplitudes.end(),
                  cdouble{0, 0});
        scratch_.amplitudes[0] = 1.0;
    }

    void prepare(const ParamVector &params) const {
        if (static_cast<int>(params.size()) != circuit_->n_param_groups)
            throw UsageError("CircuitObjective: parameter count mismatch");
        reset_scratch();
        for (const auto &g : circuit_->gates)
            apply_gate(scratch_, g,
                       is_rotation(g.kind) ? params[g.param_slot] : 0.0);
    }

    const Circuit *circuit_;
    const PauliHamiltonian *ham_;
    mutable StateVector scratch_;
};

namespace detail {

/// Linear-surrogate trust-region minimizer. Maintains a d+1 interpolation
/// simplex, fits a linear model, steps along its negative gradient with a
/// trust radius in [rho, rho_begin], and halves rho on stalls until rho_end.
template <class F>
OptResult trust_region_minimize(F &&f, const ParamVector &x0, double rho_begin,
                                double rho_end, int max_evals) {
    const int d = static_cast<int>(x0.size());
    OptResult out;
    out.best_params = x0;
    int evals = 0;
    auto eval = [&](const ParamVector &x) {
        const double v = f(x);
        ++evals;
        if (v < out.best_energy || evals == 1) {
            out.best_energy = v;
            out.best_params = x;
        }
        return v;
    };

    if (d == 0) {
        out.best_energy = eval(x0);
        out.evaluations = evals;
        return out;
    }

    std::vector<ParamVector> pts(d + 1, x0);
    std::vector<double> fv(d + 1, std::numeric_limits<double>::infinity());
    auto rebuild = [&](const ParamVector &center, double radius) {
        pts[0] = center;
        fv[0] = eval(center);
        for (int i = 0; i < d; ++i) {
            pts[i + 1] = center;
            pts[i + 1][i] += radius;
            fv[i + 1] = evals < max_evals
                            ? eval(pts[i + 1])
                            : std::numeric_limits<double>::infinity();
        }
    };

    double rho = rho_begin;
    double radius = rho_begin;
    rebuild(x0, rho);

    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd rhs(d);
    while (evals < max_evals && rho >= rho_end) {
        int ib = 0;
        for (int i = 1; i <= d; ++i)
            if (fv[i] < fv[ib]) ib = i;
        std::swap(pts[0], pts[ib]);
        std::swap(fv[0], fv[ib]);

        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) a(i, j) = pts[i + 1][j] - pts[0][j];
            rhs(i) = fv[i + 1] - fv[0];
        }
        Eigen::VectorXd g = a.colPivHouseholderQr().solve(rhs);
        const double gnorm = g.norm();
        if (!std::isfinite(gnorm) || gnorm < 1e-14) {
            rho *= 0.5;
            radius = rho;
            if (rho < rho_end || evals >= max_evals) break;
            rebuild(pts[0], rho);
            continue;
        }

        ParamVector xt = pts[0];
        for (int j = 0; j < d; ++j) xt[j] -= radius * g(j) / gnorm;
        const double ft = eval(xt);

        if (ft < fv[0] - 1e-14 * (1.0 + std::abs(fv[0]))) {
            int iw = 0;
            for (int i = 1; i <= d; ++i)
                if (fv[i] > fv[iw]) iw = i;
            pts[iw] = std::move(xt);
            fv[iw] = ft;
            radius = std::min(radius * 1.6, rho_begin);
        } else if (radius > rho * 1.5) {
            radius = std::max(radius * 0.5, rho);
        } else {
            // resolution exhausted at this rho: shrink and recondition
            rho *= 0.5;
            radius = rho;
            if (rho < rho_end || evals >= max_evals) break;
            ParamVector center = pts[0];
            rebuild(center, rho);
        }
    }
    out.evaluations = evals;
    return out;
}

} // namespace detail

/// Derivative-free optimization from seeded uniform starts in [0, 2pi)^d,
/// best of cfg.restarts; ties go to the lowest restart index.
inline OptResult optimize_derivative_free(const Circuit &c,
                                          const PauliHamiltonian &h,
                                          const OptConfig &cfg) {
    CircuitObjective obj(c, h);
    const int d = obj.dim();
    OptResult best;
    bool first = true;
    int total_evals = 0;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Rng rng = make_rng(cfg.seed, "dfo-start", static_cast<std::uint64_t>(r));
        ParamVector x0(d);
        for (auto &x : x0) x = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        OptResult res = detail::trust_region_minimize(obj, x0, cfg.rho_begin,
                                                      cfg.rho_end, cfg.max_evals);
        total_evals += res.evaluations;
        if (first || res.best_energy < best.best_energy) {
            best = std::move(res);
            first = false;
        }
        if (d == 0) break;
    }
    best.evaluations = total_evals;
    return best;
}

/// Gradient of the energy w.r.t. each parameter group via the exact shift
/// rule; a group's gradient is the sum over the gates bound to it.
inline ParamVector paramshift_gradient(const CircuitObjective &obj,
                                       const ParamVector &params,
                                       int *eval_count = nullptr) {
    const auto &gates = obj.circuit().gates;
    ParamVector grad(params.size(), 0.0);
    constexpr double kShift = std::numbers::pi / 4.0;
    int evals = 0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (!is_rotation(gates[i].kind)) continue;
        const double plus = obj.shifted(params, i, kShift);
        const double minus = obj.shifted(params, i, -kShift);
        evals += 2;
        grad[gates[i].param_slot] += plus - minus;
    }
    if (eval_count) *eval_count += evals;
    return grad;
}

/// ADAM on shift-rule gradients; cfg.max_evals counts iterations and the
/// best evaluated point across iterations and restarts is returned.
inline OptResult optimize_adam_paramshift(const Circuit &c,
                                          const PauliHamiltonian &h,
                                          const OptConfig &cfg) {
    CircuitObjective obj(c, h);
    const int d = obj.dim();
    OptResult best;
    bool first = true;
    int total_evals = 0;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Rng rng = make_rng(cfg.seed, "adam-start", static_cast<std::uint64_t>(r));
        ParamVector x(d);
        for (auto &v : x) v = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        std::vector<double> m(d, 0.0), v2(d, 0.0);
        double e = obj(x);
        ++total_evals;
        if (first || e < best.best_energy) {
            best = {x, e, 0};
            first = false;
        }
        for (int it = 1; it <= cfg.max_evals && d > 0; ++it) {
            ParamVector g = paramshift_gradient(obj, x, &total_evals);
            for (int j = 0; j < d; ++j) {
                m[j] = kBeta1 * m[j] + (1 - kBeta1) * g[j];
                v2[j] = kBeta2 * v2[j] + (1 - kBeta2) * g[j] * g[j];
                const double mh = m[j] / (1 - std::pow(kBeta1, it));
                const double vh = v2[j] / (1 - std::pow(kBeta2, it));
                x[j] -= cfg.lr * mh / (std::sqrt(vh) + kEps);
            }
            e = obj(x);
            ++total_evals;
            if (e < best.best_energy) best = {x, e, 0};
        }
        if (d == 0) break;
    }
    best.evaluations = total_evals;
    return best;
}

inline OptResult optimize(const Circuit &c, const PauliHamiltonian &h,
                          const OptConfig &cfg) {
    return cfg.method == OptMethod::derivative_free
               ? optimize_derivative_free(c, h, cfg)
               : optimize_adam_paramshift(c, h, cfg);
}

/// Normalized approximation ratio eta = (lambda_max - E) / (lambda_max -
/// lambda_min), clamped to [0, 1] only against floating-point spill.
inline double approximation_ratio(double energy, const SpectrumBounds &b) {
    const double width = b.lambda_max - b.lambda_min;
    if (width <= 0.0)
        throw std::domain_error("approximation_ratio: degenerate spectrum");
    double eta = (b.lambda_max - energy) / width;
    if (eta > 1.0 && eta < 1.0 + 1e-9) eta = 1.0;
    if (eta < 0.0 && eta > -1e-9) eta = 0.0;
    return eta;
}

} // namespace qas
