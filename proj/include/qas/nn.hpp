// Minimal trainable neural primitives with exact backpropagation:
// linear layers, ReLU, absolute activation, a GRU cell, and ADAM.
// Everything is 64-bit and deliberately allocation-simple; the networks in
// this project are tiny (widths around 64).

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qas/common.hpp"

namespace qas::nn {

using Vec = std::vector<double>;

/// Row-major rows x cols matrix.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    Vec data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double &operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

inline void matvec(const Tensor2 &w, const Vec &x, Vec &y) {
    if (static_cast<int>(x.size()) != w.cols || static_cast<int>(y.size()) != w.rows)
        throw UsageError("matvec: shape mismatch");
    const double *wd = w.data.data();
    for (int r = 0; r < w.rows; ++r) {
        double acc = 0.0;
        const double *row = wd + static_cast<std::size_t>(r) * w.cols;
        for (int c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

/// y += W^T x (used by backward passes).
inline void matvec_transposed_add(const Tensor2 &w, const Vec &x, Vec &y) {
    if (static_cast<int>(x.size()) != w.rows || static_cast<int>(y.size()) != w.cols)
        throw UsageError("matvec_transposed_add: shape mismatch");
    const double *wd = w.data.data();
    for (int r = 0; r < w.rows; ++r) {
        const double *row = wd + static_cast<std::size_t>(r) * w.cols;
        const double xr = x[r];
        for (int c = 0; c < w.cols; ++c) y[c] += row[c] * xr;
    }
}

/// grad_W += dy (outer) x.
inline void outer_add(Tensor2 &gw, const Vec &dy, const Vec &x) {
    double *gd = gw.data.data();
    for (int r = 0; r < gw.rows; ++r) {
        double *row = gd + static_cast<std::size_t>(r) * gw.cols;
        const double d = dy[r];
        for (int c = 0; c < gw.cols; ++c) row[c] += d * x[c];
    }
}

inline void relu(const Vec &x, Vec &y) {
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

/// dx = dy * [x > 0]; the subgradient at 0 is 0.
inline void relu_backward(const Vec &x, const Vec &dy, Vec &dx) {
    dx.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

inline void abs_act(const Vec &x, Vec &y) {
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::abs(x[i]);
}

/// dx = dy * sign(x); the subgradient at 0 is 0.
inline void abs_backward(const Vec &x, const Vec &dy, Vec &dx) {
    dx.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        dx[i] = x[i] > 0.0 ? dy[i] : (x[i] < 0.0 ? -dy[i] : 0.0);
}

/// Fully-connected layer with owned gradients.
struct Linear {
    Tensor2 w;
    Vec b;
    Tensor2 gw;
    Vec gb;

    Linear() = default;
    Linear(int out, int in) : w(out, in), b(out, 0.0), gw(out, in), gb(out, 0.0) {}

    int in_dim() const { return w.cols; }
    int out_dim() const { return w.rows; }

    void forward(const Vec &x, Vec &y) const {
        y.resize(b.size());
        matvec(w, x, y);
        for (std::size_t i = 0; i < b.size(); ++i) y[i] += b[i];
    }

    /// Accumulates parameter grads; adds dL/dx into dx (caller sizes & zeroes).
    void backward(const Vec &x, const Vec &dy, Vec &dx) {
        outer_add(gw, dy, x);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += dy[i];
        matvec_transposed_add(w, dy, dx);
    }

    void zero_grad() {
        std::fill(gw.data.begin(), gw.data.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
    }
};

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Per-step cache the GRU backward pass needs.
struct GruCache {
    Vec x, h_prev, z, r, hhat, rh;
};

/// Standard GRU cell:
///   z = sigmoid(Wz x + Uz h + bz)
///   r = sigmoid(Wr x + Ur h + br)
///   hhat = tanh(Wh x + Uh (r . h) + bh)
///   h' = (1 - z) . h + z . hhat
struct GruCell {
    Tensor2 wz, wr, wh; // input kernels (hidden x in)
    Tensor2 uz, ur, uh; // recurrent kernels (hidden x hidden)
    Vec bz, br, bh;
    Tensor2 gwz, gwr, gwh, guz, gur, guh;
    Vec gbz, gbr, gbh;

    GruCell() = default;
    GruCell(int hidden, int in)
        : wz(hidden, in), wr(hidden, in), wh(hidden, in), uz(hidden, hidden),
          ur(hidden, hidden), uh(hidden, hidden), bz(hidden, 0.0), br(hidden, 0.0),
          bh(hidden, 0.0), gwz(hidden, in), gwr(hidden, in), gwh(hidden, in),
          guz(hidden, hidden), gur(hidden, hidden), guh(hidden, hidden),
          gbz(hidden, 0.0), gbr(hidden, 0.0), gbh(hidden, 0.0) {}

    int hidden_dim() const { return static_cast<int>(bz.size()); }
    int in_dim() const { return wz.cols; }

    void forward(const Vec &x, const Vec &h_prev, Vec &h_next,
                 GruCache *cache = nullptr) const {
        const int hd = hidden_dim();
        Vec z(hd), r(hd), hhat(hd), rh(hd), tmp(hd);
        matvec(wz, x, z);
        matvec(uz, h_prev, tmp);
        for (int i = 0; i < hd; ++i) z[i] = sigmoid(z[i] + tmp[i] + bz[i]);
        matvec(wr, x, r);
        matvec(ur, h_prev, tmp);
        for (int i = 0; i < hd; ++i) r[i] = sigmoid(r[i] + tmp[i] + br[i]);
        for (int i = 0; i < hd; ++i) rh[i] = r[i] * h_prev[i];
        matvec(wh, x, hhat);
        matvec(uh, rh, tmp);
        for (int i = 0; i < hd; ++i) hhat[i] = std::tanh(hhat[i] + tmp[i] + bh[i]);
        h_next.resize(hd);
        for (int i = 0; i < hd; ++i)
            h_next[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hhat[i];
        if (cache) {
            cache->x = x;
            cache->h_prev = h_prev;
            cache->z = std::move(z);
            cache->r = std::move(r);
            cache->hhat = std::move(hhat);
            cache->rh = std::move(rh);
        }
    }

    /// Exact backward through one step. Accumulates parameter grads and adds
    /// dL/dx into dx; writes dL/dh_prev into dh_prev (overwritten).
    void backward(const GruCache &c, const Vec &dh_next, Vec &dx, Vec &dh_prev) {
        const int hd = hidden_dim();
        Vec dz(hd), dhhat(hd), da_h(hd), da_z(hd), da_r(hd), drh(hd), dr(hd);
        dh_prev.assign(hd, 0.0);
        for (int i = 0; i < hd; ++i) {
            dz[i] = dh_next[i] * (c.hhat[i] - c.h_prev[i]);
            dhhat[i] = dh_next[i] * c.z[i];
            dh_prev[i] += dh_next[i] * (1.0 - c.z[i]);
            da_h[i] = dhhat[i] * (1.0 - c.hhat[i] * c.hhat[i]);
        }
        outer_add(gwh, da_h, c.x);
        outer_add(guh, da_h, c.rh);
        for (int i = 0; i < hd; ++i) gbh[i] += da_h[i];
        std::fill(drh.begin(), drh.end(), 0.0);
        matvec_transposed_add(uh, da_h, drh);
        for (int i = 0; i < hd; ++i) {
            dr[i] = drh[i] * c.h_prev[i];
            dh_prev[i] += drh[i] * c.r[i];
            da_z[i] = dz[i] * c.z[i] * (1.0 - c.z[i]);
            da_r[i] = dr[i] * c.r[i] * (1.0 - c.r[i]);
        }
        outer_add(gwz, da_z, c.x);
        outer_add(guz, da_z, c.h_prev);
        outer_add(gwr, da_r, c.x);
        outer_add(gur, da_r, c.h_prev);
        for (int i = 0; i < hd; ++i) {
            gbz[i] += da_z[i];
            gbr[i] += da_r[i];
        }
        matvec_transposed_add(uz, da_z, dh_prev);
        matvec_transposed_add(ur, da_r, dh_prev);
        matvec_transposed_add(wz, da_z, dx);
        matvec_transposed_add(wr, da_r, dx);
        matvec_transposed_add(wh, da_h, dx);
    }

    void zero_grad() {
        for (Tensor2 *t : {&gwz, &gwr, &gwh, &guz, &gur, &guh})
            std::fill(t->data.begin(), t->data.end(), 0.0);
        for (Vec *v : {&gbz, &gbr, &gbh}) std::fill(v->begin(), v->end(), 0.0);
    }
};

/// A named view of one parameter array and its gradient.
struct NamedParam {
    std::string name;
    Vec *value = nullptr;
    Vec *grad = nullptr;
    std::vector<int> shape;
};

inline NamedParam named(const std::string &name, Tensor2 &t, Tensor2 &g) {
    return {name, &t.data, &g.data, {t.rows, t.cols}};
}

inline NamedParam named(const std::string &name, Vec &v, Vec &g) {
    return {name, &v, &g, {static_cast<int>(v.size())}};
}

inline void collect_params(Linear &l, const std::string &prefix,
                           std::vector<NamedParam> &out) {
    out.push_back(named(prefix + ".w", l.w, l.gw));
    out.push_back(named(prefix + ".b", l.b, l.gb));
}

inline void collect_params(GruCell &g, const std::string &prefix,
                           std::vector<NamedParam> &out) {
    out.push_back(named(prefix + ".wz", g.wz, g.gwz));
    out.push_back(named(prefix + ".wr", g.wr, g.gwr));
    out.push_back(named(prefix + ".wh", g.wh, g.gwh));
    out.push_back(named(prefix + ".uz", g.uz, g.guz));
    out.push_back(named(prefix + ".ur", g.ur, g.gur));
    out.push_back(named(prefix + ".uh", g.uh, g.guh));
    out.push_back(named(prefix + ".bz", g.bz, g.gbz));
    out.push_back(named(prefix + ".br", g.br, g.gbr));
    out.push_back(named(prefix + ".bh", g.bh, g.gbh));
}

/// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights, zero biases.
inline void init_uniform(Tensor2 &t, Rng &rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
    for (auto &v : t.data) v = uniform_real(rng, -bound, bound);
}

inline void init_linear(Linear &l, Rng &rng) {
    init_uniform(l.w, rng);
    std::fill(l.b.begin(), l.b.end(), 0.0);
}

inline void init_gru(GruCell &g, Rng &rng) {
    for (Tensor2 *t : {&g.wz, &g.wr, &g.wh, &g.uz, &g.ur, &g.uh})
        init_uniform(*t, rng);
    for (Vec *v : {&g.bz, &g.br, &g.bh}) std::fill(v->begin(), v->end(), 0.0);
}

/// Bias-corrected ADAM over a fixed list of parameter arrays.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step_count = 0;
    std::vector<Vec> first_moment;
    std::vector<Vec> second_moment;

    void attach(const std::vector<NamedParam> &params) {
        first_moment.clear();
        second_moment.clear();
        for (const auto &p : params) {
            first_moment.emplace_back(p.value->size(), 0.0);
            second_moment.emplace_back(p.value->size(), 0.0);
        }
        step_count = 0;
    }
};

inline void adam_step(const std::vector<NamedParam> &params, AdamState &st) {
    if (st.first_moment.size() != params.size())
        throw UsageError("adam_step: state not attached to these parameters");
    ++st.step_count;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
    for (std::size_t a = 0; a < params.size(); ++a) {
        Vec &p = *params[a].value;
        const Vec &g = *params[a].grad;
        Vec &m = st.first_moment[a];
        Vec &v = st.second_moment[a];
        if (p.size() != g.size() || p.size() != m.size())
            throw UsageError("adam_step: shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw TrainingError("adam_step: non-finite gradient");
            m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
            v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
            p[i] -= st.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.eps);
        }
    }
}

} // namespace qas::nn
