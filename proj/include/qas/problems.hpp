// Problem construction: Max-Cut and Schwinger Hamiltonians, QAOA/HEA
// reference ansaetze, and the corpus of non-isomorphic connected cubic
// graphs with train/test splits.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qas/circuit.hpp"
#include "qas/common.hpp"
#include "qas/statevec.hpp"

namespace qas {

/// Simple undirected graph; edges are stored as (u, v) with u < v.
struct Graph {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges;

    Graph() = default;
    explicit Graph(int n) : n_vertices(n) {}

    void add_edge(int u, int v) {
        if (u == v) throw UsageError("Graph: self-loop");
        if (u < 0 || v < 0 || u >= n_vertices || v >= n_vertices)
            throw UsageError("Graph: vertex out of range");
        auto e = std::minmax(u, v);
        std::pair<int, int> p{e.first, e.second};
        if (std::find(edges.begin(), edges.end(), p) != edges.end())
            throw UsageError("Graph: duplicate edge");
        edges.push_back(p);
    }

    /// Per-vertex neighbor bitmasks (n_vertices <= 32).
    std::vector<std::uint32_t> adjacency_masks() const {
        std::vector<std::uint32_t> adj(n_vertices, 0);
        for (auto [u, v] : edges) {
            adj[u] |= 1u << v;
            adj[v] |= 1u << u;
        }
        return adj;
    }

    std::vector<int> degrees() const {
        std::vector<int> d(n_vertices, 0);
        for (auto [u, v] : edges) {
            ++d[u];
            ++d[v];
        }
        return d;
    }

    bool operator==(const Graph &) const = default;
};

inline void write_edge_list(std::ostream &os, const Graph &g) {
    os << "n " << g.n_vertices << "\n";
    for (auto [u, v] : g.edges) os << u << " " << v << "\n";
}

inline Graph read_edge_list(std::istream &is) {
    Graph g;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "n") {
            ls >> g.n_vertices;
        } else {
            int u = std::stoi(head), v;
            ls >> v;
            g.add_edge(u, v);
        }
    }
    return g;
}

namespace detail {

/// Lexicographically minimal lower-triangle adjacency bitstring over all
/// vertex permutations, found by branch-and-bound. Row i contributes bits
/// adj(p(i), p(j)) for j = 0..i-1, most significant first; rows are
/// concatenated in order. Exact and deterministic for n <= 16.
class CanonicalLabeler {
  public:
    explicit CanonicalLabeler(const Graph &g)
        : n_(g.n_vertices), adj_(g.adjacency_masks()) {}

    std::vector<std::uint32_t> run() {
        best_.assign(n_, ~0u);
        perm_.assign(n_, -1);
        used_.assign(n_, false);
        extend(0);
        return best_;
    }

  private:
    void extend(int level) {
        if (level == n_) return; // leaf; best_ already holds the rows
        // candidate rows, ascending, so the committed branch closes first
        std::vector<std::pair<std::uint32_t, int>> cand;
        cand.reserve(n_);
        for (int v = 0; v < n_; ++v) {
            if (used_[v]) continue;
            std::uint32_t row = 0;
            for (int j = 0; j < level; ++j)
                row = (row << 1) | ((adj_[v] >> perm_[j]) & 1u);
            cand.emplace_back(row, v);
        }
        std::sort(cand.begin(), cand.end());
        for (auto [row, v] : cand) {
            if (row > best_[level]) break; // strictly worse than a completed labeling
            if (row < best_[level]) {
                best_[level] = row;
                std::fill(best_.begin() + level + 1, best_.end(), ~0u);
            }
            perm_[level] = v;
            used_[v] = true;
            extend(level + 1);
            used_[v] = false;
        }
    }

    int n_;
    std::vector<std::uint32_t> adj_;
    std::vector<std::uint32_t> best_;
    std::vector<int> perm_;
    std::vector<bool> used_;
};

inline std::vector<int> triangle_counts(const std::vector<std::uint32_t> &adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> tri(n, 0);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u)
            if ((adj[v] >> u) & 1u)
                tri[v] += std::popcount(adj[v] & adj[u]);
    for (auto &t : tri) t /= 2;
    return tri;
}

/// Cheap isomorphism invariant: sorted triangle counts plus the sorted
/// multiset of BFS distance sums.
inline std::string invariant_key(const Graph &g) {
    const auto adj = g.adjacency_masks();
    const int n = g.n_vertices;
    auto tri = triangle_counts(adj);
    std::vector<int> dsum(n, 0);
    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        dist[s] = 0;
        std::vector<int> q{s};
        for (std::size_t head = 0; head < q.size(); ++head) {
            const int v = q[head];
            for (int u = 0; u < n; ++u)
                if (((adj[v] >> u) & 1u) && dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    q.push_back(u);
                }
        }
        dsum[s] = std::accumulate(dist.begin(), dist.end(), 0);
    }
    std::vector<std::pair<int, int>> sig(n);
    for (int v = 0; v < n; ++v) sig[v] = {tri[v], dsum[v]};
    std::sort(sig.begin(), sig.end());
    std::ostringstream os;
    for (auto [a, b] : sig) os << a << ',' << b << ';';
    return os.str();
}

/// Backtracking isomorphism test for small graphs; vertices of g1 are
/// mapped in an order that keeps the mapped set connected.
inline bool isomorphic(const Graph &g1, const Graph &g2) {
    if (g1.n_vertices != g2.n_vertices || g1.edges.size() != g2.edges.size())
        return false;
    const int n = g1.n_vertices;
    const auto a1 = g1.adjacency_masks();
    const auto a2 = g2.adjacency_masks();
    auto d1 = g1.degrees();
    auto d2 = g2.degrees();
    {
        auto s1 = d1, s2 = d2;
        std::sort(s1.begin(), s1.end());
        std::sort(s2.begin(), s2.end());
        if (s1 != s2) return false;
    }
    const auto t1 = triangle_counts(a1);
    const auto t2 = triangle_counts(a2);

    // order g1's vertices so each one touches the already-ordered prefix
    std::vector<int> order;
    std::vector<bool> placed(n, false);
    while (static_cast<int>(order.size()) < n) {
        int pick = -1;
        for (int v = 0; v < n && pick < 0; ++v) {
            if (placed[v]) continue;
            if (order.empty()) pick = v;
            else
                for (int u : order)
                    if ((a1[v] >> u) & 1u) { pick = v; break; }
        }
        if (pick < 0)
            for (int v = 0; v < n; ++v)
                if (!placed[v]) { pick = v; break; }
        placed[pick] = true;
        order.push_back(pick);
    }

    std::vector<int> map(n, -1);
    std::uint32_t used = 0;
    std::function<bool(int)> match = [&](int idx) -> bool {
        if (idx == n) return true;
        const int v = order[idx];
        for (int w = 0; w < n; ++w) {
            if ((used >> w) & 1u) continue;
            if (d1[v] != d2[w] || t1[v] != t2[w]) continue;
            bool ok = true;
            for (int j = 0; j < idx && ok; ++j) {
                const int pv = order[j];
                const bool e1 = (a1[v] >> pv) & 1u;
                const bool e2 = (a2[w] >> map[pv]) & 1u;
                if (e1 != e2) ok = false;
            }
            if (!ok) continue;
            map[v] = w;
            used |= 1u << w;
            if (match(idx + 1)) return true;
            used &= ~(1u << w);
            map[v] = -1;
        }
        return false;
    };
    return match(0);
}

} // namespace detail

/// Canonical form usable as an isomorphism-class key.
inline std::vector<std::uint32_t> canonical_form(const Graph &g) {
    return detail::CanonicalLabeler(g).run();
}

/// All non-isomorphic connected 3-regular graphs on n vertices.
/// Vertices are completed in ascending order and fresh vertices are
/// introduced in first-use order, which bounds the search; duplicates are
/// removed with an invariant hash plus exact isomorphism tests.
inline std::vector<Graph> enumerate_cubic_graphs(int n) {
    if (n < 4 || n > 12 || n % 2 != 0)
        throw ConfigError("enumerate_cubic_graphs: n must be even, 4 <= n <= 12");

    std::vector<Graph> reps;
    std::unordered_map<std::string, std::vector<int>> buckets;

    std::vector<std::uint32_t> adj(n, 0);
    std::vector<int> deg(n, 0);

    auto emit = [&](const Graph &g) {
        const std::string key = detail::invariant_key(g);
        auto &bucket = buckets[key];
        for (int idx : bucket)
            if (detail::isomorphic(g, reps[idx])) return;
        bucket.push_back(static_cast<int>(reps.size()));
        reps.push_back(g);
    };

    std::function<void()> complete = [&]() {
        int v = -1;
        for (int i = 0; i < n; ++i)
            if (deg[i] < 3) { v = i; break; }
        if (v < 0) {
            Graph g(n);
            for (int u = 0; u < n; ++u)
                for (int w = u + 1; w < n; ++w)
                    if ((adj[u] >> w) & 1u) g.add_edge(u, w);
            emit(g);
            return;
        }
        // all vertices below v are complete; an untouched v (other than 0)
        // can no longer join their component
        if (v > 0 && deg[v] == 0) return;

        const int need = 3 - deg[v];
        std::vector<int> touched, fresh;
        for (int u = v + 1; u < n; ++u) {
            if ((adj[v] >> u) & 1u || deg[u] >= 3) continue;
            (deg[u] > 0 ? touched : fresh).push_back(u);
        }
        const int max_fresh = std::min<int>(need, static_cast<int>(fresh.size()));
        for (int k = 0; k <= max_fresh; ++k) {
            const int t = need - k;
            if (t > static_cast<int>(touched.size())) continue;
            // choose t touched partners; the k fresh ones are the smallest
            // unused labels (first-use order)
            std::vector<int> sel(t);
            std::function<void(int, int)> choose = [&](int start, int left) {
                if (left == 0) {
                    for (int j = 0; j < k; ++j) {
                        const int u = fresh[j];
                        adj[v] |= 1u << u;
                        adj[u] |= 1u << v;
                        ++deg[v];
                        ++deg[u];
                    }
                    for (int u : sel) {
                        adj[v] |= 1u << u;
                        adj[u] |= 1u << v;
                        ++deg[v];
                        ++deg[u];
                    }
                    complete();
                    for (int u : sel) {
                        adj[v] &= ~(1u << u);
                        adj[u] &= ~(1u << v);
                        --deg[v];
                        --deg[u];
                    }
                    for (int j = 0; j < k; ++j) {
                        const int u = fresh[j];
                        adj[v] &= ~(1u << u);
                        adj[u] &= ~(1u << v);
                        --deg[v];
                        --deg[u];
                    }
                    return;
                }
                for (int i = start;
                     i <= static_cast<int>(touched.size()) - left; ++i) {
                    sel[t - left] = touched[i];
                    choose(i + 1, left - 1);
                }
            };
            choose(0, t);
        }
    };
    complete();

    std::sort(reps.begin(), reps.end(), [](const Graph &a, const Graph &b) {
        return canonical_form(a) < canonical_form(b);
    });
    return reps;
}

/// Train/test split of a graph corpus.
struct InstanceSplit {
    std::vector<Graph> train;
    std::vector<Graph> test;
    std::uint64_t seed = 0;
};

/// Deterministic seeded Fisher-Yates shuffle, then prefix split.
inline InstanceSplit split_instances(const std::vector<Graph> &graphs, int m,
                                     int k, std::uint64_t seed) {
    if (m < 0 || k < 0 || m + k > static_cast<int>(graphs.size()))
        throw ConfigError("split_instances: M + K exceeds corpus size");
    std::vector<std::size_t> idx(graphs.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, "instance-split");
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    InstanceSplit split;
    split.seed = seed;
    for (int i = 0; i < m; ++i) split.train.push_back(graphs[idx[i]]);
    for (int i = 0; i < k; ++i) split.test.push_back(graphs[idx[m + i]]);
    return split;
}

/// H = 1/2 sum_{(i,j) in E} (Z_i Z_j - I): one +1/2 ZZ term per edge plus a
/// single -|E|/2 identity term. Diagonal; <z|H|z> = -cut(z).
inline PauliHamiltonian maxcut_hamiltonian(const Graph &g) {
    PauliHamiltonian h(g.n_vertices);
    for (auto [u, v] : g.edges) {
        std::string p(g.n_vertices, 'I');
        p[u] = 'Z';
        p[v] = 'Z';
        h.add_term(0.5, p);
    }
    if (!g.edges.empty())
        h.add_term(-0.5 * static_cast<double>(g.edges.size()),
                   std::string(g.n_vertices, 'I'));
    return h;
}

/// Couplings of the lattice Schwinger Hamiltonian.
struct SchwingerParams {
    double w = 1.0;     // hopping
    double m0 = 1.0;    // bare mass
    double g_bar = 1.0; // electric coupling
    double eps0 = 0.0;  // background field
};

/// Spin-mapped Schwinger Hamiltonian on n sites:
///   w sum_{j=1}^{n-1} [s+_j s-_{j+1} + h.c.]
///   + m0/2 sum_{j=1}^{n} (-1)^j Z_j
///   + g_bar sum_j L_j^2,  L_j = eps0 - 1/2 sum_{l<=j} (Z_l + (-1)^l).
/// The electric sum runs to n by default (`full_chain`); pass false for the
/// conventional truncation at n-1. Site j (1-based) lives on qubit j-1.
inline PauliHamiltonian schwinger_hamiltonian(int n, const SchwingerParams &p,
                                              bool full_chain = true) {
    if (n < 2 || n % 2 != 0)
        throw ConfigError("schwinger_hamiltonian: n must be even and >= 2");
    std::map<std::string, double> acc;
    auto add = [&](double c, const std::string &s) {
        if (c != 0.0) acc[s] += c;
    };
    const std::string id(n, 'I');

    // hopping: (w/2)(X_j X_{j+1} + Y_j Y_{j+1})
    for (int j = 1; j <= n - 1; ++j) {
        std::string xx = id, yy = id;
        xx[j - 1] = 'X';
        xx[j] = 'X';
        yy[j - 1] = 'Y';
        yy[j] = 'Y';
        add(0.5 * p.w, xx);
        add(0.5 * p.w, yy);
    }
    // staggered mass
    for (int j = 1; j <= n; ++j) {
        std::string z = id;
        z[j - 1] = 'Z';
        add(0.5 * p.m0 * (j % 2 == 0 ? 1.0 : -1.0), z);
    }
    // electric term: L_j = c_j I - 1/2 sum_{l<=j} Z_l with
    // c_j = eps0 - 1/2 sum_{l<=j} (-1)^l; L_j^2 expands into I, Z and ZZ.
    const int jmax = full_chain ? n : n - 1;
    for (int j = 1; j <= jmax; ++j) {
        double cj = p.eps0;
        for (int l = 1; l <= j; ++l) cj -= 0.5 * (l % 2 == 0 ? 1.0 : -1.0);
        add(p.g_bar * (cj * cj + 0.25 * j), id);
        for (int l = 1; l <= j; ++l) {
            std::string z = id;
            z[l - 1] = 'Z';
            add(-p.g_bar * cj, z);
        }
        for (int l = 1; l <= j; ++l)
            for (int l2 = l + 1; l2 <= j; ++l2) {
                std::string zz = id;
                zz[l - 1] = 'Z';
                zz[l2 - 1] = 'Z';
                add(0.5 * p.g_bar, zz);
            }
    }

    PauliHamiltonian h(n);
    for (const auto &[s, c] : acc)
        if (std::abs(c) > 1e-15) h.add_term(c, s);
    return h;
}

/// QAOA ansatz for a Max-Cut instance: H on every qubit, then p layers of
/// per-edge exp(-i gamma_k ZZ) compiled as CNOT-RZ-CNOT followed by per-qubit
/// RX(beta_k). 2p parameter groups; 3np CNOTs on 3-regular graphs.
inline Circuit qaoa_circuit(const Graph &g, int p) {
    if (p < 1) throw ConfigError("qaoa_circuit: depth must be >= 1");
    Circuit c(g.n_vertices);
    for (int q = 0; q < g.n_vertices; ++q) append_gate(c, GateOp::h(q));
    for (int layer = 0; layer < p; ++layer) {
        int gamma = -1;
        for (auto [u, v] : g.edges) {
            append_gate(c, GateOp::cnot(u, v));
            if (gamma < 0) {
                append_gate(c, GateOp::rz(v));
                gamma = c.n_param_groups - 1;
            } else {
                append_gate(c, GateOp::rz(v), gamma);
            }
            append_gate(c, GateOp::cnot(u, v));
        }
        int beta = -1;
        for (int q = 0; q < g.n_vertices; ++q) {
            if (beta < 0) {
                append_gate(c, GateOp::rx(q));
                beta = c.n_param_groups - 1;
            } else {
                append_gate(c, GateOp::rx(q), beta);
            }
        }
    }
    c.n_steps = p;
    return c;
}

/// Hardware-efficient ansatz: L layers of per-qubit RX, RY, RZ (one group
/// each) followed by a CNOT ring including the wrap-around CNOT_{n-1,0}.
/// 3nL parameter groups and nL CNOTs.
inline Circuit hea_circuit(int n, int layers) {
    if (layers < 1) throw ConfigError("hea_circuit: layer count must be >= 1");
    if (n < 2) throw ConfigError("hea_circuit: need at least 2 qubits");
    Circuit c(n);
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < n; ++q) {
            append_gate(c, GateOp::rx(q));
            append_gate(c, GateOp::ry(q));
            append_gate(c, GateOp::rz(q));
        }
        for (int q = 0; q < n; ++q) append_gate(c, GateOp::cnot(q, (q + 1) % n));
    }
    c.n_steps = layers;
    return c;
}

/// -cut(z) for a bit assignment z (bit i = side of vertex i).
inline int cut_value(const Graph &g, std::uint32_t z) {
    int cut = 0;
    for (auto [u, v] : g.edges)
        cut += (((z >> u) ^ (z >> v)) & 1u) ? 1 : 0;
    return cut;
}

} // namespace qas
