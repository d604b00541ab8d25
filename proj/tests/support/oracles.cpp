#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcrt::testing {

std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n) throw std::runtime_error("solve_dense: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-12) {
            throw std::runtime_error("solve_dense: singular system");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double acc = b[row];
        for (std::size_t k = row + 1; k < n; ++k) acc -= a[row][k] * x[k];
        x[row] = acc / a[row][row];
    }
    return x;
}

std::vector<std::vector<double>> dense_adjacency(const MultiGraph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::uint32_t v = 0; v < n; ++v) {
        for (std::uint32_t w : g.neighbors(v)) a[v][w] += 1.0;
    }
    return a;
}

std::vector<std::vector<double>> dense_transition(const MultiGraph& g) {
    auto p = dense_adjacency(g);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        const double deg = g.degree(v);
        if (deg == 0.0) continue;
        for (double& entry : p[v]) entry /= deg;
    }
    return p;
}

std::vector<double> dense_distribution(const MultiGraph& g, std::uint32_t root,
                                       std::uint64_t steps) {
    const auto p = dense_transition(g);
    const std::size_t n = g.vertex_count();
    std::vector<double> cur(n, 0.0);
    cur[root] = 1.0;
    std::vector<double> nxt(n, 0.0);
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (cur[v] == 0.0) continue;
            for (std::size_t w = 0; w < n; ++w) nxt[w] += cur[v] * p[v][w];
        }
        cur.swap(nxt);
    }
    return cur;
}

namespace {

// Maps vertices to dense-system unknowns, skipping the fixed set.
struct UnknownIndex {
    std::vector<std::int64_t> idx;
    std::vector<std::uint32_t> vertices;

    UnknownIndex(std::size_t n, std::span<const std::uint32_t> fixed) : idx(n, -1) {
        std::vector<std::uint8_t> is_fixed(n, 0);
        for (std::uint32_t v : fixed) is_fixed[v] = 1;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (!is_fixed[v]) {
                idx[v] = static_cast<std::int64_t>(vertices.size());
                vertices.push_back(v);
            }
        }
    }
};

}  // namespace

std::vector<double> dense_harmonic(const MultiGraph& g, std::uint32_t source,
                                   std::span<const std::uint32_t> sinks) {
    const std::size_t n = g.vertex_count();
    std::vector<double> value(n, 0.0);
    value[source] = 1.0;
    std::vector<std::uint32_t> fixed(sinks.begin(), sinks.end());
    fixed.push_back(source);
    // Vertices with no path to a fixed vertex would make the system singular;
    // they carry no current and stay at 0.
    std::vector<std::uint8_t> reach(n, 0);
    std::vector<std::uint32_t> queue(fixed.begin(), fixed.end());
    for (std::uint32_t v : queue) reach[v] = 1;
    while (!queue.empty()) {
        const std::uint32_t v = queue.back();
        queue.pop_back();
        for (std::uint32_t w : g.neighbors(v)) {
            if (!reach[w]) {
                reach[w] = 1;
                queue.push_back(w);
            }
        }
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!reach[v]) fixed.push_back(v);
    }
    const UnknownIndex u(n, fixed);
    const std::size_t m = u.vertices.size();
    if (m == 0) return value;
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (std::size_t row = 0; row < m; ++row) {
        const std::uint32_t v = u.vertices[row];
        a[row][row] = g.degree(v);
        for (std::uint32_t w : g.neighbors(v)) {
            if (u.idx[w] >= 0) {
                a[row][static_cast<std::size_t>(u.idx[w])] -= 1.0;
            } else {
                b[row] += value[w];
            }
        }
    }
    const auto x = solve_dense(std::move(a), std::move(b));
    for (std::size_t row = 0; row < m; ++row) value[u.vertices[row]] = x[row];
    return value;
}

double dense_resistance(const MultiGraph& g, std::uint32_t source,
                        std::span<const std::uint32_t> sinks) {
    const auto f = dense_harmonic(g, source, sinks);
    double energy = 0.0;
    for (const auto& e : g.edges()) {
        const double d = f[e.u] - f[e.v];
        energy += d * d;
    }
    if (energy <= 0.0) throw std::runtime_error("dense_resistance: zero energy");
    return 1.0 / energy;
}

double dense_green_hitting(const MultiGraph& g, std::uint32_t root,
                           std::span<const std::uint32_t> stop) {
    for (std::uint32_t s : stop) {
        if (s == root) return 0.0;
    }
    const std::size_t n = g.vertex_count();
    const UnknownIndex u(n, stop);
    const auto p = dense_transition(g);
    const std::size_t m = u.vertices.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (std::size_t row = 0; row < m; ++row) {
        const std::uint32_t v = u.vertices[row];
        for (std::size_t col = 0; col < m; ++col) {
            const std::uint32_t w = u.vertices[col];
            a[row][col] = (row == col ? 1.0 : 0.0) - p[v][w];
        }
    }
    b[static_cast<std::size_t>(u.idx[root])] = 1.0;
    const auto y = solve_dense(std::move(a), std::move(b));
    return y[static_cast<std::size_t>(u.idx[root])];
}

double dense_exit_time(const MultiGraph& g, std::uint32_t root,
                       std::span<const std::uint32_t> boundary) {
    for (std::uint32_t s : boundary) {
        if (s == root) return 0.0;
    }
    const std::size_t n = g.vertex_count();
    const UnknownIndex u(n, boundary);
    const auto p = dense_transition(g);
    const std::size_t m = u.vertices.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 1.0);
    for (std::size_t row = 0; row < m; ++row) {
        const std::uint32_t v = u.vertices[row];
        for (std::size_t col = 0; col < m; ++col) {
            const std::uint32_t w = u.vertices[col];
            a[row][col] = (row == col ? 1.0 : 0.0) - p[v][w];
        }
    }
    const auto t = solve_dense(std::move(a), std::move(b));
    return t[static_cast<std::size_t>(u.idx[root])];
}

MultiGraph random_multigraph(Xoshiro256pp& rng, std::uint32_t min_n,
                             std::uint32_t max_n, bool allow_self_loops) {
    if (min_n < 1 || max_n < min_n) {
        throw std::runtime_error("random_multigraph: bad vertex bounds");
    }
    const auto n = static_cast<std::uint32_t>(min_n + rng.below(max_n - min_n + 1));
    std::vector<std::array<std::uint32_t, 3>> edges;
    for (std::uint32_t v = 1; v < n; ++v) {
        edges.push_back({static_cast<std::uint32_t>(rng.below(v)), v, 1});
    }
    const std::uint64_t extra = rng.below(2 * n + 1);
    for (std::uint64_t i = 0; i < extra; ++i) {
        auto a = static_cast<std::uint32_t>(rng.below(n));
        auto b = static_cast<std::uint32_t>(rng.below(n));
        if (!allow_self_loops && a == b) {
            if (n == 1) continue;
            b = (a + 1) % n;
        }
        edges.push_back({a, b, 1});
    }
    return MultiGraph::from_edges(n, edges);
}

}  // namespace mcrt::testing
