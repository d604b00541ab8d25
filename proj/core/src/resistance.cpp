#include "mcrt/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include "mcrt/errors.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::vector<std::uint8_t> component_of(const MultiGraph& g, std::uint32_t root) {
    std::vector<std::uint8_t> in(g.vertex_count(), 0);
    std::deque<std::uint32_t> queue{root};
    in[root] = 1;
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t w : g.neighbors(v)) {
            if (!in[w]) {
                in[w] = 1;
                queue.push_back(w);
            }
        }
    }
    return in;
}

/// Interior block of the graph Laplacian in CSR form. The diagonal keeps the
/// full degree; self-loop ends appear as explicit diagonal columns, which
/// reproduces the Laplacian's cancellation exactly.
struct InteriorSystem {
    std::vector<std::uint32_t> vertices;  // interior vertex per row
    std::vector<std::uint32_t> idx;       // vertex -> row or kNone
    std::vector<std::uint32_t> off;
    std::vector<std::uint32_t> col;
    std::vector<double> degree;           // full degree per row
    std::vector<double> pc_diag;          // actual matrix diagonal (Jacobi)
};

InteriorSystem build_interior(const MultiGraph& g, const std::vector<std::uint8_t>& in_comp,
                              const std::vector<std::uint8_t>& fixed) {
    InteriorSystem sys;
    sys.idx.assign(g.vertex_count(), kNone);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (in_comp[v] && !fixed[v]) {
            sys.idx[v] = static_cast<std::uint32_t>(sys.vertices.size());
            sys.vertices.push_back(v);
        }
    }
    const std::size_t n = sys.vertices.size();
    sys.off.assign(n + 1, 0);
    sys.degree.resize(n);
    sys.pc_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t v = sys.vertices[i];
        std::uint32_t inner = 0;
        for (std::uint32_t w : g.neighbors(v)) {
            if (sys.idx[w] != kNone) ++inner;
        }
        sys.off[i + 1] = sys.off[i] + inner;
        sys.degree[i] = static_cast<double>(g.degree(v));
    }
    sys.col.resize(sys.off[n]);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t v = sys.vertices[i];
        std::uint32_t p = sys.off[i];
        std::uint32_t self_ends = 0;
        for (std::uint32_t w : g.neighbors(v)) {
            if (sys.idx[w] != kNone) {
                sys.col[p++] = sys.idx[w];
                if (w == v) ++self_ends;
            }
        }
        sys.pc_diag[i] = sys.degree[i] - static_cast<double>(self_ends);
    }
    return sys;
}

struct PcgResult {
    std::vector<double> x;
    double residual = 0.0;
    std::uint32_t iterations = 0;
};

PcgResult pcg_solve(const InteriorSystem& sys, const std::vector<double>& rhs, double tol,
                    const char* what) {
    const std::size_t n = sys.vertices.size();
    PcgResult res;
    res.x.assign(n, 0.0);
    double bnorm2 = 0.0;
    for (double b : rhs) bnorm2 += b * b;
    if (bnorm2 == 0.0) return res;

    auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = sys.degree[i] * x[i];
            for (std::uint32_t p = sys.off[i]; p < sys.off[i + 1]; ++p) {
                acc -= x[sys.col[p]];
            }
            y[i] = acc;
        }
    };

    std::vector<double> r = rhs;
    std::vector<double> z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.pc_diag[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

    const std::uint64_t cap = 50 * static_cast<std::uint64_t>(n) + 200;
    const double target2 = tol * tol * bnorm2;
    for (std::uint64_t it = 0; it < cap; ++it) {
        matvec(p, q);
        double pq = 0.0;
        for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
        const double alpha = rz / pq;
        double rnorm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            rnorm2 += r[i] * r[i];
        }
        res.iterations = static_cast<std::uint32_t>(it + 1);
        if (rnorm2 <= target2) {
            res.residual = std::sqrt(rnorm2 / bnorm2);
            return res;
        }
        double rz_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / sys.pc_diag[i];
            rz_next += r[i] * z[i];
        }
        const double beta = rz_next / rz;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_next;
    }
    double rnorm2 = 0.0;
    for (double v : r) rnorm2 += v * v;
    throw convergence_error(std::string(what) + ": conjugate gradients stalled at relative residual " +
                            std::to_string(std::sqrt(rnorm2 / bnorm2)));
}

void check_boundary_condition(const MultiGraph& g, const BoundaryCondition& bc) {
    if (bc.source >= g.vertex_count()) {
        throw std::invalid_argument("boundary condition: source out of range");
    }
    if (bc.sink.empty()) {
        throw std::invalid_argument("boundary condition: empty sink set");
    }
    for (std::uint32_t v : bc.sink) {
        if (v >= g.vertex_count()) {
            throw std::invalid_argument("boundary condition: sink vertex out of range");
        }
        if (v == bc.source) {
            throw std::invalid_argument("boundary condition: source belongs to the sink set");
        }
    }
}

} // namespace

PotentialField harmonic_solve(const MultiGraph& g, const BoundaryCondition& bc, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("harmonic_solve: tol must be positive");
    check_boundary_condition(g, bc);

    const std::vector<std::uint8_t> comp = component_of(g, bc.source);
    std::vector<std::uint8_t> fixed(g.vertex_count(), 0);
    fixed[bc.source] = 1;
    bool sink_reachable = false;
    for (std::uint32_t v : bc.sink) {
        fixed[v] = 1;
        sink_reachable = sink_reachable || comp[v];
    }
    if (!sink_reachable) {
        throw topology_error("harmonic_solve: sink unreachable from source");
    }

    PotentialField out;
    out.value.assign(g.vertex_count(), 0.0);
    out.value[bc.source] = 1.0;

    const InteriorSystem sys = build_interior(g, comp, fixed);
    if (!sys.vertices.empty()) {
        std::vector<double> rhs(sys.vertices.size(), 0.0);
        for (std::size_t i = 0; i < sys.vertices.size(); ++i) {
            for (std::uint32_t w : g.neighbors(sys.vertices[i])) {
                if (fixed[w]) rhs[i] += out.value[w];
            }
        }
        PcgResult solved = pcg_solve(sys, rhs, tol, "harmonic_solve");
        for (std::size_t i = 0; i < sys.vertices.size(); ++i) {
            out.value[sys.vertices[i]] = solved.x[i];
        }
        out.residual = solved.residual;
        out.iterations = solved.iterations;
    }
    return out;
}

double dirichlet_energy(const MultiGraph& g, std::span<const double> f) {
    if (f.size() != g.vertex_count()) {
        throw std::invalid_argument("dirichlet_energy: function size mismatch");
    }
    double energy = 0.0;
    for (const MultiGraph::Edge& e : g.edges()) {
        const double d = f[e.u] - f[e.v];
        energy += d * d;
    }
    return energy;
}

double effective_resistance(const MultiGraph& g, std::uint32_t source,
                            std::span<const std::uint32_t> sink, double tol) {
    BoundaryCondition bc{source, {sink.begin(), sink.end()}};
    const PotentialField pf = harmonic_solve(g, bc, tol);
    return 1.0 / dirichlet_energy(g, pf.value);
}

UnitFlow current_flow(const MultiGraph& g, const PotentialField& pf,
                      const BoundaryCondition& bc) {
    if (pf.value.size() != g.vertex_count()) {
        throw std::invalid_argument("current_flow: potential size mismatch");
    }
    UnitFlow flow;
    flow.source = bc.source;
    flow.sink = bc.sink;
    flow.along.resize(g.edge_count());
    for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
        const MultiGraph::Edge& ed = g.edge(e);
        flow.along[e] = pf.value[ed.u] - pf.value[ed.v];
    }
    double source_div = 0.0;
    for (std::uint32_t w : g.neighbors(bc.source)) {
        source_div += pf.value[bc.source] - pf.value[w];
    }
    if (!(source_div > 0.0)) {
        throw std::domain_error("current_flow: potential drives no current");
    }
    for (double& v : flow.along) v /= source_div;
    return flow;
}

FlowDiagnostics validate_unit_flow(const MultiGraph& g, const UnitFlow& flow) {
    if (flow.along.size() != g.edge_count()) {
        throw std::invalid_argument("validate_unit_flow: flow size mismatch");
    }
    std::vector<double> div(g.vertex_count(), 0.0);
    double energy = 0.0;
    for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
        const MultiGraph::Edge& ed = g.edge(e);
        div[ed.u] += flow.along[e];
        div[ed.v] -= flow.along[e];
        energy += flow.along[e] * flow.along[e];
    }
    std::vector<std::uint8_t> is_sink(g.vertex_count(), 0);
    for (std::uint32_t v : flow.sink) is_sink[v] = 1;
    FlowDiagnostics diag;
    diag.energy = energy;
    diag.source_deviation = std::abs(div[flow.source] - 1.0);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (v == flow.source || is_sink[v]) continue;
        diag.max_interior_divergence = std::max(diag.max_interior_divergence,
                                                std::abs(div[v]));
    }
    return diag;
}

namespace {

/// Shortest-path DAG from the source: hop distances plus geodesic counts,
/// parallel instances counted separately.
struct GeodesicDag {
    std::vector<std::int32_t> dist;
    std::vector<double> count;
};

GeodesicDag geodesic_dag(const MultiGraph& g, std::uint32_t source) {
    GeodesicDag dag;
    dag.dist.assign(g.vertex_count(), -1);
    dag.count.assign(g.vertex_count(), 0.0);
    dag.dist[source] = 0;
    dag.count[source] = 1.0;
    std::deque<std::uint32_t> queue{source};
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t w : g.neighbors(v)) {
            if (dag.dist[w] < 0) {
                dag.dist[w] = dag.dist[v] + 1;
                queue.push_back(w);
            }
            if (dag.dist[w] == dag.dist[v] + 1) dag.count[w] += dag.count[v];
        }
    }
    return dag;
}

} // namespace

UnitFlow path_flow(const MultiGraph& g, std::uint32_t source,
                   std::span<const std::uint32_t> sink, const PathFlowOptions& options) {
    BoundaryCondition bc{source, {sink.begin(), sink.end()}};
    check_boundary_condition(g, bc);
    std::sort(bc.sink.begin(), bc.sink.end());
    bc.sink.erase(std::unique(bc.sink.begin(), bc.sink.end()), bc.sink.end());

    const GeodesicDag dag = geodesic_dag(g, source);
    std::vector<std::uint32_t> targets;
    for (std::uint32_t t : bc.sink) {
        if (dag.dist[t] >= 0) targets.push_back(t);
    }
    if (targets.empty()) {
        throw std::domain_error("path_flow: no sink target reachable from source");
    }

    UnitFlow flow;
    flow.source = source;
    flow.sink = bc.sink;
    flow.along.assign(g.edge_count(), 0.0);

    if (targets.size() <= options.max_exact_targets) {
        // Exact: per target, edge-use probabilities of the uniform geodesic,
        // via backward continuation counts over the BFS DAG.
        const double target_weight = 1.0 / static_cast<double>(targets.size());
        std::vector<double> back(g.vertex_count());
        std::vector<std::uint32_t> order(g.vertex_count());
        for (std::uint32_t t : targets) {
            std::fill(back.begin(), back.end(), 0.0);
            back[t] = 1.0;
            // walk the DAG backwards from the target's level
            std::size_t head = 0, tail = 0;
            order[tail++] = t;
            std::vector<std::uint8_t> queued(g.vertex_count(), 0);
            queued[t] = 1;
            while (head < tail) {
                const std::uint32_t v = order[head++];
                for (std::uint32_t w : g.neighbors(v)) {
                    if (dag.dist[w] == dag.dist[v] - 1) {
                        back[w] += back[v];
                        if (!queued[w]) {
                            queued[w] = 1;
                            order[tail++] = w;
                        }
                    }
                }
            }
            const double total = dag.count[t];
            for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
                const MultiGraph::Edge& ed = g.edge(e);
                if (dag.dist[ed.u] < 0 || dag.dist[ed.v] < 0) continue;
                if (dag.dist[ed.u] + 1 == dag.dist[ed.v]) {
                    flow.along[e] += target_weight * dag.count[ed.u] * back[ed.v] / total;
                } else if (dag.dist[ed.v] + 1 == dag.dist[ed.u]) {
                    flow.along[e] -= target_weight * dag.count[ed.v] * back[ed.u] / total;
                }
            }
        }
    } else {
        // Sampled: uniform targets, one geodesic each, drawn backwards with
        // probability proportional to geodesic counts.
        Xoshiro256pp eng(substream_seed(options.seed, 0));
        const std::uint32_t samples = options.max_exact_targets;
        const double w = 1.0 / static_cast<double>(samples);
        for (std::uint32_t s = 0; s < samples; ++s) {
            std::uint32_t v = targets[eng.below(targets.size())];
            while (v != source) {
                // choose the incoming instance by count weight
                double total = 0.0;
                const auto nbrs = g.neighbors(v);
                const auto eids = g.incident_edges(v);
                for (std::size_t i = 0; i < nbrs.size(); ++i) {
                    if (dag.dist[nbrs[i]] == dag.dist[v] - 1) total += dag.count[nbrs[i]];
                }
                double pick = eng.uniform01() * total;
                std::uint32_t chosen_edge = kNone;
                std::uint32_t prev = v;
                for (std::size_t i = 0; i < nbrs.size(); ++i) {
                    if (dag.dist[nbrs[i]] != dag.dist[v] - 1) continue;
                    pick -= dag.count[nbrs[i]];
                    if (pick <= 0.0) {
                        chosen_edge = eids[i];
                        prev = nbrs[i];
                        break;
                    }
                }
                if (chosen_edge == kNone) { // numeric edge case: take last valid
                    for (std::size_t i = nbrs.size(); i-- > 0;) {
                        if (dag.dist[nbrs[i]] == dag.dist[v] - 1) {
                            chosen_edge = eids[i];
                            prev = nbrs[i];
                            break;
                        }
                    }
                }
                const MultiGraph::Edge& ed = g.edge(chosen_edge);
                flow.along[chosen_edge] += (ed.v == v) ? w : -w;
                v = prev;
            }
        }
    }
    return flow;
}

double expected_exit_time(const MultiGraph& g, std::uint32_t root,
                          std::span<const std::uint32_t> boundary, double tol) {
    if (root >= g.vertex_count()) {
        throw std::invalid_argument("expected_exit_time: root out of range");
    }
    if (boundary.empty()) {
        throw std::invalid_argument("expected_exit_time: empty boundary");
    }
    std::vector<std::uint8_t> fixed(g.vertex_count(), 0);
    bool root_on_boundary = false;
    for (std::uint32_t v : boundary) {
        if (v >= g.vertex_count()) {
            throw std::invalid_argument("expected_exit_time: boundary vertex out of range");
        }
        fixed[v] = 1;
        root_on_boundary = root_on_boundary || v == root;
    }
    if (root_on_boundary) return 0.0;

    const std::vector<std::uint8_t> comp = component_of(g, root);
    bool reachable = false;
    for (std::uint32_t v : boundary) reachable = reachable || comp[v];
    if (!reachable) {
        throw topology_error("expected_exit_time: boundary unreachable from root");
    }

    const InteriorSystem sys = build_interior(g, comp, fixed);
    std::vector<double> rhs(sys.vertices.size());
    for (std::size_t i = 0; i < sys.vertices.size(); ++i) {
        rhs[i] = static_cast<double>(g.degree(sys.vertices[i]));
    }
    const PcgResult solved = pcg_solve(sys, rhs, tol, "expected_exit_time");
    return solved.x[sys.idx[root]];
}

} // namespace mcrt
