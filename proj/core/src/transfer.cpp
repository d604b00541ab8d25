#include "mcrt/transfer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mcrt/errors.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

namespace {

constexpr std::uint64_t kMaxRationalEnds = 64;

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

void check_vertex_map(std::span<const std::uint32_t> map, std::uint32_t domain,
                      std::uint32_t range, const char* what) {
    if (map.size() != domain) {
        throw std::domain_error(std::string(what) + ": map must cover every vertex");
    }
    for (std::uint32_t x : map) {
        if (x >= range) {
            throw std::domain_error(std::string(what) + ": mapped vertex out of range");
        }
    }
}

// One step of the simple random walk, as a distribution update.
void walk_step(const MultiGraph& g, const std::vector<double>& in,
               std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (in[v] == 0.0) continue;
        const double share = in[v] / g.degree(v);
        for (std::uint32_t w : g.neighbors(v)) out[w] += share;
    }
}

// One lazy step: stay with probability 1/2, otherwise walk.
void lazy_step(const MultiGraph& g, const std::vector<double>& in,
               std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (in[v] == 0.0) continue;
        out[v] += 0.5 * in[v];
        const double share = 0.5 * in[v] / g.degree(v);
        for (std::uint32_t w : g.neighbors(v)) out[w] += share;
    }
}

double median_of_sorted(std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t k = xs.size();
    if (k % 2 == 1) return xs[k / 2];
    return 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

std::optional<std::uint32_t> parse_u32(const std::string& token) {
    std::uint32_t value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

[[noreturn]] void line_fail(std::size_t line_no, const std::string& msg) {
    throw format_error("transfer case line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("make_rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}

Subdivision subdivide(const MultiGraph& m) {
    const std::uint32_t n = m.vertex_count();
    const std::size_t e_count = m.edge_count();
    if (e_count > std::numeric_limits<std::uint32_t>::max() - n) {
        throw std::length_error("subdivide: midpoint ids exceed u32 range");
    }
    std::vector<std::array<std::uint32_t, 3>> triples;
    triples.reserve(2 * e_count);
    for (std::uint32_t e = 0; e < e_count; ++e) {
        const MultiGraph::Edge& ed = m.edge(e);
        const std::uint32_t mid = n + e;
        triples.push_back({ed.u, mid, 1});
        triples.push_back({ed.v, mid, 1});
    }
    Subdivision out;
    out.original_vertices = n;
    out.graph = MultiGraph::from_edges(n + static_cast<std::uint32_t>(e_count), triples);
    return out;
}

std::vector<Rational> reweight_root(const MultiGraph& m) {
    if (m.vertex_count() == 0) {
        throw std::domain_error("reweight_root: empty graph");
    }
    if (m.total_degree() > kMaxRationalEnds) {
        throw std::domain_error("reweight_root: more than 64 edge-ends");
    }
    // weight 1 + deg/2 per vertex, i.e. (2 + deg) / (2n + total ends)
    const std::int64_t denom =
        2 * static_cast<std::int64_t>(m.vertex_count()) +
        static_cast<std::int64_t>(m.total_degree());
    std::vector<Rational> out(m.vertex_count());
    for (std::uint32_t v = 0; v < m.vertex_count(); ++v) {
        out[v] = make_rational(2 + static_cast<std::int64_t>(m.degree(v)), denom);
    }
    return out;
}

RootCoupling midpoint_root_coupling(const MultiGraph& m) {
    const std::uint32_t n = m.vertex_count();
    if (n == 0) throw std::domain_error("midpoint_root_coupling: empty graph");
    if (m.total_degree() > kMaxRationalEnds) {
        throw std::domain_error("midpoint_root_coupling: more than 64 edge-ends");
    }
    // Count outcomes in half-units of 1/(2 (n + E)): a uniform draw of an
    // original vertex lands 2 halves on itself, a midpoint one half on each
    // endpoint (a self-loop puts both on its vertex).
    std::vector<std::int64_t> halves(n, 2);
    for (const MultiGraph::Edge& e : m.edges()) {
        ++halves[e.u];
        ++halves[e.v];
    }
    const std::int64_t denom =
        2 * (static_cast<std::int64_t>(n) + static_cast<std::int64_t>(m.edge_count()));
    RootCoupling out;
    out.marginal.resize(n);
    out.stay_probability.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        out.marginal[v] = make_rational(halves[v], denom);
        // joint mass of (v-hat = v, induced = v) is 2 halves of the total
        out.stay_probability[v] = make_rational(2, halves[v]);
    }
    return out;
}

double lazy_equivalence_check(const MultiGraph& m, std::uint32_t root,
                              std::uint32_t m_steps) {
    const std::uint32_t n = m.vertex_count();
    if (root >= n) throw std::domain_error("lazy_equivalence_check: root out of range");
    if (m_steps == 0) return 0.0;
    if (m.degree(root) == 0) {
        throw topology_error("lazy_equivalence_check: root has no incident edges");
    }

    const Subdivision sub = subdivide(m);
    std::vector<double> fine(sub.graph.vertex_count(), 0.0);
    std::vector<double> fine_next(fine.size(), 0.0);
    fine[root] = 1.0;
    for (std::uint32_t t = 0; t < 2 * m_steps; ++t) {
        walk_step(sub.graph, fine, fine_next);
        fine.swap(fine_next);
    }

    std::vector<double> lazy(n, 0.0);
    std::vector<double> lazy_next(n, 0.0);
    lazy[root] = 1.0;
    for (std::uint32_t t = 0; t < m_steps; ++t) {
        lazy_step(m, lazy, lazy_next);
        lazy.swap(lazy_next);
    }

    double diff = 0.0;
    for (std::uint32_t v = 0; v < n; ++v) diff += std::abs(fine[v] - lazy[v]);
    // mass stranded on midpoints counts fully against the match
    for (std::size_t v = n; v < fine.size(); ++v) diff += fine[v];
    return 0.5 * diff;
}

LazyStepStats lazy_step_concentration(std::uint64_t trials, std::uint64_t m_steps,
                                      double epsilon, std::uint64_t seed) {
    if (m_steps == 0) throw std::domain_error("lazy_step_concentration: zero steps");
    if (!(epsilon > 0.0)) {
        throw std::domain_error("lazy_step_concentration: epsilon must be positive");
    }
    LazyStepStats stats;
    stats.trials = trials;
    stats.hoeffding_bound =
        2.0 * std::exp(-2.0 * epsilon * epsilon * static_cast<double>(m_steps));
    for (std::uint64_t t = 0; t < trials; ++t) {
        Xoshiro256pp rng(substream_seed(seed, t));
        std::uint64_t moves = 0;
        for (std::uint64_t s = 0; s < m_steps; ++s) moves += rng.next() >> 63;
        const double frac = static_cast<double>(moves) / static_cast<double>(m_steps);
        if (std::abs(frac - 0.5) > epsilon) ++stats.violations;
    }
    return stats;
}

PathSystem make_path_system(const MultiGraph& g1, const MultiGraph& g2,
                            std::span<const std::uint32_t> phi,
                            std::vector<std::vector<std::uint32_t>> paths) {
    check_vertex_map(phi, g1.vertex_count(), g2.vertex_count(), "make_path_system");
    if (paths.size() != g1.edge_count()) {
        throw std::domain_error("make_path_system: need one path per source edge");
    }

    struct PairSlot {
        std::vector<std::uint32_t> instances;
        std::size_t cursor = 0;
    };
    std::unordered_map<std::uint64_t, PairSlot> pair_slots;
    pair_slots.reserve(g2.edge_count());
    for (std::uint32_t e = 0; e < g2.edge_count(); ++e) {
        const MultiGraph::Edge& ed = g2.edge(e);
        pair_slots[pair_key(ed.u, ed.v)].instances.push_back(e);
    }

    PathSystem out;
    out.congestion.assign(g2.edge_count(), 0);
    for (std::uint32_t e = 0; e < paths.size(); ++e) {
        const MultiGraph::Edge& ed = g1.edge(e);
        const std::vector<std::uint32_t>& p = paths[e];
        const std::string tag = "make_path_system: edge " + std::to_string(e);
        if (p.empty()) throw std::domain_error(tag + ": empty path");
        for (std::uint32_t x : p) {
            if (x >= g2.vertex_count()) {
                throw std::domain_error(tag + ": path vertex out of range");
            }
        }
        if (p.front() != phi[ed.u] || p.back() != phi[ed.v]) {
            throw std::domain_error(tag + ": path does not join the mapped endpoints");
        }
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const auto it = pair_slots.find(pair_key(p[i], p[i + 1]));
            if (it == pair_slots.end()) {
                throw std::domain_error(tag + ": path step " + std::to_string(p[i]) +
                                        "-" + std::to_string(p[i + 1]) +
                                        " is not a target edge");
            }
            PairSlot& slot = it->second;
            ++out.congestion[slot.instances[slot.cursor++ % slot.instances.size()]];
        }
        out.max_length = std::max(out.max_length, p.size() - 1);
    }
    out.max_congestion = out.congestion.empty()
                             ? 0
                             : *std::max_element(out.congestion.begin(),
                                                 out.congestion.end());
    out.paths = std::move(paths);
    return out;
}

TransferBound energy_transfer_bound(const MultiGraph& g1, const MultiGraph& g2,
                                    std::span<const std::uint32_t> phi,
                                    const PathSystem& paths,
                                    std::span<const double> f) {
    check_vertex_map(phi, g1.vertex_count(), g2.vertex_count(), "energy_transfer_bound");
    if (paths.paths.size() != g1.edge_count() ||
        paths.congestion.size() != g2.edge_count()) {
        throw std::domain_error("energy_transfer_bound: path system does not match graphs");
    }
    if (f.size() != g2.vertex_count()) {
        throw std::domain_error("energy_transfer_bound: f must assign every target vertex");
    }

    TransferBound out;
    for (const MultiGraph::Edge& e : g1.edges()) {
        const double d = f[phi[e.u]] - f[phi[e.v]];
        out.lhs += d * d;
    }
    double target_energy = 0.0;
    for (const MultiGraph::Edge& e : g2.edges()) {
        const double d = f[e.u] - f[e.v];
        target_energy += d * d;
    }
    out.factor = static_cast<double>(paths.max_length) *
                 static_cast<double>(paths.max_congestion);
    out.rhs = out.factor * target_energy;
    const double eps = 1e-12 * (std::abs(out.lhs) + std::abs(out.rhs) + 1.0);
    out.holds = out.lhs <= out.rhs + eps;
    return out;
}

DistortionStats rough_isometry_audit(const MultiGraph& g1, const MultiGraph& g2,
                                     const VertexMapPair& maps, std::size_t pairs,
                                     std::uint64_t seed) {
    check_vertex_map(maps.phi, g1.vertex_count(), g2.vertex_count(),
                     "rough_isometry_audit");
    check_vertex_map(maps.psi, g2.vertex_count(), g1.vertex_count(),
                     "rough_isometry_audit");
    if (pairs == 0) throw std::domain_error("rough_isometry_audit: need pairs > 0");

    std::unordered_map<std::uint32_t, std::vector<std::int32_t>> dist1, dist2;
    const auto distance = [](auto& cache, const MultiGraph& g, std::uint32_t from,
                             std::uint32_t to) {
        auto it = cache.find(from);
        if (it == cache.end()) it = cache.emplace(from, bfs_distances(g, from)).first;
        return it->second[to];
    };

    DistortionStats stats;
    const double inf = std::numeric_limits<double>::infinity();
    // One direction of the audit: sample pairs in the source graph, compare
    // their distance against the distance of the mapped pair.
    const auto sweep = [&](const MultiGraph& gs, const MultiGraph& gt,
                           std::span<const std::uint32_t> map, auto& cache_s,
                           auto& cache_t, std::uint64_t stream, double& max_ratio,
                           double& median_ratio) {
        Xoshiro256pp rng(substream_seed(seed, stream));
        std::vector<double> ratios;
        ratios.reserve(pairs);
        for (std::size_t i = 0; i < pairs; ++i) {
            const auto u = static_cast<std::uint32_t>(rng.below(gs.vertex_count()));
            const auto v = static_cast<std::uint32_t>(rng.below(gs.vertex_count()));
            if (u == v) continue;
            const std::int32_t ds = distance(cache_s, gs, u, v);
            if (ds <= 0) continue;  // different component: no constraint
            const std::int32_t dt = distance(cache_t, gt, map[u], map[v]);
            const double image = dt < 0 ? inf : static_cast<double>(dt);
            ratios.push_back(image / ds);
            stats.slack_factor = std::max(stats.slack_factor, (image - 2.0) / ds);
        }
        stats.sampled += ratios.size();
        max_ratio = ratios.empty() ? 0.0
                                   : *std::max_element(ratios.begin(), ratios.end());
        median_ratio = median_of_sorted(ratios);
    };

    sweep(g1, g2, maps.phi, dist1, dist2, 0, stats.forward_max, stats.forward_median);
    sweep(g2, g1, maps.psi, dist2, dist1, 1, stats.backward_max, stats.backward_median);
    if (stats.sampled > 0) stats.factor = std::max(stats.forward_max, stats.backward_max);
    return stats;
}

TransferCase parse_transfer_case(std::istream& in, const MultiGraph& g1,
                                 const MultiGraph& g2) {
    // instance queue per unordered vertex pair of g1, in instance order
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> instances;
    for (std::uint32_t e = 0; e < g1.edge_count(); ++e) {
        const MultiGraph::Edge& ed = g1.edge(e);
        instances[pair_key(ed.u, ed.v)].push_back(e);
    }
    std::unordered_map<std::uint64_t, std::size_t> next_instance;

    TransferCase out;
    out.vertex_map.assign(g1.vertex_count(), 0);
    out.paths.resize(g1.edge_count());
    std::vector<bool> mapped(g1.vertex_count(), false);
    std::vector<bool> filled(g1.edge_count(), false);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(std::move(tok));
        if (tokens.empty()) continue;

        if (tokens[0] == "edge") {
            if (tokens.size() < 5 || tokens[3] != ":") {
                line_fail(line_no, "expected 'edge u v : x0 x1 ...'");
            }
            const auto u = parse_u32(tokens[1]);
            const auto v = parse_u32(tokens[2]);
            if (!u || !v || *u >= g1.vertex_count() || *v >= g1.vertex_count()) {
                line_fail(line_no, "edge endpoint is not a source vertex");
            }
            std::vector<std::uint32_t> path;
            path.reserve(tokens.size() - 4);
            for (std::size_t i = 4; i < tokens.size(); ++i) {
                const auto x = parse_u32(tokens[i]);
                if (!x || *x >= g2.vertex_count()) {
                    line_fail(line_no, "path vertex '" + tokens[i] +
                                           "' is not a target vertex");
                }
                path.push_back(*x);
            }
            const std::uint64_t key = pair_key(*u, *v);
            const auto it = instances.find(key);
            std::size_t& cursor = next_instance[key];
            if (it == instances.end() || cursor >= it->second.size()) {
                line_fail(line_no, "no unmatched edge " + tokens[1] + " " + tokens[2]);
            }
            const std::uint32_t e = it->second[cursor++];
            // the line runs u -> v; store in the instance's own orientation
            if (*u != g1.edge(e).u) std::reverse(path.begin(), path.end());
            out.paths[e] = std::move(path);
            filled[e] = true;
        } else {
            if (tokens.size() != 3 || tokens[1] != "->") {
                line_fail(line_no, "expected 'v -> x'");
            }
            const auto v = parse_u32(tokens[0]);
            const auto x = parse_u32(tokens[2]);
            if (!v || *v >= g1.vertex_count()) {
                line_fail(line_no, "'" + tokens[0] + "' is not a source vertex");
            }
            if (!x || *x >= g2.vertex_count()) {
                line_fail(line_no, "'" + tokens[2] + "' is not a target vertex");
            }
            if (mapped[*v]) line_fail(line_no, "vertex " + tokens[0] + " mapped twice");
            mapped[*v] = true;
            out.vertex_map[*v] = *x;
        }
    }

    for (std::uint32_t v = 0; v < g1.vertex_count(); ++v) {
        if (!mapped[v]) {
            throw format_error("transfer case: vertex " + std::to_string(v) +
                               " has no map line");
        }
    }
    for (std::uint32_t e = 0; e < g1.edge_count(); ++e) {
        if (!filled[e]) {
            const MultiGraph::Edge& ed = g1.edge(e);
            throw format_error("transfer case: edge " + std::to_string(ed.u) + " " +
                               std::to_string(ed.v) + " has no path line");
        }
    }
    return out;
}

TransferCase parse_transfer_case(const std::string& text, const MultiGraph& g1,
                                 const MultiGraph& g2) {
    std::istringstream in(text);
    return parse_transfer_case(in, g1, g2);
}

std::string format_transfer_case(const MultiGraph& g1,
                                 std::span<const std::uint32_t> vertex_map,
                                 const std::vector<std::vector<std::uint32_t>>& paths) {
    if (vertex_map.size() != g1.vertex_count()) {
        throw std::domain_error("format_transfer_case: map must cover every vertex");
    }
    if (paths.size() != g1.edge_count()) {
        throw std::domain_error("format_transfer_case: need one path per edge");
    }
    std::ostringstream out;
    for (std::uint32_t v = 0; v < g1.vertex_count(); ++v) {
        out << v << " -> " << vertex_map[v] << '\n';
    }
    for (std::uint32_t e = 0; e < g1.edge_count(); ++e) {
        if (paths[e].empty()) {
            throw std::domain_error("format_transfer_case: edge " + std::to_string(e) +
                                    " has an empty path");
        }
        const MultiGraph::Edge& ed = g1.edge(e);
        out << "edge " << ed.u << ' ' << ed.v << " :";
        for (std::uint32_t x : paths[e]) out << ' ' << x;
        out << '\n';
    }
    return out.str();
}

}  // namespace mcrt
