#include "mcrt/map_builder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include "mcrt/errors.hpp"

namespace mcrt {

CellMinima cell_minima(const CorrelatedWalk& walk) {
    const std::uint32_t k = walk.params.mesh_k;
    const std::size_t cells = 2 * static_cast<std::size_t>(walk.params.window_n);
    CellMinima out;
    out.first_cell = -walk.params.window_n + 1;
    out.l.resize(cells);
    out.r.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t lo = c * k;
        double ml = walk.l[lo];
        double mr = walk.r[lo];
        for (std::size_t i = lo + 1; i <= lo + k; ++i) {
            ml = std::min(ml, walk.l[i]);
            mr = std::min(mr, walk.r[i]);
        }
        out.l[c] = ml;
        out.r[c] = mr;
    }
    return out;
}

namespace {

// Emits every chord pair (i, j), j >= i+2, with
//   max(m[i], m[j]) <= min(m[i+1..j-1])
// exactly once. Monotone stack; the stack keeps indices whose minima stay
// visible from the right, values non-decreasing toward the top. Equalities are
// kept: tied entries all pair with j and survive for later partners.
template <class Emit>
void sweep_chords(const std::vector<double>& m, Emit&& emit) {
    std::vector<std::uint32_t> stack;
    const std::size_t n = m.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double v = m[j];
        while (!stack.empty() && m[stack.back()] > v) {
            const std::uint32_t i = stack.back();
            stack.pop_back();
            if (j - i >= 2) emit(i, static_cast<std::uint32_t>(j));
        }
        std::size_t k = stack.size();
        while (k > 0 && m[stack[k - 1]] == v) {
            if (j - stack[k - 1] >= 2) emit(stack[k - 1], static_cast<std::uint32_t>(j));
            --k;
        }
        if (k > 0 && j - stack[k - 1] >= 2) emit(stack[k - 1], static_cast<std::uint32_t>(j));
        stack.push_back(static_cast<std::uint32_t>(j));
    }
}

std::vector<std::uint8_t> window_visibility(const CellMinima& minima) {
    const std::size_t n = minima.cell_count();
    std::vector<std::uint8_t> vis(n, 0);
    auto scan = [&](const std::vector<double>& m) {
        if (m.empty()) return;
        // right-visible: nothing to the right dips below m[i]
        double suf = std::numeric_limits<double>::infinity();
        for (std::size_t i = n; i-- > 0;) {
            if (m[i] <= suf) vis[i] = 1;
            suf = std::min(suf, m[i]);
        }
        // left-visible likewise
        double pre = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (m[i] <= pre) vis[i] = 1;
            pre = std::min(pre, m[i]);
        }
    };
    scan(minima.l);
    scan(minima.r);
    return vis;
}

} // namespace

MatedCrtGraph build_adjacency(const CellMinima& minima, const WalkParams& provenance) {
    const std::size_t n = minima.cell_count();
    if (minima.r.size() != n) {
        throw std::invalid_argument("build_adjacency: coordinate size mismatch");
    }
    MatedCrtGraph g;
    g.params = provenance;
    g.first_vertex = minima.first_cell;
    g.off.assign(n + 1, 0);
    if (n == 0) return g;

    // pass 1: degree counts
    {
        auto count = [&](std::uint32_t i, std::uint32_t j) {
            ++g.off[i + 1];
            ++g.off[j + 1];
        };
        for (std::uint32_t k = 0; k + 1 < n; ++k) count(k, k + 1);
        sweep_chords(minima.l, count);
        sweep_chords(minima.r, count);
    }
    std::uint64_t total = 0;
    for (std::size_t v = 0; v < n; ++v) {
        total += g.off[v + 1];
        if (total > std::numeric_limits<std::uint32_t>::max()) {
            throw std::length_error("build_adjacency: edge-end count exceeds u32 range");
        }
        g.off[v + 1] = static_cast<std::uint32_t>(total);
    }

    // pass 2: fill, using off[v] as a cursor; shift back afterwards
    g.nbr.resize(total);
    g.label.resize(total);
    {
        auto place = [&](std::uint32_t i, std::uint32_t j, EdgeLabel lb) {
            const std::uint32_t pi = g.off[i]++;
            g.nbr[pi] = j;
            g.label[pi] = static_cast<std::uint8_t>(lb);
            const std::uint32_t pj = g.off[j]++;
            g.nbr[pj] = i;
            g.label[pj] = static_cast<std::uint8_t>(lb);
        };
        for (std::uint32_t k = 0; k + 1 < n; ++k) place(k, k + 1, EdgeLabel::consecutive);
        sweep_chords(minima.l,
                     [&](std::uint32_t i, std::uint32_t j) { place(i, j, EdgeLabel::chord_l); });
        sweep_chords(minima.r,
                     [&](std::uint32_t i, std::uint32_t j) { place(i, j, EdgeLabel::chord_r); });
        for (std::size_t v = n; v-- > 1;) g.off[v] = g.off[v - 1];
        g.off[0] = 0;
    }

    g.window_visible = window_visibility(minima);
    return g;
}

MatedCrtGraph build_adjacency(const CorrelatedWalk& walk) {
    if (walk.params.window_n < 2) {
        throw std::domain_error("build_adjacency: window_n must be at least 2");
    }
    return build_adjacency(cell_minima(walk), walk.params);
}

std::vector<LabeledEdge> MatedCrtGraph::edges() const {
    std::vector<LabeledEdge> out;
    out.reserve(nbr.size() / 2);
    const std::size_t n = vertex_count();
    for (std::uint32_t v = 0; v < n; ++v) {
        for (std::uint32_t e = off[v]; e < off[v + 1]; ++e) {
            if (nbr[e] > v) {
                out.push_back({vertex_id(v), vertex_id(nbr[e]),
                               static_cast<EdgeLabel>(label[e])});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LabeledEdge> brute_force_adjacency(const CellMinima& minima,
                                               std::size_t max_cells) {
    const std::size_t n = minima.cell_count();
    if (n > max_cells) {
        throw std::invalid_argument("brute_force_adjacency: " + std::to_string(n) +
                                    " cells exceeds cap " + std::to_string(max_cells));
    }
    std::vector<LabeledEdge> out;
    auto run = [&](const std::vector<double>& m, EdgeLabel lb) {
        for (std::size_t i = 0; i < n; ++i) {
            double between = std::numeric_limits<double>::infinity();
            for (std::size_t j = i + 1; j < n; ++j) {
                if (j - i >= 2 && std::max(m[i], m[j]) <= between) {
                    out.push_back({minima.first_cell + static_cast<std::int64_t>(i),
                                   minima.first_cell + static_cast<std::int64_t>(j), lb});
                }
                between = std::min(between, m[j]);
            }
        }
    };
    for (std::size_t k = 0; k + 1 < n; ++k) {
        out.push_back({minima.first_cell + static_cast<std::int64_t>(k),
                       minima.first_cell + static_cast<std::int64_t>(k) + 1,
                       EdgeLabel::consecutive});
    }
    run(minima.l, EdgeLabel::chord_l);
    run(minima.r, EdgeLabel::chord_r);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LabeledEdge> brute_force_adjacency(const CorrelatedWalk& walk,
                                               std::size_t max_cells) {
    return brute_force_adjacency(cell_minima(walk), max_cells);
}

std::vector<std::int32_t> end_distance(const MatedCrtGraph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<std::int32_t> dist(n, -1);
    if (n == 0) return dist;
    std::deque<std::uint32_t> queue;
    dist[0] = 0;
    queue.push_back(0);
    if (n > 1) {
        dist[n - 1] = 0;
        queue.push_back(static_cast<std::uint32_t>(n - 1));
    }
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t w : g.neighbors(v)) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

MultiGraph to_multigraph(const MatedCrtGraph& g) {
    std::vector<std::array<std::uint32_t, 3>> triples;
    triples.reserve(g.edge_count());
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        for (std::uint32_t w : g.neighbors(v)) {
            if (v < w) triples.push_back({v, w, 1});
        }
    }
    return MultiGraph::from_edges(static_cast<std::uint32_t>(g.vertex_count()),
                                  triples);
}

namespace {

// Angular class of a dart in the strip drawing, counterclockwise from the
// east-pointing consecutive edge. R-chords arc above the line, L-chords below,
// wider spans more vertical.
struct DartKey {
    std::uint8_t cls;
    std::int64_t sub;
};

DartKey dart_key(std::uint32_t origin, std::uint32_t target, EdgeLabel lb) {
    const std::int64_t span = static_cast<std::int64_t>(target) - origin;
    if (lb == EdgeLabel::consecutive) {
        return {static_cast<std::uint8_t>(span > 0 ? 0 : 3), 0};
    }
    if (lb == EdgeLabel::chord_r) {
        return span > 0 ? DartKey{1, span} : DartKey{2, span}; // left partners: span<0 ascending = farthest first
    }
    return span < 0 ? DartKey{4, -span} : DartKey{5, -span};
}

void check_laminar(std::vector<std::pair<std::uint32_t, std::uint32_t>>& chords,
                   const char* side) {
    std::sort(chords.begin(), chords.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    std::vector<std::uint32_t> active; // right endpoints of enclosing chords
    for (const auto& [a, b] : chords) {
        while (!active.empty() && active.back() <= a) active.pop_back();
        if (!active.empty() && active.back() < b) {
            throw consistency_error(std::string("planar_order: crossing ") + side +
                                    "-chords near cells " + std::to_string(a) + ".." +
                                    std::to_string(b));
        }
        active.push_back(b);
    }
}

} // namespace

std::uint32_t RotationSystem::face_next(std::uint32_t dart) const {
    const std::uint32_t t = twin(dart);
    const std::uint32_t v = dart_origin(t);
    const std::uint32_t pos = position[t];
    const std::uint32_t lo = vertex_off[v];
    const std::uint32_t hi = vertex_off[v + 1];
    return order[pos == lo ? hi - 1 : pos - 1];
}

RotationSystem planar_order(const MatedCrtGraph& g) {
    RotationSystem rot;
    const std::size_t n = g.vertex_count();
    rot.vertex_count = n;

    // edge instances with internal endpoints, u < v
    for (std::uint32_t v = 0; v < n; ++v) {
        for (std::uint32_t e = g.off[v]; e < g.off[v + 1]; ++e) {
            if (g.nbr[e] > v) {
                rot.edge_list.push_back({static_cast<std::int64_t>(v),
                                         static_cast<std::int64_t>(g.nbr[e]),
                                         static_cast<EdgeLabel>(g.label[e])});
            }
        }
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> chords_l;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> chords_r;
    for (const LabeledEdge& e : rot.edge_list) {
        if (e.label == EdgeLabel::chord_l) {
            chords_l.emplace_back(static_cast<std::uint32_t>(e.u),
                                  static_cast<std::uint32_t>(e.v));
        } else if (e.label == EdgeLabel::chord_r) {
            chords_r.emplace_back(static_cast<std::uint32_t>(e.u),
                                  static_cast<std::uint32_t>(e.v));
        }
    }
    check_laminar(chords_l, "L");
    check_laminar(chords_r, "R");

    const std::size_t darts = 2 * rot.edge_list.size();
    rot.order.resize(darts);
    rot.position.resize(darts);
    rot.vertex_off.assign(n + 1, 0);
    for (const LabeledEdge& e : rot.edge_list) {
        ++rot.vertex_off[e.u + 1];
        ++rot.vertex_off[e.v + 1];
    }
    for (std::size_t v = 0; v < n; ++v) rot.vertex_off[v + 1] += rot.vertex_off[v];
    {
        std::vector<std::uint32_t> cursor(rot.vertex_off.begin(), rot.vertex_off.end() - 1);
        for (std::uint32_t e = 0; e < rot.edge_list.size(); ++e) {
            rot.order[cursor[rot.edge_list[e].u]++] = 2 * e;
            rot.order[cursor[rot.edge_list[e].v]++] = 2 * e + 1;
        }
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        auto lo = rot.order.begin() + rot.vertex_off[v];
        auto hi = rot.order.begin() + rot.vertex_off[v + 1];
        std::sort(lo, hi, [&](std::uint32_t a, std::uint32_t b) {
            const DartKey ka = dart_key(rot.dart_origin(a), rot.dart_target(a),
                                        rot.edge_list[a >> 1].label);
            const DartKey kb = dart_key(rot.dart_origin(b), rot.dart_target(b),
                                        rot.edge_list[b >> 1].label);
            if (ka.cls != kb.cls) return ka.cls < kb.cls;
            return ka.sub < kb.sub;
        });
    }
    for (std::uint32_t i = 0; i < rot.order.size(); ++i) rot.position[rot.order[i]] = i;
    return rot;
}

FaceCensus trace_faces(const RotationSystem& rot) {
    FaceCensus census;
    const std::size_t darts = rot.order.size();
    if (darts == 0) {
        census.face_count = 0;
        census.euler_ok = rot.vertex_count <= 1;
        return census;
    }

    std::vector<std::uint32_t> face_of(darts, std::numeric_limits<std::uint32_t>::max());
    for (std::uint32_t d0 = 0; d0 < darts; ++d0) {
        if (face_of[d0] != std::numeric_limits<std::uint32_t>::max()) continue;
        const auto face = static_cast<std::uint32_t>(census.degrees.size());
        std::uint32_t deg = 0;
        std::uint32_t d = d0;
        do {
            face_of[d] = face;
            ++deg;
            d = rot.face_next(d);
        } while (d != d0);
        census.degrees.push_back(deg);
    }
    census.face_count = census.degrees.size();

    // Outer face: at the leftmost vertex the angular gap spanning the west
    // half-plane is unbounded; it is the corner entered before the dart that
    // precedes the first below-line dart (wrapping to the rotation start when
    // the vertex has none).
    {
        const std::uint32_t lo = rot.vertex_off[0];
        const std::uint32_t hi = rot.vertex_off[1];
        std::uint32_t h = lo;
        for (std::uint32_t i = lo; i < hi; ++i) {
            const std::uint32_t d = rot.order[i];
            const DartKey key = dart_key(rot.dart_origin(d), rot.dart_target(d),
                                         rot.edge_list[d >> 1].label);
            if (key.cls >= 3) {
                h = i;
                break;
            }
        }
        const std::uint32_t g = rot.order[h == lo ? hi - 1 : h - 1];
        census.outer_face = face_of[g];
    }

    for (std::size_t f = 0; f < census.face_count; ++f) {
        if (f != census.outer_face && census.degrees[f] != 3) ++census.inner_non_triangles;
    }
    const auto v = static_cast<std::int64_t>(rot.vertex_count);
    const auto e = static_cast<std::int64_t>(rot.edge_list.size());
    const auto f = static_cast<std::int64_t>(census.face_count);
    census.euler_ok = (v - e + f == 2);
    return census;
}

} // namespace mcrt
