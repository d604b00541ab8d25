#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcrt/multigraph.hpp"
#include "mcrt/walk.hpp"

namespace mcrt {

/// Per-cell infima of a walk coordinate. Cell x spans times [x-1, x]; cells are
/// indexed by their right endpoint, x in (-window_n, window_n], so there are
/// 2 * window_n of them. `first_cell` is the id of cells[0] (= -window_n + 1).
struct CellMinima {
    std::int64_t first_cell = 0;
    std::vector<double> l;
    std::vector<double> r;

    std::size_t cell_count() const { return l.size(); }
};

CellMinima cell_minima(const CorrelatedWalk& walk);

enum class EdgeLabel : std::uint8_t { consecutive = 0, chord_l = 1, chord_r = 2 };

/// Undirected edge instance between vertex ids (times); u < v always.
struct LabeledEdge {
    std::int64_t u = 0;
    std::int64_t v = 0;
    EdgeLabel label = EdgeLabel::consecutive;

    friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
    friend auto operator<=>(const LabeledEdge&, const LabeledEdge&) = default;
};

/// The adjacency structure of a windowed mated-walk map. Vertices are the
/// cells, identified by integer times first_vertex .. first_vertex+count-1 and
/// stored internally as 0-based indices. Multigraph: a pair can carry both an
/// L-chord and an R-chord. Compressed sparse rows over edge ends.
class MatedCrtGraph {
  public:
    WalkParams params;              ///< provenance (gamma, window, mesh, seed)
    std::int64_t first_vertex = 0;  ///< time id of internal vertex 0

    std::vector<std::uint32_t> off;   ///< size vertex_count()+1
    std::vector<std::uint32_t> nbr;   ///< neighbor internal index per end
    std::vector<std::uint8_t> label;  ///< EdgeLabel per end
    std::vector<std::uint8_t> window_visible; ///< 1 = cell minimum visible from a window end
                                              ///< (an edge past the window cannot be ruled out)

    std::size_t vertex_count() const { return off.empty() ? 0 : off.size() - 1; }
    std::size_t edge_count() const { return nbr.size() / 2; }
    std::uint32_t degree(std::uint32_t v) const { return off[v + 1] - off[v]; }
    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {nbr.data() + off[v], nbr.data() + off[v + 1]};
    }
    std::span<const std::uint8_t> end_labels(std::uint32_t v) const {
        return {label.data() + off[v], label.data() + off[v + 1]};
    }

    std::int64_t vertex_id(std::uint32_t internal) const {
        return first_vertex + static_cast<std::int64_t>(internal);
    }
    std::uint32_t internal_of(std::int64_t id) const {
        return static_cast<std::uint32_t>(id - first_vertex);
    }
    /// Internal index of the vertex at time 0 (the root cell [-1, 0]).
    std::uint32_t root() const { return internal_of(0); }

    /// All edge instances, sorted by (u, v, label), with time ids.
    std::vector<LabeledEdge> edges() const;
};

/// O(total edges) construction via a monotone-stack sweep per coordinate.
/// Ties (equalities between cell minima) follow the adjacency inequality
/// exactly; they occur structurally because neighboring cells share a sample.
MatedCrtGraph build_adjacency(const CorrelatedWalk& walk);

/// Same construction from bare minima (entry point for hand-built fixtures).
MatedCrtGraph build_adjacency(const CellMinima& minima, const WalkParams& provenance = {});

/// Independent O(cells^2) evaluation of the adjacency inequality for every
/// pair. Guards against accidental quadratic blowups via `max_cells`.
std::vector<LabeledEdge> brute_force_adjacency(const CellMinima& minima,
                                               std::size_t max_cells = 5000);
std::vector<LabeledEdge> brute_force_adjacency(const CorrelatedWalk& walk,
                                               std::size_t max_cells = 5000);

/// BFS distance from every vertex to the nearest window-end cell (the first or
/// last cell, whose out-of-window continuation is truncated). Used to flag
/// boundary-contaminated regions: a radius-r measurement around a vertex is
/// clean when the whole ball keeps end-distance > r.
std::vector<std::int32_t> end_distance(const MatedCrtGraph& g);

/// Re-expresses the adjacency as a MultiGraph (one edge instance per labeled
/// edge, so the parallel chord pairs stay parallel), opening the electrical
/// and walk machinery to mated-CRT samples.
MultiGraph to_multigraph(const MatedCrtGraph& g);

/// Combinatorial embedding: cyclic edge order around every vertex, with
/// L-chords drawn below the vertex line, R-chords above, consecutive edges
/// along the line, and same-side chords nested by span. Darts are indexed
/// 2*edge and 2*edge+1 (forward / reverse of edges()[edge]).
class RotationSystem {
  public:
    std::size_t vertex_count = 0;
    std::vector<LabeledEdge> edge_list;           ///< internal indices, u < v
    std::vector<std::uint32_t> order;             ///< darts in rotation order, grouped by vertex
    std::vector<std::uint32_t> vertex_off;        ///< per-vertex slice of `order`
    std::vector<std::uint32_t> position;          ///< dart -> index in `order`

    std::uint32_t dart_origin(std::uint32_t dart) const {
        const LabeledEdge& e = edge_list[dart >> 1];
        return static_cast<std::uint32_t>((dart & 1) == 0 ? e.u : e.v);
    }
    std::uint32_t dart_target(std::uint32_t dart) const {
        const LabeledEdge& e = edge_list[dart >> 1];
        return static_cast<std::uint32_t>((dart & 1) == 0 ? e.v : e.u);
    }
    static std::uint32_t twin(std::uint32_t dart) { return dart ^ 1u; }

    /// Dart that follows `dart` when walking its face.
    std::uint32_t face_next(std::uint32_t dart) const;
};

/// Builds the rotation system; throws consistency_error when two same-side
/// chords interleave (possible at coarse mesh_k through exact minima ties;
/// vanishes as mesh_k grows).
RotationSystem planar_order(const MatedCrtGraph& g);

struct FaceCensus {
    std::size_t face_count = 0;
    std::size_t outer_face = 0;           ///< index into `degrees`
    std::vector<std::uint32_t> degrees;   ///< darts per face
    std::size_t inner_non_triangles = 0;  ///< inner faces with degree != 3
    bool euler_ok = false;                ///< V - E + F == 2

    bool all_inner_triangular() const { return inner_non_triangles == 0; }
};

/// Traces every face of the rotation system. The outer face is the one that
/// occupies the west-facing angular gap at the leftmost vertex, which is
/// unbounded in the strip drawing.
FaceCensus trace_faces(const RotationSystem& rot);

} // namespace mcrt
