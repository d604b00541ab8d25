#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mcrt {

/// Immutable undirected multigraph. Edges are explicit instances (parallel
/// edges are distinct), self-loops allowed; a self-loop contributes two ends
/// at its vertex, so degree always counts edge-ends.
class MultiGraph {
  public:
    struct Edge {
        std::uint32_t u;
        std::uint32_t v;
        friend bool operator==(const Edge&, const Edge&) = default;
    };

    MultiGraph() = default;

    /// Builds from explicit instances; (u, v, multiplicity) triples expand to
    /// that many parallel instances. Endpoints must be < vertex_count.
    static MultiGraph from_edges(std::uint32_t vertex_count,
                                 const std::vector<std::array<std::uint32_t, 3>>& edges);

    std::uint32_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const Edge& edge(std::uint32_t e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::uint32_t degree(std::uint32_t v) const { return off_[v + 1] - off_[v]; }
    /// Other endpoint per incident edge-end (self-loop lists v twice).
    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        return {end_nbr_.data() + off_[v], end_nbr_.data() + off_[v + 1]};
    }
    /// Edge instance id per incident edge-end, aligned with neighbors().
    std::span<const std::uint32_t> incident_edges(std::uint32_t v) const {
        return {end_edge_.data() + off_[v], end_edge_.data() + off_[v + 1]};
    }

    std::uint64_t total_degree() const { return end_nbr_.size(); }

  private:
    std::uint32_t vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> off_;
    std::vector<std::uint32_t> end_nbr_;
    std::vector<std::uint32_t> end_edge_;
};

/// Metric ball around a root: exact hop distances, members, and the boundary
/// (members adjacent to at least one non-member).
struct Ball {
    std::uint32_t root = 0;
    std::int32_t radius = 0;
    std::vector<std::int32_t> dist;        ///< full-graph array; -1 = beyond radius
    std::vector<std::uint32_t> members;    ///< sorted
    std::vector<std::uint32_t> boundary;   ///< sorted subset of members
};

/// Breadth-first ball; throws std::domain_error when root is out of range or
/// r is negative.
Ball bfs_ball(const MultiGraph& g, std::uint32_t root, std::int32_t r);

/// Hop distance from root to every vertex (-1 = unreachable).
std::vector<std::int32_t> bfs_distances(const MultiGraph& g, std::uint32_t root);

/// Induced subgraph plus the relabeling back to the parent graph.
struct InducedSubgraph {
    MultiGraph graph;
    std::vector<std::uint32_t> to_parent;  ///< new vertex index -> parent index
};

/// Keeps exactly the edge instances with both endpoints in `members`
/// (sorted, unique); self-loops of members survive.
InducedSubgraph induced_subgraph(const MultiGraph& g,
                                 std::span<const std::uint32_t> members);

/// Plain-text edge list: one "u v multiplicity" triple per line, '#' starts a
/// comment, self-loops written as u = v. Vertex count is max id + 1. Parse
/// failures throw format_error.
MultiGraph parse_edge_list(std::istream& in);
MultiGraph parse_edge_list(const std::string& text);
std::string format_edge_list(const MultiGraph& g);

} // namespace mcrt
