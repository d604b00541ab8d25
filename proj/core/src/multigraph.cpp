#include "mcrt/multigraph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mcrt/errors.hpp"

namespace mcrt {

MultiGraph MultiGraph::from_edges(std::uint32_t vertex_count,
                                  const std::vector<std::array<std::uint32_t, 3>>& edges) {
    MultiGraph g;
    g.vertex_count_ = vertex_count;
    std::uint64_t instances = 0;
    for (const auto& [u, v, mult] : edges) {
        if (u >= vertex_count || v >= vertex_count) {
            throw std::invalid_argument("MultiGraph::from_edges: endpoint out of range");
        }
        instances += mult;
    }
    if (2 * instances > std::numeric_limits<std::uint32_t>::max()) {
        throw std::length_error("MultiGraph::from_edges: edge-end count exceeds u32 range");
    }
    g.edges_.reserve(instances);
    for (const auto& [u, v, mult] : edges) {
        for (std::uint32_t i = 0; i < mult; ++i) {
            g.edges_.push_back({std::min(u, v), std::max(u, v)});
        }
    }

    g.off_.assign(vertex_count + 1, 0);
    for (const Edge& e : g.edges_) {
        ++g.off_[e.u + 1];
        ++g.off_[e.v + 1];
    }
    for (std::uint32_t v = 0; v < vertex_count; ++v) g.off_[v + 1] += g.off_[v];
    g.end_nbr_.resize(2 * g.edges_.size());
    g.end_edge_.resize(2 * g.edges_.size());
    std::vector<std::uint32_t> cursor(g.off_.begin(), g.off_.end() - 1);
    for (std::uint32_t e = 0; e < g.edges_.size(); ++e) {
        const Edge& ed = g.edges_[e];
        std::uint32_t p = cursor[ed.u]++;
        g.end_nbr_[p] = ed.v;
        g.end_edge_[p] = e;
        p = cursor[ed.v]++;
        g.end_nbr_[p] = ed.u;
        g.end_edge_[p] = e;
    }
    return g;
}

Ball bfs_ball(const MultiGraph& g, std::uint32_t root, std::int32_t r) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("bfs_ball: root out of range");
    }
    if (r < 0) {
        throw std::domain_error("bfs_ball: negative radius");
    }
    Ball ball;
    ball.root = root;
    ball.radius = r;
    ball.dist.assign(g.vertex_count(), -1);
    ball.dist[root] = 0;
    std::deque<std::uint32_t> queue{root};
    ball.members.push_back(root);
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        if (ball.dist[v] == r) continue;
        for (std::uint32_t w : g.neighbors(v)) {
            if (ball.dist[w] < 0) {
                ball.dist[w] = ball.dist[v] + 1;
                ball.members.push_back(w);
                queue.push_back(w);
            }
        }
    }
    std::sort(ball.members.begin(), ball.members.end());
    for (std::uint32_t v : ball.members) {
        bool edge_out = false;
        for (std::uint32_t w : g.neighbors(v)) {
            if (ball.dist[w] < 0) {
                edge_out = true;
                break;
            }
        }
        if (edge_out) ball.boundary.push_back(v);
    }
    return ball;
}

std::vector<std::int32_t> bfs_distances(const MultiGraph& g, std::uint32_t root) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("bfs_distances: root out of range");
    }
    std::vector<std::int32_t> dist(g.vertex_count(), -1);
    dist[root] = 0;
    std::deque<std::uint32_t> queue{root};
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

InducedSubgraph induced_subgraph(const MultiGraph& g,
                                 std::span<const std::uint32_t> members) {
    std::vector<std::uint32_t> idx(g.vertex_count(),
                                   std::numeric_limits<std::uint32_t>::max());
    InducedSubgraph out;
    out.to_parent.assign(members.begin(), members.end());
    for (std::uint32_t i = 0; i < out.to_parent.size(); ++i) {
        const std::uint32_t v = out.to_parent[i];
        if (v >= g.vertex_count()) {
            throw std::invalid_argument("induced_subgraph: member out of range");
        }
        idx[v] = i;
    }
    std::vector<std::array<std::uint32_t, 3>> edges;
    for (const MultiGraph::Edge& e : g.edges()) {
        const std::uint32_t iu = idx[e.u];
        const std::uint32_t iv = idx[e.v];
        if (iu != std::numeric_limits<std::uint32_t>::max() &&
            iv != std::numeric_limits<std::uint32_t>::max()) {
            edges.push_back({iu, iv, 1});
        }
    }
    out.graph = MultiGraph::from_edges(static_cast<std::uint32_t>(out.to_parent.size()),
                                       edges);
    return out;
}

MultiGraph parse_edge_list(std::istream& in) {
    std::vector<std::array<std::uint32_t, 3>> triples;
    std::uint32_t max_id = 0;
    bool any = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream fields(line);
        std::int64_t u, v, mult;
        if (!(fields >> u >> v >> mult)) {
            throw format_error("edge list line " + std::to_string(line_no) +
                               ": expected 'u v multiplicity'");
        }
        std::string trailing;
        if (fields >> trailing) {
            throw format_error("edge list line " + std::to_string(line_no) +
                               ": unexpected trailing field '" + trailing + "'");
        }
        if (u < 0 || v < 0 || mult <= 0 ||
            u > std::numeric_limits<std::uint32_t>::max() ||
            v > std::numeric_limits<std::uint32_t>::max()) {
            throw format_error("edge list line " + std::to_string(line_no) +
                               ": ids must be nonnegative and multiplicity positive");
        }
        triples.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v),
                           static_cast<std::uint32_t>(mult)});
        max_id = std::max({max_id, static_cast<std::uint32_t>(u),
                           static_cast<std::uint32_t>(v)});
        any = true;
    }
    return MultiGraph::from_edges(any ? max_id + 1 : 0, triples);
}

MultiGraph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
}

std::string format_edge_list(const MultiGraph& g) {
    // coalesce parallel instances back into multiplicities
    std::vector<MultiGraph::Edge> sorted = g.edges();
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::ostringstream out;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        out << sorted[i].u << ' ' << sorted[i].v << ' ' << (j - i) << '\n';
        i = j;
    }
    return out.str();
}

} // namespace mcrt
