#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcrt/multigraph.hpp"

namespace mcrt {

/// Exact fraction for the small-map distribution identities. Always stored
/// reduced with a positive denominator.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    friend bool operator==(const Rational&, const Rational&) = default;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Reduced fraction num/den; throws std::domain_error on a zero denominator.
Rational make_rational(std::int64_t num, std::int64_t den);

/// A multigraph with every edge split by a fresh midpoint vertex. Midpoints
/// are appended after the original vertices, one per edge instance, so a
/// self-loop turns into a double edge between its vertex and its midpoint.
struct Subdivision {
    MultiGraph graph;
    std::uint32_t original_vertices = 0;

    std::uint32_t midpoint(std::uint32_t edge_id) const {
        return original_vertices + edge_id;
    }
};

Subdivision subdivide(const MultiGraph& m);

/// Root distribution proportional to 1 + deg/2, as exact fractions.
/// Restricted to maps with at most 64 edge-ends so the arithmetic stays in
/// small integers; throws std::domain_error beyond that.
std::vector<Rational> reweight_root(const MultiGraph& m);

/// Distribution of the pair (uniform vertex of the subdivision, original
/// vertex induced by it): an original vertex maps to itself, a midpoint to a
/// uniformly chosen endpoint of its edge.
struct RootCoupling {
    /// Marginal law of the induced original vertex.
    std::vector<Rational> marginal;
    /// stay_probability[v] = P(the uniform vertex was v itself | induced = v),
    /// which the construction makes equal to 2 / (2 + deg v).
    std::vector<Rational> stay_probability;
};

/// Same 64-edge-end restriction as reweight_root.
RootCoupling midpoint_root_coupling(const MultiGraph& m);

/// Total-variation distance between the subdivided-graph walk at time
/// 2*m_steps (read on the original vertices) and the lazy walk (stay with
/// probability 1/2) at time m_steps, both started at `root` and computed
/// exactly by distribution evolution. Expected 0 to numerical precision.
/// Throws std::domain_error for a bad root and topology_error when the root
/// has no incident edge-ends but steps were requested.
double lazy_equivalence_check(const MultiGraph& m, std::uint32_t root,
                              std::uint32_t m_steps);

/// Count of moving (non-stay) steps among m lazy-walk coins, repeated over
/// independent trials: a violation is a trial whose moving fraction leaves
/// [1/2 - epsilon, 1/2 + epsilon]. hoeffding_bound = 2 exp(-2 epsilon^2 m)
/// bounds the per-trial violation probability.
struct LazyStepStats {
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    double hoeffding_bound = 0.0;
};

LazyStepStats lazy_step_concentration(std::uint64_t trials, std::uint64_t m_steps,
                                      double epsilon, std::uint64_t seed);

/// One target-graph path per source edge instance, with the congestion and
/// length statistics the energy comparison needs. paths[e] is a vertex
/// sequence in the target graph running from phi(u) to phi(v) of source edge
/// e = (u, v); a collapsed edge (phi(u) == phi(v)) may use a single-vertex
/// path. Each traversed step is attributed to one target edge instance
/// joining its endpoints, cycling through parallel instances so repeated
/// traversals of a vertex pair spread evenly.
struct PathSystem {
    std::vector<std::vector<std::uint32_t>> paths;
    std::size_t max_length = 0;               ///< L_max, in steps
    std::vector<std::uint32_t> congestion;    ///< per target edge instance
    std::uint32_t max_congestion = 0;         ///< C_max
};

/// Validates the path family (coverage of every source edge, endpoint
/// anchoring through phi, adjacency of consecutive vertices) and computes the
/// stats. Throws std::domain_error on any violation.
PathSystem make_path_system(const MultiGraph& g1, const MultiGraph& g2,
                            std::span<const std::uint32_t> phi,
                            std::vector<std::vector<std::uint32_t>> paths);

/// The energy comparison along a path system:
///   Energy(f on phi; g1) <= L_max * C_max * Energy(f; g2).
struct TransferBound {
    double lhs = 0.0;     ///< Energy(f composed with phi; g1)
    double rhs = 0.0;     ///< factor * Energy(f; g2)
    double factor = 0.0;  ///< L_max * C_max
    bool holds = false;
};

TransferBound energy_transfer_bound(const MultiGraph& g1, const MultiGraph& g2,
                                    std::span<const std::uint32_t> phi,
                                    const PathSystem& paths,
                                    std::span<const double> f);

/// Forward and backward vertex maps between two graphs.
struct VertexMapPair {
    std::vector<std::uint32_t> phi;  ///< g1 -> g2
    std::vector<std::uint32_t> psi;  ///< g2 -> g1
};

/// Empirical distance-distortion statistics over sampled vertex pairs.
/// `factor` is the largest distance ratio seen in either direction (the
/// smallest multiplicative constant consistent with the sample); slack_factor
/// additionally grants the additive slack 2. A pair whose image distance is
/// unreachable makes the ratios infinite.
struct DistortionStats {
    double factor = 1.0;
    double slack_factor = 0.0;
    double forward_max = 0.0;
    double forward_median = 0.0;
    double backward_max = 0.0;
    double backward_median = 0.0;
    std::size_t sampled = 0;  ///< usable pairs per direction
};

DistortionStats rough_isometry_audit(const MultiGraph& g1, const MultiGraph& g2,
                                     const VertexMapPair& maps, std::size_t pairs,
                                     std::uint64_t seed);

/// Vertex map and path family in the plain-text exchange format:
///   v -> x
///   edge u v : x0 x1 ... xk
/// ('#' comments allowed). Every g1 vertex needs exactly one map line; path
/// lines are matched to the g1 edge instances joining u and v in instance
/// order. Structural problems raise format_error with a line number; the
/// returned paths still need make_path_system for the semantic checks.
struct TransferCase {
    std::vector<std::uint32_t> vertex_map;
    std::vector<std::vector<std::uint32_t>> paths;
};

TransferCase parse_transfer_case(const std::string& text, const MultiGraph& g1,
                                 const MultiGraph& g2);
TransferCase parse_transfer_case(std::istream& in, const MultiGraph& g1,
                                 const MultiGraph& g2);
std::string format_transfer_case(const MultiGraph& g1,
                                 std::span<const std::uint32_t> vertex_map,
                                 const std::vector<std::vector<std::uint32_t>>& paths);

}  // namespace mcrt
