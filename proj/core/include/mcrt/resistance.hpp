#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcrt/multigraph.hpp"

namespace mcrt {

/// Dirichlet data: potential 1 at `source`, 0 on `sink`. Validation (source
/// not in sink, sink nonempty and reachable) happens inside the solvers.
struct BoundaryCondition {
    std::uint32_t source = 0;
    std::vector<std::uint32_t> sink;
};

struct PotentialField {
    std::vector<double> value;  ///< per vertex; 0 outside the source component
    double residual = 0.0;      ///< relative residual reached by the solver
    std::uint32_t iterations = 0;
};

/// Solves the discrete Dirichlet problem: value fixed on the boundary,
/// multiplicity-weighted harmonic elsewhere, by Jacobi-preconditioned
/// conjugate gradients on the interior Laplacian block.
/// Throws topology_error when source and sink are disconnected and
/// convergence_error when the iteration cap (50 n + 200) is exhausted.
PotentialField harmonic_solve(const MultiGraph& g, const BoundaryCondition& bc,
                              double tol = 1e-10);

/// Sum over edge instances of the squared endpoint difference; parallel
/// instances count separately, self-loops contribute zero.
double dirichlet_energy(const MultiGraph& g, std::span<const double> f);

/// 1 / dirichlet_energy of the harmonic potential (Dirichlet's principle).
double effective_resistance(const MultiGraph& g, std::uint32_t source,
                            std::span<const std::uint32_t> sink, double tol = 1e-10);

/// Antisymmetric flow: value per edge instance, oriented from edge(e).u to
/// edge(e).v. Unit flows have divergence +1 at the source, 0 off boundary.
struct UnitFlow {
    std::uint32_t source = 0;
    std::vector<std::uint32_t> sink;
    std::vector<double> along;  ///< per edge instance, u -> v orientation
};

/// The harmonic current flow, rescaled so source divergence is exactly 1.
/// Its energy equals the effective resistance (Thomson optimum).
/// Throws std::domain_error when the potential drives no current.
UnitFlow current_flow(const MultiGraph& g, const PotentialField& pf,
                      const BoundaryCondition& bc);

struct PathFlowOptions {
    /// Above this many sink targets the flow switches from exact averaging
    /// over every target to uniform target sampling (this many samples).
    std::uint32_t max_exact_targets = 4096;
    std::uint64_t seed = 0;
};

/// Geodesic path flow: for each sink target, the uniform average over all
/// shortest paths from source to that target (counted by dynamic programming,
/// parallel edges distinct); the result averages targets uniformly. Always a
/// unit flow, so its energy upper-bounds the effective resistance. Sampled
/// mode draws one geodesic per sampled target instead.
/// Throws std::domain_error when no sink target is reachable.
UnitFlow path_flow(const MultiGraph& g, std::uint32_t source,
                   std::span<const std::uint32_t> sink,
                   const PathFlowOptions& options = {});

struct FlowDiagnostics {
    double max_interior_divergence = 0.0;  ///< max |div| off source and sink
    double source_deviation = 0.0;         ///< |div(source) - 1|
    double energy = 0.0;
};

FlowDiagnostics validate_unit_flow(const MultiGraph& g, const UnitFlow& flow);

/// Expected number of steps for the simple random walk from `root` to reach
/// `boundary`: solves (L u) = deg on the interior, u = 0 on the boundary.
/// Returns 0 when the root is itself a boundary vertex.
double expected_exit_time(const MultiGraph& g, std::uint32_t root,
                          std::span<const std::uint32_t> boundary,
                          double tol = 1e-10);

} // namespace mcrt
