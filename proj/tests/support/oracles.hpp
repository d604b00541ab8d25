#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcrt/multigraph.hpp"
#include "mcrt/rng.hpp"

namespace mcrt::testing {

/// Gaussian elimination with partial pivoting; throws std::runtime_error on a
/// (numerically) singular system. Intended for small dense test systems.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b);

/// End-count adjacency matrix: a[u][v] = number of edge-ends at u leading to
/// v, so a self-loop contributes 2 to a[v][v].
std::vector<std::vector<double>> dense_adjacency(const MultiGraph& g);

/// Row-stochastic transition matrix of the simple random walk.
std::vector<std::vector<double>> dense_transition(const MultiGraph& g);

/// Walk distribution after `steps` steps from a point mass at root, computed
/// by dense matrix-vector products.
std::vector<double> dense_distribution(const MultiGraph& g, std::uint32_t root,
                                       std::uint64_t steps);

/// Potentials with f(source) = 1, f(sink) = 0, harmonic elsewhere, via a
/// dense solve of the grounded Laplacian system.
std::vector<double> dense_harmonic(const MultiGraph& g, std::uint32_t source,
                                   std::span<const std::uint32_t> sinks);

/// Effective resistance source <-> sinks from the dense harmonic solve.
double dense_resistance(const MultiGraph& g, std::uint32_t source,
                        std::span<const std::uint32_t> sinks);

/// Expected visits to root (counting time 0) before the walk first hits
/// `stop`, via the dense absorbing-chain fundamental matrix.
double dense_green_hitting(const MultiGraph& g, std::uint32_t root,
                           std::span<const std::uint32_t> stop);

/// Expected first-hitting time of `boundary` from root (0 when root is in the
/// boundary), via a dense solve.
double dense_exit_time(const MultiGraph& g, std::uint32_t root,
                       std::span<const std::uint32_t> boundary);

/// Random connected multigraph: a random spanning tree plus a random number
/// of extra uniformly chosen edges, so parallel edges (and self-loops when
/// allowed) occur regularly.
MultiGraph random_multigraph(Xoshiro256pp& rng, std::uint32_t min_n,
                             std::uint32_t max_n, bool allow_self_loops);

}  // namespace mcrt::testing
