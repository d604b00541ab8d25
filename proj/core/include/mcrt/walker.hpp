#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcrt/multigraph.hpp"

namespace mcrt {

/// One simulated trajectory of the simple random walk on a multigraph.
///
/// Each step picks an incident edge-end uniformly at random, so a parallel
/// edge is crossed with multiplicity weight and a self-loop (two ends) keeps
/// the walker in place with probability 2/deg.
struct WalkRun {
    std::uint32_t root = 0;
    std::uint64_t seed = 0;
    /// Number of steps actually taken (<= the requested budget; the run ends
    /// early once every requested exit time and displacement sample exists).
    std::uint64_t steps_taken = 0;
    /// Radii whose exit times were requested, strictly increasing.
    std::vector<std::int32_t> exit_radii;
    /// exit_times[i] = first step t with dist(X_t, root) > exit_radii[i],
    /// or -1 when the budget ran out first.
    std::vector<std::int64_t> exit_times;
    /// Visits to the root at steps 0..steps_taken, including step 0.
    std::uint64_t root_visits = 0;
    /// Times whose displacements were requested, strictly increasing.
    std::vector<std::uint64_t> sample_times;
    /// displacement[i] = dist(X_t, root) at t = sample_times[i], or -1 when
    /// the budget ran out first.
    std::vector<std::int32_t> displacement;
    /// Largest dist(X_t, root) over every step of the run (0 when nothing
    /// needed distances).
    std::int32_t max_distance = 0;
};

/// Runs one walk of at most `steps` steps from `root`, recording the exit
/// time of each ball B_r for r in `radii` and the graph distance from the
/// root at each time in `sample_times`.
///
/// `radii` and `sample_times` must be strictly increasing and nonnegative.
/// `dist_from_root` may carry a precomputed bfs_distances(g, root) array to
/// share across walkers; when empty it is computed internally (only needed
/// if radii or sample times are requested). Identical arguments and seed
/// reproduce the run bit for bit.
WalkRun simulate_walk(const MultiGraph& g, std::uint32_t root, std::uint64_t steps,
                      std::span<const std::int32_t> radii,
                      std::span<const std::uint64_t> sample_times, std::uint64_t seed,
                      std::span<const std::int32_t> dist_from_root = {});

/// Monte Carlo estimate with a normal-approximation confidence interval.
struct GreenEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    /// Half-width of the two-sided 99% interval (2.5758... * std_error).
    double ci99 = 0.0;
    std::uint64_t walkers = 0;
};

/// Estimates the expected number of visits to `root` (counting time 0) over
/// walk steps 0..stop_time inclusive.
///
/// Walker i uses the substream seed derived from (seed, i), so enlarging the
/// walker count never perturbs earlier walkers. Throws std::domain_error when
/// walkers == 0.
GreenEstimate green_mc(const MultiGraph& g, std::uint32_t root, std::uint64_t stop_time,
                       std::uint64_t walkers, std::uint64_t seed);

/// Estimates the expected number of visits to `root` (counting time 0)
/// strictly before the walk first hits `stop`. When the root itself lies in
/// `stop` the count is exactly zero.
///
/// Throws std::domain_error when walkers == 0 or stop is empty/out of range,
/// and topology_error when no stop vertex is reachable from the root.
GreenEstimate green_mc(const MultiGraph& g, std::uint32_t root,
                       std::span<const std::uint32_t> stop, std::uint64_t walkers,
                       std::uint64_t seed);

/// Exact return probabilities P(X_{2n} = root) from truncated distribution
/// evolution, with the dropped probability mass accounted as a one-sided
/// error bound: each reported value lies in [exact - drop_bound, exact].
struct ReturnProbSeries {
    std::uint32_t root = 0;
    double tau = 0.0;
    /// p2n[n] = computed P(2n), n = 0..n_max.
    std::vector<double> p2n;
    /// Cumulative dropped mass by time 2n; nondecreasing.
    std::vector<double> drop_bound;
    /// Mass at the root after every step t = 0..2*n_max (odd times included,
    /// for cumulative Green's functions on non-bipartite graphs).
    std::vector<double> p_all;
    /// Largest mass observed on hazard-flagged vertices at any time, when a
    /// hazard mask was supplied (otherwise 0).
    double hazard_mass = 0.0;
};

/// Evolves the walk distribution from `root` for 2*n_max steps by sparse
/// transition application. Entries below `tau` are dropped only while the
/// per-step dropped mass stays within drop_budget / (2*n_max), so the total
/// dropped mass never exceeds `drop_budget`; the running total is reported
/// per n. A nonempty `hazard_mask` (one byte per vertex, nonzero = flagged)
/// makes the series record the peak mass resting on flagged vertices.
///
/// Throws std::domain_error for invalid arguments and convergence_error if
/// the accumulated bound somehow exceeds drop_budget.
ReturnProbSeries return_prob_exact(const MultiGraph& g, std::uint32_t root,
                                   std::uint64_t n_max, double tau = 1e-15,
                                   double drop_budget = 1e-9,
                                   std::span<const std::uint8_t> hazard_mask = {});

/// Cumulative Green's function read off a return-probability series.
struct GreenCurve {
    /// gr[n] = Gr_{2n}(root, root) = sum of root mass over times 0..2n.
    std::vector<double> gr;
    /// gr_norm[n] = gr[n] / deg_root, the resistance-normalized form.
    std::vector<double> gr_norm;
};

/// Accumulates the full (even and odd time) root-mass sequence of `series`
/// into Gr_{2n} and its degree-normalized companion. Throws std::domain_error
/// when deg_root is not positive.
GreenCurve green_cumulative(const ReturnProbSeries& series, double deg_root);

}  // namespace mcrt
