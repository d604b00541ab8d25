#include "mcrt/walker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "mcrt/errors.hpp"
#include "mcrt/rng.hpp"

namespace mcrt {

namespace {

// Two-sided 99% normal quantile.
constexpr double kZ99 = 2.5758293035489004;

template <typename T>
void require_strictly_increasing(std::span<const T> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < T{0} || (i > 0 && values[i] <= values[i - 1])) {
            throw std::domain_error(std::string(what) +
                                    " must be nonnegative and strictly increasing");
        }
    }
}

std::uint32_t step_to_neighbor(const MultiGraph& g, std::uint32_t v, Xoshiro256pp& rng) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) {
        throw topology_error("random walk reached a vertex with no incident edge-ends");
    }
    return nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
}

GreenEstimate finish_estimate(unsigned __int128 sum, unsigned __int128 sum_sq,
                              std::uint64_t n) {
    GreenEstimate est;
    est.walkers = n;
    est.mean = static_cast<double>(static_cast<long double>(sum) / n);
    if (n >= 2) {
        // n*sum_sq - sum^2 is an exact nonnegative integer for integer samples.
        const unsigned __int128 numer = n * sum_sq - sum * sum;
        const long double var = static_cast<long double>(numer) /
                                (static_cast<long double>(n) * (n - 1));
        est.std_error = static_cast<double>(std::sqrt(var / n));
    } else {
        est.std_error = std::numeric_limits<double>::infinity();
    }
    est.ci99 = kZ99 * est.std_error;
    return est;
}

}  // namespace

WalkRun simulate_walk(const MultiGraph& g, std::uint32_t root, std::uint64_t steps,
                      std::span<const std::int32_t> radii,
                      std::span<const std::uint64_t> sample_times, std::uint64_t seed,
                      std::span<const std::int32_t> dist_from_root) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("simulate_walk: root out of range");
    }
    require_strictly_increasing(radii, "simulate_walk: radii");
    require_strictly_increasing(sample_times, "simulate_walk: sample times");

    const bool needs_dist = !radii.empty() || !sample_times.empty();
    std::vector<std::int32_t> dist_storage;
    if (needs_dist && dist_from_root.empty()) {
        dist_storage = bfs_distances(g, root);
        dist_from_root = dist_storage;
    }
    if (needs_dist && dist_from_root.size() != g.vertex_count()) {
        throw std::domain_error("simulate_walk: distance array size mismatch");
    }

    WalkRun run;
    run.root = root;
    run.seed = seed;
    run.exit_radii.assign(radii.begin(), radii.end());
    run.exit_times.assign(radii.size(), -1);
    run.sample_times.assign(sample_times.begin(), sample_times.end());
    run.displacement.assign(sample_times.size(), -1);

    Xoshiro256pp rng(seed);
    std::uint32_t v = root;
    std::size_t radius_idx = 0;
    std::size_t time_idx = 0;
    std::uint64_t t = 0;
    for (;;) {
        const std::int32_t d = needs_dist ? dist_from_root[v] : 0;
        run.max_distance = std::max(run.max_distance, d);
        if (v == root) ++run.root_visits;
        while (radius_idx < radii.size() && d > radii[radius_idx]) {
            run.exit_times[radius_idx] = static_cast<std::int64_t>(t);
            ++radius_idx;
        }
        while (time_idx < sample_times.size() && sample_times[time_idx] == t) {
            run.displacement[time_idx] = d;
            ++time_idx;
        }
        const bool all_recorded = (!radii.empty() || !sample_times.empty()) &&
                                  radius_idx == radii.size() &&
                                  time_idx == sample_times.size();
        if (t == steps || all_recorded) break;
        v = step_to_neighbor(g, v, rng);
        ++t;
    }
    run.steps_taken = t;
    return run;
}

GreenEstimate green_mc(const MultiGraph& g, std::uint32_t root, std::uint64_t stop_time,
                       std::uint64_t walkers, std::uint64_t seed) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("green_mc: root out of range");
    }
    if (walkers == 0) {
        throw std::domain_error("green_mc: zero walkers");
    }
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    for (std::uint64_t i = 0; i < walkers; ++i) {
        Xoshiro256pp rng(substream_seed(seed, i));
        std::uint32_t v = root;
        std::uint64_t visits = 1;
        for (std::uint64_t t = 0; t < stop_time; ++t) {
            v = step_to_neighbor(g, v, rng);
            if (v == root) ++visits;
        }
        sum += visits;
        sum_sq += static_cast<unsigned __int128>(visits) * visits;
    }
    return finish_estimate(sum, sum_sq, walkers);
}

GreenEstimate green_mc(const MultiGraph& g, std::uint32_t root,
                       std::span<const std::uint32_t> stop, std::uint64_t walkers,
                       std::uint64_t seed) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("green_mc: root out of range");
    }
    if (walkers == 0) {
        throw std::domain_error("green_mc: zero walkers");
    }
    if (stop.empty()) {
        throw std::domain_error("green_mc: empty stop set");
    }
    std::vector<std::uint8_t> is_stop(g.vertex_count(), 0);
    for (std::uint32_t s : stop) {
        if (s >= g.vertex_count()) {
            throw std::domain_error("green_mc: stop vertex out of range");
        }
        is_stop[s] = 1;
    }
    if (is_stop[root]) {
        GreenEstimate est;
        est.walkers = walkers;
        return est;
    }
    // The walk must be able to reach the stop set, or it would never end.
    {
        std::vector<std::uint8_t> seen(g.vertex_count(), 0);
        std::deque<std::uint32_t> queue{root};
        seen[root] = 1;
        bool reachable = false;
        while (!queue.empty() && !reachable) {
            const std::uint32_t v = queue.front();
            queue.pop_front();
            for (std::uint32_t w : g.neighbors(v)) {
                if (seen[w]) continue;
                seen[w] = 1;
                if (is_stop[w]) {
                    reachable = true;
                    break;
                }
                queue.push_back(w);
            }
        }
        if (!reachable) {
            throw topology_error("green_mc: stop set unreachable from root");
        }
    }
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    for (std::uint64_t i = 0; i < walkers; ++i) {
        Xoshiro256pp rng(substream_seed(seed, i));
        std::uint32_t v = root;
        std::uint64_t visits = 0;
        while (!is_stop[v]) {
            if (v == root) ++visits;
            v = step_to_neighbor(g, v, rng);
        }
        sum += visits;
        sum_sq += static_cast<unsigned __int128>(visits) * visits;
    }
    return finish_estimate(sum, sum_sq, walkers);
}

ReturnProbSeries return_prob_exact(const MultiGraph& g, std::uint32_t root,
                                   std::uint64_t n_max, double tau, double drop_budget,
                                   std::span<const std::uint8_t> hazard_mask) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("return_prob_exact: root out of range");
    }
    if (n_max > (std::uint64_t{1} << 30)) {
        throw std::domain_error("return_prob_exact: n_max too large");
    }
    if (!(tau >= 0.0) || !(drop_budget >= 0.0)) {
        throw std::domain_error("return_prob_exact: negative threshold or budget");
    }
    if (!hazard_mask.empty() && hazard_mask.size() != g.vertex_count()) {
        throw std::domain_error("return_prob_exact: hazard mask size mismatch");
    }
    const std::uint64_t total_steps = 2 * n_max;
    if (total_steps > 0 && g.degree(root) == 0) {
        throw topology_error("return_prob_exact: root has no incident edge-ends");
    }

    ReturnProbSeries series;
    series.root = root;
    series.tau = tau;
    series.p2n.assign(n_max + 1, 0.0);
    series.drop_bound.assign(n_max + 1, 0.0);
    series.p_all.assign(total_steps + 1, 0.0);
    series.p2n[0] = 1.0;
    series.p_all[0] = 1.0;

    std::vector<double> cur(g.vertex_count(), 0.0);
    std::vector<double> nxt(g.vertex_count(), 0.0);
    std::vector<std::uint32_t> stamp(g.vertex_count(), 0);
    std::vector<std::uint32_t> active{root};
    std::vector<std::uint32_t> next_active;
    cur[root] = 1.0;
    const double step_budget = total_steps > 0 ? drop_budget / total_steps : 0.0;
    double total_dropped = 0.0;
    if (!hazard_mask.empty() && hazard_mask[root]) series.hazard_mass = 1.0;

    for (std::uint64_t step = 1; step <= total_steps; ++step) {
        const auto mark = static_cast<std::uint32_t>(step);
        for (std::uint32_t v : active) {
            const double share = cur[v] / g.degree(v);
            cur[v] = 0.0;
            for (std::uint32_t w : g.neighbors(v)) {
                if (stamp[w] != mark) {
                    stamp[w] = mark;
                    nxt[w] = share;
                    next_active.push_back(w);
                } else {
                    nxt[w] += share;
                }
            }
        }
        cur.swap(nxt);
        active.swap(next_active);
        next_active.clear();

        if (tau > 0.0) {
            std::size_t below = 0;
            for (std::uint32_t v : active) {
                if (cur[v] < tau) ++below;
            }
            if (below > 0) {
                // Dropping only entries below min(tau, budget/count) keeps the
                // mass removed this step at or under the per-step budget.
                const double thr =
                    std::min(tau, step_budget / static_cast<double>(below));
                std::size_t out = 0;
                for (std::uint32_t v : active) {
                    if (cur[v] < thr) {
                        total_dropped += cur[v];
                        cur[v] = 0.0;
                    } else {
                        active[out++] = v;
                    }
                }
                active.resize(out);
            }
        }

        series.p_all[step] = cur[root];
        if (!hazard_mask.empty()) {
            double on_hazard = 0.0;
            for (std::uint32_t v : active) {
                if (hazard_mask[v]) on_hazard += cur[v];
            }
            series.hazard_mass = std::max(series.hazard_mass, on_hazard);
        }
        if (step % 2 == 0) {
            series.p2n[step / 2] = cur[root];
            series.drop_bound[step / 2] = total_dropped;
        }
    }

    if (total_dropped > drop_budget * (1.0 + 1e-12)) {
        throw convergence_error(
            "return_prob_exact: truncation bound " + std::to_string(total_dropped) +
            " exceeds the requested budget " + std::to_string(drop_budget));
    }
    return series;
}

GreenCurve green_cumulative(const ReturnProbSeries& series, double deg_root) {
    if (!(deg_root > 0.0)) {
        throw std::domain_error("green_cumulative: degree must be positive");
    }
    if (series.p_all.empty() || series.p_all.size() != 2 * series.p2n.size() - 1) {
        throw std::domain_error("green_cumulative: malformed series");
    }
    GreenCurve curve;
    curve.gr.reserve(series.p2n.size());
    curve.gr_norm.reserve(series.p2n.size());
    long double acc = 0.0L;
    for (std::size_t t = 0; t < series.p_all.size(); ++t) {
        acc += series.p_all[t];
        if (t % 2 == 0) {
            curve.gr.push_back(static_cast<double>(acc));
            curve.gr_norm.push_back(static_cast<double>(acc / deg_root));
        }
    }
    return curve;
}

}  // namespace mcrt
