#include "mcrt/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mcrt/errors.hpp"
#include "mcrt/estimators.hpp"
#include "mcrt/io.hpp"
#include "mcrt/map_builder.hpp"
#include "mcrt/resistance.hpp"
#include "mcrt/rng.hpp"
#include "mcrt/transfer.hpp"
#include "mcrt/walk.hpp"
#include "mcrt/walker.hpp"

namespace mcrt {

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct KindName {
    ExperimentKind kind;
    const char* name;
};

constexpr std::array<KindName, 7> kKindNames{{
    {ExperimentKind::green_loglaw, "green-loglaw"},
    {ExperimentKind::specdim, "specdim"},
    {ExperimentKind::displacement, "displacement"},
    {ExperimentKind::volume, "volume"},
    {ExperimentKind::resistance_triple, "resistance-triple"},
    {ExperimentKind::appendix_a, "appendixA"},
    {ExperimentKind::transfer_sweep, "transfer-sweep"},
}};

bool uses_maps(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::green_loglaw:
        case ExperimentKind::specdim:
        case ExperimentKind::displacement:
        case ExperimentKind::volume:
            return true;
        default:
            return false;
    }
}

/// Number of independent work units: map samples for map experiments, random
/// instances for the sweep experiments.
std::uint32_t unit_count(const ExperimentConfig& c) {
    return uses_maps(c.kind) ? c.samples : c.instances;
}

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

// ---------------------------------------------------------------------------
// config text format

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void config_fail(std::size_t line_no, const std::string& msg) {
    throw format_error("config line " + std::to_string(line_no) + ": " + msg);
}

template <typename T>
T parse_integer(std::string_view text, std::size_t line_no) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        config_fail(line_no, "bad integer '" + std::string(text) + "'");
    }
    return value;
}

double parse_double(std::string_view text, std::size_t line_no) {
    const std::string held(text);
    char* end = nullptr;
    const double value = std::strtod(held.c_str(), &end);
    if (held.empty() || end != held.c_str() + held.size()) {
        config_fail(line_no, "bad number '" + held + "'");
    }
    return value;
}

bool parse_bool(std::string_view text, std::size_t line_no) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    config_fail(line_no, "bad flag '" + std::string(text) + "' (use 0 or 1)");
}

std::vector<std::int32_t> parse_radii(std::string_view text, std::size_t line_no) {
    std::vector<std::int32_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view item =
            trim(text.substr(start, comma == std::string_view::npos ? comma
                                                                    : comma - start));
        if (item.empty()) config_fail(line_no, "empty radius entry");
        out.push_back(parse_integer<std::int32_t>(item, line_no));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// shared sample machinery

/// Cells this close to a window end (in graph distance) count as part of the
/// truncation boundary; walks must not touch them and evolved mass resting on
/// them beyond kHazardBudget aborts the sample. The budget matches the
/// truncation budget of the exact evolution: harmless contamination sits many
/// orders below it (measured ~1e-11 at the production window sizes), harmful
/// contamination many orders above.
constexpr std::int32_t kEndMargin = 2;
constexpr double kHazardBudget = 1e-9;

/// Everything the map experiments need from one generated sample.
struct MapSample {
    MultiGraph graph;
    std::uint32_t root = 0;
    std::vector<std::int32_t> end_dist;  ///< graph distance to a window end
};

MapSample build_map_sample(const ExperimentConfig& c, std::uint64_t seed) {
    const WalkParams params{c.gamma, c.window_n, c.mesh_k, seed};
    const MatedCrtGraph adjacency = build_adjacency(generate_walk(params));
    MapSample sample;
    sample.root = adjacency.root();
    sample.end_dist = end_distance(adjacency);
    sample.graph = to_multigraph(adjacency);
    return sample;
}

/// Vertices within `margin` of a window end, as a hazard mask.
std::vector<std::uint8_t> end_mask(const MapSample& sample, std::int32_t margin) {
    std::vector<std::uint8_t> mask(sample.graph.vertex_count(), 0);
    for (std::uint32_t v = 0; v < mask.size(); ++v) {
        mask[v] = sample.end_dist[v] >= 0 && sample.end_dist[v] <= margin;
    }
    return mask;
}

/// One unit of work: the report row plus its plot rows.
struct UnitOutcome {
    SampleResult result;
    std::vector<std::vector<double>> rows;        ///< primary CSV
    std::vector<std::vector<double>> extra_rows;  ///< secondary CSV (specdim)
};

MultiGraph random_connected_graph(Xoshiro256pp& rng, std::uint32_t min_n,
                                  std::uint32_t max_n, bool allow_self_loops) {
    const auto n = static_cast<std::uint32_t>(min_n + rng.below(max_n - min_n + 1));
    std::vector<std::array<std::uint32_t, 3>> edges;
    for (std::uint32_t v = 1; v < n; ++v) {
        edges.push_back({static_cast<std::uint32_t>(rng.below(v)), v, 1});
    }
    const std::uint64_t extras = rng.below(2 * n + 1);
    for (std::uint64_t i = 0; i < extras; ++i) {
        auto u = static_cast<std::uint32_t>(rng.below(n));
        auto v = static_cast<std::uint32_t>(rng.below(n));
        if (!allow_self_loops) {
            while (u == v) v = static_cast<std::uint32_t>(rng.below(n));
        }
        edges.push_back({u, v, 1});
    }
    return MultiGraph::from_edges(n, edges);
}

std::vector<std::uint32_t> shortest_path(const MultiGraph& g, std::uint32_t from,
                                         std::uint32_t to) {
    std::vector<std::int32_t> parent(g.vertex_count(), -1);
    std::deque<std::uint32_t> queue{from};
    parent[from] = static_cast<std::int32_t>(from);
    while (!queue.empty() && parent[to] < 0) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t w : g.neighbors(v)) {
            if (parent[w] < 0) {
                parent[w] = static_cast<std::int32_t>(v);
                queue.push_back(w);
            }
        }
    }
    std::vector<std::uint32_t> path{to};
    while (path.back() != from) {
        path.push_back(static_cast<std::uint32_t>(parent[path.back()]));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------------------
// green-loglaw

struct RadiusMeasurement {
    double resistance = -1.0;  ///< -1 when dirty or when the ball swallows its component
    bool clean = false;
};

/// R(root <-> outside B_r) on the window graph: ground the sphere at distance
/// r+1 and solve on the induced ball. Exact for the window graph; trusted as
/// an infinite-map measurement only when the ball keeps clear of the window
/// ends. Radii whose ball touches the flagged end zone are marked dirty and
/// not solved: the value would be excluded from every fit, and near the ends
/// the ball approaches the whole window, where the solve cost dwarfs the
/// clean measurements.
RadiusMeasurement sphere_resistance(const MultiGraph& g, std::uint32_t root,
                                    std::int32_t r,
                                    std::span<const std::int32_t> dist,
                                    std::span<const std::int32_t> end_dist) {
    RadiusMeasurement out;
    std::vector<std::uint32_t> members;
    std::vector<std::uint32_t> sphere;
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (dist[v] < 0 || dist[v] > r + 1) continue;
        if (end_dist[v] >= 0 && end_dist[v] <= kEndMargin) return out;
        members.push_back(v);
        if (dist[v] == r + 1) sphere.push_back(v);
    }
    if (sphere.empty()) return out;  // the ball swallowed the window

    const InducedSubgraph sub = induced_subgraph(g, members);
    const auto local = [&](std::uint32_t parent) {
        const auto it = std::lower_bound(sub.to_parent.begin(), sub.to_parent.end(),
                                         parent);
        return static_cast<std::uint32_t>(it - sub.to_parent.begin());
    };
    std::vector<std::uint32_t> ground;
    ground.reserve(sphere.size());
    for (std::uint32_t v : sphere) ground.push_back(local(v));
    out.resistance = effective_resistance(sub.graph, local(root), ground, 1e-8);
    out.clean = true;
    return out;
}

UnitOutcome run_green_unit(const ExperimentConfig& c, std::uint32_t index,
                           std::uint64_t seed) {
    UnitOutcome out;
    const MapSample sample = build_map_sample(c, seed);
    const auto dist = bfs_distances(sample.graph, sample.root);

    std::vector<std::pair<double, double>> clean_points;
    std::string dirty;
    for (std::int32_t r : c.radii) {
        const RadiusMeasurement m =
            sphere_resistance(sample.graph, sample.root, r, dist, sample.end_dist);
        const std::string tag = "r" + std::to_string(r);
        out.result.values.emplace_back(tag, m.resistance);
        out.result.values.emplace_back(tag + "_clean", m.clean ? 1.0 : 0.0);
        out.rows.push_back({static_cast<double>(index), static_cast<double>(r),
                            m.resistance, m.clean ? 1.0 : 0.0});
        if (m.clean) {
            clean_points.emplace_back(static_cast<double>(r), m.resistance);
        } else {
            dirty += dirty.empty() ? "" : " ";
            dirty += std::to_string(r);
        }
    }
    if (!dirty.empty()) {
        out.result.note = "window-contaminated radii: " + dirty;
    }
    if (clean_points.empty()) {
        out.result.ok = false;
        out.result.note = "window contamination at every radius";
        return out;
    }
    if (clean_points.size() >= 2) {
        const LogLawFit fit = fit_loglaw(clean_points);
        out.result.values.emplace_back("fit_slope", fit.log_model.slope);
        out.result.values.emplace_back("fit_r2", fit.log_model.r_squared);
    }
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// specdim

ReturnProbSeries synthetic_series(std::uint32_t n_max) {
    ReturnProbSeries series;
    series.p2n.resize(n_max + 1);
    series.p2n[0] = 1.0;
    for (std::uint32_t n = 1; n <= n_max; ++n) {
        series.p2n[n] = 0.8 / static_cast<double>(n);
    }
    series.drop_bound.assign(n_max + 1, 0.0);
    return series;
}

UnitOutcome run_specdim_unit(const ExperimentConfig& c, std::uint32_t index,
                             std::uint64_t seed) {
    UnitOutcome out;
    ReturnProbSeries series;
    if (c.synthetic) {
        series = synthetic_series(c.n_max);
    } else {
        const MapSample sample = build_map_sample(c, seed);
        series = return_prob_exact(sample.graph, sample.root, c.n_max, c.trunc,
                                   c.drop_budget, end_mask(sample, kEndMargin));
        if (series.hazard_mass > kHazardBudget) {
            throw validity_error("window contamination: walk mass " +
                                 format_double(series.hazard_mass) +
                                 " rested on cells at the window ends");
        }
    }
    const DimensionEstimate d =
        spectral_dimension(series, std::max<std::uint64_t>(1, c.n_max / 16), c.n_max);
    out.result.values.emplace_back("d_s", d.value);
    out.result.values.emplace_back("d_s_stderr", d.std_error);
    out.result.values.emplace_back("drop_bound", series.drop_bound.back());
    out.result.values.emplace_back("hazard_mass", series.hazard_mass);
    out.rows.push_back({static_cast<double>(index), d.value, d.std_error,
                        series.drop_bound.back()});
    out.extra_rows.reserve(series.p2n.size());
    for (std::size_t n = 0; n < series.p2n.size(); ++n) {
        out.extra_rows.push_back({static_cast<double>(index), static_cast<double>(n),
                                  series.p2n[n]});
    }
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// displacement

UnitOutcome run_displacement_unit(const ExperimentConfig& c, std::uint32_t index,
                                  std::uint64_t seed) {
    UnitOutcome out;
    const MapSample sample = build_map_sample(c, seed);
    // walks may roam up to (but not into) the flagged zone at the window ends
    const std::int32_t room = sample.end_dist[sample.root] - kEndMargin - 1;
    if (room <= 0) {
        throw validity_error(
            "window contamination: the root sits against a window end");
    }

    DisplacementOptions options;
    options.walkers = c.walkers;
    options.seed = seed;
    options.safe_radius = room;
    const auto grid = pow2_grid(16, c.max_time);
    const FitResult fit =
        displacement_exponent(sample.graph, sample.root, grid, options);

    out.result.values.emplace_back("beta", fit.slope);
    out.result.values.emplace_back("beta_stderr", fit.slope_stderr);
    out.result.values.emplace_back("r_squared", fit.r_squared);
    out.result.values.emplace_back("safe_radius",
                                   static_cast<double>(options.safe_radius));
    out.rows.push_back({static_cast<double>(index), fit.slope, fit.slope_stderr,
                        fit.r_squared});
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// volume

UnitOutcome run_volume_unit(const ExperimentConfig& c, std::uint32_t index,
                            std::uint64_t seed) {
    UnitOutcome out;
    const MapSample sample = build_map_sample(c, seed);
    // a count at radius r is trusted only when B_r keeps end-distance > r_max
    const FitResult fit = volume_exponent(sample.graph, sample.root, c.r_max,
                                          end_mask(sample, c.r_max));
    out.result.values.emplace_back("d_hat", fit.slope);
    out.result.values.emplace_back("r_squared", fit.r_squared);
    out.rows.push_back({static_cast<double>(index), fit.slope, fit.r_squared});
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// resistance-triple

UnitOutcome run_triple_unit(const ExperimentConfig& c, std::uint32_t index,
                            std::uint64_t seed) {
    UnitOutcome out;
    Xoshiro256pp rng(seed);
    const MultiGraph g = random_connected_graph(rng, 2, c.max_vertices, true);
    const auto root = static_cast<std::uint32_t>(rng.below(g.vertex_count()));

    const std::uint64_t sink_budget =
        1 + rng.below(std::min<std::uint64_t>(4, g.vertex_count() - 1));
    std::vector<std::uint32_t> sink;
    while (sink.size() < sink_budget) {
        const auto v = static_cast<std::uint32_t>(rng.below(g.vertex_count()));
        if (v == root) continue;
        if (std::find(sink.begin(), sink.end(), v) == sink.end()) sink.push_back(v);
    }
    std::sort(sink.begin(), sink.end());

    const double r_dirichlet = effective_resistance(g, root, sink);
    const BoundaryCondition bc{root, sink};
    const PotentialField pf = harmonic_solve(g, bc);
    const UnitFlow flow = current_flow(g, pf, bc);
    double r_thomson = 0.0;
    for (double f : flow.along) r_thomson += f * f;

    const GreenEstimate green =
        green_mc(g, root, sink, c.walkers, substream_seed(seed, 1));
    const double deg = g.degree(root);
    const double r_mc = green.mean / deg;
    const double ci = green.ci99 / deg;

    const double rel_dev =
        std::abs(r_dirichlet - r_thomson) / std::max(r_dirichlet, 1e-300);
    const bool in_ci = std::abs(r_mc - r_dirichlet) <= ci;

    out.result.values.emplace_back("r_dirichlet", r_dirichlet);
    out.result.values.emplace_back("r_thomson", r_thomson);
    out.result.values.emplace_back("r_mc", r_mc);
    out.result.values.emplace_back("ci99", ci);
    out.result.values.emplace_back("rel_dev", rel_dev);
    out.result.values.emplace_back("in_ci", in_ci ? 1.0 : 0.0);
    out.rows.push_back({static_cast<double>(index), r_dirichlet, r_thomson, r_mc, ci,
                        in_ci ? 1.0 : 0.0});
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// appendixA

UnitOutcome run_appendix_unit(const ExperimentConfig& c, std::uint32_t index,
                              std::uint64_t seed) {
    UnitOutcome out;
    Xoshiro256pp rng(seed);
    MultiGraph g = random_connected_graph(rng, 2, c.max_vertices, true);
    // the exact-fraction identities hold on maps with at most 64 edge-ends
    while (g.total_degree() > 64) {
        g = random_connected_graph(rng, 2, c.max_vertices, true);
    }
    const auto root = static_cast<std::uint32_t>(rng.below(g.vertex_count()));
    const auto m = static_cast<std::uint32_t>(rng.below(c.m_steps + 1));

    const double tv = lazy_equivalence_check(g, root, m);

    const auto weights = reweight_root(g);
    const RootCoupling coupling = midpoint_root_coupling(g);
    bool rational_ok = coupling.marginal.size() == weights.size();
    for (std::uint32_t v = 0; rational_ok && v < g.vertex_count(); ++v) {
        rational_ok = coupling.marginal[v] == weights[v] &&
                      coupling.stay_probability[v] ==
                          make_rational(2, 2 + static_cast<std::int64_t>(g.degree(v)));
    }

    // exact (untruncated) evolution: P(2n) must be nonincreasing
    const ReturnProbSeries series = return_prob_exact(g, root, 32, 0.0, 0.0);
    bool monotone_ok = true;
    for (std::size_t n = 0; n + 1 < series.p2n.size(); ++n) {
        if (series.p2n[n + 1] > series.p2n[n] + 1e-15) monotone_ok = false;
    }

    out.result.values.emplace_back("tv", tv);
    out.result.values.emplace_back("rational_ok", rational_ok ? 1.0 : 0.0);
    out.result.values.emplace_back("monotone_ok", monotone_ok ? 1.0 : 0.0);
    out.result.values.emplace_back("vertices",
                                   static_cast<double>(g.vertex_count()));
    out.result.values.emplace_back("m", static_cast<double>(m));
    out.rows.push_back({static_cast<double>(index),
                        static_cast<double>(g.vertex_count()),
                        static_cast<double>(m), tv, rational_ok ? 1.0 : 0.0,
                        monotone_ok ? 1.0 : 0.0});
    out.result.ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// transfer-sweep

UnitOutcome run_transfer_unit(const ExperimentConfig& c, std::uint32_t index,
                              std::uint64_t seed) {
    UnitOutcome out;
    Xoshiro256pp rng(seed);
    const MultiGraph g1 = random_connected_graph(rng, 2, c.max_vertices, true);
    const MultiGraph g2 = random_connected_graph(rng, 2, c.max_vertices, true);
    std::vector<std::uint32_t> phi(g1.vertex_count());
    for (auto& x : phi) x = static_cast<std::uint32_t>(rng.below(g2.vertex_count()));

    std::vector<std::vector<std::uint32_t>> paths;
    paths.reserve(g1.edge_count());
    for (const MultiGraph::Edge& e : g1.edges()) {
        paths.push_back(shortest_path(g2, phi[e.u], phi[e.v]));
    }
    const PathSystem ps = make_path_system(g1, g2, phi, std::move(paths));
    std::vector<double> f(g2.vertex_count());
    for (double& x : f) x = 2.0 * rng.uniform01() - 1.0;

    const TransferBound bound = energy_transfer_bound(g1, g2, phi, ps, f);
    out.result.values.emplace_back("lhs", bound.lhs);
    out.result.values.emplace_back("rhs", bound.rhs);
    out.result.values.emplace_back("factor", bound.factor);
    out.result.values.emplace_back("holds", bound.holds ? 1.0 : 0.0);
    out.rows.push_back({static_cast<double>(index), bound.lhs, bound.rhs,
                        bound.factor, bound.holds ? 1.0 : 0.0});
    out.result.ok = true;
    return out;
}

UnitOutcome run_unit(const ExperimentConfig& c, std::uint32_t index) {
    const std::uint64_t seed = substream_seed(c.seed, index);
    UnitOutcome out;
    try {
        switch (c.kind) {
            case ExperimentKind::green_loglaw: out = run_green_unit(c, index, seed); break;
            case ExperimentKind::specdim: out = run_specdim_unit(c, index, seed); break;
            case ExperimentKind::displacement:
                out = run_displacement_unit(c, index, seed);
                break;
            case ExperimentKind::volume: out = run_volume_unit(c, index, seed); break;
            case ExperimentKind::resistance_triple:
                out = run_triple_unit(c, index, seed);
                break;
            case ExperimentKind::appendix_a: out = run_appendix_unit(c, index, seed); break;
            case ExperimentKind::transfer_sweep:
                out = run_transfer_unit(c, index, seed);
                break;
        }
    } catch (const std::exception& err) {
        out.result.ok = false;
        out.result.note = err.what();
        out.rows.clear();
        out.extra_rows.clear();
    }
    out.result.index = index;
    out.result.seed = seed;
    return out;
}

// ---------------------------------------------------------------------------
// aggregation

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

/// Values of one named scalar across the samples that carry it, in order.
std::vector<double> collect(const std::vector<SampleResult>& samples,
                            std::string_view name) {
    std::vector<double> out;
    for (const SampleResult& s : samples) {
        if (!s.ok) continue;
        for (const auto& [key, value] : s.values) {
            if (key == name) {
                out.push_back(value);
                break;
            }
        }
    }
    return out;
}

void aggregate_green(const ExperimentConfig& c, ExperimentReport& report) {
    // radius-wise means over the samples where that radius was clean
    std::vector<std::pair<double, double>> points;
    for (std::int32_t r : c.radii) {
        const std::string tag = "r" + std::to_string(r);
        std::vector<double> values;
        for (const SampleResult& s : report.samples) {
            if (!s.ok) continue;
            double resistance = -1.0;
            bool clean = false;
            for (const auto& [key, value] : s.values) {
                if (key == tag) resistance = value;
                if (key == tag + "_clean") clean = value > 0.5;
            }
            if (clean) values.push_back(resistance);
        }
        if (!values.empty()) points.emplace_back(static_cast<double>(r), mean_of(values));
    }
    report.aggregate["clean_radii"] = static_cast<double>(points.size());
    if (points.size() >= 3) {
        const LogLawFit fit = fit_loglaw(points);
        report.aggregate["log_slope"] = fit.log_model.slope;
        report.aggregate["log_r2"] = fit.log_model.r_squared;
        report.aggregate["log_rss"] = fit.log_rss;
        report.aggregate["power_rss"] = fit.power_rss;
        report.aggregate["log_beats_power"] = fit.log_beats_power ? 1.0 : 0.0;
        report.pass = fit.log_model.r_squared >= 0.98 && fit.log_model.slope > 0.0 &&
                      fit.log_beats_power;
    } else {
        report.pass = false;
    }
}

void aggregate_specdim(const ExperimentConfig& c, ExperimentReport& report) {
    const auto ds = collect(report.samples, "d_s");
    const double mean = mean_of(ds);
    report.aggregate["d_s_mean"] = mean;
    if (!ds.empty()) {
        report.aggregate["d_s_min"] = *std::min_element(ds.begin(), ds.end());
        report.aggregate["d_s_max"] = *std::max_element(ds.begin(), ds.end());
    }
    report.pass = !ds.empty() && report.complete &&
                  std::abs(mean - 2.0) <= c.effective_tolerance();
}

void aggregate_displacement(ExperimentReport& report) {
    const auto betas = collect(report.samples, "beta");
    report.aggregate["beta_mean"] = mean_of(betas);
    report.aggregate["beta_stderr_mean"] =
        mean_of(collect(report.samples, "beta_stderr"));
    report.pass = !betas.empty() && report.complete;
}

void aggregate_volume(ExperimentReport& report) {
    const auto ds = collect(report.samples, "d_hat");
    report.aggregate["d_hat_mean"] = mean_of(ds);
    report.pass = !ds.empty() && report.complete;
}

void aggregate_triple(const ExperimentConfig& c, ExperimentReport& report) {
    const auto devs = collect(report.samples, "rel_dev");
    const auto hits = collect(report.samples, "in_ci");
    const double max_dev =
        devs.empty() ? 0.0 : *std::max_element(devs.begin(), devs.end());
    double hit_count = 0.0;
    for (double h : hits) hit_count += h;
    const double quota = std::ceil(0.975 * static_cast<double>(report.samples.size()));
    report.aggregate["max_rel_dev"] = max_dev;
    report.aggregate["mc_hits"] = hit_count;
    report.aggregate["mc_quota"] = quota;
    report.pass = report.complete && !devs.empty() &&
                  max_dev <= c.effective_tolerance() && hit_count >= quota;
}

void aggregate_appendix(const ExperimentConfig& c, ExperimentReport& report) {
    const auto tvs = collect(report.samples, "tv");
    const double tv_max = tvs.empty() ? 0.0 : *std::max_element(tvs.begin(), tvs.end());
    double rational_failures = 0.0;
    for (double ok : collect(report.samples, "rational_ok")) rational_failures += ok < 0.5;
    double monotone_failures = 0.0;
    for (double ok : collect(report.samples, "monotone_ok")) monotone_failures += ok < 0.5;
    report.aggregate["tv_max"] = tv_max;
    report.aggregate["rational_failures"] = rational_failures;
    report.aggregate["monotone_failures"] = monotone_failures;
    report.pass = report.complete && !tvs.empty() &&
                  tv_max <= c.effective_tolerance() && rational_failures == 0.0 &&
                  monotone_failures == 0.0;
}

void aggregate_transfer(ExperimentReport& report) {
    double violations = 0.0;
    for (double holds : collect(report.samples, "holds")) violations += holds < 0.5;
    report.aggregate["violations"] = violations;
    report.pass = report.complete && !report.samples.empty() && violations == 0.0;
}

struct CsvLayout {
    const char* name;
    std::vector<std::string> header;
};

CsvLayout primary_csv_layout(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::green_loglaw:
            return {"resistance.csv", {"sample", "r", "resistance", "clean"}};
        case ExperimentKind::specdim:
            return {"specdim.csv", {"sample", "d_s", "d_s_stderr", "drop_bound"}};
        case ExperimentKind::displacement:
            return {"displacement.csv", {"sample", "beta", "beta_stderr", "r_squared"}};
        case ExperimentKind::volume:
            return {"volume.csv", {"sample", "d_hat", "r_squared"}};
        case ExperimentKind::resistance_triple:
            return {"triple.csv",
                    {"instance", "r_dirichlet", "r_thomson", "r_mc", "ci99", "in_ci"}};
        case ExperimentKind::appendix_a:
            return {"appendix_a.csv",
                    {"instance", "vertices", "m", "tv", "rational_ok", "monotone_ok"}};
        case ExperimentKind::transfer_sweep:
            return {"transfer.csv", {"instance", "lhs", "rhs", "factor", "holds"}};
    }
    throw std::logic_error("unknown experiment kind");
}

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    j["gamma"] = c.gamma;
    j["window_n"] = c.window_n;
    j["mesh_k"] = c.mesh_k;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["radii"] = c.radii;
    j["n_max"] = c.n_max;
    j["trunc"] = c.trunc;
    j["drop_budget"] = c.drop_budget;
    j["walkers"] = c.walkers;
    j["max_time"] = c.max_time;
    j["r_max"] = c.r_max;
    j["max_vertices"] = c.max_vertices;
    j["m_steps"] = c.m_steps;
    j["instances"] = c.instances;
    j["tolerance"] = c.tolerance;
    j["effective_tolerance"] = c.effective_tolerance();
    j["synthetic"] = c.synthetic;
    return j;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    for (const KindName& entry : kKindNames) {
        if (entry.kind == kind) return entry.name;
    }
    throw std::logic_error("unknown experiment kind");
}

ExperimentKind experiment_kind_of(const std::string& name) {
    for (const KindName& entry : kKindNames) {
        if (name == entry.name) return entry.kind;
    }
    throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

double ExperimentConfig::effective_tolerance() const {
    if (tolerance > 0.0) return tolerance;
    switch (kind) {
        case ExperimentKind::specdim: return 0.3;
        case ExperimentKind::resistance_triple: return 1e-8;
        case ExperimentKind::appendix_a: return 1e-12;
        default: return 0.0;
    }
}

void ExperimentConfig::validate() const {
    const auto fail = [](const std::string& msg) {
        throw std::invalid_argument("config: " + msg);
    };
    if (tolerance < 0.0) fail("tolerance must be nonnegative");
    if (synthetic && kind != ExperimentKind::specdim) {
        fail("synthetic mode only applies to specdim");
    }
    if (uses_maps(kind)) {
        if (samples < 1) fail("samples must be positive");
        if (!(kind == ExperimentKind::specdim && synthetic)) {
            if (!(gamma > 0.0 && gamma < 2.0)) fail("gamma must lie in (0, 2)");
            if (window_n < 1) fail("window_n must be positive");
            if (mesh_k < 1) fail("mesh_k must be positive");
        }
    } else {
        if (instances < 1) fail("instances must be positive");
        if (max_vertices < 2) fail("max_vertices must be at least 2");
    }
    switch (kind) {
        case ExperimentKind::green_loglaw:
            if (radii.empty()) fail("radii must be nonempty");
            for (std::size_t i = 0; i < radii.size(); ++i) {
                if (radii[i] < 1) fail("radii must be positive");
                if (i > 0 && radii[i] <= radii[i - 1]) {
                    fail("radii must be strictly increasing");
                }
            }
            break;
        case ExperimentKind::specdim:
            if (n_max < 16) fail("n_max must be at least 16");
            if (trunc < 0.0) fail("trunc must be nonnegative");
            if (drop_budget < 0.0) fail("drop_budget must be nonnegative");
            break;
        case ExperimentKind::displacement:
            if (walkers < 1) fail("walkers must be positive");
            if (max_time < 128) fail("max_time must be at least 128");
            break;
        case ExperimentKind::volume:
            if (r_max < 8) fail("r_max must be at least 8");
            break;
        case ExperimentKind::resistance_triple:
            if (walkers < 2) fail("walkers must be at least 2");
            break;
        case ExperimentKind::appendix_a:
            if (max_vertices > 20) {
                fail("appendixA maps are capped at 20 vertices");
            }
            break;
        case ExperimentKind::transfer_sweep:
            break;
    }
}

std::string format_config(const ExperimentConfig& c) {
    std::string out;
    out += "kind = " + to_string(c.kind) + "\n";
    out += "gamma = " + format_double(c.gamma) + "\n";
    out += "window_n = " + std::to_string(c.window_n) + "\n";
    out += "mesh_k = " + std::to_string(c.mesh_k) + "\n";
    out += "samples = " + std::to_string(c.samples) + "\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "\n[" + to_string(c.kind) + "]\n";
    out += "radii = ";
    for (std::size_t i = 0; i < c.radii.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(c.radii[i]);
    }
    out += "\n";
    out += "n_max = " + std::to_string(c.n_max) + "\n";
    out += "trunc = " + format_double(c.trunc) + "\n";
    out += "drop_budget = " + format_double(c.drop_budget) + "\n";
    out += "walkers = " + std::to_string(c.walkers) + "\n";
    out += "max_time = " + std::to_string(c.max_time) + "\n";
    out += "r_max = " + std::to_string(c.r_max) + "\n";
    out += "max_vertices = " + std::to_string(c.max_vertices) + "\n";
    out += "m_steps = " + std::to_string(c.m_steps) + "\n";
    out += "instances = " + std::to_string(c.instances) + "\n";
    out += "tolerance = " + format_double(c.tolerance) + "\n";
    out += std::string("synthetic = ") + (c.synthetic ? "1" : "0") + "\n";
    return out;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool kind_seen = false;
    bool in_section = false;
    std::vector<std::string> seen_keys;

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') config_fail(line_no, "unterminated section");
            const std::string name(trim(stripped.substr(1, stripped.size() - 2)));
            if (!kind_seen) config_fail(line_no, "kind must precede sections");
            ExperimentKind section_kind;
            try {
                section_kind = experiment_kind_of(name);
            } catch (const std::invalid_argument&) {
                config_fail(line_no, "unknown section '" + name + "'");
            }
            if (section_kind != config.kind) {
                config_fail(line_no, "section '" + name + "' does not match the kind");
            }
            in_section = true;
            continue;
        }

        const auto eq = stripped.find('=');
        if (eq == std::string_view::npos) config_fail(line_no, "expected 'key = value'");
        const std::string key(trim(stripped.substr(0, eq)));
        const std::string_view value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) config_fail(line_no, "expected 'key = value'");
        if (std::find(seen_keys.begin(), seen_keys.end(), key) != seen_keys.end()) {
            config_fail(line_no, "duplicate key '" + key + "'");
        }
        seen_keys.push_back(key);

        const bool common =
            key == "kind" || key == "gamma" || key == "window_n" || key == "mesh_k" ||
            key == "samples" || key == "seed";
        if (common && in_section) {
            config_fail(line_no, "common key '" + key + "' belongs before the section");
        }
        if (!common && !in_section) {
            config_fail(line_no, "key '" + key + "' belongs in the kind section");
        }

        if (key == "kind") {
            try {
                config.kind = experiment_kind_of(std::string(value));
            } catch (const std::invalid_argument& err) {
                config_fail(line_no, err.what());
            }
            kind_seen = true;
        } else if (key == "gamma") {
            config.gamma = parse_double(value, line_no);
        } else if (key == "window_n") {
            config.window_n = parse_integer<std::int64_t>(value, line_no);
        } else if (key == "mesh_k") {
            config.mesh_k = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "samples") {
            config.samples = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "seed") {
            config.seed = parse_integer<std::uint64_t>(value, line_no);
        } else if (key == "radii") {
            config.radii = parse_radii(value, line_no);
        } else if (key == "n_max") {
            config.n_max = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "trunc") {
            config.trunc = parse_double(value, line_no);
        } else if (key == "drop_budget") {
            config.drop_budget = parse_double(value, line_no);
        } else if (key == "walkers") {
            config.walkers = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "max_time") {
            config.max_time = parse_integer<std::uint64_t>(value, line_no);
        } else if (key == "r_max") {
            config.r_max = parse_integer<std::int32_t>(value, line_no);
        } else if (key == "max_vertices") {
            config.max_vertices = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "m_steps") {
            config.m_steps = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "instances") {
            config.instances = parse_integer<std::uint32_t>(value, line_no);
        } else if (key == "tolerance") {
            config.tolerance = parse_double(value, line_no);
        } else if (key == "synthetic") {
            config.synthetic = parse_bool(value, line_no);
        } else {
            config_fail(line_no, "unknown key '" + key + "'");
        }
    }
    if (!kind_seen) throw format_error("config: missing 'kind'");
    try {
        config.validate();
    } catch (const std::invalid_argument& err) {
        throw format_error(err.what());
    }
    return config;
}

std::uint32_t thread_budget() {
    if (const char* env = std::getenv("MCRT_THREADS")) {
        std::uint32_t value = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec == std::errc() && *ptr == '\0' && value >= 1) return value;
        throw std::invalid_argument("MCRT_THREADS must be a positive integer");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::uint32_t count = unit_count(config);

    std::vector<UnitOutcome> outcomes(count);
    const std::uint32_t threads = std::min(thread_budget(), count);
    if (threads <= 1) {
        for (std::uint32_t i = 0; i < count; ++i) outcomes[i] = run_unit(config, i);
    } else {
        std::atomic<std::uint32_t> next{0};
        const auto worker = [&] {
            for (;;) {
                const std::uint32_t i = next.fetch_add(1);
                if (i >= count) return;
                outcomes[i] = run_unit(config, i);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ExperimentReport report;
    report.config = config;
    report.samples.reserve(count);
    for (UnitOutcome& outcome : outcomes) {
        report.samples.push_back(std::move(outcome.result));
    }
    report.complete = std::all_of(report.samples.begin(), report.samples.end(),
                                  [](const SampleResult& s) { return s.ok; });

    switch (config.kind) {
        case ExperimentKind::green_loglaw: aggregate_green(config, report); break;
        case ExperimentKind::specdim: aggregate_specdim(config, report); break;
        case ExperimentKind::displacement: aggregate_displacement(report); break;
        case ExperimentKind::volume: aggregate_volume(report); break;
        case ExperimentKind::resistance_triple: aggregate_triple(config, report); break;
        case ExperimentKind::appendix_a: aggregate_appendix(config, report); break;
        case ExperimentKind::transfer_sweep: aggregate_transfer(report); break;
    }

    const CsvLayout layout = primary_csv_layout(config.kind);
    std::vector<std::vector<double>> rows;
    for (const UnitOutcome& outcome : outcomes) {
        rows.insert(rows.end(), outcome.rows.begin(), outcome.rows.end());
    }
    report.csv_files.emplace_back(layout.name, csv_body(layout.header, rows));
    if (config.kind == ExperimentKind::specdim) {
        std::vector<std::vector<double>> series_rows;
        for (const UnitOutcome& outcome : outcomes) {
            series_rows.insert(series_rows.end(), outcome.extra_rows.begin(),
                               outcome.extra_rows.end());
        }
        const std::vector<std::string> header{"sample", "n", "p2n"};
        report.csv_files.emplace_back("return_prob.csv",
                                      csv_body(header, series_rows));
    }

    nlohmann::json doc;
    doc["tool"] = {{"name", "mcrt"},
                   {"version", kToolVersion},
                   {"walk_format", 1},
                   {"graph_format", 1}};
    doc["config"] = config_json(config);
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleResult& s : report.samples) {
        nlohmann::json row;
        row["index"] = s.index;
        row["seed"] = s.seed;
        row["ok"] = s.ok;
        row["note"] = s.note;
        nlohmann::json values;
        for (const auto& [name, value] : s.values) values[name] = value;
        row["values"] = values;
        samples.push_back(std::move(row));
    }
    doc["samples"] = std::move(samples);
    doc["aggregate"] = report.aggregate;
    doc["pass"] = report.pass;
    doc["complete"] = report.complete;
    report.json = doc.dump(2) + "\n";
    return report;
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base(out_dir);
    write_text_file((base / "report.json").string(), report.json);
    for (const auto& [name, body] : report.csv_files) {
        write_text_file((base / name).string(), body);
    }
}

}  // namespace mcrt
