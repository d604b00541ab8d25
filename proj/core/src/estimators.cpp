#include "mcrt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mcrt/errors.hpp"
#include "mcrt/rng.hpp"
#include "mcrt/walker.hpp"

namespace mcrt {

namespace {

FitResult fit_sorted(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    const std::size_t n = pts.size();
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx <= 0.0) {
        throw std::domain_error("fit_line: x values are all equal");
    }
    FitResult fit;
    fit.points = n;
    fit.window_lo = pts.front().first;
    fit.window_hi = pts.back().first;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (const auto& [x, y] : pts) {
        const double res = y - (fit.intercept + fit.slope * x);
        rss += res * res;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
    fit.slope_stderr = n > 2 ? std::sqrt(std::max(rss, 0.0) / ((n - 2) * sxx)) : 0.0;
    return fit;
}

double model_rss(std::span<const std::pair<double, double>> pairs,
                 const FitResult& fit, bool power) {
    double rss = 0.0;
    for (const auto& [r, value] : pairs) {
        const double lin = fit.intercept + fit.slope * std::log(r);
        const double predicted = power ? std::exp(lin) : lin;
        rss += (value - predicted) * (value - predicted);
    }
    return rss;
}

}  // namespace

FitResult fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::domain_error("fit_line: length mismatch");
    }
    if (x.size() < 2) {
        throw std::domain_error("fit_line: need at least 2 points");
    }
    std::vector<std::pair<double, double>> pts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
    return fit_sorted(std::move(pts));
}

LogLawFit fit_loglaw(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) {
        throw std::domain_error("fit_loglaw: need at least 2 points");
    }
    std::vector<std::pair<double, double>> log_pts;
    log_pts.reserve(pairs.size());
    for (const auto& [r, value] : pairs) {
        if (!(r > 0.0)) {
            throw std::domain_error("fit_loglaw: r values must be positive");
        }
        log_pts.emplace_back(std::log(r), value);
    }
    {
        auto sorted = log_pts;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].first == sorted[i - 1].first) {
                throw std::domain_error("fit_loglaw: duplicate r values");
            }
        }
    }

    LogLawFit result;
    result.log_model = fit_sorted(log_pts);
    result.log_rss = model_rss(pairs, result.log_model, false);

    const bool all_positive = std::all_of(
        pairs.begin(), pairs.end(), [](const auto& p) { return p.second > 0.0; });
    if (all_positive) {
        std::vector<std::pair<double, double>> loglog;
        loglog.reserve(pairs.size());
        for (const auto& [r, value] : pairs) {
            loglog.emplace_back(std::log(r), std::log(value));
        }
        result.power_model = fit_sorted(std::move(loglog));
        result.power_model_valid = true;
        result.power_rss = model_rss(pairs, result.power_model, true);
    } else {
        result.power_rss = std::numeric_limits<double>::infinity();
    }
    result.log_beats_power = result.log_rss <= result.power_rss;
    return result;
}

DimensionEstimate spectral_dimension(const ReturnProbSeries& series,
                                     std::uint64_t n_lo, std::uint64_t n_hi) {
    if (n_lo < 1 || n_lo >= n_hi || n_hi >= series.p2n.size()) {
        throw std::domain_error("spectral_dimension: bad fit window");
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n_hi - n_lo + 1);
    for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
        const double p = series.p2n[n];
        if (!(p > 0.0)) {
            throw std::domain_error(
                "spectral_dimension: nonpositive return probability at n = " +
                std::to_string(n));
        }
        pts.emplace_back(std::log(static_cast<double>(n)), std::log(p));
    }
    DimensionEstimate est;
    est.fit = fit_sorted(std::move(pts));
    est.value = -2.0 * est.fit.slope;
    est.std_error = 2.0 * est.fit.slope_stderr;
    return est;
}

FitResult volume_exponent(const MultiGraph& g, std::uint32_t root, std::int32_t r_max,
                          std::span<const std::uint8_t> hazard_mask) {
    if (root >= g.vertex_count()) {
        throw std::domain_error("volume_exponent: root out of range");
    }
    if (!hazard_mask.empty() && hazard_mask.size() != g.vertex_count()) {
        throw std::domain_error("volume_exponent: hazard mask size mismatch");
    }
    const auto grid = pow2_grid(1, static_cast<std::uint64_t>(std::max(r_max, 0)));
    if (grid.size() < 4) {
        throw std::domain_error("volume_exponent: r_max leaves fewer than 2 scales");
    }
    const auto dist = bfs_distances(g, root);
    if (!hazard_mask.empty()) {
        for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
            if (hazard_mask[v] && dist[v] >= 0 && dist[v] <= r_max) {
                throw validity_error(
                    "volume_exponent: ball of radius " + std::to_string(r_max) +
                    " contains flagged vertex " + std::to_string(v));
            }
        }
    }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(r_max) + 1, 0);
    for (std::int32_t d : dist) {
        if (d >= 0 && d <= r_max) ++counts[static_cast<std::size_t>(d)];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());

    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 2; i < grid.size(); ++i) {  // two smallest scales excluded
        const auto r = grid[i];
        pts.emplace_back(std::log(static_cast<double>(r)),
                         std::log(static_cast<double>(counts[r])));
    }
    return fit_sorted(std::move(pts));
}

FitResult displacement_exponent(const MultiGraph& g, std::uint32_t root,
                                std::span<const std::uint64_t> time_grid,
                                const DisplacementOptions& options) {
    if (options.walkers == 0) {
        throw std::domain_error("displacement_exponent: zero walkers");
    }
    if (time_grid.size() < 4) {
        throw std::domain_error(
            "displacement_exponent: need at least 4 grid times (two are excluded)");
    }
    const auto dist = bfs_distances(g, root);
    const auto walkers = options.walkers;
    // samples[t] collects dist(X_t, root) across walkers, in walker order.
    std::vector<std::vector<std::int32_t>> samples(
        time_grid.size(), std::vector<std::int32_t>(walkers, 0));
    for (std::uint64_t w = 0; w < walkers; ++w) {
        const auto run = simulate_walk(g, root, time_grid.back(), {}, time_grid,
                                       substream_seed(options.seed, w), dist);
        if (options.safe_radius >= 0 && run.max_distance > options.safe_radius) {
            throw validity_error(
                "displacement_exponent: a walk reached distance " +
                std::to_string(run.max_distance) + ", beyond the trusted radius " +
                std::to_string(options.safe_radius));
        }
        for (std::size_t i = 0; i < time_grid.size(); ++i) {
            samples[i][w] = run.displacement[i];
        }
    }

    const auto median_of = [](std::vector<std::int32_t> values) {
        const std::size_t mid = values.size() / 2;
        std::nth_element(values.begin(), values.begin() + mid, values.end());
        double m = values[mid];
        if (values.size() % 2 == 0) {
            const auto lower =
                *std::max_element(values.begin(), values.begin() + mid);
            m = (m + lower) / 2.0;
        }
        return m;
    };

    // The two smallest grid times are excluded from the fit.
    std::vector<double> log_t, log_m;
    for (std::size_t i = 2; i < time_grid.size(); ++i) {
        const double med = median_of(samples[i]);
        if (!(med > 0.0)) {
            throw std::domain_error(
                "displacement_exponent: median displacement not positive at t = " +
                std::to_string(time_grid[i]));
        }
        log_t.push_back(std::log(static_cast<double>(time_grid[i])));
        log_m.push_back(std::log(med));
    }
    FitResult fit = fit_line(log_t, log_m);

    if (options.bootstrap > 0 && walkers > 1) {
        std::vector<double> slopes;
        slopes.reserve(options.bootstrap);
        std::vector<std::int32_t> resampled(walkers);
        std::vector<double> boot_m(log_t.size());
        for (std::uint32_t b = 0; b < options.bootstrap; ++b) {
            Xoshiro256pp rng(substream_seed(options.seed ^ 0x626f6f747374726bULL, b));
            std::vector<std::uint32_t> pick(walkers);
            for (auto& p : pick) p = static_cast<std::uint32_t>(rng.below(walkers));
            bool usable = true;
            for (std::size_t i = 2; i < time_grid.size() && usable; ++i) {
                for (std::uint64_t w = 0; w < walkers; ++w) {
                    resampled[w] = samples[i][pick[w]];
                }
                const double med = median_of(resampled);
                if (!(med > 0.0)) {
                    usable = false;
                } else {
                    boot_m[i - 2] = std::log(med);
                }
            }
            if (!usable) continue;
            slopes.push_back(fit_line(log_t, boot_m).slope);
        }
        if (slopes.size() >= 2) {
            const double mean =
                std::accumulate(slopes.begin(), slopes.end(), 0.0) / slopes.size();
            double var = 0.0;
            for (double s : slopes) var += (s - mean) * (s - mean);
            fit.slope_stderr = std::sqrt(var / (slopes.size() - 1));
        }
    }
    return fit;
}

std::vector<std::uint64_t> pow2_grid(std::uint64_t lo, std::uint64_t hi) {
    if (lo < 1 || hi < lo) {
        throw std::domain_error("pow2_grid: need 1 <= lo <= hi");
    }
    std::vector<std::uint64_t> grid;
    for (std::uint64_t v = lo; v <= hi; v *= 2) {
        grid.push_back(v);
        if (v > hi / 2) break;  // avoid overflow
    }
    return grid;
}

}  // namespace mcrt
