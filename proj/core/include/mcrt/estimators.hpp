#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mcrt/multigraph.hpp"
#include "mcrt/walker.hpp"

namespace mcrt {

/// Ordinary least-squares line fit.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    /// OLS standard error of the slope, except displacement_exponent where it
    /// is the bootstrap estimate.
    double slope_stderr = 0.0;
    /// 1 - RSS/TSS, clamped to [0,1]; defined as 1 for a constant response.
    double r_squared = 1.0;
    /// Untransformed x-range of the points that entered the fit.
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t points = 0;
};

/// Least squares of y against x with an intercept. Inputs are sorted
/// internally, so the result is invariant under reordering of the pairs.
/// Throws std::domain_error with fewer than 2 points or a constant x.
FitResult fit_line(std::span<const double> x, std::span<const double> y);

/// Log-law fit of (r, value) data: the log model regresses value on log r,
/// the power model regresses log value on log r. Residual sums are compared
/// in value space; the power model requires positive values and is marked
/// invalid (infinite residual) otherwise.
struct LogLawFit {
    FitResult log_model;
    FitResult power_model;
    double log_rss = 0.0;
    double power_rss = 0.0;
    bool power_model_valid = false;
    bool log_beats_power = true;
};

/// Throws std::domain_error with fewer than 2 pairs, duplicate r values, or
/// nonpositive r.
LogLawFit fit_loglaw(std::span<const std::pair<double, double>> pairs);

/// An exponent plus its uncertainty, with the underlying regression.
struct DimensionEstimate {
    double value = 0.0;
    double std_error = 0.0;
    FitResult fit;
};

/// Spectral dimension from a return-probability series: -2 times the slope
/// of log P(2n) against log n over n in [n_lo, n_hi] (all integers in the
/// window). Throws std::domain_error when the window is empty, out of range,
/// or covers a nonpositive P value.
DimensionEstimate spectral_dimension(const ReturnProbSeries& series,
                                     std::uint64_t n_lo, std::uint64_t n_hi);

/// Volume-growth exponent: slope of log |B_r| against log r over the grid
/// r = 1, 2, 4, ..., r_max, with the two smallest scales excluded from the
/// fit. A nonempty hazard mask (one byte per vertex) makes any flagged vertex
/// inside B_{r_max} raise validity_error.
FitResult volume_exponent(const MultiGraph& g, std::uint32_t root, std::int32_t r_max,
                          std::span<const std::uint8_t> hazard_mask = {});

struct DisplacementOptions {
    std::uint64_t walkers = 1000;
    std::uint64_t seed = 0;
    /// Bootstrap replicates for the slope standard error.
    std::uint32_t bootstrap = 200;
    /// When nonnegative, any walker straying farther than this from the root
    /// (at any step, not just sample times) raises validity_error. Callers
    /// set it to keep walks out of regions they cannot trust.
    std::int32_t safe_radius = -1;
};

/// Displacement exponent: walks `walkers` independent trajectories, takes the
/// median of dist(X_n, root) at each time of the grid, and fits log median
/// against log n with the two smallest grid times excluded. slope_stderr is a
/// walker-resampling bootstrap. The time grid must be strictly increasing.
/// Throws std::domain_error when fewer than 2 fit points remain or a fitted
/// median is not positive.
FitResult displacement_exponent(const MultiGraph& g, std::uint32_t root,
                                std::span<const std::uint64_t> time_grid,
                                const DisplacementOptions& options);

/// Geometric grid lo, 2*lo, 4*lo, ... capped at hi (lo >= 1 required).
std::vector<std::uint64_t> pow2_grid(std::uint64_t lo, std::uint64_t hi);

}  // namespace mcrt
