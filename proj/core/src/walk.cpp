#include "mcrt/walk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mcrt/rng.hpp"

namespace mcrt {

double correlation_of(double gamma) {
    if (!(gamma > 0.0) || !(gamma < 2.0)) {
        throw std::invalid_argument("correlation_of: gamma must lie in (0, 2), got " +
                                    std::to_string(gamma));
    }
    return -std::cos(std::numbers::pi * gamma * gamma / 4.0);
}

std::size_t WalkParams::sample_count() const {
    return 2 * static_cast<std::size_t>(window_n) * mesh_k + 1;
}

void WalkParams::validate() const {
    correlation_of(gamma); // domain check
    if (window_n < 1) throw std::invalid_argument("WalkParams: window_n must be >= 1");
    if (mesh_k < 1) throw std::invalid_argument("WalkParams: mesh_k must be >= 1");
}

namespace {

// Fills `steps` sample pairs starting from (0, 0) at out_l[0]/out_r[0]'s
// predecessor; out arrays receive the cumulative values.
void fill_half(double* out_l, double* out_r, std::size_t steps, double rho,
               double step_scale, std::uint64_t seed) {
    GaussianStream gauss(seed);
    const double orth = std::sqrt(1.0 - rho * rho);
    double l = 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double g1 = gauss.next();
        const double g2 = gauss.next();
        l += step_scale * g1;
        r += step_scale * (rho * g1 + orth * g2);
        out_l[i] = l;
        out_r[i] = r;
    }
}

} // namespace

CorrelatedWalk generate_walk(const WalkParams& params) {
    params.validate();
    const double rho = params.correlation();
    const std::size_t half = static_cast<std::size_t>(params.window_n) * params.mesh_k;
    const double step_scale = 1.0 / std::sqrt(static_cast<double>(params.mesh_k));

    CorrelatedWalk walk;
    walk.params = params;
    walk.l.assign(2 * half + 1, 0.0);
    walk.r.assign(2 * half + 1, 0.0);

    // Positive times: indices half+1 .. 2*half, forward from the center.
    fill_half(walk.l.data() + half + 1, walk.r.data() + half + 1, half, rho, step_scale,
              substream_seed(params.seed, 0));

    // Negative times: cumulative sums walking left from the center. Generate
    // into the slots half-1 .. 0 in that order.
    {
        std::vector<double> tmp_l(half);
        std::vector<double> tmp_r(half);
        fill_half(tmp_l.data(), tmp_r.data(), half, rho, step_scale,
                  substream_seed(params.seed, 1));
        for (std::size_t i = 0; i < half; ++i) {
            walk.l[half - 1 - i] = tmp_l[i];
            walk.r[half - 1 - i] = tmp_r[i];
        }
    }
    return walk;
}

} // namespace mcrt
