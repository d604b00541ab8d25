#pragma once

#include <cstdint>
#include <vector>

namespace mcrt {

/// Increment correlation used for the coordinate pair at parameter `gamma`:
/// rho = -cos(pi * gamma^2 / 4). Valid for gamma in (0, 2); throws
/// std::invalid_argument outside.
double correlation_of(double gamma);

struct WalkParams {
    double gamma = 1.0;
    std::int64_t window_n = 0; ///< samples span times [-window_n, window_n]
    std::uint32_t mesh_k = 1;  ///< samples per unit time
    std::uint64_t seed = 0;

    double correlation() const { return correlation_of(gamma); }
    /// Number of samples per coordinate: 2 * window_n * mesh_k + 1.
    std::size_t sample_count() const;
    void validate() const; ///< throws std::invalid_argument on bad fields
};

/// Two correlated random-walk coordinates sampled on the mesh grid of
/// [-window_n, window_n]. Sample i sits at time -window_n + i / mesh_k;
/// both coordinates are exactly zero at time 0.
struct CorrelatedWalk {
    WalkParams params;
    std::vector<double> l;
    std::vector<double> r;

    std::size_t center_index() const {
        return static_cast<std::size_t>(params.window_n) * params.mesh_k;
    }
    double time_of(std::size_t index) const {
        return static_cast<double>(static_cast<std::int64_t>(index) -
                                   static_cast<std::int64_t>(center_index())) /
               params.mesh_k;
    }
};

/// Generates both coordinates. The positive-time and negative-time halves use
/// independent substreams (substream_seed(seed, 0) and substream_seed(seed, 1)),
/// so the output is byte-identical regardless of how the halves are scheduled.
CorrelatedWalk generate_walk(const WalkParams& params);

} // namespace mcrt
