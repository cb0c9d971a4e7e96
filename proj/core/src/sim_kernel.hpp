#pragma once

#include "fxband/simulator.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fxband::detail {

/// Paths advanced together; blocks are always this wide so every lane runs
/// the same instruction sequence.
inline constexpr int kLanes = 64;

struct KernelProblem {
    BandPolicy policy;
    ModelParams params;
    ReactionLaw law;
    double k_fixed = 0.0;
    double x0 = 0.0;
    double dt = 0.0;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_salt = 0;
};

/// Simulates up to kLanes paths. `path_ids` holds the real paths; results are
/// written for those only. Events are appended for real lanes in time order
/// per lane, lanes in order.
void simulate_block(const KernelProblem& problem, std::span<const std::uint64_t> path_ids,
                    std::span<PathResult> out, std::vector<SimEvent>* events);

/// First n standard normals of a path's Gaussian stream, as consumed by the
/// kernel. Test hook.
std::vector<double> gaussian_stream(std::uint64_t seed, std::uint64_t path, std::size_t n);

}  // namespace fxband::detail
