#pragma once

#include <vector>

#include "cmdp/instance.hpp"
#include "cmdp/policy.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

struct TrajectoryStep {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s_next = 0;
};

struct Trajectory {
    int context = 0;
    std::vector<TrajectoryStep> steps; // indexed by h
};

/// Draws a context id from q (inverse CDF on one uniform draw).
int sample_context(const ContextSpace& context_space, Rng& rng);

/// Rolls a full H-step trajectory from the fixed initial state under the
/// policy's slice for `context`. Rewards are deterministic reads from r.
Trajectory sample_episode(const InstanceSpec& instance, int context, const TabularPolicy& policy,
                          Rng& rng);

} // namespace cmdp
