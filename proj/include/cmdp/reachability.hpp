#pragma once

#include "cmdp/instance.hpp"

namespace cmdp {

struct ReachabilityBounds {
    double p_min = 1.0;
    double p_max = 1.0;
};

/// Exact min/max over all (deterministic, time-dependent) policies of
/// Pr(s_h = s) for every context w, step h >= 2, and state s, by min-/max-
/// value backward induction with the indicator of (h, s) as terminal reward.
/// Returns the global extremes; h = 1 is excluded (the initial state is
/// fixed), and an H = 1 instance yields the degenerate (1, 1). p_min may be 0;
/// the caller decides whether that violates the reachability assumption.
ReachabilityBounds compute_pmin_pmax(const InstanceSpec& instance);

} // namespace cmdp
