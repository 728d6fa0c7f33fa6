#include "cmdp/reachability.hpp"

#include <algorithm>
#include <vector>

namespace cmdp {

namespace {

/// Extreme reach probability of hitting target_s at step target_h (0-based)
/// in context w, over all policies.
double extreme_reach(const InstanceSpec& inst, int w, int target_h, int target_s, bool maximize) {
    const Dims& D = inst.dims;
    const int S = D.num_states, A = D.num_actions;
    std::vector<double> value(S, 0.0), next(S);
    value[target_s] = 1.0;
    for (int h = target_h - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = maximize ? -1.0 : 2.0;
            for (int a = 0; a < A; ++a) {
                auto row = inst.p_row(w, h, s, a);
                double v = 0.0;
                for (int s2 = 0; s2 < S; ++s2) v += row[s2] * value[s2];
                best = maximize ? std::max(best, v) : std::min(best, v);
            }
            next[s] = best;
        }
        value.swap(next);
    }
    return value[inst.initial_state];
}

} // namespace

ReachabilityBounds compute_pmin_pmax(const InstanceSpec& instance) {
    const Dims& D = instance.dims;
    if (D.horizon < 2) return {1.0, 1.0};
    ReachabilityBounds bounds{2.0, -1.0};
    for (int w = 0; w < D.num_contexts; ++w)
        for (int h = 1; h < D.horizon; ++h)
            for (int s = 0; s < D.num_states; ++s) {
                bounds.p_min = std::min(bounds.p_min, extreme_reach(instance, w, h, s, false));
                bounds.p_max = std::max(bounds.p_max, extreme_reach(instance, w, h, s, true));
            }
    return bounds;
}

} // namespace cmdp
