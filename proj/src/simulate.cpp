#include "cmdp/simulate.hpp"

namespace cmdp {

int sample_context(const ContextSpace& context_space, Rng& rng) {
    return rng.sample_categorical(context_space.q);
}

Trajectory sample_episode(const InstanceSpec& instance, int context, const TabularPolicy& policy,
                          Rng& rng) {
    const Dims& D = instance.dims;
    Trajectory traj;
    traj.context = context;
    traj.steps.reserve(D.horizon);
    int s = instance.initial_state;
    for (int h = 0; h < D.horizon; ++h) {
        const int a = policy.at(context, h, s);
        const double reward = instance.reward(context, h, s, a);
        const int s_next = rng.sample_categorical(instance.p_row(context, h, s, a));
        traj.steps.push_back({s, a, reward, s_next});
        s = s_next;
    }
    return traj;
}

} // namespace cmdp
