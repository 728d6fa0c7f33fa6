#pragma once

#include <vector>

#include "cmdp/types.hpp"

namespace cmdp {

/// Deterministic context-dependent policy: action id per (context, h, state).
struct TabularPolicy {
    int W = 0, H = 0, S = 0;
    std::vector<int> action; // [w][h][s]

    TabularPolicy() = default;
    TabularPolicy(int contexts, int horizon, int states)
        : W(contexts), H(horizon), S(states), action(std::size_t(contexts) * horizon * states, 0) {}

    int& at(int w, int h, int s) { return action[(std::size_t(w) * H + h) * S + s]; }
    int at(int w, int h, int s) const { return action[(std::size_t(w) * H + h) * S + s]; }
};

} // namespace cmdp
