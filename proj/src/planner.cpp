#include "cmdp/planner.hpp"

#include <cassert>
#include <cmath>

namespace cmdp {

namespace {

inline std::size_t qidx(int h, int s, int a, int S, int A) {
    return (std::size_t(h) * S + s) * A + a;
}

/// Shared backward induction. policy == empty: greedy (fills actions);
/// otherwise evaluates the given policy.
PlanResult backward_induction(std::span<const double> P, std::span<const double> r, int H, int S,
                              int A, double cap, std::span<const int> policy) {
    const bool greedy = policy.empty();
    PlanResult res;
    res.values.H = H;
    res.values.S = S;
    res.values.A = A;
    res.values.cap = cap;
    res.values.V.assign(std::size_t(H + 1) * S, 0.0);
    res.values.Q.assign(std::size_t(H) * S * A, 0.0);
    if (greedy) res.action.assign(std::size_t(H) * S, 0);

    for (int h = H - 1; h >= 0; --h) {
        const double* vnext = res.values.V.data() + std::size_t(h + 1) * S;
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const double* row = P.data() + qidx(h, s, a, S, A) * S;
                double cont = 0.0;
                for (int s2 = 0; s2 < S; ++s2) cont += row[s2] * vnext[s2];
                double q = r[qidx(h, s, a, S, A)] + cont;
                if (q > cap) q = cap;
                res.values.Q[qidx(h, s, a, S, A)] = q;
                if (greedy && q > best) {
                    best = q;
                    best_a = a;
                }
            }
            const int chosen = greedy ? best_a : policy[std::size_t(h) * S + s];
            if (greedy) res.action[std::size_t(h) * S + s] = chosen;
            res.values.V[std::size_t(h) * S + s] = res.values.Q[qidx(h, s, chosen, S, A)];
        }
    }
    return res;
}

} // namespace

void validate_kernel(std::span<const double> P, int H, int S, int A) {
    assert(P.size() == std::size_t(H) * S * A * S);
    for (std::size_t row = 0; row < std::size_t(H) * S * A; ++row) {
        double sum = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
            double p = P[row * S + s2];
            if (p < -1e-9) throw InvalidKernel("kernel row has a negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidKernel("kernel row does not sum to 1");
    }
}

PlanResult truncated_plan(std::span<const double> P, std::span<const double> r_opt, int H, int S,
                          int A, double cap) {
    validate_kernel(P, H, S, A);
    for (double v : r_opt)
        if (!std::isfinite(v)) throw InvalidKernel("non-finite optimistic reward");
    return backward_induction(P, r_opt, H, S, A, cap, {});
}

PlanResult optimal_plan(std::span<const double> P, std::span<const double> r, int H, int S, int A) {
    validate_kernel(P, H, S, A);
    return backward_induction(P, r, H, S, A, std::numeric_limits<double>::infinity(), {});
}

ValueTable evaluate_policy(std::span<const double> P, std::span<const double> r,
                           std::span<const int> policy, int H, int S, int A,
                           std::optional<double> cap) {
    assert(policy.size() == std::size_t(H) * S);
    const double c = cap.value_or(std::numeric_limits<double>::infinity());
    return backward_induction(P, r, H, S, A, c, policy).values;
}

OccupancyTable occupancy(std::span<const double> P, std::span<const int> policy, int H, int S,
                         int A, int initial_state, std::span<const StepRule> rules) {
    OccupancyTable occ;
    occ.H = H;
    occ.S = S;
    occ.A = A;
    occ.rho.assign(std::size_t(H) * S, 0.0);
    occ.sa.assign(std::size_t(H) * S * A, 0.0);
    occ.rho[initial_state] = 1.0;
    for (int h = 0; h < H; ++h) {
        const StepRule rule = rules.empty() ? StepRule::FollowPolicy : rules[h];
        for (int s = 0; s < S; ++s) {
            const double mass = occ.rho[std::size_t(h) * S + s];
            if (mass == 0.0) continue;
            const auto propagate = [&](int a, double weight) {
                occ.sa[qidx(h, s, a, S, A)] += mass * weight;
                if (h + 1 < H) {
                    const double* row = P.data() + qidx(h, s, a, S, A) * S;
                    for (int s2 = 0; s2 < S; ++s2)
                        occ.rho[std::size_t(h + 1) * S + s2] += mass * weight * row[s2];
                }
            };
            if (rule == StepRule::FollowPolicy) {
                propagate(policy[std::size_t(h) * S + s], 1.0);
            } else {
                const double weight = 1.0 / A;
                for (int a = 0; a < A; ++a) propagate(a, weight);
            }
        }
    }
    return occ;
}

OccupancyTable occupancy_uniform_at(std::span<const double> P, std::span<const int> policy, int H,
                                    int S, int A, int initial_state, int uniform_h) {
    std::vector<StepRule> rules(H, StepRule::FollowPolicy);
    rules[uniform_h] = StepRule::Uniform;
    return occupancy(P, policy, H, S, A, initial_state, rules);
}

double avg_subopt_gap(const InstanceSpec& instance, const TabularPolicy& policy) {
    const Dims& D = instance.dims;
    double gap = 0.0;
    for (int w = 0; w < D.num_contexts; ++w) {
        const double qw = instance.context_space.q[w];
        if (qw == 0.0) continue;
        auto P = instance.p_slice(w);
        auto r = instance.r_slice(w);
        const auto star = optimal_plan(P, r, D.horizon, D.num_states, D.num_actions);
        const auto mine = evaluate_policy(P, r, policy_slice(policy, w), D.horizon, D.num_states,
                                          D.num_actions);
        gap += qw * (star.values.v(0, instance.initial_state) - mine.v(0, instance.initial_state));
    }
    assert(gap >= -1e-10);
    return gap;
}

} // namespace cmdp
