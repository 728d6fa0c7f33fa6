#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cmdp/instance.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Backward-induction tables for one context. V has H+1 rows (terminal row is
/// zero); Q has H rows. cap records the per-step truncation that was applied
/// (infinity when none).
struct ValueTable {
    int H = 0, S = 0, A = 0;
    std::vector<double> V; // [h][s], h in 0..H
    std::vector<double> Q; // [h][s][a]
    double cap = std::numeric_limits<double>::infinity();

    double v(int h, int s) const { return V[std::size_t(h) * S + s]; }
    double q(int h, int s, int a) const { return Q[(std::size_t(h) * S + s) * A + a]; }
};

/// Greedy plan for one context: action[h*S + s] plus the value tables.
struct PlanResult {
    std::vector<int> action;
    ValueTable values;
};

/// Exact state (and state-action) marginals under a policy from the fixed
/// initial state, by forward recursion.
struct OccupancyTable {
    int H = 0, S = 0, A = 0;
    std::vector<double> rho; // [h][s]
    std::vector<double> sa;  // [h][s][a], action rule applied

    double state(int h, int s) const { return rho[std::size_t(h) * S + s]; }
    double state_action(int h, int s, int a) const {
        return sa[(std::size_t(h) * S + s) * A + a];
    }
};

/// Per-step action rule for occupancy computations. FollowPolicy everywhere
/// reproduces on-policy marginals; Uniform at one step models the
/// uniform-action exploration round.
enum class StepRule { FollowPolicy, Uniform };

/// Throws InvalidKernel unless every row of P ([h][s][a][s']) is a
/// probability vector within 1e-9.
void validate_kernel(std::span<const double> P, int H, int S, int A);

/// Truncated optimistic planning: Q_h = min{cap, r + P V_{h+1}},
/// V_h = max_a Q_h, greedy ties to the lowest action id. Monotonicity of
/// x -> min{cap, r + Px} makes backward greedy attain the maximum truncated
/// value over all policies.
PlanResult truncated_plan(std::span<const double> P, std::span<const double> r_opt, int H, int S,
                          int A, double cap);

/// Standard uncapped backward induction (values bounded by H when r <= 1).
PlanResult optimal_plan(std::span<const double> P, std::span<const double> r, int H, int S, int A);

/// Policy evaluation with an optional per-step cap; cap = nullopt, H and 3H
/// realize the three value recursions used throughout.
ValueTable evaluate_policy(std::span<const double> P, std::span<const double> r,
                           std::span<const int> policy, int H, int S, int A,
                           std::optional<double> cap = std::nullopt);

OccupancyTable occupancy(std::span<const double> P, std::span<const int> policy, int H, int S,
                         int A, int initial_state, std::span<const StepRule> rules = {});

/// Occupancy where the policy is followed except for a uniform action at step
/// `uniform_h` (0-based).
OccupancyTable occupancy_uniform_at(std::span<const double> P, std::span<const int> policy, int H,
                                    int S, int A, int initial_state, int uniform_h);

/// Exact E_{w~q}[V*_w(s1) - V^{pi_w}_w(s1)] via optimal planning and policy
/// evaluation on the true tables. Nonnegative by construction.
double avg_subopt_gap(const InstanceSpec& instance, const TabularPolicy& policy);

/// Policy slice helper: the H*S action block of one context.
inline std::span<const int> policy_slice(const TabularPolicy& policy, int w) {
    return {policy.action.data() + std::size_t(w) * policy.H * policy.S,
            std::size_t(policy.H) * policy.S};
}

} // namespace cmdp
