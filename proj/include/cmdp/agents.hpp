#pragma once

#include <cstdint>
#include <vector>

#include "cmdp/bonuses.hpp"
#include "cmdp/generator.hpp"
#include "cmdp/instance.hpp"
#include "cmdp/policy.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

/// How the reachability constant enters the Model II bonuses:
/// sqrt(p_max/p_min) per the regret theorem, or the plain ratio variant.
enum class CConvention { SqrtRatio, Ratio };

struct AgentConfig {
    int episodes = 1; // N
    std::uint64_t seed = 0;
    double delta = 0.1;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double bonus_scale = 1.0;
    bool oracle_mode = false; // true model + zero bonuses, estimation bypassed
    int diagnostics_every = 0; // 0 = off; else inline coverage check every k episodes
    CConvention c_convention = CConvention::SqrtRatio;
    std::vector<int> snapshot_episodes; // capture estimation state at these n (sorted not required)
};

/// Estimation state captured at the start of episode n, before the episode's
/// data lands: exactly what the guarantee checks quantify over.
struct RunSnapshot {
    int n = 0;
    std::vector<int> mle_index;               // per h
    std::vector<std::vector<double>> eta_hat; // per h (Model I ridge estimate)
    std::vector<int> lsr_index;               // per h (Model II)
    std::vector<CovarianceAccumulator> phi_acc;
    std::vector<CovarianceAccumulator> psi_acc;
    double lambda_n = 0.0, xi_n = 0.0, alpha_n = 0.0, beta_n = 0.0;
};

struct EpisodeRecord {
    int episode = 0; // 1-based
    int context = 0;
    double gap = 0.0;     // exact E_w[V* - V^pi] for this episode's policy
    double avg_gap = 0.0; // prefix mean of gap
    double mean_tbonus = 0.0;
    double mean_rbonus = 0.0;
    bool mle_correct = false; // every step picked the true transition candidate
    bool lsr_correct = false; // Model II only
    double optimistic_value = 0.0; // E_w[truncated planned value at s1]; NaN at n=1
    double optimism_slack = 0.0;   // Model II theoretical additive slack; 0 for Model I
    bool optimism_violated = false;
    bool coverage_violated = false; // inline pointwise-coverage diagnostic (Model I)
    int env_steps = 0;              // resets + transitions this episode
};

struct RunLog {
    ModelKind model_kind = ModelKind::ModelI;
    std::uint64_t seed = 0;
    int episodes = 0;
    int horizon = 0;
    std::vector<EpisodeRecord> log;
    std::vector<TabularPolicy> policies; // per episode, planned for every context
    std::vector<RunSnapshot> snapshots;
    long long total_env_steps = 0;
    double true_optimal_value = 0.0; // E_w[V*_w(s1)]
    BonusParams bonus_params;        // as resolved for this run (C, class sizes, N)

    std::vector<double> avg_gap_sequence() const {
        std::vector<double> out;
        out.reserve(log.size());
        for (const auto& e : log) out.push_back(e.avg_gap);
        return out;
    }
};

/// Uniform i.i.d. action per (context, h, state).
TabularPolicy random_policy(const Dims& dims, Rng& rng);

/// Algorithm for Model I (context-varying representation, shared weights):
/// per episode fits the reward by ridge regression and the transition weights
/// by finite-class MLE, adds norm-type bonuses, plans the truncated (cap 3H)
/// optimistic MDP, executes the greedy policy for a full trajectory, and logs
/// the exact average sub-optimality gap against every context.
RunLog run_algorithm1(const InstanceSpec& instance, const TransitionModelClass& psi1,
                      const AgentConfig& config);

/// Algorithm for Model II (shared representation, context-varying weights):
/// MLE + least-squares oracles over the finite classes, squared-norm bonuses,
/// truncated planning, and per-step uniform-action roll-ins for data
/// collection (one fresh roll-in per step, one record per D_h per episode).
RunLog run_algorithm2(const InstanceSpec& instance, const TransitionModelClass& psi2,
                      const RewardModelClass& psi3, const AgentConfig& config);

} // namespace cmdp
