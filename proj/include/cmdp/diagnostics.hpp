#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmdp/agents.hpp"
#include "cmdp/generator.hpp"
#include "cmdp/instance.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Executable lemma check: the measured quantity against its theoretical
/// bound, plus the (n, h, seed) context it came from.
struct CheckReport {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool passed = false;
    int n = -1;
    int h = -1;
    std::uint64_t seed = 0;
};

CheckReport make_check(std::string name, double measured, double bound, double tol = 1e-9,
                       int n = -1, int h = -1, std::uint64_t seed = 0);

/// Value-difference decomposition: V^pi under (P1,r1) minus under (P2,r2),
/// computed directly and through both occupancy-weighted expansion forms
/// (expectations under (P2,pi) bootstrapping V1, and under (P1,pi)
/// bootstrapping V2). measured = worst pairwise deviation of the three.
CheckReport check_simulation_lemma(std::span<const double> P1, std::span<const double> r1,
                                   std::span<const double> P2, std::span<const double> r2,
                                   std::span<const int> policy, int H, int S, int A,
                                   int initial_state);

/// sum_n x_n^T M_{n-1}^{-1} x_n with M_0 = lambda0 I against
/// 2 d log(1 + N / (d lambda0)). Stream vectors must satisfy ||x|| <= 1.
CheckReport check_elliptical_potential(const std::vector<std::vector<double>>& stream,
                                       double lambda0, int dim);

/// MLE guarantee: sum over past episodes of the exact (occupancy-weighted)
/// expected squared TV error of the selected transition candidate at step h,
/// against zeta_n = log(2 |class| n H / delta). uniform_actions switches the
/// expectation's action rule (Model II collects at a uniform action).
CheckReport check_mle_guarantee(const InstanceSpec& instance,
                                std::span<const TabularPolicy> past_policies,
                                const MuTable& selected, int n, int h, double delta, int class_size,
                                bool uniform_actions);

/// LSR guarantee: same expectation with the squared reward-prediction error
/// <eta_sel(w) - eta(w), psi(s,a)>^2, against log(2 |class| n H / delta).
CheckReport check_lsr_guarantee(const InstanceSpec& instance,
                                std::span<const TabularPolicy> past_policies,
                                const EtaTable& selected, int n, int h, double delta,
                                int class_size);

struct CoverageReport {
    CheckReport transition; // |(P - P_hat) V_{h+1}| <= b, may fail with prob <= delta
    CheckReport reward;     // |f_hat - r| <= c and the uncapped ridge bound; surely true
};

/// Pointwise bonus coverage at episode n (Model I), enumerated over every
/// (s, a, w, h) using the snapshot's estimates and pre-episode accumulators.
CoverageReport check_pointwise_coverage_model1(const InstanceSpec& instance,
                                               const TransitionModelClass& psi1,
                                               const RunSnapshot& snapshot,
                                               const TabularPolicy& policy_n);

/// Norm-ratio concentration: ||x||_{(emp + reg I)^-1} vs the exact expected
/// covariance under the past policies, required to stay within [1/5, 3] for
/// every (s, a, w) and both feature families. measured = worst margin outside
/// the band (negative when inside).
CheckReport check_concentration_event(const InstanceSpec& instance,
                                      std::span<const TabularPolicy> past_policies,
                                      const RunSnapshot& snapshot, int n, int h,
                                      bool uniform_actions);

/// Truncation identities/inequalities on random instance pairs with scaled
/// rewards: cap-H evaluation equals uncapped when r <= 1 (equality, 1e-12);
/// sum of capped values vs the cap-3H sum reward; its reverse; and the
/// kernel-swap bound via the explicitly constructed drift reward. Returns the
/// four aggregated reports.
std::vector<CheckReport> check_truncation_lemmas(std::uint64_t seed, int trials);

/// Deterministic ridge coverage (noiseless rewards): rolls random-policy
/// episodes on a Model I instance, fits the ridge estimate, and verifies
/// |f_hat - r| <= min{beta ||psi||, 1} and the uncapped bound everywhere.
CheckReport check_reward_coverage(const InstanceSpec& instance, int episodes, std::uint64_t seed);

/// The full deterministic suite across `trials` seeded random instances
/// (|S|<=6, K<=3, H<=5, d<=4): simulation lemma, truncation lemmas,
/// elliptical potential, reward coverage. Aggregates worst cases per check.
std::vector<CheckReport> deterministic_battery(std::uint64_t seed, int trials);

/// Multi-seed probabilistic suite at the config's bonus scale (theory-exact
/// runs use 1.0): per seed, runs the model's algorithm with snapshots at the
/// checkpoints and applies the applicable guarantee checks. A seed violates a
/// check if it fails at any checked (n, h).
struct ProbabilisticBatteryResult {
    int num_seeds = 0;
    int allowed = 0; // ceil(delta * seeds) + 2, binomial slack
    std::vector<std::pair<std::string, int>> violating_seeds;
    std::vector<CheckReport> failures; // first few failing reports, for context

    bool within_slack() const {
        for (const auto& [name, count] : violating_seeds)
            if (count > allowed) return false;
        return true;
    }
};

ProbabilisticBatteryResult probabilistic_battery(const GeneratedInstance& gen,
                                                 const AgentConfig& base,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::vector<int> checkpoints);

} // namespace cmdp
