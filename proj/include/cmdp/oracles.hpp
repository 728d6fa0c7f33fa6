#pragma once

#include <span>
#include <vector>

#include "cmdp/instance.hpp"

namespace cmdp {

struct ReplayRecord {
    int s = 0;
    int a = 0;
    int s_next = 0;
    double r = 0.0;
    int w = 0;
};

/// Per-step datasets D_h in insertion order. Both learning loops append
/// exactly one record per step per episode.
struct ReplayBuffer {
    std::vector<std::vector<ReplayRecord>> steps;

    explicit ReplayBuffer(int horizon = 0) : steps(horizon) {}
    void append(int h, const ReplayRecord& rec) { steps[h].push_back(rec); }
    std::span<const ReplayRecord> at(int h) const { return steps[h]; }
    std::size_t count(int h) const { return steps[h].size(); }
};

/// Ridge regression for Model I rewards at step h:
/// argmin_eta sum (<eta, psi> - r)^2 + xi ||eta||^2, solved from the normal
/// equations (sum psi psi^T + xi I) eta = sum psi r with a Cholesky
/// factorization. Empty data returns the zero vector.
std::vector<double> ridge_reward_fit(std::span<const ReplayRecord> buffer_h,
                                     const FeatureSpec& features, int h, double xi);

/// Finite-class MLE for transition weights at step h: argmax over candidates
/// of sum log <phi(s,a,w), mu(s'[,w])>. Any candidate putting probability
/// <= 1e-300 on an observed transition scores -inf. Ties break to the lowest
/// index; an empty buffer returns 0. Throws AllModelsImpossible when every
/// candidate is excluded (cannot happen while the truth is in the class).
int mle_transition_fit(std::span<const ReplayRecord> buffer_h, const FeatureSpec& features, int h,
                       const TransitionModelClass& model_class);

/// Finite-class least squares for Model II rewards at step h: argmin over
/// candidates of sum (<psi(s,a), eta(w)> - r)^2, ties to the lowest index,
/// empty buffer returns 0.
int lsr_reward_fit(std::span<const ReplayRecord> buffer_h, const FeatureSpec& features, int h,
                   const RewardModelClass& reward_class);

/// Identity on [0,1], 1 above, 0 below.
inline double clip_reward(double raw) {
    if (raw > 1.0) return 1.0;
    if (raw < 0.0) return 0.0;
    return raw;
}

/// Incremental MLE scoring for the learning loops: candidate transition
/// tables are precomputed once and per-candidate log-likelihoods accumulate
/// record by record, so each episode's refit is O(|class|). Matches
/// mle_transition_fit on the same data (same summation order).
class MleScorer {
public:
    MleScorer(const FeatureSpec& features, const TransitionModelClass& model_class,
              const Dims& dims);

    void add_record(int h, const ReplayRecord& rec);
    int argmax(int h) const;
    double score(int c, int h) const { return scores_[std::size_t(c) * H_ + h]; }
    /// Candidate kernel in instance layout [w][h][s][a][s'].
    std::span<const double> candidate_table(int c) const { return tables_[c]; }
    int num_candidates() const { return int(tables_.size()); }

private:
    Dims dims_;
    int H_;
    std::vector<std::vector<double>> tables_;
    std::vector<double> scores_; // [c][h]
    std::vector<std::size_t> counts_;
};

/// Incremental squared-residual scoring for the Model II reward class.
class LsrScorer {
public:
    LsrScorer(const FeatureSpec& features, const RewardModelClass& reward_class, const Dims& dims);

    void add_record(int h, const ReplayRecord& rec);
    int argmin(int h) const;
    double residual(int c, int h) const { return residuals_[std::size_t(c) * H_ + h]; }
    /// Candidate reward table in instance layout [w][h][s][a].
    std::span<const double> candidate_table(int c) const { return tables_[c]; }
    int num_candidates() const { return int(tables_.size()); }

private:
    Dims dims_;
    int H_;
    std::vector<std::vector<double>> tables_;
    std::vector<double> residuals_; // [c][h]
    std::vector<std::size_t> counts_;
};

} // namespace cmdp
