#include "cmdp/oracles.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace cmdp {

namespace {

constexpr double kZeroLikelihood = 1e-300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_likelihood_term(double p) {
    return p <= kZeroLikelihood ? kNegInf : std::log(p);
}

inline std::size_t table_index(const Dims& D, int w, int h, int s, int a, int s2) {
    return (((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a) *
               D.num_states +
           s2;
}

inline std::size_t reward_index(const Dims& D, int w, int h, int s, int a) {
    return ((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a;
}

} // namespace

std::vector<double> ridge_reward_fit(std::span<const ReplayRecord> buffer_h,
                                     const FeatureSpec& features, int h, double xi) {
    const int d = features.d;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (const ReplayRecord& rec : buffer_h) {
        auto psi = features.psi_at(h, rec.s, rec.a, rec.w);
        Eigen::Map<const Eigen::VectorXd> v(psi.data(), d);
        gram.noalias() += v * v.transpose();
        rhs.noalias() += v * rec.r;
    }
    gram.diagonal().array() += xi;
    Eigen::VectorXd eta = gram.llt().solve(rhs);
    return {eta.data(), eta.data() + d};
}

int mle_transition_fit(std::span<const ReplayRecord> buffer_h, const FeatureSpec& features, int h,
                       const TransitionModelClass& model_class) {
    const int C = int(model_class.candidates.size());
    if (buffer_h.empty()) return 0;
    int best = -1;
    double best_score = kNegInf;
    for (int c = 0; c < C; ++c) {
        const MuTable& mu = model_class.candidates[c];
        double score = 0.0;
        for (const ReplayRecord& rec : buffer_h) {
            double p = dot(features.phi_at(h, rec.s, rec.a, rec.w), mu.at(h, rec.s_next, rec.w));
            score += log_likelihood_term(p);
            if (score == kNegInf) break;
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    if (best < 0) throw AllModelsImpossible("every candidate assigns zero likelihood");
    return best;
}

int lsr_reward_fit(std::span<const ReplayRecord> buffer_h, const FeatureSpec& features, int h,
                   const RewardModelClass& reward_class) {
    if (buffer_h.empty()) return 0;
    int best = 0;
    double best_res = std::numeric_limits<double>::infinity();
    for (int c = 0; c < int(reward_class.candidates.size()); ++c) {
        const EtaTable& eta = reward_class.candidates[c];
        double res = 0.0;
        for (const ReplayRecord& rec : buffer_h) {
            double pred = dot(features.psi_at(h, rec.s, rec.a, rec.w), eta.at(h, rec.w));
            double diff = pred - rec.r;
            res += diff * diff;
        }
        if (res < best_res) {
            best_res = res;
            best = c;
        }
    }
    return best;
}

MleScorer::MleScorer(const FeatureSpec& features, const TransitionModelClass& model_class,
                     const Dims& dims)
    : dims_(dims), H_(dims.horizon) {
    tables_.reserve(model_class.candidates.size());
    for (const MuTable& mu : model_class.candidates)
        tables_.push_back(tabulate_transitions(features, mu, dims));
    scores_.assign(tables_.size() * H_, 0.0);
    counts_.assign(H_, 0);
}

void MleScorer::add_record(int h, const ReplayRecord& rec) {
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        double p = tables_[c][table_index(dims_, rec.w, h, rec.s, rec.a, rec.s_next)];
        scores_[c * H_ + h] += log_likelihood_term(p);
    }
    ++counts_[h];
}

int MleScorer::argmax(int h) const {
    if (counts_[h] == 0) return 0;
    int best = -1;
    double best_score = kNegInf;
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        double score = scores_[c * H_ + h];
        if (score > best_score) {
            best_score = score;
            best = int(c);
        }
    }
    if (best < 0) throw AllModelsImpossible("every candidate assigns zero likelihood");
    return best;
}

LsrScorer::LsrScorer(const FeatureSpec& features, const RewardModelClass& reward_class,
                     const Dims& dims)
    : dims_(dims), H_(dims.horizon) {
    tables_.reserve(reward_class.candidates.size());
    for (const EtaTable& eta : reward_class.candidates)
        tables_.push_back(tabulate_rewards(features, eta, dims));
    residuals_.assign(tables_.size() * H_, 0.0);
    counts_.assign(H_, 0);
}

void LsrScorer::add_record(int h, const ReplayRecord& rec) {
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        double diff = tables_[c][reward_index(dims_, rec.w, h, rec.s, rec.a)] - rec.r;
        residuals_[c * H_ + h] += diff * diff;
    }
    ++counts_[h];
}

int LsrScorer::argmin(int h) const {
    if (counts_[h] == 0) return 0;
    int best = 0;
    double best_res = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        double res = residuals_[c * H_ + h];
        if (res < best_res) {
            best_res = res;
            best = int(c);
        }
    }
    return best;
}

} // namespace cmdp
