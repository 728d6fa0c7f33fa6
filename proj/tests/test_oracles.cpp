#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "cmdp/agents.hpp"
#include "cmdp/generator.hpp"
#include "cmdp/oracles.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/simulate.hpp"

using namespace cmdp;

namespace {

/// Synthetic regression design: one (s) slot per sample, A=W=H=1.
FeatureSpec design_features(const std::vector<std::vector<double>>& rows) {
    const int d = int(rows[0].size());
    FeatureSpec f;
    f.kind = ModelKind::ModelI;
    f.d = d;
    f.H = 1;
    f.S = int(rows.size());
    f.A = 1;
    f.W = 1;
    f.phi.assign(f.rows() * d, 0.0);
    f.psi.assign(f.rows() * d, 0.0);
    for (int s = 0; s < f.S; ++s)
        for (int j = 0; j < d; ++j) f.psi[f.row_index(0, s, 0, 0) + j] = rows[s][j];
    return f;
}

struct RolloutData {
    GeneratedInstance gen;
    ReplayBuffer buffer;
};

RolloutData rollout(std::uint64_t seed, ModelKind kind, int class_size, int episodes) {
    Dims dims{4, 2, 3, 3, 3};
    RolloutData out{generate_instance(seed, dims, kind, class_size,
                                      kind == ModelKind::ModelII ? 0.2 : 0.0),
                    ReplayBuffer(dims.horizon)};
    Rng rng(seed, 9);
    for (int e = 0; e < episodes; ++e) {
        const TabularPolicy pi = random_policy(dims, rng);
        const int w = sample_context(out.gen.instance.context_space, rng);
        const Trajectory traj = sample_episode(out.gen.instance, w, pi, rng);
        for (int h = 0; h < dims.horizon; ++h) {
            const auto& st = traj.steps[h];
            out.buffer.append(h, {st.s, st.a, st.s_next, st.r, w});
        }
    }
    return out;
}

} // namespace

TEST_CASE("ridge: empty buffer gives the zero vector") {
    FeatureSpec f = design_features({{1.0, 0.0, 0.0}});
    const auto eta = ridge_reward_fit({}, f, 0, 2.5);
    REQUIRE(eta.size() == 3);
    for (double v : eta) CHECK(v == 0.0);
}

TEST_CASE("ridge: single sample closed form (I + e1 e1^T)^-1 e1") {
    FeatureSpec f = design_features({{1.0, 0.0, 0.0}});
    std::vector<ReplayRecord> recs{{0, 0, 0, 1.0, 0}};
    const auto eta = ridge_reward_fit(recs, f, 0, 1.0);
    CHECK(std::abs(eta[0] - 0.5) <= 1e-12);
    CHECK(eta[1] == 0.0);
    CHECK(eta[2] == 0.0);
}

TEST_CASE("ridge: noiseless spanning data recovers the truth") {
    const int d = 3;
    Rng rng(21);
    std::vector<double> eta_true{0.3, 0.8, 0.1};
    std::vector<std::vector<double>> rows;
    std::vector<ReplayRecord> recs;
    for (int i = 0; i < 50; ++i) {
        auto x = rng.sample_simplex(d); // norm <= 1, spans R^3 over draws
        rows.push_back(x);
        recs.push_back({i, 0, 0, dot(x, eta_true), 0});
    }
    FeatureSpec f = design_features(rows);
    const auto eta = ridge_reward_fit(recs, f, 0, 1e-8);

    double err2 = 0.0;
    for (int j = 0; j < d; ++j) err2 += (eta[j] - eta_true[j]) * (eta[j] - eta_true[j]);
    CHECK(std::sqrt(err2) <= 1e-5);

    // independent dense least-squares oracle
    Eigen::MatrixXd X(50, d);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = rows[i][j];
        y[i] = recs[i].r;
    }
    Eigen::VectorXd ls = X.colPivHouseholderQr().solve(y);
    for (int j = 0; j < d; ++j) CHECK(std::abs(eta[j] - ls[j]) <= 1e-5);
}

TEST_CASE("ridge bias identity: eta_hat - eta = -xi Lambda^-1 eta on noiseless data") {
    auto data = rollout(31, ModelKind::ModelI, 1, 40);
    const InstanceSpec& inst = data.gen.instance;
    const int d = inst.dims.feat_dim;
    const double xi = 3.7;
    for (int h = 0; h < inst.dims.horizon; ++h) {
        const auto eta_hat = ridge_reward_fit(data.buffer.at(h), inst.features, h, xi);
        Eigen::MatrixXd gram = xi * Eigen::MatrixXd::Identity(d, d);
        for (const auto& rec : data.buffer.at(h)) {
            auto psi = inst.features.psi_at(h, rec.s, rec.a, rec.w);
            Eigen::Map<const Eigen::VectorXd> v(psi.data(), d);
            gram.noalias() += v * v.transpose();
        }
        Eigen::Map<const Eigen::VectorXd> eta_true(inst.weights.eta.at(h, 0).data(), d);
        Eigen::VectorXd expected_bias = -xi * gram.llt().solve(eta_true);
        for (int j = 0; j < d; ++j)
            CHECK(std::abs(eta_hat[j] - eta_true[j] - expected_bias[j]) <= 1e-10);
    }
}

TEST_CASE("mle: singleton class and -inf exclusion") {
    // d=1, phi=1; truth spreads mass, decoy is a point mass on state 0
    FeatureSpec f;
    f.kind = ModelKind::ModelI;
    f.d = 1;
    f.H = 1;
    f.S = 2;
    f.A = 1;
    f.W = 1;
    f.phi.assign(f.rows(), 1.0);
    f.psi.assign(f.rows(), 1.0);
    MuTable truth{ModelKind::ModelI, 1, 1, 2, 1, {0.5, 0.5}};
    MuTable decoy{ModelKind::ModelI, 1, 1, 2, 1, {1.0, 0.0}};

    TransitionModelClass singleton{{truth}, 0};
    std::vector<ReplayRecord> recs{{0, 0, 1, 0.0, 0}};
    CHECK(mle_transition_fit(recs, f, 0, singleton) == 0);

    TransitionModelClass both{{decoy, truth}, 1};
    // decoy assigns probability 0 to the observed s'=1 transition, so it is
    // excluded no matter how well it fits the other records
    std::vector<ReplayRecord> with_kill{{0, 0, 0, 0.0, 0}, {0, 0, 0, 0.0, 0}, {0, 0, 1, 0.0, 0}};
    CHECK(mle_transition_fit(with_kill, f, 0, both) == 1);

    TransitionModelClass impossible{{decoy}, 0};
    CHECK_THROWS_AS(mle_transition_fit(with_kill, f, 0, impossible), AllModelsImpossible);
}

TEST_CASE("mle: selection matches independently recomputed log-likelihoods") {
    Dims dims{4, 2, 2, 3, 2};
    auto gen = generate_instance(11, dims, ModelKind::ModelI, 4, 0.1);
    const InstanceSpec& inst = gen.instance;

    Rng rng(11, 5);
    ReplayBuffer buffer(dims.horizon);
    for (int e = 0; e < 200; ++e) {
        const TabularPolicy pi = random_policy(dims, rng);
        const int w = sample_context(inst.context_space, rng);
        const Trajectory traj = sample_episode(inst, w, pi, rng);
        for (int h = 0; h < dims.horizon; ++h) {
            const auto& st = traj.steps[h];
            buffer.append(h, {st.s, st.a, st.s_next, st.r, w});
        }
    }
    for (int h = 0; h < dims.horizon; ++h) {
        const int chosen = mle_transition_fit(buffer.at(h), inst.features, h, gen.transition_class);
        int best = -1;
        double best_ll = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < int(gen.transition_class.candidates.size()); ++c) {
            double ll = 0.0;
            for (const auto& rec : buffer.at(h)) {
                const double p = dot(inst.features.phi_at(h, rec.s, rec.a, rec.w),
                                     gen.transition_class.candidates[c].at(h, rec.s_next, rec.w));
                ll += std::log(p);
            }
            if (ll > best_ll) {
                best_ll = ll;
                best = c;
            }
        }
        CHECK(chosen == best);
    }
}

TEST_CASE("mle: score difference equals the sum of per-record log ratios") {
    auto data = rollout(43, ModelKind::ModelI, 3, 60);
    const InstanceSpec& inst = data.gen.instance;
    MleScorer scorer(inst.features, data.gen.transition_class, inst.dims);
    for (int h = 0; h < inst.dims.horizon; ++h)
        for (const auto& rec : data.buffer.at(h)) scorer.add_record(h, rec);

    for (int h = 0; h < inst.dims.horizon; ++h) {
        const double diff = scorer.score(0, h) - scorer.score(1, h);
        double ratio_sum = 0.0;
        for (const auto& rec : data.buffer.at(h)) {
            const double p0 = dot(inst.features.phi_at(h, rec.s, rec.a, rec.w),
                                  data.gen.transition_class.candidates[0].at(h, rec.s_next, rec.w));
            const double p1 = dot(inst.features.phi_at(h, rec.s, rec.a, rec.w),
                                  data.gen.transition_class.candidates[1].at(h, rec.s_next, rec.w));
            ratio_sum += std::log(p0 / p1);
        }
        CHECK(std::abs(diff - ratio_sum) <= 1e-9);
    }
}

TEST_CASE("mle: duplicated class breaks ties to the lowest index") {
    auto data = rollout(51, ModelKind::ModelI, 1, 10);
    const InstanceSpec& inst = data.gen.instance;
    const MuTable truth = data.gen.transition_class.candidates[0];
    TransitionModelClass duplicated{{truth, truth, truth}, 0};
    for (int h = 0; h < inst.dims.horizon; ++h)
        CHECK(mle_transition_fit(data.buffer.at(h), inst.features, h, duplicated) == 0);
    CHECK(mle_transition_fit({}, inst.features, 0, duplicated) == 0);
}

TEST_CASE("incremental scorers match the from-scratch oracles") {
    auto data = rollout(77, ModelKind::ModelII, 4, 80);
    const InstanceSpec& inst = data.gen.instance;
    MleScorer mle(inst.features, data.gen.transition_class, inst.dims);
    LsrScorer lsr(inst.features, data.gen.reward_class, inst.dims);

    std::vector<std::vector<ReplayRecord>> prefix(inst.dims.horizon);
    for (int h = 0; h < inst.dims.horizon; ++h) {
        for (const auto& rec : data.buffer.at(h)) {
            prefix[h].push_back(rec);
            mle.add_record(h, rec);
            lsr.add_record(h, rec);
            if (prefix[h].size() % 17 == 0) {
                CHECK(mle.argmax(h) ==
                      mle_transition_fit(prefix[h], inst.features, h, data.gen.transition_class));
                CHECK(lsr.argmin(h) ==
                      lsr_reward_fit(prefix[h], inst.features, h, data.gen.reward_class));
            }
        }
        CHECK(mle.argmax(h) ==
              mle_transition_fit(prefix[h], inst.features, h, data.gen.transition_class));
        CHECK(lsr.argmin(h) == lsr_reward_fit(prefix[h], inst.features, h, data.gen.reward_class));
    }
}

TEST_CASE("lsr: truth has zero residual; selection matches brute force") {
    auto data = rollout(5, ModelKind::ModelII, 3, 100);
    const InstanceSpec& inst = data.gen.instance;
    const RewardModelClass& cls = data.gen.reward_class;
    for (int h = 0; h < inst.dims.horizon; ++h) {
        const int chosen = lsr_reward_fit(data.buffer.at(h), inst.features, h, cls);
        int best = 0;
        double best_res = std::numeric_limits<double>::infinity();
        for (int c = 0; c < int(cls.candidates.size()); ++c) {
            double res = 0.0;
            for (const auto& rec : data.buffer.at(h)) {
                const double diff = dot(inst.features.psi_at(h, rec.s, rec.a, rec.w),
                                        cls.candidates[c].at(h, rec.w)) -
                                    rec.r;
                res += diff * diff;
            }
            if (res < best_res) {
                best_res = res;
                best = c;
            }
        }
        CHECK(chosen == best);
        // deterministic rewards: the truth fits exactly
        double truth_res = 0.0;
        for (const auto& rec : data.buffer.at(h)) {
            const double diff = dot(inst.features.psi_at(h, rec.s, rec.a, rec.w),
                                    cls.candidates[cls.true_index].at(h, rec.w)) -
                                rec.r;
            truth_res += diff * diff;
        }
        CHECK(truth_res <= 1e-18);
    }
    CHECK(lsr_reward_fit({}, inst.features, 0, cls) == 0);
}

TEST_CASE("clip_reward") {
    CHECK(clip_reward(0.37) == 0.37);
    CHECK(clip_reward(-0.2) == 0.0);
    CHECK(clip_reward(1.8) == 1.0);
    CHECK(clip_reward(0.0) == 0.0);
    CHECK(clip_reward(1.0) == 1.0);
}
