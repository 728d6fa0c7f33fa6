#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cmdp/diagnostics.hpp"
#include "cmdp/generator.hpp"
#include "cmdp/planner.hpp"

using namespace cmdp;

namespace {

GeneratedInstance small_model1(std::uint64_t seed) {
    return generate_instance(seed, Dims{4, 2, 2, 3, 3}, ModelKind::ModelI, 3, 0.1);
}

} // namespace

TEST_CASE("simulation lemma: identical MDPs give exact zeros") {
    auto gen = small_model1(1);
    const auto& inst = gen.instance;
    Rng rng(2);
    TabularPolicy pol = random_policy(inst.dims, rng);
    CheckReport rep = check_simulation_lemma(
        inst.p_slice(0), inst.r_slice(0), inst.p_slice(0), inst.r_slice(0), policy_slice(pol, 0),
        inst.dims.horizon, inst.dims.num_states, inst.dims.num_actions, 0);
    CHECK(rep.measured == 0.0);
    CHECK(rep.passed);
}

TEST_CASE("simulation lemma: hand-checkable two-step deterministic chains") {
    // two states, one action, H=2; kernel A stays, kernel B flips; r = 1{s=0}
    std::vector<double> PA{1, 0, 0, 1, 1, 0, 0, 1}; // [h][s][a][s']
    std::vector<double> PB{0, 1, 1, 0, 0, 1, 1, 0};
    std::vector<double> r{1, 0, 1, 0}; // [h][s][a]
    std::vector<int> pol(4, 0);
    // under A from s0: r(s0) + r(s0) = 2; under B: r(s0) + r(s1) = 1
    auto VA = evaluate_policy(PA, r, pol, 2, 2, 1);
    auto VB = evaluate_policy(PB, r, pol, 2, 2, 1);
    CHECK(VA.v(0, 0) == 2.0);
    CHECK(VB.v(0, 0) == 1.0);
    CheckReport rep = check_simulation_lemma(PA, r, PB, r, pol, 2, 2, 1, 0);
    CHECK(rep.passed);
    CHECK(rep.measured <= 1e-12);
}

TEST_CASE("elliptical potential: trivial and unit-vector cases") {
    CheckReport zero = check_elliptical_potential({{0.0, 0.0}, {0.0, 0.0}}, 1.0, 2);
    CHECK(zero.measured == 0.0);
    CHECK(zero.passed);

    CheckReport one = check_elliptical_potential({{1.0}}, 1.0, 1);
    CHECK(std::abs(one.measured - 1.0) <= 1e-12);
    CHECK(std::abs(one.bound - 2.0 * std::log(2.0)) <= 1e-12);
    CHECK(one.passed);
}

TEST_CASE("mle guarantee: truth estimate measures zero; n=1 empty sum") {
    auto gen = small_model1(3);
    const auto& inst = gen.instance;
    Rng rng(4);
    std::vector<TabularPolicy> past{random_policy(inst.dims, rng), random_policy(inst.dims, rng)};
    const MuTable& truth = gen.transition_class.candidates[gen.transition_class.true_index];
    for (int h = 0; h < inst.dims.horizon; ++h) {
        CheckReport rep = check_mle_guarantee(inst, past, truth, 3, h, 0.1, 3, false);
        CHECK(rep.measured <= 1e-15);
        CHECK(rep.passed);
    }
    CheckReport empty = check_mle_guarantee(inst, {}, gen.transition_class.candidates[0], 1, 0, 0.1,
                                            3, false);
    CHECK(empty.measured == 0.0);
    CHECK(empty.passed);
}

TEST_CASE("mle guarantee: a far-off candidate can exceed the bound at large n") {
    // sanity that the measured statistic actually grows with the data
    auto gen = small_model1(5);
    const auto& inst = gen.instance;
    Rng rng(6);
    std::vector<TabularPolicy> past;
    for (int i = 0; i < 400; ++i) past.push_back(random_policy(inst.dims, rng));
    int decoy = gen.transition_class.true_index == 0 ? 1 : 0;
    CheckReport rep = check_mle_guarantee(inst, past, gen.transition_class.candidates[decoy], 401, 0,
                                          0.1, 3, false);
    CHECK(rep.measured > 0.0);
}

TEST_CASE("lsr guarantee: truth measures zero") {
    auto gen = generate_instance(7, Dims{4, 2, 2, 3, 3}, ModelKind::ModelII, 3, 0.2);
    const auto& inst = gen.instance;
    Rng rng(8);
    std::vector<TabularPolicy> past{random_policy(inst.dims, rng)};
    const EtaTable& truth = gen.reward_class.candidates[gen.reward_class.true_index];
    CheckReport rep = check_lsr_guarantee(inst, past, truth, 2, 1, 0.1, 3);
    CHECK(rep.measured <= 1e-15);
    CHECK(rep.passed);
    CheckReport empty = check_lsr_guarantee(inst, {}, truth, 1, 0, 0.1, 3);
    CHECK(empty.measured == 0.0);
}

TEST_CASE("pointwise coverage: truth estimates with nonnegative bonuses pass") {
    auto gen = small_model1(9);
    const auto& inst = gen.instance;
    const int H = inst.dims.horizon, d = inst.dims.feat_dim;

    RunSnapshot snap;
    snap.n = 2;
    snap.mle_index.assign(H, gen.transition_class.true_index);
    snap.eta_hat.assign(H, std::vector<double>(d));
    for (int h = 0; h < H; ++h) {
        auto eta = inst.weights.eta.at(h, 0);
        snap.eta_hat[h].assign(eta.begin(), eta.end());
    }
    snap.phi_acc.assign(H, CovarianceAccumulator(d));
    snap.psi_acc.assign(H, CovarianceAccumulator(d));
    snap.lambda_n = 1.0;
    snap.xi_n = 1.0;
    snap.alpha_n = 1.0;
    snap.beta_n = 1.0;

    Rng rng(10);
    TabularPolicy pol = random_policy(inst.dims, rng);
    CoverageReport rep = check_pointwise_coverage_model1(inst, gen.transition_class, snap, pol);
    CHECK(rep.transition.passed);
    CHECK(rep.transition.measured <= 0.0);
    CHECK(rep.reward.passed);
    CHECK(rep.reward.measured <= 0.0);
}

TEST_CASE("concentration: at n=1 both matrices reduce to the regularizer") {
    auto gen = small_model1(11);
    const auto& inst = gen.instance;
    const int H = inst.dims.horizon, d = inst.dims.feat_dim;
    RunSnapshot snap;
    snap.n = 1;
    snap.phi_acc.assign(H, CovarianceAccumulator(d));
    snap.psi_acc.assign(H, CovarianceAccumulator(d));
    snap.lambda_n = 2.0;
    snap.xi_n = 2.0;
    CheckReport rep = check_concentration_event(inst, {}, snap, 1, 0, false);
    // ratio is exactly 1 everywhere: margin is 1 - 3 = -2 against the band
    CHECK(rep.passed);
    CHECK(rep.measured <= -0.5);
}

TEST_CASE("truncation lemmas hold on 60 random instance pairs") {
    auto reports = check_truncation_lemmas(99, 60);
    REQUIRE(reports.size() == 4);
    for (const auto& rep : reports) {
        INFO(rep.name, " measured=", rep.measured);
        CHECK(rep.passed);
    }
    // D.1 is an equality at 1e-12
    CHECK(reports[0].bound == 0.0);
    CHECK(reports[0].measured <= 1e-12);
}

TEST_CASE("reward coverage is deterministic-sure on random data") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto gen = small_model1(100 + seed);
        CheckReport rep = check_reward_coverage(gen.instance, 6 + int(seed), seed);
        INFO("seed ", seed, " measured=", rep.measured);
        CHECK(rep.passed);
    }
}

TEST_CASE("deterministic battery: small smoke run all green") {
    auto reports = deterministic_battery(31337, 25);
    CHECK(reports.size() == 7);
    for (const auto& rep : reports) {
        INFO(rep.name, " measured=", rep.measured, " bound=", rep.bound);
        CHECK(rep.passed);
    }
}

TEST_CASE("probabilistic battery: smoke run within slack") {
    auto gen = small_model1(77);
    AgentConfig base;
    base.episodes = 64;
    base.delta = 0.1;
    base.bonus_scale = 1.0;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    ProbabilisticBatteryResult result = probabilistic_battery(gen, base, seeds, {8, 64});
    CHECK(result.num_seeds == 8);
    CHECK(result.allowed == 3); // ceil(0.1 * 8) + 2
    for (const auto& [name, count] : result.violating_seeds) {
        INFO(name, " violating seeds: ", count);
        CHECK(count <= result.allowed);
    }
}
