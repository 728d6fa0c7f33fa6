#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cmdp/agents.hpp"
#include "cmdp/generator.hpp"
#include "cmdp/harness.hpp"
#include "cmdp/planner.hpp"

using namespace cmdp;

namespace {

GeneratedInstance model1_instance(std::uint64_t seed) {
    return generate_instance(seed, Dims{5, 2, 3, 4, 3}, ModelKind::ModelI, 4, 0.0);
}

GeneratedInstance model2_instance(std::uint64_t seed) {
    return generate_instance(seed, Dims{4, 2, 3, 3, 3}, ModelKind::ModelII, 4, 0.25);
}

} // namespace

TEST_CASE("random_policy: degenerate action set, determinism, frequencies") {
    Dims dims{4, 1, 3, 4, 2};
    Rng rng(1);
    TabularPolicy pol = random_policy(dims, rng);
    for (int a : pol.action) CHECK(a == 0);

    Dims dims3{10, 4, 5, 10, 2};
    Rng r1(42), r2(42);
    TabularPolicy p1 = random_policy(dims3, r1);
    TabularPolicy p2 = random_policy(dims3, r2);
    CHECK(p1.action == p2.action);

    Dims big{50, 4, 10, 50, 2};
    Rng r3(9);
    TabularPolicy p3 = random_policy(big, r3); // 25000 entries
    std::vector<int> counts(4, 0);
    for (int a : p3.action) ++counts[a];
    for (int c : counts) CHECK(std::abs(double(c) / p3.action.size() - 0.25) < 0.01);
}

TEST_CASE("oracle mode reaches gap zero from episode 2 on") {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        auto gen = model1_instance(seed);
        AgentConfig cfg;
        cfg.episodes = 48;
        cfg.seed = seed;
        cfg.oracle_mode = true;
        RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
        REQUIRE(log.log.size() == 48);
        for (const auto& e : log.log)
            if (e.episode >= 2) CHECK(std::abs(e.gap) <= 1e-10);
    }
    for (std::uint64_t seed : {3ULL, 4ULL}) {
        auto gen = model2_instance(seed);
        AgentConfig cfg;
        cfg.episodes = 48;
        cfg.seed = seed;
        cfg.oracle_mode = true;
        RunLog log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
        for (const auto& e : log.log)
            if (e.episode >= 2) CHECK(std::abs(e.gap) <= 1e-10);
    }
}

TEST_CASE("N=1 runs a single random episode with no fitting") {
    auto gen = model1_instance(5);
    AgentConfig cfg;
    cfg.episodes = 1;
    cfg.seed = 5;
    RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
    REQUIRE(log.log.size() == 1);
    CHECK(log.log[0].episode == 1);
    CHECK(log.log[0].mle_correct == false);
    CHECK(log.log[0].mean_tbonus == 0.0);
    CHECK(std::isnan(log.log[0].optimistic_value));
    CHECK(log.policies.size() == 1);
}

TEST_CASE("runs are deterministic byte-for-byte given the seed") {
    auto gen = model1_instance(6);
    AgentConfig cfg;
    cfg.episodes = 40;
    cfg.seed = 17;
    cfg.bonus_scale = 0.1;
    RunLog a = run_algorithm1(gen.instance, gen.transition_class, cfg);
    RunLog b = run_algorithm1(gen.instance, gen.transition_class, cfg);
    CHECK(run_log_to_csv(a) == run_log_to_csv(b));
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].gap == b.log[i].gap);
        CHECK(a.log[i].context == b.log[i].context);
    }
    for (std::size_t i = 0; i < a.policies.size(); ++i)
        CHECK(a.policies[i].action == b.policies[i].action);

    auto gen2 = model2_instance(8);
    AgentConfig cfg2;
    cfg2.episodes = 32;
    cfg2.seed = 23;
    cfg2.bonus_scale = 0.05;
    RunLog c = run_algorithm2(gen2.instance, gen2.transition_class, gen2.reward_class, cfg2);
    RunLog d = run_algorithm2(gen2.instance, gen2.transition_class, gen2.reward_class, cfg2);
    CHECK(run_log_to_csv(c) == run_log_to_csv(d));
}

TEST_CASE("avg_gap is the exact prefix mean and matches avg_subopt_gap") {
    auto gen = model1_instance(9);
    AgentConfig cfg;
    cfg.episodes = 64;
    cfg.seed = 2;
    cfg.bonus_scale = 0.2;
    RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
    double total = 0.0;
    for (const auto& e : log.log) {
        total += e.gap;
        CHECK(std::abs(e.avg_gap - total / e.episode) <= 1e-12);
        CHECK(e.gap >= 0.0);
    }
    // the logged gap is exactly the library's avg_subopt_gap of the policy
    for (int n : {0, 5, 31}) {
        CHECK(log.log[n].gap == avg_subopt_gap(gen.instance, log.policies[n]));
    }
}

TEST_CASE("model II accounting: one record per step per episode, env steps") {
    auto gen = model2_instance(10);
    const int H = gen.instance.dims.horizon;
    AgentConfig cfg;
    cfg.episodes = 20;
    cfg.seed = 3;
    cfg.bonus_scale = 0.1;
    RunLog log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
    for (const auto& e : log.log) CHECK(e.env_steps == H * (H + 1) / 2 + H);
    CHECK(log.total_env_steps == 20LL * (H * (H + 1) / 2 + H));
}

TEST_CASE("snapshots capture pre-episode estimation state") {
    auto gen = model1_instance(12);
    AgentConfig cfg;
    cfg.episodes = 32;
    cfg.seed = 4;
    cfg.snapshot_episodes = {8, 16};
    RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
    REQUIRE(log.snapshots.size() == 2);
    CHECK(log.snapshots[0].n == 8);
    CHECK(log.snapshots[1].n == 16);
    // accumulators hold exactly n-1 rank-one updates at episode n
    for (const auto& snap : log.snapshots)
        for (int h = 0; h < gen.instance.dims.horizon; ++h)
            CHECK(snap.phi_acc[h].count() == snap.n - 1);
}

TEST_CASE("optimism holds with theory-exact bonuses on most seeds") {
    const int num_seeds = 50;
    const int allowed = int(std::ceil(0.1 * num_seeds)) + 2;

    auto gen1 = model1_instance(2024);
    int violating1 = 0;
    for (int seed = 1; seed <= num_seeds; ++seed) {
        AgentConfig cfg;
        cfg.episodes = 192;
        cfg.seed = std::uint64_t(seed);
        cfg.delta = 0.1;
        cfg.bonus_scale = 1.0;
        RunLog log = run_algorithm1(gen1.instance, gen1.transition_class, cfg);
        bool violated = false;
        for (const auto& e : log.log) violated = violated || e.optimism_violated;
        violating1 += violated;
    }
    CHECK(violating1 <= allowed);

    auto gen2 = model2_instance(2025);
    int violating2 = 0;
    for (int seed = 1; seed <= num_seeds; ++seed) {
        AgentConfig cfg;
        cfg.episodes = 192;
        cfg.seed = std::uint64_t(seed);
        cfg.delta = 0.1;
        cfg.bonus_scale = 1.0;
        RunLog log = run_algorithm2(gen2.instance, gen2.transition_class, gen2.reward_class, cfg);
        bool violated = false;
        for (const auto& e : log.log) violated = violated || e.optimism_violated;
        violating2 += violated;
    }
    CHECK(violating2 <= allowed);
}

TEST_CASE("inline coverage diagnostic stays quiet at theory scale") {
    auto gen = model1_instance(13);
    AgentConfig cfg;
    cfg.episodes = 48;
    cfg.seed = 11;
    cfg.bonus_scale = 1.0;
    cfg.diagnostics_every = 8;
    RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
    int violations = 0;
    for (const auto& e : log.log) violations += e.coverage_violated;
    CHECK(violations == 0);
}

TEST_CASE("model II with H=1 degenerates to a bandit round") {
    auto gen = generate_instance(21, Dims{3, 3, 2, 1, 3}, ModelKind::ModelII, 2, 0.3);
    AgentConfig cfg;
    cfg.episodes = 12;
    cfg.seed = 2;
    cfg.bonus_scale = 0.1;
    RunLog log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
    // one roll-in of length one: a reset plus a single uniform action
    for (const auto& e : log.log) CHECK(e.env_steps == 2);
    CHECK(log.total_env_steps == 24);
}

TEST_CASE("reachability constant follows the configured convention") {
    auto gen = model2_instance(30);
    AgentConfig cfg;
    cfg.episodes = 4;
    cfg.seed = 1;
    RunLog sqrt_log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
    cfg.c_convention = CConvention::Ratio;
    RunLog ratio_log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
    CHECK(sqrt_log.bonus_params.C > 1.0);
    CHECK(std::abs(ratio_log.bonus_params.C - sqrt_log.bonus_params.C * sqrt_log.bonus_params.C) <=
          1e-12);
}

TEST_CASE("reference runs reproduce their pinned final averages") {
    {
        auto gen = generate_instance(7, Dims{5, 2, 3, 4, 3}, ModelKind::ModelI, 4, 0.0);
        AgentConfig cfg;
        cfg.episodes = 4096;
        cfg.seed = 1;
        cfg.delta = 0.1;
        cfg.bonus_scale = 0.05;
        cfg.gamma2 = 0.02;
        RunLog log = run_algorithm1(gen.instance, gen.transition_class, cfg);
        CHECK(std::abs(log.log.back().avg_gap - 0.053933088019318148) <= 1e-12);
    }
    {
        auto gen = generate_instance(13, Dims{4, 2, 3, 3, 3}, ModelKind::ModelII, 4, 0.25);
        AgentConfig cfg;
        cfg.episodes = 4096;
        cfg.seed = 1;
        cfg.delta = 0.1;
        cfg.bonus_scale = 0.02;
        RunLog log = run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, cfg);
        CHECK(std::abs(log.log.back().avg_gap - 0.032865007113012108) <= 1e-12);
    }
}

TEST_CASE("model kind mismatches are rejected") {
    auto gen1 = model1_instance(14);
    auto gen2 = model2_instance(15);
    AgentConfig cfg;
    cfg.episodes = 4;
    CHECK_THROWS_AS(run_algorithm2(gen1.instance, gen1.transition_class, gen2.reward_class, cfg),
                    InvalidInstance);
    CHECK_THROWS_AS(run_algorithm1(gen2.instance, gen2.transition_class, cfg), InvalidInstance);
}
