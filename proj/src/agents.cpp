#include "cmdp/agents.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cmdp/oracles.hpp"
#include "cmdp/planner.hpp"
#include "cmdp/reachability.hpp"
#include "cmdp/simulate.hpp"

namespace cmdp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::size_t ridx(const Dims& D, int w, int h, int s, int a) {
    return ((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a;
}
inline std::size_t pidx(const Dims& D, int w, int h, int s, int a) {
    return ridx(D, w, h, s, a) * D.num_states;
}

/// Optimistic MDP tables for one episode, instance layout so the planner can
/// slice per context.
struct OptimisticTables {
    std::vector<double> P_hat;
    std::vector<double> r_opt; // f + b + c
    std::vector<double> f_hat;
    std::vector<double> b_val;
    std::vector<double> c_val;

    void resize(const Dims& D) {
        const std::size_t n = std::size_t(D.num_contexts) * D.horizon * D.num_states * D.num_actions;
        P_hat.resize(n * D.num_states);
        r_opt.resize(n);
        f_hat.resize(n);
        b_val.resize(n);
        c_val.resize(n);
    }
};

struct Shared {
    const InstanceSpec& inst;
    std::vector<double> vstar;   // per context, at (h=0, s1)
    double true_optimal = 0.0;   // E_w[V*]

    explicit Shared(const InstanceSpec& instance) : inst(instance) {
        const Dims& D = inst.dims;
        vstar.resize(D.num_contexts);
        for (int w = 0; w < D.num_contexts; ++w) {
            auto plan = optimal_plan(inst.p_slice(w), inst.r_slice(w), D.horizon, D.num_states,
                                     D.num_actions);
            vstar[w] = plan.values.v(0, inst.initial_state);
            true_optimal += inst.context_space.q[w] * vstar[w];
        }
    }

    double gap(const TabularPolicy& policy) const {
        const Dims& D = inst.dims;
        double g = 0.0;
        for (int w = 0; w < D.num_contexts; ++w) {
            const double qw = inst.context_space.q[w];
            if (qw == 0.0) continue;
            auto values = evaluate_policy(inst.p_slice(w), inst.r_slice(w), policy_slice(policy, w),
                                          D.horizon, D.num_states, D.num_actions);
            g += qw * (vstar[w] - values.v(0, inst.initial_state));
        }
        assert(g >= -1e-10);
        return g;
    }
};

/// Greedy truncated plan for every context; returns the policy and
/// E_w[planned value at s1].
double plan_all_contexts(const Dims& D, const InstanceSpec& inst, const OptimisticTables& tables,
                         double cap, TabularPolicy& policy) {
    const std::size_t ctx_plen = std::size_t(D.horizon) * D.num_states * D.num_actions * D.num_states;
    const std::size_t ctx_rlen = std::size_t(D.horizon) * D.num_states * D.num_actions;
    double value = 0.0;
    for (int w = 0; w < D.num_contexts; ++w) {
        std::span<const double> P{tables.P_hat.data() + w * ctx_plen, ctx_plen};
        std::span<const double> r{tables.r_opt.data() + w * ctx_rlen, ctx_rlen};
        auto plan = truncated_plan(P, r, D.horizon, D.num_states, D.num_actions, cap);
        std::copy(plan.action.begin(), plan.action.end(),
                  policy.action.begin() + std::size_t(w) * D.horizon * D.num_states);
        value += inst.context_space.q[w] * plan.values.v(0, inst.initial_state);
    }
    return value;
}

/// Inline Remark-1 style check: do the bonuses cover the realized estimation
/// errors pointwise? Transition half via the uncapped value of (P_hat, true r)
/// under the episode's policy; reward half via |f_hat - r| vs c.
bool coverage_violated_now(const InstanceSpec& inst, const OptimisticTables& tables,
                           const TabularPolicy& policy) {
    const Dims& D = inst.dims;
    const std::size_t ctx_plen = std::size_t(D.horizon) * D.num_states * D.num_actions * D.num_states;
    double worst = -std::numeric_limits<double>::infinity();
    for (int w = 0; w < D.num_contexts; ++w) {
        std::span<const double> P_hat{tables.P_hat.data() + w * ctx_plen, ctx_plen};
        auto values = evaluate_policy(P_hat, inst.r_slice(w), policy_slice(policy, w), D.horizon,
                                      D.num_states, D.num_actions);
        for (int h = 0; h < D.horizon; ++h)
            for (int s = 0; s < D.num_states; ++s)
                for (int a = 0; a < D.num_actions; ++a) {
                    double drift = 0.0;
                    auto row_true = inst.p_row(w, h, s, a);
                    const double* row_hat = tables.P_hat.data() + pidx(D, w, h, s, a);
                    for (int s2 = 0; s2 < D.num_states; ++s2)
                        drift += (row_true[s2] - row_hat[s2]) * values.v(h + 1, s2);
                    const std::size_t i = ridx(D, w, h, s, a);
                    worst = std::max(worst, std::abs(drift) - tables.b_val[i]);
                    worst = std::max(worst,
                                     std::abs(tables.f_hat[i] - inst.reward(w, h, s, a)) -
                                         tables.c_val[i]);
                }
    }
    return worst > 1e-9;
}

bool want_snapshot(const AgentConfig& config, int n) {
    return std::find(config.snapshot_episodes.begin(), config.snapshot_episodes.end(), n) !=
           config.snapshot_episodes.end();
}

} // namespace

TabularPolicy random_policy(const Dims& dims, Rng& rng) {
    TabularPolicy policy(dims.num_contexts, dims.horizon, dims.num_states);
    if (dims.num_actions <= 1) return policy;
    for (int& a : policy.action) a = int(rng.next_uint(dims.num_actions));
    return policy;
}

RunLog run_algorithm1(const InstanceSpec& inst, const TransitionModelClass& psi1,
                      const AgentConfig& config) {
    if (inst.kind() != ModelKind::ModelI) throw InvalidInstance("run_algorithm1 needs a Model I instance");
    if (config.episodes < 1) throw InvalidInstance("episodes must be >= 1");
    const Dims& D = inst.dims;
    const int H = D.horizon, S = D.num_states, A = D.num_actions, W = D.num_contexts;
    const int N = config.episodes;

    BonusParams bp;
    bp.gamma1 = config.gamma1;
    bp.gamma2 = config.gamma2;
    bp.delta = config.delta;
    bp.psi1_size = int(psi1.candidates.size());
    bp.horizon = H;
    bp.feat_dim = D.feat_dim;
    bp.num_actions = A;
    bp.planned_episodes = N;
    bp.bonus_scale = config.bonus_scale;

    Shared shared(inst);
    Rng rng(config.seed);
    MleScorer scorer(inst.features, psi1, D);
    ReplayBuffer buffer(H);
    std::vector<CovarianceAccumulator> phi_acc(H, CovarianceAccumulator(D.feat_dim));
    std::vector<CovarianceAccumulator> psi_acc(H, CovarianceAccumulator(D.feat_dim));
    std::vector<Eigen::VectorXd> psi_r_sum(H, Eigen::VectorXd::Zero(D.feat_dim));

    RunLog out;
    out.model_kind = ModelKind::ModelI;
    out.seed = config.seed;
    out.episodes = N;
    out.horizon = H;
    out.true_optimal_value = shared.true_optimal;
    out.bonus_params = bp;
    out.log.reserve(N);
    out.policies.reserve(N);

    OptimisticTables tables;
    tables.resize(D);
    std::vector<std::vector<double>> eta_hat(H, std::vector<double>(D.feat_dim, 0.0));
    std::vector<int> mu_idx(H, 0);
    double gap_sum = 0.0;

    for (int n = 1; n <= N; ++n) {
        EpisodeRecord rec;
        rec.episode = n;
        rec.context = sample_context(inst.context_space, rng);

        TabularPolicy policy(W, H, S);
        if (n == 1) {
            policy = random_policy(D, rng);
            rec.optimistic_value = kNaN;
        } else {
            ScheduleModel1 sched = schedule_model1(bp, n);
            if (config.oracle_mode) {
                sched.alpha_n = 0.0;
                sched.beta_n = 0.0;
            }
            for (int h = 0; h < H; ++h) {
                if (config.oracle_mode) {
                    auto truth = inst.weights.eta.at(h, 0);
                    eta_hat[h].assign(truth.begin(), truth.end());
                    mu_idx[h] = psi1.true_index;
                } else {
                    Eigen::MatrixXd M = psi_acc[h].gram();
                    M.diagonal().array() += sched.xi_n;
                    Eigen::VectorXd eta = M.llt().solve(psi_r_sum[h]);
                    eta_hat[h].assign(eta.data(), eta.data() + D.feat_dim);
                    mu_idx[h] = scorer.argmax(h);
                }
            }
            if (want_snapshot(config, n)) {
                RunSnapshot snap;
                snap.n = n;
                snap.mle_index = mu_idx;
                snap.eta_hat = eta_hat;
                snap.phi_acc = phi_acc;
                snap.psi_acc = psi_acc;
                snap.lambda_n = sched.lambda_n;
                snap.xi_n = sched.xi_n;
                snap.alpha_n = sched.alpha_n;
                snap.beta_n = sched.beta_n;
                out.snapshots.push_back(std::move(snap));
            }
            for (int h = 0; h < H; ++h) {
                auto phi_solver = phi_acc[h].solver(sched.lambda_n);
                auto psi_solver = psi_acc[h].solver(sched.xi_n);
                auto cand = scorer.candidate_table(mu_idx[h]);
                for (int w = 0; w < W; ++w) {
                    std::copy_n(cand.data() + pidx(D, w, h, 0, 0), std::size_t(S) * A * S,
                                tables.P_hat.data() + pidx(D, w, h, 0, 0));
                    for (int s = 0; s < S; ++s)
                        for (int a = 0; a < A; ++a) {
                            auto phi = inst.features.phi_at(h, s, a, w);
                            auto psi = inst.features.psi_at(h, s, a, w);
                            const std::size_t i = ridx(D, w, h, s, a);
                            tables.f_hat[i] = clip_reward(dot(eta_hat[h], psi));
                            tables.b_val[i] = norm_bonus(phi_solver.quad_form(phi), sched.alpha_n, H);
                            tables.c_val[i] = norm_bonus(psi_solver.quad_form(psi), sched.beta_n, 1.0);
                            tables.r_opt[i] = tables.f_hat[i] + tables.b_val[i] + tables.c_val[i];
                            assert(tables.r_opt[i] >= 0.0 && tables.r_opt[i] <= H + 2.0 + 1e-9);
                        }
                }
            }
            rec.optimistic_value = plan_all_contexts(D, inst, tables, 3.0 * H, policy);
            rec.optimism_violated = shared.true_optimal > rec.optimistic_value + 1e-9;
            if (config.diagnostics_every > 0 && n % config.diagnostics_every == 0)
                rec.coverage_violated = coverage_violated_now(inst, tables, policy);
        }

        Trajectory traj = sample_episode(inst, rec.context, policy, rng);
        rec.env_steps = 1 + H;
        out.total_env_steps += rec.env_steps;

        double tb = 0.0, rb = 0.0;
        for (int h = 0; h < H; ++h) {
            const TrajectoryStep& st = traj.steps[h];
            if (n > 1) {
                const std::size_t i = ridx(D, rec.context, h, st.s, st.a);
                tb += tables.b_val[i];
                rb += tables.c_val[i];
            }
            ReplayRecord r{st.s, st.a, st.s_next, st.r, rec.context};
            buffer.append(h, r);
            scorer.add_record(h, r);
            auto phi = inst.features.phi_at(h, st.s, st.a, rec.context);
            auto psi = inst.features.psi_at(h, st.s, st.a, rec.context);
            phi_acc[h].update(phi);
            psi_acc[h].update(psi);
            psi_r_sum[h] += Eigen::Map<const Eigen::VectorXd>(psi.data(), D.feat_dim) * st.r;
        }
        rec.mean_tbonus = tb / H;
        rec.mean_rbonus = rb / H;
        rec.mle_correct = n > 1;
        for (int h = 0; h < H && rec.mle_correct; ++h)
            rec.mle_correct = mu_idx[h] == psi1.true_index;

        rec.gap = shared.gap(policy);
        gap_sum += rec.gap;
        rec.avg_gap = gap_sum / n;

        out.policies.push_back(std::move(policy));
        out.log.push_back(rec);
    }
    for (int h = 0; h < H; ++h) assert(int(buffer.count(h)) == N);
    return out;
}

RunLog run_algorithm2(const InstanceSpec& inst, const TransitionModelClass& psi2,
                      const RewardModelClass& psi3, const AgentConfig& config) {
    if (inst.kind() != ModelKind::ModelII)
        throw InvalidInstance("run_algorithm2 needs a Model II instance");
    if (config.episodes < 1) throw InvalidInstance("episodes must be >= 1");
    const Dims& D = inst.dims;
    const int H = D.horizon, S = D.num_states, A = D.num_actions, W = D.num_contexts;
    const int N = config.episodes;

    const ReachabilityBounds reach = compute_pmin_pmax(inst);
    if (reach.p_min <= 0.0)
        std::fprintf(stderr,
                     "warning: instance has p_min = 0; the reachability assumption fails and the "
                     "Model II bonuses degenerate\n");
    BonusParams bp;
    bp.gamma1 = config.gamma1;
    bp.gamma2 = config.gamma2;
    bp.delta = config.delta;
    bp.psi2_size = int(psi2.candidates.size());
    bp.psi3_size = int(psi3.candidates.size());
    bp.horizon = H;
    bp.feat_dim = D.feat_dim;
    bp.num_actions = A;
    bp.planned_episodes = N;
    bp.bonus_scale = config.bonus_scale;
    const double ratio = reach.p_max / reach.p_min;
    bp.C = config.c_convention == CConvention::SqrtRatio ? std::sqrt(ratio) : ratio;

    Shared shared(inst);
    Rng rng(config.seed);
    MleScorer mle(inst.features, psi2, D);
    LsrScorer lsr(inst.features, psi3, D);
    ReplayBuffer buffer(H);
    std::vector<CovarianceAccumulator> phi_acc(H, CovarianceAccumulator(D.feat_dim));
    std::vector<CovarianceAccumulator> psi_acc(H, CovarianceAccumulator(D.feat_dim));

    RunLog out;
    out.model_kind = ModelKind::ModelII;
    out.seed = config.seed;
    out.episodes = N;
    out.horizon = H;
    out.true_optimal_value = shared.true_optimal;
    out.bonus_params = bp;
    out.log.reserve(N);
    out.policies.reserve(N);

    OptimisticTables tables;
    tables.resize(D);
    std::vector<int> mu_idx(H, 0), eta_idx(H, 0);
    double gap_sum = 0.0;

    for (int n = 1; n <= N; ++n) {
        EpisodeRecord rec;
        rec.episode = n;
        rec.context = sample_context(inst.context_space, rng);

        TabularPolicy policy(W, H, S);
        if (n == 1) {
            policy = random_policy(D, rng);
            rec.optimistic_value = kNaN;
        } else {
            ScheduleModel2 sched = schedule_model2(bp, n);
            if (config.oracle_mode) {
                sched.alpha_tilde = 0.0;
                sched.beta_tilde = 0.0;
            }
            for (int h = 0; h < H; ++h) {
                mu_idx[h] = config.oracle_mode ? psi2.true_index : mle.argmax(h);
                eta_idx[h] = config.oracle_mode ? psi3.true_index : lsr.argmin(h);
            }
            if (want_snapshot(config, n)) {
                RunSnapshot snap;
                snap.n = n;
                snap.mle_index = mu_idx;
                snap.lsr_index = eta_idx;
                snap.phi_acc = phi_acc;
                snap.psi_acc = psi_acc;
                snap.lambda_n = sched.lambda_n;
                snap.xi_n = sched.xi_n;
                snap.alpha_n = sched.alpha_tilde;
                snap.beta_n = sched.beta_tilde;
                out.snapshots.push_back(std::move(snap));
            }
            for (int h = 0; h < H; ++h) {
                auto phi_solver = phi_acc[h].solver(sched.lambda_n);
                auto psi_solver = psi_acc[h].solver(sched.xi_n);
                auto p_cand = mle.candidate_table(mu_idx[h]);
                auto r_cand = lsr.candidate_table(eta_idx[h]);
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < A; ++a) {
                        // features are context-independent in Model II
                        auto phi = inst.features.phi_at(h, s, a, 0);
                        auto psi = inst.features.psi_at(h, s, a, 0);
                        const double b = sqnorm_bonus(phi_solver.quad_form(phi), sched.alpha_tilde, H);
                        const double c = sqnorm_bonus(psi_solver.quad_form(psi), sched.beta_tilde, 1.0);
                        for (int w = 0; w < W; ++w) {
                            const std::size_t i = ridx(D, w, h, s, a);
                            tables.f_hat[i] = r_cand[i];
                            tables.b_val[i] = b;
                            tables.c_val[i] = c;
                            tables.r_opt[i] = tables.f_hat[i] + b + c;
                            assert(tables.r_opt[i] >= 0.0 && tables.r_opt[i] <= H + 2.0 + 1e-9);
                        }
                    }
                for (int w = 0; w < W; ++w)
                    std::copy_n(p_cand.data() + pidx(D, w, h, 0, 0), std::size_t(S) * A * S,
                                tables.P_hat.data() + pidx(D, w, h, 0, 0));
            }
            rec.optimistic_value = plan_all_contexts(D, inst, tables, 3.0 * H, policy);
            // additive optimism slack from the Model II analysis
            const double zeta_n = std::log(2.0 * bp.psi2_size * n * H / bp.delta);
            const double zeta_prime_n = std::log(2.0 * bp.psi3_size * n * H / bp.delta);
            rec.optimism_slack = double(H) * H * std::sqrt(double(A)) /
                                 (2.0 * bp.C * std::sqrt(double(D.feat_dim) * double(N))) *
                                 (2.0 * sched.xi_n * D.feat_dim + bp.C * bp.C * zeta_prime_n +
                                  2.0 * sched.lambda_n * D.feat_dim + 4.0 * bp.C * bp.C * zeta_n);
            rec.optimism_violated =
                shared.true_optimal > rec.optimistic_value + rec.optimism_slack + 1e-9;
        }

        // Data collection: one fresh roll-in per target step; follow the
        // planned policy up to it, act uniformly there, keep only that tuple.
        double tb = 0.0, rb = 0.0;
        for (int h = 0; h < H; ++h) {
            int s = inst.initial_state;
            rec.env_steps += 1; // reset
            for (int t = 0; t < h; ++t) {
                int a = policy.at(rec.context, t, s);
                s = rng.sample_categorical(inst.p_row(rec.context, t, s, a));
                rec.env_steps += 1;
            }
            const int a = int(rng.next_uint(A));
            const double reward = inst.reward(rec.context, h, s, a);
            const int s_next = rng.sample_categorical(inst.p_row(rec.context, h, s, a));
            rec.env_steps += 1;
            if (n > 1) {
                const std::size_t i = ridx(D, rec.context, h, s, a);
                tb += tables.b_val[i];
                rb += tables.c_val[i];
            }
            ReplayRecord r{s, a, s_next, reward, rec.context};
            buffer.append(h, r);
            mle.add_record(h, r);
            lsr.add_record(h, r);
            phi_acc[h].update(inst.features.phi_at(h, s, a, 0));
            psi_acc[h].update(inst.features.psi_at(h, s, a, 0));
        }
        out.total_env_steps += rec.env_steps;
        assert(rec.env_steps == H + H * (H + 1) / 2);
        rec.mean_tbonus = tb / H;
        rec.mean_rbonus = rb / H;
        rec.mle_correct = n > 1;
        rec.lsr_correct = n > 1;
        for (int h = 0; h < H; ++h) {
            rec.mle_correct = rec.mle_correct && mu_idx[h] == psi2.true_index;
            rec.lsr_correct = rec.lsr_correct && eta_idx[h] == psi3.true_index;
        }

        rec.gap = shared.gap(policy);
        gap_sum += rec.gap;
        rec.avg_gap = gap_sum / n;

        out.policies.push_back(std::move(policy));
        out.log.push_back(rec);
    }
    for (int h = 0; h < H; ++h) assert(int(buffer.count(h)) == N);
    assert(out.total_env_steps == (long long)(N) * (H * (H + 1) / 2 + H));
    return out;
}

} // namespace cmdp
