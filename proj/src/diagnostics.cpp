#include "cmdp/diagnostics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "cmdp/oracles.hpp"
#include "cmdp/planner.hpp"
#include "cmdp/simulate.hpp"

namespace cmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::size_t p_base(const Dims& D, int w, int h, int s, int a) {
    return (((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a) *
           D.num_states;
}
inline std::size_t r_base(const Dims& D, int w, int h, int s, int a) {
    return ((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a;
}

/// Random small dims within the deterministic-suite envelope
/// (|S|<=6, K<=3, H<=5, d<=4).
Dims random_small_dims(Rng& rng) {
    Dims dims;
    dims.num_states = 2 + int(rng.next_uint(5));
    dims.num_actions = 1 + int(rng.next_uint(3));
    dims.horizon = 1 + int(rng.next_uint(5));
    dims.num_contexts = 1 + int(rng.next_uint(3));
    dims.feat_dim = 1 + int(rng.next_uint(std::min(4, dims.num_states * dims.num_actions)));
    return dims;
}

/// Keep whichever report has the larger excess over its bound.
void keep_worst(CheckReport& agg, const CheckReport& candidate) {
    if (agg.name.empty() || candidate.measured - candidate.bound > agg.measured - agg.bound)
        agg = candidate;
    agg.passed = agg.passed && candidate.passed;
}

struct OccupancyCache {
    const InstanceSpec& inst;
    std::span<const TabularPolicy> policies;
    std::vector<std::vector<OccupancyTable>> tables; // [tau][w]

    OccupancyCache(const InstanceSpec& instance, std::span<const TabularPolicy> past)
        : inst(instance), policies(past) {
        const Dims& D = inst.dims;
        tables.resize(past.size());
        for (std::size_t tau = 0; tau < past.size(); ++tau) {
            tables[tau].reserve(D.num_contexts);
            for (int w = 0; w < D.num_contexts; ++w)
                tables[tau].push_back(occupancy(inst.p_slice(w), policy_slice(past[tau], w),
                                                D.horizon, D.num_states, D.num_actions,
                                                inst.initial_state));
        }
    }
};

} // namespace

CheckReport make_check(std::string name, double measured, double bound, double tol, int n, int h,
                       std::uint64_t seed) {
    CheckReport rep;
    rep.name = std::move(name);
    rep.measured = measured;
    rep.bound = bound;
    rep.passed = measured <= bound + tol;
    rep.n = n;
    rep.h = h;
    rep.seed = seed;
    return rep;
}

CheckReport check_simulation_lemma(std::span<const double> P1, std::span<const double> r1,
                                   std::span<const double> P2, std::span<const double> r2,
                                   std::span<const int> policy, int H, int S, int A,
                                   int initial_state) {
    const auto V1 = evaluate_policy(P1, r1, policy, H, S, A);
    const auto V2 = evaluate_policy(P2, r2, policy, H, S, A);
    const auto occ1 = occupancy(P1, policy, H, S, A, initial_state);
    const auto occ2 = occupancy(P2, policy, H, S, A, initial_state);
    const double direct = V1.v(0, initial_state) - V2.v(0, initial_state);

    const auto expansion = [&](const OccupancyTable& occ, const ValueTable& boot) {
        double total = 0.0;
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double mass = occ.state_action(h, s, a);
                    if (mass == 0.0) continue;
                    const std::size_t q = (std::size_t(h) * S + s) * A + a;
                    double term = r1[q] - r2[q];
                    for (int s2 = 0; s2 < S; ++s2)
                        term += (P1[q * S + s2] - P2[q * S + s2]) * boot.v(h + 1, s2);
                    total += mass * term;
                }
        return total;
    };
    const double form_a = expansion(occ2, V1); // states from (P2, pi), bootstrap V1
    const double form_b = expansion(occ1, V2); // states from (P1, pi), bootstrap V2
    const double measured = std::max({std::abs(direct - form_a), std::abs(direct - form_b),
                                      std::abs(form_a - form_b)});
    return make_check("simulation_lemma", measured, 0.0);
}

CheckReport check_elliptical_potential(const std::vector<std::vector<double>>& stream,
                                       double lambda0, int dim) {
    Eigen::MatrixXd M = lambda0 * Eigen::MatrixXd::Identity(dim, dim);
    double measured = 0.0;
    for (const auto& x : stream) {
        Eigen::Map<const Eigen::VectorXd> v(x.data(), dim);
        assert(v.squaredNorm() <= 1.0 + 1e-12);
        measured += v.dot(M.llt().solve(v));
        M.noalias() += v * v.transpose();
    }
    const double N = double(stream.size());
    const double bound = 2.0 * dim * std::log(1.0 + N / (dim * lambda0));
    return make_check("elliptical_potential", measured, bound);
}

CheckReport check_mle_guarantee(const InstanceSpec& inst,
                                std::span<const TabularPolicy> past_policies,
                                const MuTable& selected, int n, int h, double delta, int class_size,
                                bool uniform_actions) {
    const Dims& D = inst.dims;
    assert(int(past_policies.size()) >= n - 1);
    const auto table = tabulate_transitions(inst.features, selected, D);
    double measured = 0.0;
    for (int tau = 0; tau < n - 1; ++tau) {
        const TabularPolicy& pi = past_policies[tau];
        for (int w = 0; w < D.num_contexts; ++w) {
            const double qw = inst.context_space.q[w];
            if (qw == 0.0) continue;
            const auto occ = occupancy(inst.p_slice(w), policy_slice(pi, w), D.horizon,
                                       D.num_states, D.num_actions, inst.initial_state);
            for (int s = 0; s < D.num_states; ++s) {
                const double mass = occ.state(h, s);
                if (mass == 0.0) continue;
                if (uniform_actions) {
                    for (int a = 0; a < D.num_actions; ++a) {
                        const double tv = tv_distance(
                            inst.p_row(w, h, s, a),
                            {table.data() + p_base(D, w, h, s, a), std::size_t(D.num_states)});
                        measured += qw * mass / D.num_actions * tv * tv;
                    }
                } else {
                    const int a = pi.at(w, h, s);
                    const double tv = tv_distance(
                        inst.p_row(w, h, s, a),
                        {table.data() + p_base(D, w, h, s, a), std::size_t(D.num_states)});
                    measured += qw * mass * tv * tv;
                }
            }
        }
    }
    const double bound = std::log(2.0 * class_size * n * D.horizon / delta);
    return make_check("mle_guarantee", measured, bound, 1e-9, n, h);
}

CheckReport check_lsr_guarantee(const InstanceSpec& inst,
                                std::span<const TabularPolicy> past_policies,
                                const EtaTable& selected, int n, int h, double delta,
                                int class_size) {
    const Dims& D = inst.dims;
    assert(int(past_policies.size()) >= n - 1);
    double measured = 0.0;
    for (int tau = 0; tau < n - 1; ++tau) {
        const TabularPolicy& pi = past_policies[tau];
        for (int w = 0; w < D.num_contexts; ++w) {
            const double qw = inst.context_space.q[w];
            if (qw == 0.0) continue;
            const auto occ = occupancy(inst.p_slice(w), policy_slice(pi, w), D.horizon,
                                       D.num_states, D.num_actions, inst.initial_state);
            for (int s = 0; s < D.num_states; ++s) {
                const double mass = occ.state(h, s);
                if (mass == 0.0) continue;
                for (int a = 0; a < D.num_actions; ++a) {
                    auto psi = inst.features.psi_at(h, s, a, w);
                    const double diff =
                        dot(psi, selected.at(h, w)) - dot(psi, inst.weights.eta.at(h, w));
                    measured += qw * mass / D.num_actions * diff * diff;
                }
            }
        }
    }
    const double bound = std::log(2.0 * class_size * n * D.horizon / delta);
    return make_check("lsr_guarantee", measured, bound, 1e-9, n, h);
}

CoverageReport check_pointwise_coverage_model1(const InstanceSpec& inst,
                                               const TransitionModelClass& psi1,
                                               const RunSnapshot& snap,
                                               const TabularPolicy& policy_n) {
    const Dims& D = inst.dims;
    const int H = D.horizon, S = D.num_states, A = D.num_actions, W = D.num_contexts;

    std::map<int, std::vector<double>> candidate_tables;
    for (int h = 0; h < H; ++h)
        if (!candidate_tables.count(snap.mle_index[h]))
            candidate_tables[snap.mle_index[h]] =
                tabulate_transitions(inst.features, psi1.candidates[snap.mle_index[h]], D);

    std::vector<double> P_hat(inst.P.size());
    for (int w = 0; w < W; ++w)
        for (int h = 0; h < H; ++h) {
            const auto& table = candidate_tables.at(snap.mle_index[h]);
            std::copy_n(table.data() + p_base(D, w, h, 0, 0), std::size_t(S) * A * S,
                        P_hat.data() + p_base(D, w, h, 0, 0));
        }

    std::vector<CovarianceAccumulator::Solver> phi_solvers, psi_solvers;
    for (int h = 0; h < H; ++h) {
        phi_solvers.push_back(snap.phi_acc[h].solver(snap.lambda_n));
        psi_solvers.push_back(snap.psi_acc[h].solver(snap.xi_n));
    }

    const std::size_t ctx_plen = std::size_t(H) * S * A * S;
    double worst_t = -kInf, worst_r = -kInf;
    for (int w = 0; w < W; ++w) {
        std::span<const double> P_hat_w{P_hat.data() + w * ctx_plen, ctx_plen};
        const auto values = evaluate_policy(P_hat_w, inst.r_slice(w), policy_slice(policy_n, w), H,
                                            S, A); // true rewards, estimated kernel, in [0, H]
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    auto phi = inst.features.phi_at(h, s, a, w);
                    auto psi = inst.features.psi_at(h, s, a, w);
                    double drift = 0.0;
                    const double* row_true = inst.P.data() + p_base(D, w, h, s, a);
                    const double* row_hat = P_hat.data() + p_base(D, w, h, s, a);
                    for (int s2 = 0; s2 < S; ++s2)
                        drift += (row_true[s2] - row_hat[s2]) * values.v(h + 1, s2);
                    const double b = norm_bonus(phi_solvers[h].quad_form(phi), snap.alpha_n, H);
                    worst_t = std::max(worst_t, std::abs(drift) - b);

                    const double pred = dot(snap.eta_hat[h], psi);
                    const double quad = psi_solvers[h].quad_form(psi);
                    const double c = norm_bonus(quad, snap.beta_n, 1.0);
                    const double truth = inst.reward(w, h, s, a);
                    worst_r = std::max(worst_r, std::abs(clip_reward(pred) - truth) - c);
                    const double raw_gap = std::abs(pred - dot(inst.weights.eta.at(h, 0), psi));
                    worst_r = std::max(worst_r, raw_gap - snap.beta_n * std::sqrt(quad));
                }
    }
    CoverageReport rep;
    rep.transition = make_check("transition_coverage", worst_t, 0.0, 1e-9, snap.n);
    rep.reward = make_check("reward_coverage", worst_r, 0.0, 1e-9, snap.n);
    return rep;
}

CheckReport check_concentration_event(const InstanceSpec& inst,
                                      std::span<const TabularPolicy> past_policies,
                                      const RunSnapshot& snap, int n, int h, bool uniform_actions) {
    const Dims& D = inst.dims;
    const int d = D.feat_dim;
    Eigen::MatrixXd expected_phi = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd expected_psi = Eigen::MatrixXd::Zero(d, d);
    const auto add_outer = [&](Eigen::MatrixXd& M, std::span<const double> x, double weight) {
        Eigen::Map<const Eigen::VectorXd> v(x.data(), d);
        M.noalias() += weight * v * v.transpose();
    };
    for (int tau = 0; tau < n - 1; ++tau) {
        const TabularPolicy& pi = past_policies[tau];
        for (int w = 0; w < D.num_contexts; ++w) {
            const double qw = inst.context_space.q[w];
            if (qw == 0.0) continue;
            const auto occ = occupancy(inst.p_slice(w), policy_slice(pi, w), D.horizon,
                                       D.num_states, D.num_actions, inst.initial_state);
            for (int s = 0; s < D.num_states; ++s) {
                const double mass = occ.state(h, s);
                if (mass == 0.0) continue;
                if (uniform_actions) {
                    for (int a = 0; a < D.num_actions; ++a) {
                        const double weight = qw * mass / D.num_actions;
                        add_outer(expected_phi, inst.features.phi_at(h, s, a, w), weight);
                        add_outer(expected_psi, inst.features.psi_at(h, s, a, w), weight);
                    }
                } else {
                    const int a = pi.at(w, h, s);
                    add_outer(expected_phi, inst.features.phi_at(h, s, a, w), qw * mass);
                    add_outer(expected_psi, inst.features.psi_at(h, s, a, w), qw * mass);
                }
            }
        }
    }
    CovarianceAccumulator::Solver exp_phi(expected_phi, snap.lambda_n);
    CovarianceAccumulator::Solver exp_psi(expected_psi, snap.xi_n);
    auto emp_phi = snap.phi_acc[h].solver(snap.lambda_n);
    auto emp_psi = snap.psi_acc[h].solver(snap.xi_n);

    const int contexts = inst.kind() == ModelKind::ModelI ? D.num_contexts : 1;
    double worst = -kInf;
    const auto probe = [&](const CovarianceAccumulator::Solver& emp,
                           const CovarianceAccumulator::Solver& exp,
                           std::span<const double> x) {
        const double q_emp = emp.quad_form(x);
        const double q_exp = exp.quad_form(x);
        if (q_exp <= 0.0) return;
        const double ratio = std::sqrt(q_emp) / std::sqrt(q_exp);
        worst = std::max({worst, ratio - 3.0, 0.2 - ratio});
    };
    for (int w = 0; w < contexts; ++w)
        for (int s = 0; s < D.num_states; ++s)
            for (int a = 0; a < D.num_actions; ++a) {
                probe(emp_phi, exp_phi, inst.features.phi_at(h, s, a, w));
                probe(emp_psi, exp_psi, inst.features.psi_at(h, s, a, w));
            }
    return make_check("concentration", worst, 0.0, 1e-9, n, h);
}

std::vector<CheckReport> check_truncation_lemmas(std::uint64_t seed, int trials) {
    CheckReport d1, d2, d3, d4;
    d1.passed = d2.passed = d3.passed = d4.passed = true;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed, 5000 + std::uint64_t(t));
        Dims dims = random_small_dims(rng);
        const int H = dims.horizon, S = dims.num_states, A = dims.num_actions;
        const auto A_gen = generate_instance(rng.next_u64(), dims, ModelKind::ModelI, 1, 0.0);
        const auto B_gen = generate_instance(rng.next_u64(), dims, ModelKind::ModelI, 1, 0.0);
        const TabularPolicy pi = random_policy(dims, rng);
        const int w = int(rng.next_uint(dims.num_contexts));
        auto P1 = A_gen.instance.p_slice(w);
        auto P2 = B_gen.instance.p_slice(w);
        auto pol = policy_slice(pi, w);
        const std::size_t rlen = std::size_t(H) * S * A;
        std::vector<double> r1(A_gen.instance.r_slice(w).begin(), A_gen.instance.r_slice(w).end());
        std::vector<double> r2(B_gen.instance.r_slice(w).begin(), B_gen.instance.r_slice(w).end());
        std::vector<double> r3(rlen), rsum(rlen), rbig(rlen);
        for (std::size_t i = 0; i < rlen; ++i) {
            r3[i] = 0.9 * r1[i] + 1.7 * r2[i];
            rsum[i] = r1[i] + r2[i] + r3[i];
            rbig[i] = 2.2 * r1[i];
        }

        // D.1: cap H is irrelevant for rewards in [0,1]
        {
            const auto capped = evaluate_policy(P1, r1, pol, H, S, A, double(H));
            const auto plain = evaluate_policy(P1, r1, pol, H, S, A);
            double worst = 0.0;
            for (std::size_t i = 0; i < capped.V.size(); ++i)
                worst = std::max(worst, std::abs(capped.V[i] - plain.V[i]));
            keep_worst(d1, make_check("truncation_d1", worst, 0.0, 1e-12, t, -1, seed));
        }
        // D.2: sum of cap-H values <= cap-3H value of the summed reward
        // D.3: cap-3H value of the summed reward <= sum of cap-3H values
        {
            const auto v1 = evaluate_policy(P1, r1, pol, H, S, A, double(H));
            const auto v2 = evaluate_policy(P1, r2, pol, H, S, A, double(H));
            const auto v3 = evaluate_policy(P1, r3, pol, H, S, A, double(H));
            const auto vs = evaluate_policy(P1, rsum, pol, H, S, A, 3.0 * H);
            const auto t1 = evaluate_policy(P1, r1, pol, H, S, A, 3.0 * H);
            const auto t2 = evaluate_policy(P1, r2, pol, H, S, A, 3.0 * H);
            const auto t3 = evaluate_policy(P1, r3, pol, H, S, A, 3.0 * H);
            double worst2 = -kInf, worst3 = -kInf;
            for (std::size_t i = 0; i < vs.V.size(); ++i) {
                worst2 = std::max(worst2, v1.V[i] + v2.V[i] + v3.V[i] - vs.V[i]);
                worst3 = std::max(worst3, vs.V[i] - (t1.V[i] + t2.V[i] + t3.V[i]));
            }
            keep_worst(d2, make_check("truncation_d2", worst2, 0.0, 1e-9, t, -1, seed));
            keep_worst(d3, make_check("truncation_d3", worst3, 0.0, 1e-9, t, -1, seed));
        }
        // D.4: kernel swap bounded by the value of the constructed drift reward
        {
            const auto vbar = evaluate_policy(P1, rbig, pol, H, S, A, 3.0 * H);
            std::vector<double> g(rlen);
            for (int h = 0; h < H; ++h)
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < A; ++a) {
                        const std::size_t q = (std::size_t(h) * S + s) * A + a;
                        double drift = 0.0;
                        for (int s2 = 0; s2 < S; ++s2)
                            drift += (P1[q * S + s2] - P2[q * S + s2]) * vbar.v(h + 1, s2);
                        g[q] = drift;
                    }
            const auto vplain = evaluate_policy(P2, rbig, pol, H, S, A);
            const auto vg = evaluate_policy(P2, g, pol, H, S, A);
            double worst = -kInf;
            for (std::size_t i = 0; i < vbar.V.size(); ++i)
                worst = std::max(worst, vbar.V[i] - vplain.V[i] - vg.V[i]);
            keep_worst(d4, make_check("truncation_d4", worst, 0.0, 1e-9, t, -1, seed));
        }
    }
    return {d1, d2, d3, d4};
}

CheckReport check_reward_coverage(const InstanceSpec& inst, int episodes, std::uint64_t seed) {
    const Dims& D = inst.dims;
    const int H = D.horizon;
    Rng rng(seed, 77);
    ReplayBuffer buf(H);
    std::vector<CovarianceAccumulator> psi_acc(H, CovarianceAccumulator(D.feat_dim));
    for (int e = 0; e < episodes; ++e) {
        const TabularPolicy pi = random_policy(D, rng);
        const int w = sample_context(inst.context_space, rng);
        const Trajectory traj = sample_episode(inst, w, pi, rng);
        for (int h = 0; h < H; ++h) {
            const auto& st = traj.steps[h];
            buf.append(h, {st.s, st.a, st.s_next, st.r, w});
            psi_acc[h].update(inst.features.psi_at(h, st.s, st.a, w));
        }
    }
    BonusParams params;
    params.horizon = H;
    params.feat_dim = D.feat_dim;
    const ScheduleModel1 sched = schedule_model1(params, episodes + 1);

    double worst = -kInf;
    for (int h = 0; h < H; ++h) {
        const auto eta_hat = ridge_reward_fit(buf.at(h), inst.features, h, sched.xi_n);
        const auto solver = psi_acc[h].solver(sched.xi_n);
        for (int w = 0; w < D.num_contexts; ++w)
            for (int s = 0; s < D.num_states; ++s)
                for (int a = 0; a < D.num_actions; ++a) {
                    auto psi = inst.features.psi_at(h, s, a, w);
                    const double quad = solver.quad_form(psi);
                    const double pred = dot(eta_hat, psi);
                    const double truth = inst.reward(w, h, s, a);
                    const double c = norm_bonus(quad, sched.beta_n, 1.0);
                    worst = std::max(worst, std::abs(clip_reward(pred) - truth) - c);
                    const double raw = std::abs(pred - dot(inst.weights.eta.at(h, 0), psi));
                    worst = std::max(worst, raw - sched.beta_n * std::sqrt(quad));
                }
    }
    return make_check("reward_coverage", worst, 0.0, 1e-9, episodes, -1, seed);
}

std::vector<CheckReport> deterministic_battery(std::uint64_t seed, int trials) {
    CheckReport sim, pot, cov;
    sim.passed = pot.passed = cov.passed = true;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed, std::uint64_t(t));
        Dims dims = random_small_dims(rng);
        const auto A_gen = generate_instance(rng.next_u64(), dims, ModelKind::ModelI, 1, 0.0);
        const auto B_gen = generate_instance(rng.next_u64(), dims, ModelKind::ModelI, 1, 0.0);
        const TabularPolicy pi = random_policy(dims, rng);
        const int w = int(rng.next_uint(dims.num_contexts));

        CheckReport one = check_simulation_lemma(
            A_gen.instance.p_slice(w), A_gen.instance.r_slice(w), B_gen.instance.p_slice(w),
            B_gen.instance.r_slice(w), policy_slice(pi, w), dims.horizon, dims.num_states,
            dims.num_actions, A_gen.instance.initial_state);
        one.n = t;
        one.seed = seed;
        keep_worst(sim, one);

        const int stream_len = 20 + int(rng.next_uint(30));
        std::vector<std::vector<double>> stream;
        stream.reserve(stream_len);
        for (int i = 0; i < stream_len; ++i) {
            auto x = rng.sample_simplex(dims.feat_dim); // norm <= 1
            for (double& v : x)
                if (rng.next_uint(2)) v = -v;
            stream.push_back(std::move(x));
        }
        const double lambda0 = 0.25 + rng.next_double() * 2.0;
        CheckReport p = check_elliptical_potential(stream, lambda0, dims.feat_dim);
        p.n = t;
        p.seed = seed;
        keep_worst(pot, p);

        CheckReport c = check_reward_coverage(A_gen.instance, 3 + int(rng.next_uint(14)),
                                              rng.next_u64());
        c.n = t;
        keep_worst(cov, c);
    }
    std::vector<CheckReport> out{sim, pot, cov};
    for (auto& rep : check_truncation_lemmas(seed ^ 0x7472756e63ULL, trials)) out.push_back(rep);
    return out;
}

ProbabilisticBatteryResult probabilistic_battery(const GeneratedInstance& gen,
                                                 const AgentConfig& base,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::vector<int> checkpoints) {
    const InstanceSpec& inst = gen.instance;
    std::erase_if(checkpoints, [&](int n) { return n < 2 || n > base.episodes; });

    ProbabilisticBatteryResult result;
    result.num_seeds = int(seeds.size());
    result.allowed = int(std::ceil(base.delta * double(seeds.size()))) + 2;

    const bool model1 = inst.kind() == ModelKind::ModelI;
    std::vector<std::string> names =
        model1 ? std::vector<std::string>{"mle_guarantee", "transition_coverage",
                                          "reward_coverage", "concentration"}
               : std::vector<std::string>{"mle_guarantee", "lsr_guarantee"};
    std::vector<int> counts(names.size(), 0);
    const auto name_index = [&](const std::string& name) {
        return std::find(names.begin(), names.end(), name) - names.begin();
    };
    const auto note = [&](std::vector<bool>& violated, const CheckReport& rep) {
        if (!rep.passed) {
            violated[name_index(rep.name)] = true;
            if (result.failures.size() < 16) result.failures.push_back(rep);
        }
    };

    for (std::uint64_t seed : seeds) {
        AgentConfig config = base;
        config.seed = seed;
        config.snapshot_episodes = checkpoints;
        const RunLog log = model1 ? run_algorithm1(inst, gen.transition_class, config)
                                  : run_algorithm2(inst, gen.transition_class, gen.reward_class,
                                                   config);
        std::vector<bool> violated(names.size(), false);
        for (const RunSnapshot& snap : log.snapshots) {
            std::span<const TabularPolicy> past{log.policies.data(), std::size_t(snap.n - 1)};
            for (int h = 0; h < inst.dims.horizon; ++h) {
                CheckReport mle = check_mle_guarantee(
                    inst, past, gen.transition_class.candidates[snap.mle_index[h]], snap.n, h,
                    base.delta, int(gen.transition_class.candidates.size()), !model1);
                mle.seed = seed;
                note(violated, mle);
                if (model1) {
                    CheckReport conc = check_concentration_event(inst, past, snap, snap.n, h, false);
                    conc.seed = seed;
                    note(violated, conc);
                } else {
                    CheckReport lsr = check_lsr_guarantee(
                        inst, past, gen.reward_class.candidates[snap.lsr_index[h]], snap.n, h,
                        base.delta, int(gen.reward_class.candidates.size()));
                    lsr.seed = seed;
                    note(violated, lsr);
                }
            }
            if (model1) {
                CoverageReport cov = check_pointwise_coverage_model1(
                    inst, gen.transition_class, snap, log.policies[snap.n - 1]);
                cov.transition.seed = seed;
                cov.reward.seed = seed;
                note(violated, cov.transition);
                note(violated, cov.reward);
            }
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            if (violated[i]) ++counts[i];
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        result.violating_seeds.emplace_back(names[i], counts[i]);
    return result;
}

} // namespace cmdp
