#include "cmdp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "cmdp/rng.hpp"

namespace cmdp {

namespace {

constexpr double kRowTol = 1e-9;
constexpr double kReconstructTol = 1e-10;
constexpr std::uint64_t kProbeSeed = 0x70726f6265ULL; // fixed: probe set must not vary per instance
constexpr int kRandomProbes = 16;

[[noreturn]] void fail(const char* fmt, int h, int s, int a, int w, double value) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, h, s, a, w, value);
    throw InvalidInstance(buf);
}

double norm2(std::span<const double> x) {
    return std::sqrt(dot(x, x));
}

/// g = 0, g = 1, all indicators, then 16 random [0,1] functions.
std::vector<std::vector<double>> probe_functions(int num_states) {
    std::vector<std::vector<double>> probes;
    probes.emplace_back(num_states, 0.0);
    probes.emplace_back(num_states, 1.0);
    for (int s = 0; s < num_states; ++s) {
        std::vector<double> g(num_states, 0.0);
        g[s] = 1.0;
        probes.push_back(std::move(g));
    }
    Rng rng(kProbeSeed);
    for (int i = 0; i < kRandomProbes; ++i) {
        std::vector<double> g(num_states);
        for (int s = 0; s < num_states; ++s) g[s] = rng.next_double();
        probes.push_back(std::move(g));
    }
    return probes;
}

} // namespace

std::vector<double> tabulate_transitions(const FeatureSpec& features, const MuTable& mu,
                                         const Dims& dims) {
    const int S = dims.num_states, A = dims.num_actions, W = dims.num_contexts, H = dims.horizon;
    std::vector<double> P(std::size_t(W) * H * S * A * S);
    std::size_t idx = 0;
    for (int w = 0; w < W; ++w)
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    auto phi = features.phi_at(h, s, a, w);
                    double row_sum = 0.0;
                    for (int s2 = 0; s2 < S; ++s2) {
                        double p = dot(phi, mu.at(h, s2, w));
                        if (p < -kRowTol)
                            fail("negative transition probability at (h=%d,s=%d,a=%d,w=%d): %g", h,
                                 s, a, w, p);
                        if (p < 0.0) p = 0.0;
                        P[idx + s2] = p;
                        row_sum += p;
                    }
                    if (std::abs(row_sum - 1.0) > kRowTol)
                        fail("transition row at (h=%d,s=%d,a=%d,w=%d) sums to %.12g", h, s, a, w,
                             row_sum);
                    idx += S;
                }
    return P;
}

std::vector<double> tabulate_rewards(const FeatureSpec& features, const EtaTable& eta,
                                     const Dims& dims) {
    const int S = dims.num_states, A = dims.num_actions, W = dims.num_contexts, H = dims.horizon;
    std::vector<double> r(std::size_t(W) * H * S * A);
    std::size_t idx = 0;
    for (int w = 0; w < W; ++w)
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    double v = dot(features.psi_at(h, s, a, w), eta.at(h, w));
                    if (v < -kRowTol || v > 1.0 + kRowTol)
                        fail("reward at (h=%d,s=%d,a=%d,w=%d) outside [0,1]: %g", h, s, a, w, v);
                    r[idx++] = std::min(1.0, std::max(0.0, v));
                }
    return r;
}

InstanceSpec build_tabular(const FeatureSpec& features, const WeightSpec& weights, const Dims& dims,
                           const ContextSpace& context_space) {
    dims.validate();
    context_space.validate();
    if (context_space.size() != dims.num_contexts)
        throw InvalidInstance("context distribution size does not match num_contexts");
    InstanceSpec inst;
    inst.dims = dims;
    inst.context_space = context_space;
    inst.features = features;
    inst.weights = weights;
    inst.P = tabulate_transitions(features, weights.mu, dims);
    inst.r = tabulate_rewards(features, weights.eta, dims);
    return inst;
}

void check_weight_norms(const MuTable& mu) {
    const double bound = std::sqrt(double(mu.d)) + 1e-9;
    const auto probes = probe_functions(mu.S);
    const int contexts = mu.kind == ModelKind::ModelI ? 1 : mu.W;
    std::vector<double> acc(mu.d);
    for (int h = 0; h < mu.H; ++h)
        for (int w = 0; w < contexts; ++w)
            for (const auto& g : probes) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (int s2 = 0; s2 < mu.S; ++s2) {
                    auto row = mu.at(h, s2, w);
                    for (int j = 0; j < mu.d; ++j) acc[j] += row[j] * g[s2];
                }
                if (norm2(acc) > bound)
                    throw InvalidInstance("mu probe norm exceeds sqrt(d)");
            }
}

void check_weight_norms(const EtaTable& eta) {
    const double bound = std::sqrt(double(eta.d)) + 1e-12;
    const int contexts = eta.kind == ModelKind::ModelI ? 1 : eta.W;
    for (int h = 0; h < eta.H; ++h)
        for (int w = 0; w < contexts; ++w)
            if (norm2(eta.at(h, w)) > bound)
                throw InvalidInstance("eta norm exceeds sqrt(d)");
}

void validate_instance(const InstanceSpec& inst) {
    const Dims& D = inst.dims;
    D.validate();
    inst.context_space.validate();
    const int S = D.num_states, A = D.num_actions, W = D.num_contexts, H = D.horizon;
    if (inst.context_space.size() != W) throw InvalidInstance("q size mismatch");
    if (inst.initial_state < 0 || inst.initial_state >= S)
        throw InvalidInstance("initial_state out of range");
    if (inst.P.size() != std::size_t(W) * H * S * A * S || inst.r.size() != std::size_t(W) * H * S * A)
        throw InvalidInstance("table size mismatch");
    if (inst.mix_eps < 0.0 || inst.mix_eps >= 1.0) throw InvalidInstance("mix_eps outside [0,1)");

    const FeatureSpec& F = inst.features;
    for (std::size_t row = 0; row < F.rows(); ++row) {
        std::span<const double> phi{F.phi.data() + row * F.d, std::size_t(F.d)};
        std::span<const double> psi{F.psi.data() + row * F.d, std::size_t(F.d)};
        if (norm2(phi) > 1.0 + 1e-12 || norm2(psi) > 1.0 + 1e-12)
            throw InvalidInstance("feature row norm exceeds 1");
    }
    check_weight_norms(inst.weights.mu);
    check_weight_norms(inst.weights.eta);

    for (int w = 0; w < W; ++w)
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    auto row = inst.p_row(w, h, s, a);
                    double row_sum = 0.0;
                    auto phi = F.phi_at(h, s, a, w);
                    for (int s2 = 0; s2 < S; ++s2) {
                        if (row[s2] < -1e-12) throw InvalidInstance("stored probability < 0");
                        row_sum += row[s2];
                        double v = dot(phi, inst.weights.mu.at(h, s2, w));
                        double expect = v < 0.0 ? 0.0 : v;
                        if (std::abs(row[s2] - expect) > kReconstructTol)
                            throw InvalidInstance("P does not reconstruct from <phi, mu>");
                    }
                    if (std::abs(row_sum - 1.0) > kRowTol)
                        throw InvalidInstance("stored row is not a probability vector");
                    double rv = inst.reward(w, h, s, a);
                    if (rv < -1e-12 || rv > 1.0 + 1e-12)
                        throw InvalidInstance("stored reward outside [0,1]");
                    double v = dot(F.psi_at(h, s, a, w), inst.weights.eta.at(h, w));
                    double expect = std::min(1.0, std::max(0.0, v));
                    if (std::abs(rv - expect) > kReconstructTol)
                        throw InvalidInstance("r does not reconstruct from <psi, eta>");
                }
}

void validate_transition_class(const InstanceSpec& inst, const TransitionModelClass& cls) {
    if (cls.candidates.empty()) throw InvalidInstance("empty transition model class");
    if (cls.true_index < 0 || cls.true_index >= int(cls.candidates.size()))
        throw InvalidInstance("true_index out of range");
    for (const auto& mu : cls.candidates) {
        check_weight_norms(mu);
        tabulate_transitions(inst.features, mu, inst.dims); // throws on an invalid row
    }
    // Assumption: the truth is a member. Compare tables, not object identity.
    const auto truth = tabulate_transitions(inst.features, cls.candidates[cls.true_index], inst.dims);
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (std::abs(truth[i] - inst.P[i]) > kReconstructTol)
            throw InvalidInstance("true transition weights are not in the class at true_index");
}

void validate_reward_class(const InstanceSpec& inst, const RewardModelClass& cls) {
    if (cls.candidates.empty()) throw InvalidInstance("empty reward model class");
    if (cls.true_index < 0 || cls.true_index >= int(cls.candidates.size()))
        throw InvalidInstance("true_index out of range");
    for (const auto& eta : cls.candidates) {
        check_weight_norms(eta);
        tabulate_rewards(inst.features, eta, inst.dims);
    }
    const auto truth = tabulate_rewards(inst.features, cls.candidates[cls.true_index], inst.dims);
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (std::abs(truth[i] - inst.r[i]) > kReconstructTol)
            throw InvalidInstance("true reward weights are not in the class at true_index");
}

nlohmann::ordered_json instance_to_json(const InstanceSpec& inst) {
    nlohmann::ordered_json doc;
    doc["format"] = "cmdp-instance";
    doc["schema_version"] = 1;
    doc["model_kind"] = to_string(inst.kind());
    doc["seed"] = inst.seed;
    doc["mix_eps"] = inst.mix_eps;
    doc["initial_state"] = inst.initial_state;
    doc["dims"] = {{"num_states", inst.dims.num_states},
                   {"num_actions", inst.dims.num_actions},
                   {"num_contexts", inst.dims.num_contexts},
                   {"horizon", inst.dims.horizon},
                   {"feat_dim", inst.dims.feat_dim}};
    doc["q"] = inst.context_space.q;
    doc["phi"] = inst.features.phi;
    doc["psi"] = inst.features.psi;
    doc["mu"] = inst.weights.mu.v;
    doc["eta"] = inst.weights.eta.v;
    return doc;
}

InstanceSpec instance_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "cmdp-instance")
        throw InvalidInstance("not a cmdp-instance document");
    Dims dims;
    dims.num_states = doc.at("dims").at("num_states").get<int>();
    dims.num_actions = doc.at("dims").at("num_actions").get<int>();
    dims.num_contexts = doc.at("dims").at("num_contexts").get<int>();
    dims.horizon = doc.at("dims").at("horizon").get<int>();
    dims.feat_dim = doc.at("dims").at("feat_dim").get<int>();
    const ModelKind kind = model_kind_from_string(doc.at("model_kind").get<std::string>());

    FeatureSpec features;
    features.kind = kind;
    features.d = dims.feat_dim;
    features.H = dims.horizon;
    features.S = dims.num_states;
    features.A = dims.num_actions;
    features.W = dims.num_contexts;
    features.phi = doc.at("phi").get<std::vector<double>>();
    features.psi = doc.at("psi").get<std::vector<double>>();
    const std::size_t want = features.rows() * features.d;
    if (features.phi.size() != want || features.psi.size() != want)
        throw InvalidInstance("feature table size mismatch");

    WeightSpec weights;
    weights.mu = {kind, dims.feat_dim, dims.horizon, dims.num_states, dims.num_contexts,
                  doc.at("mu").get<std::vector<double>>()};
    weights.eta = {kind, dims.feat_dim, dims.horizon, dims.num_contexts,
                   doc.at("eta").get<std::vector<double>>()};
    const std::size_t mu_rows = std::size_t(dims.horizon) * dims.num_states *
                                (kind == ModelKind::ModelI ? 1 : dims.num_contexts);
    const std::size_t eta_rows =
        std::size_t(dims.horizon) * (kind == ModelKind::ModelI ? 1 : dims.num_contexts);
    if (weights.mu.v.size() != mu_rows * dims.feat_dim ||
        weights.eta.v.size() != eta_rows * dims.feat_dim)
        throw InvalidInstance("weight table size mismatch");

    ContextSpace ctx{doc.at("q").get<std::vector<double>>()};
    InstanceSpec inst = build_tabular(features, weights, dims, ctx);
    inst.seed = doc.at("seed").get<std::uint64_t>();
    inst.mix_eps = doc.at("mix_eps").get<double>();
    inst.initial_state = doc.at("initial_state").get<int>();
    validate_instance(inst);
    return inst;
}

} // namespace cmdp
