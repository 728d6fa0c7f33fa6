#include "cmdp/generator.hpp"

#include <cmath>
#include <utility>

#include "cmdp/rng.hpp"

namespace cmdp {

namespace {

// sub-stream ids for the generator's independent draws
enum : std::uint64_t {
    kFeatures = 1,
    kContextDist = 2,
    kMuTruth = 3,
    kPlacement = 4,
    kEtaTruth = 5,
    kMuDecoys = 6,
    kEtaDecoys = 7,
};

// Sharpness of the generated distributions. Plain Dirichlet(1) draws average
// everything toward the middle, which produces near-indistinguishable action
// values; raising the spacings to a power pushes rows toward the simplex
// corners so instances have real contrast between actions.
constexpr double kTransitionSharpness = 8.0;
constexpr double kRewardSharpness = 3.0;
constexpr double kPhiCentering = 0.35;

std::vector<double> sample_simplex_sharp(Rng& rng, int n, double power) {
    std::vector<double> x = rng.sample_simplex(n);
    double total = 0.0;
    for (double& v : x) {
        v = std::pow(v, power);
        total += v;
    }
    for (double& v : x) v /= total;
    return x;
}

FeatureSpec sample_features(Rng& rng, const Dims& dims, ModelKind kind) {
    FeatureSpec f;
    f.kind = kind;
    f.d = dims.feat_dim;
    f.H = dims.horizon;
    f.S = dims.num_states;
    f.A = dims.num_actions;
    f.W = dims.num_contexts;
    const std::size_t rows = f.rows();
    f.phi.reserve(rows * f.d);
    f.psi.reserve(rows * f.d);
    for (std::size_t i = 0; i < rows; ++i) {
        // phi rows are pulled toward the simplex center: over a run, every
        // direction accrues coverage at a similar rate, so the transition
        // bonus acts as a near-common offset instead of a persistent tilt
        for (double x : rng.sample_simplex(f.d))
            f.phi.push_back((1.0 - kPhiCentering) * x + kPhiCentering / f.d);
        for (double x : sample_simplex_sharp(rng, f.d, kRewardSharpness)) f.psi.push_back(x);
    }
    return f;
}

/// One mu table: for each (h [, w]) and each coordinate j, a distribution over
/// next states mixed with the uniform one at rate mix_eps. Any simplex feature
/// vector then induces a convex combination of distributions, which is itself
/// a distribution with every entry >= mix_eps / |S|.
MuTable sample_mu(Rng& rng, const Dims& dims, ModelKind kind, double mix_eps) {
    MuTable mu;
    mu.kind = kind;
    mu.d = dims.feat_dim;
    mu.H = dims.horizon;
    mu.S = dims.num_states;
    mu.W = dims.num_contexts;
    const int contexts = kind == ModelKind::ModelI ? 1 : dims.num_contexts;
    mu.v.assign(std::size_t(mu.H) * mu.S * (kind == ModelKind::ModelI ? 1 : mu.W) * mu.d, 0.0);
    const double uniform = 1.0 / dims.num_states;
    for (int h = 0; h < mu.H; ++h)
        for (int w = 0; w < contexts; ++w)
            for (int j = 0; j < mu.d; ++j) {
                auto dist = sample_simplex_sharp(rng, dims.num_states, kTransitionSharpness);
                for (int s2 = 0; s2 < mu.S; ++s2) {
                    double p = (1.0 - mix_eps) * dist[s2] + mix_eps * uniform;
                    mu.v[mu.row_index(h, s2, w) + j] = p;
                }
            }
    return mu;
}

EtaTable sample_eta(Rng& rng, const Dims& dims, ModelKind kind) {
    EtaTable eta;
    eta.kind = kind;
    eta.d = dims.feat_dim;
    eta.H = dims.horizon;
    eta.W = dims.num_contexts;
    const int contexts = kind == ModelKind::ModelI ? 1 : dims.num_contexts;
    eta.v.resize(std::size_t(eta.H) * contexts * eta.d);
    // bimodal weights: rewards spread over [0,1] instead of clumping at 1/2;
    // with d >= 2 every (h, w) block mixes both modes so the reward table
    // always carries real contrast between feature directions
    for (int h = 0; h < eta.H; ++h)
        for (int w = 0; w < contexts; ++w) {
            double* block = eta.v.data() + eta.row_index(h, w);
            std::uint64_t mask = 0;
            for (int j = 0; j < eta.d; ++j) mask |= rng.next_uint(2) << j;
            if (eta.d >= 2) {
                const std::uint64_t full = (std::uint64_t(1) << eta.d) - 1;
                if (mask == 0 || mask == full) mask ^= std::uint64_t(1) << rng.next_uint(eta.d);
            }
            for (int j = 0; j < eta.d; ++j)
                block[j] = (mask >> j & 1) ? 0.8 + 0.2 * rng.next_double()
                                           : 0.05 + 0.15 * rng.next_double();
        }
    return eta;
}

} // namespace

GeneratedInstance generate_instance(std::uint64_t seed, const Dims& dims, ModelKind kind,
                                    int class_size, int reward_class_size, double mix_eps) {
    dims.validate();
    if (class_size < 1) throw GenerationFailed("class_size must be >= 1");
    if (mix_eps < 0.0 || mix_eps >= 1.0) throw GenerationFailed("mix_eps must lie in [0,1)");
    if (kind == ModelKind::ModelII && mix_eps <= 0.0)
        throw GenerationFailed("Model II requires mix_eps > 0 so that p_min > 0");

    Rng feature_rng(seed, kFeatures);
    Rng context_rng(seed, kContextDist);
    Rng mu_rng(seed, kMuTruth);
    Rng eta_rng(seed, kEtaTruth);
    Rng mu_decoy_rng(seed, kMuDecoys);
    Rng eta_decoy_rng(seed, kEtaDecoys);
    Rng placement_rng(seed, kPlacement);

    ContextSpace ctx{context_rng.sample_simplex(dims.num_contexts)};

    for (int attempt = 0; attempt < 100; ++attempt) {
        FeatureSpec features = sample_features(feature_rng, dims, kind);
        WeightSpec truth{sample_mu(mu_rng, dims, kind, mix_eps), sample_eta(eta_rng, dims, kind)};

        GeneratedInstance out;
        try {
            out.instance = build_tabular(features, truth, dims, ctx);
        } catch (const InvalidInstance&) {
            continue; // resample everything; cannot happen with the simplex construction
        }
        out.instance.seed = seed;
        out.instance.mix_eps = mix_eps;
        out.instance.initial_state = 0;

        out.transition_class.candidates.reserve(class_size);
        for (int c = 0; c + 1 < class_size; ++c)
            out.transition_class.candidates.push_back(sample_mu(mu_decoy_rng, dims, kind, mix_eps));
        int mu_pos = int(placement_rng.next_uint(std::uint64_t(class_size)));
        out.transition_class.candidates.insert(out.transition_class.candidates.begin() + mu_pos,
                                               truth.mu);
        out.transition_class.true_index = mu_pos;

        if (kind == ModelKind::ModelII) {
            if (reward_class_size < 1) throw GenerationFailed("reward_class_size must be >= 1");
            out.reward_class.candidates.reserve(reward_class_size);
            for (int c = 0; c + 1 < reward_class_size; ++c)
                out.reward_class.candidates.push_back(sample_eta(eta_decoy_rng, dims, kind));
            int eta_pos = int(placement_rng.next_uint(std::uint64_t(reward_class_size)));
            out.reward_class.candidates.insert(out.reward_class.candidates.begin() + eta_pos,
                                               truth.eta);
            out.reward_class.true_index = eta_pos;
        }

        validate_instance(out.instance);
        validate_transition_class(out.instance, out.transition_class);
        if (kind == ModelKind::ModelII) validate_reward_class(out.instance, out.reward_class);
        return out;
    }
    throw GenerationFailed("no valid instance after 100 attempts");
}

} // namespace cmdp
