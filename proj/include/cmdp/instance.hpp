#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmdp/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cmdp {

/// Known representation tables phi/psi. Model I features are indexed by
/// (h, s, a, w); Model II features are shared across contexts and indexed by
/// (h, s, a). Rows are d-vectors with Euclidean norm <= 1.
struct FeatureSpec {
    ModelKind kind = ModelKind::ModelI;
    int d = 0, H = 0, S = 0, A = 0, W = 0;
    std::vector<double> phi;
    std::vector<double> psi;

    std::size_t row_index(int h, int s, int a, int w) const {
        if (kind == ModelKind::ModelI)
            return (((std::size_t(h) * S + s) * A + a) * W + w) * d;
        return ((std::size_t(h) * S + s) * A + a) * d;
    }
    std::span<const double> phi_at(int h, int s, int a, int w) const {
        return {phi.data() + row_index(h, s, a, w), std::size_t(d)};
    }
    std::span<const double> psi_at(int h, int s, int a, int w) const {
        return {psi.data() + row_index(h, s, a, w), std::size_t(d)};
    }
    std::size_t rows() const {
        std::size_t n = std::size_t(H) * S * A;
        return kind == ModelKind::ModelI ? n * W : n;
    }
};

/// Unknown transition weights mu. Model I: mu_h(s') shared across contexts;
/// Model II: mu_h(s', w) per context.
struct MuTable {
    ModelKind kind = ModelKind::ModelI;
    int d = 0, H = 0, S = 0, W = 0;
    std::vector<double> v;

    std::size_t row_index(int h, int s2, int w) const {
        if (kind == ModelKind::ModelI) return (std::size_t(h) * S + s2) * d;
        return ((std::size_t(h) * S + s2) * W + w) * d;
    }
    std::span<const double> at(int h, int s2, int w) const {
        return {v.data() + row_index(h, s2, w), std::size_t(d)};
    }
};

/// Unknown reward weights eta. Model I: eta_h shared; Model II: eta_h(w).
struct EtaTable {
    ModelKind kind = ModelKind::ModelI;
    int d = 0, H = 0, W = 0;
    std::vector<double> v;

    std::size_t row_index(int h, int w) const {
        if (kind == ModelKind::ModelI) return std::size_t(h) * d;
        return (std::size_t(h) * W + w) * d;
    }
    std::span<const double> at(int h, int w) const {
        return {v.data() + row_index(h, w), std::size_t(d)};
    }
};

struct WeightSpec {
    MuTable mu;
    EtaTable eta;
};

/// Full ground truth of a linear CMDP: features, weights, and the tabular
/// kernel/reward they induce. Immutable after construction; safe to share
/// read-only across concurrent runs.
struct InstanceSpec {
    Dims dims;
    ContextSpace context_space;
    FeatureSpec features;
    WeightSpec weights;
    std::vector<double> P; // [w][h][s][a][s']
    std::vector<double> r; // [w][h][s][a]
    int initial_state = 0;
    double mix_eps = 0.0;
    std::uint64_t seed = 0;

    ModelKind kind() const { return features.kind; }

    double p(int w, int h, int s, int a, int s2) const {
        const auto& D = dims;
        return P[(((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a) *
                     D.num_states +
                 s2];
    }
    std::span<const double> p_row(int w, int h, int s, int a) const {
        const auto& D = dims;
        std::size_t base = (((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a) *
                           D.num_states;
        return {P.data() + base, std::size_t(D.num_states)};
    }
    /// All of context w's kernel, layout [h][s][a][s'].
    std::span<const double> p_slice(int w) const {
        const auto& D = dims;
        std::size_t len = std::size_t(D.horizon) * D.num_states * D.num_actions * D.num_states;
        return {P.data() + std::size_t(w) * len, len};
    }
    double reward(int w, int h, int s, int a) const {
        const auto& D = dims;
        return r[((std::size_t(w) * D.horizon + h) * D.num_states + s) * D.num_actions + a];
    }
    /// All of context w's rewards, layout [h][s][a].
    std::span<const double> r_slice(int w) const {
        const auto& D = dims;
        std::size_t len = std::size_t(D.horizon) * D.num_states * D.num_actions;
        return {r.data() + std::size_t(w) * len, len};
    }
};

/// Finite candidate set of transition weight tables (Psi_1 or Psi_2).
struct TransitionModelClass {
    std::vector<MuTable> candidates;
    int true_index = 0;
};

/// Finite candidate set of reward weight tables (Psi_3, Model II).
struct RewardModelClass {
    std::vector<EtaTable> candidates;
    int true_index = 0;
};

/// Tabulates P[w][h][s][a][s'] = <phi_h(s,a,w), mu_h(s'[,w])>, validating each
/// row. Entries in [-1e-9, 0) are clamped to zero. Throws InvalidInstance on a
/// probability < -1e-9 or a row sum off by more than 1e-9.
std::vector<double> tabulate_transitions(const FeatureSpec& features, const MuTable& mu,
                                         const Dims& dims);

/// Tabulates r[w][h][s][a] = <psi_h(s,a,w), eta_h[(w)]>, clamping values in
/// [-1e-9, 0) and (1, 1+1e-9] onto [0, 1]. Throws InvalidInstance outside the
/// tolerance band.
std::vector<double> tabulate_rewards(const FeatureSpec& features, const EtaTable& eta,
                                     const Dims& dims);

InstanceSpec build_tabular(const FeatureSpec& features, const WeightSpec& weights, const Dims& dims,
                           const ContextSpace& context_space);

/// Checks ||eta||_2 <= sqrt(d) and the probe-set bound
/// ||sum_s mu(s) g(s)||_2 <= sqrt(d) for g in {0, 1, indicators, 16 seeded
/// random [0,1] functions}. Throws InvalidInstance on violation.
void check_weight_norms(const MuTable& mu);
void check_weight_norms(const EtaTable& eta);

/// Full invariant sweep over a stored instance: feature norms, weight norms,
/// stochastic rows, rewards in range, and entrywise reconstruction of P and r
/// from the linear decomposition (tolerance 1e-10).
void validate_instance(const InstanceSpec& instance);

/// Every candidate must satisfy the weight invariants and induce valid
/// probability rows (rewards in [0,1]) against the instance's features.
void validate_transition_class(const InstanceSpec& instance, const TransitionModelClass& cls);
void validate_reward_class(const InstanceSpec& instance, const RewardModelClass& cls);

/// JSON round-trip of the ground truth (features/weights, not the derived
/// tables; loading rebuilds and revalidates them). Doubles survive exactly,
/// the seed bit-exactly.
nlohmann::ordered_json instance_to_json(const InstanceSpec& instance);
InstanceSpec instance_from_json(const nlohmann::json& doc);

} // namespace cmdp
