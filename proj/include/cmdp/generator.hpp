#pragma once

#include <cstdint>

#include "cmdp/instance.hpp"

namespace cmdp {

/// A seeded instance plus the finite classes containing its true weights.
/// Model I fills transition_class (Psi_1) only; Model II fills both
/// transition_class (Psi_2) and reward_class (Psi_3).
struct GeneratedInstance {
    InstanceSpec instance;
    TransitionModelClass transition_class;
    RewardModelClass reward_class;
};

/// Builds a valid random instance: features lie on the probability simplex of
/// dimension d (norm <= 1 for free), each mu coordinate is a distribution over
/// next states mixed with uniform at rate mix_eps (so Eq.-(1)-style inner
/// products are convex combinations of distributions), and eta entries lie in
/// [0,1] (so rewards land in [0,1]). Decoy class members reuse the features
/// and are generated by the same recipe; the truth's position in the class is
/// seed-derived. Deterministic: equal arguments give bit-identical tables.
///
/// class_size counts transition candidates; reward_class_size counts reward
/// candidates (Model II; ignored for Model I).
GeneratedInstance generate_instance(std::uint64_t seed, const Dims& dims, ModelKind kind,
                                    int class_size, int reward_class_size, double mix_eps);

inline GeneratedInstance generate_instance(std::uint64_t seed, const Dims& dims, ModelKind kind,
                                           int class_size, double mix_eps) {
    return generate_instance(seed, dims, kind, class_size, class_size, mix_eps);
}

} // namespace cmdp
