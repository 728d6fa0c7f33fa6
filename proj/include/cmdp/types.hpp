#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmdp {

enum class ModelKind { ModelI, ModelII };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Cardinalities of a finite contextual MDP instance.
struct Dims {
    int num_states = 1;   // |S|
    int num_actions = 1;  // K
    int num_contexts = 1; // |W|
    int horizon = 1;      // H
    int feat_dim = 1;     // d

    void validate() const;
};

struct ContextSpace {
    std::vector<double> q; // probability vector over context ids 0..|W|-1

    int size() const { return int(q.size()); }
    void validate() const;
};

// --- error types named by the operation contracts ---

struct InvalidInstance : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AllModelsImpossible : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidKernel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingN : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shared inner product so every consumer of the linear decomposition sums in
/// the same order (keeps rebuilt tables bit-identical to stored ones).
inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Total variation distance between two finite distributions (= 0.5 L1).
inline double tv_distance(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double diff = p[i] - q[i];
        s += diff < 0 ? -diff : diff;
    }
    return 0.5 * s;
}

} // namespace cmdp
