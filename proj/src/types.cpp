#include "cmdp/types.hpp"

#include <cmath>

namespace cmdp {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::ModelI ? "model1" : "model2";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "model1" || s == "ModelI" || s == "I") return ModelKind::ModelI;
    if (s == "model2" || s == "ModelII" || s == "II") return ModelKind::ModelII;
    throw InvalidInstance("unknown model_kind: " + s);
}

void Dims::validate() const {
    if (num_states < 1 || num_actions < 1 || num_contexts < 1 || horizon < 1 || feat_dim < 1)
        throw InvalidInstance("all dimensions must be >= 1");
    if (feat_dim > num_states * num_actions)
        throw InvalidInstance("feat_dim must not exceed num_states * num_actions");
}

void ContextSpace::validate() const {
    if (q.empty()) throw InvalidInstance("context distribution q is empty");
    double total = 0.0;
    for (double p : q) {
        if (p < 0.0) throw InvalidInstance("context distribution has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidInstance("context distribution does not sum to 1");
}

} // namespace cmdp
