#include "cmdp/bonuses.hpp"

#include <cmath>

namespace cmdp {

ScheduleModel1 schedule_model1(const BonusParams& p, int n) {
    ScheduleModel1 s;
    const double log_base = std::log(2.0 * n * p.horizon / p.delta);
    s.lambda_n = p.gamma1 * p.feat_dim * log_base;
    s.xi_n = p.gamma2 * p.feat_dim * log_base;
    const double zeta = std::log(2.0 * n * p.horizon * p.psi1_size / p.delta);
    s.alpha_n = p.bonus_scale * 5.0 * p.horizon * std::sqrt(2.0 * s.lambda_n * p.feat_dim + 4.0 * zeta);
    s.beta_n = p.bonus_scale * std::sqrt(p.feat_dim * s.xi_n);
    return s;
}

ScheduleModel2 schedule_model2(const BonusParams& p, int n) {
    if (p.planned_episodes <= 0)
        throw MissingN("Model II schedules need planned_episodes (N) in advance");
    ScheduleModel2 s;
    const double log_base = std::log(2.0 * n * p.horizon / p.delta);
    s.lambda_n = p.gamma1 * p.feat_dim * log_base;
    s.xi_n = p.gamma2 * p.feat_dim * log_base;
    const double base = 25.0 / (2.0 * std::sqrt(double(p.num_actions))) * p.C *
                        std::sqrt(double(p.feat_dim) * double(p.planned_episodes));
    s.alpha_tilde = p.bonus_scale * base * p.horizon;
    s.beta_tilde = p.bonus_scale * base;
    return s;
}

double bonus_model1_transition(std::span<const double> phi, const CovarianceAccumulator& acc,
                               double alpha_n, double lambda_n, double H) {
    return norm_bonus(acc.quad_form_inv(phi, lambda_n), alpha_n, H);
}

double bonus_model1_reward(std::span<const double> psi, const CovarianceAccumulator& acc,
                           double beta_n, double xi_n) {
    return norm_bonus(acc.quad_form_inv(psi, xi_n), beta_n, 1.0);
}

double bonus_model2_transition(std::span<const double> phi, const CovarianceAccumulator& acc,
                               double alpha_tilde, double lambda_n, double H) {
    return sqnorm_bonus(acc.quad_form_inv(phi, lambda_n), alpha_tilde, H);
}

double bonus_model2_reward(std::span<const double> psi, const CovarianceAccumulator& acc,
                           double beta_tilde, double xi_n) {
    return sqnorm_bonus(acc.quad_form_inv(psi, xi_n), beta_tilde, 1.0);
}

} // namespace cmdp
