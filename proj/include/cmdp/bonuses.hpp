#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "cmdp/types.hpp"

namespace cmdp {

/// Running sum of outer products x x^T. The regularizer is applied at query
/// time (the schedules grow it with n, so baking it in would force rebuilds).
/// Single writer; concurrent queries are safe with no writer active.
class CovarianceAccumulator {
public:
    explicit CovarianceAccumulator(int dim)
        : gram_(Eigen::MatrixXd::Zero(dim, dim)), count_(0) {}

    void update(std::span<const double> x) {
        check_dim(x);
        Eigen::Map<const Eigen::VectorXd> v(x.data(), gram_.rows());
        gram_.noalias() += v * v.transpose();
        ++count_;
    }

    /// Cholesky factorization of (gram + lambda I), reusable across queries.
    class Solver {
    public:
        Solver(const Eigen::MatrixXd& gram, double lambda) : llt_(regularized(gram, lambda)) {}

        double quad_form(std::span<const double> x) const {
            Eigen::Map<const Eigen::VectorXd> v(x.data(), llt_.matrixL().rows());
            return v.dot(llt_.solve(v));
        }

    private:
        static Eigen::MatrixXd regularized(const Eigen::MatrixXd& gram, double lambda) {
            Eigen::MatrixXd m = gram;
            m.diagonal().array() += lambda;
            return m;
        }
        Eigen::LLT<Eigen::MatrixXd> llt_;
    };

    Solver solver(double lambda) const { return Solver(gram_, lambda); }

    /// x^T (gram + lambda I)^{-1} x via an SPD solve (never an explicit
    /// inverse).
    double quad_form_inv(std::span<const double> x, double lambda) const {
        check_dim(x);
        return solver(lambda).quad_form(x);
    }

    int dim() const { return int(gram_.rows()); }
    long count() const { return count_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

private:
    void check_dim(std::span<const double> x) const {
        if (int(x.size()) != gram_.rows()) throw DimMismatch("vector dim != accumulator dim");
    }

    Eigen::MatrixXd gram_;
    long count_;
};

/// Everything the bonus schedules need. C enters Model II only; the spec's
/// theorem convention is C = sqrt(p_max / p_min) (see CConvention in the
/// harness config for the alternative in-text variant).
struct BonusParams {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double delta = 0.1;
    int psi1_size = 1; // |Psi_1| (Model I)
    int psi2_size = 1; // |Psi_2| (Model II)
    int psi3_size = 1; // |Psi_3| (Model II)
    int horizon = 1;
    int feat_dim = 1;
    int num_actions = 1;
    long planned_episodes = 0; // N, required for Model II schedules
    double C = 1.0;
    double bonus_scale = 1.0;
};

struct ScheduleModel1 {
    double lambda_n = 0.0;
    double xi_n = 0.0;
    double alpha_n = 0.0;
    double beta_n = 0.0;
};

struct ScheduleModel2 {
    double lambda_n = 0.0;
    double xi_n = 0.0;
    double alpha_tilde = 0.0;
    double beta_tilde = 0.0;
};

/// lambda_n = gamma1 d log(2nH/delta), xi_n = gamma2 d log(2nH/delta),
/// alpha_n = 5H sqrt(2 lambda_n d + 4 log(2nH|Psi_1|/delta)),
/// beta_n = sqrt(d xi_n); alpha/beta scaled by bonus_scale.
ScheduleModel1 schedule_model1(const BonusParams& params, int n);

/// Same regularizers; alpha~ = (25 / 2 sqrt(K)) C H sqrt(dN) and
/// beta~ = alpha~ / H, constant in n. Throws MissingN when planned_episodes
/// is unset.
ScheduleModel2 schedule_model2(const BonusParams& params, int n);

inline double norm_bonus(double quad_form, double coef, double cap) {
    if (quad_form <= 0.0) return 0.0; // zero feature: no uncertainty, also dodges inf*0
    double b = coef * std::sqrt(quad_form);
    return b > cap ? cap : b;
}

inline double sqnorm_bonus(double quad_form, double coef, double cap) {
    if (quad_form <= 0.0) return 0.0;
    double b = coef * quad_form;
    return b > cap ? cap : b;
}

/// min{alpha_n ||phi||_{(Sigma_hat)^-1}, H}
double bonus_model1_transition(std::span<const double> phi, const CovarianceAccumulator& acc,
                               double alpha_n, double lambda_n, double H);

/// min{beta_n ||psi||_{(Lambda_hat)^-1}, 1}
double bonus_model1_reward(std::span<const double> psi, const CovarianceAccumulator& acc,
                           double beta_n, double xi_n);

/// min{alpha~ ||phi||^2_{(Sigma~)^-1}, H} — squared norm, no square root.
double bonus_model2_transition(std::span<const double> phi, const CovarianceAccumulator& acc,
                               double alpha_tilde, double lambda_n, double H);

/// min{beta~ ||psi||^2_{(Lambda~)^-1}, 1}
double bonus_model2_reward(std::span<const double> psi, const CovarianceAccumulator& acc,
                           double beta_tilde, double xi_n);

} // namespace cmdp
