#pragma once

#include <functional>
#include <vector>

#include "drclab/drc_policy.hpp"
#include "drclab/lti_system.hpp"
#include "drclab/truncated_loss.hpp"
#include "drclab/types.hpp"

namespace drclab {

/// Running sums behind the adaptive rate eta_{t+1} = 1/(sum H_{1:t} + sum
/// lambda_{1:t}). accumulate() is called with (H_t, lambda_t) before the
/// rate for the update at t is read.
struct StepState {
    long t = 0;  // completed accumulations
    double sum_H = 0.0;
    double sum_lambda = 0.0;

    void accumulate(double H_t, double lambda_t);
};

/// 1/(sum_H + sum_lambda). A zero denominator is a configuration error
/// (no curvature and no regularization at t = 1).
double step_rate(const StepState& state);

/// u_{t+1} = project(u_t - eta_{t+1} (grad_f + lambda_t u_t)); the state
/// absorbs (H_t, lambda_t) first, so eta_{t+1} reflects step t.
Vector oco_update(const Vector& u_t, const Vector& grad_f, double H_t, double lambda_t,
                  StepState& state, const std::function<Vector(const Vector&)>& project);

/// One DRC-AGD step: gradient of the memory-less loss at P_t plus the
/// ridge term, curvature H_t = curvature(l_t) * noise_transfer.
Vector drc_agd_update(const Vector& P_t, const LossContext& ctx, double lambda_t,
                      double noise_transfer, StepState& state, const DrcConstraintSet& set);

/// H_t = H_l * (sigma_e^2 + sigma_w^2 (sigma_min(C) / (1 + ||A||_2^2))^2).
double strong_convexity_transfer(double H_l, double sigma_w2, double sigma_e2, const Matrix& C,
                                 const Matrix& A);

/// The transfer factor of the model's certified noise floors:
/// sigma_e^2 + sigma_w^2 (sigma_min(C) / (1 + ||A||_2^2))^2.
double noise_transfer_factor(const SystemModel& model);

/// H_tilde = H * noise_transfer_factor(model).
double h_tilde(const SystemModel& model, double H);

/// Regularization schedules: all presets put their weight on lambda_1 and
/// zero afterwards, so monotone non-increase holds by construction.
///   case 1 (convex only):       lambda_1 = sqrt(T)
///   case 2 (strongly convex):   all zero (H_tilde must be positive)
///   case 3 (decay, 0<a<=1/2):   lambda_1 = H_tilde T^a
///   case 4 (decay, a>1/2):      lambda_1 = H_tilde sqrt(T)
class LambdaSchedule {
  public:
    static LambdaSchedule custom(std::vector<double> lambdas);

    double at(long t) const;  // 1-based
    long horizon() const { return static_cast<long>(values_.size()); }
    const std::vector<double>& values() const { return values_; }

  private:
    explicit LambdaSchedule(std::vector<double> values) : values_(std::move(values)) {}
    friend LambdaSchedule make_lambda_schedule(int schedule_case, long T, double H_tilde,
                                               double alpha);

    std::vector<double> values_;
};

LambdaSchedule make_lambda_schedule(int schedule_case, long T, double H_tilde = 0.0,
                                    double alpha = 0.0);

/// Theorem constants: G_f = G_c = L sqrt(m) R_M R_G* R_nat^2,
/// D = 2 sqrt(min(d_u, d_y)) R_M, plus the derived per-step G~ and G^.
struct BoundConstants {
    double g_f = 0.0;
    double g_c = 0.0;
    double diameter = 0.0;
    int h = 0;

    // control-side data, set by from_control only
    double L = 0.0, r_m = 0.0, r_gstar = 0.0, r_nat = 0.0;
    int m = 0, d_u = 0, d_y = 0;
    bool has_control = false;

    static BoundConstants from_control(double L, double r_m, double r_gstar, double r_nat,
                                       int m, int h, int d_u, int d_y);
    static BoundConstants direct(double g_f, double g_c, double diameter, int h);

    /// sqrt((G_f + lambda D)(G_f + lambda D + 2 G_c h^{3/2}))
    double g_tilde(double lambda_t) const;
    /// 2 G_f^2 + G_c^2 h^3
    double g_hat_sq() const;
    /// R_M^2 R_G*^2 R_nat^2 (6L + 4(m+h))
    double control_constant() const;
};

/// (1/2) D^2 sum(lambda) + (1/2) sum_t (G_t + lambda_t D)^2 / (sum H_{1:t}
/// + sum lambda_{1:t}). Infinite if some prefix denominator is zero.
double regret_bound_oco(double diameter, const std::vector<double>& G,
                        const std::vector<double>& H, const std::vector<double>& lambda);

/// Same with G~_{f,t} in place of G_t + lambda_t D.
double regret_bound_ocom(const BoundConstants& constants, const std::vector<double>& H,
                         const std::vector<double>& lambda);

/// control_constant() plus the OCO-M tail.
double regret_bound_control(const BoundConstants& constants, const std::vector<double>& H,
                            const std::vector<double>& lambda);

}  // namespace drclab
