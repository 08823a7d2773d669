#include "drclab/adaptive_learner.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drclab {

namespace {

double spectral_norm_of(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

double min_singular_value(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const Vector sv = m.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
}

}  // namespace

void StepState::accumulate(double H_t, double lambda_t) {
    if (!(H_t >= 0.0) || !(lambda_t >= 0.0))
        throw std::invalid_argument("StepState: curvature and regularizer must be nonnegative");
    sum_H += H_t;
    sum_lambda += lambda_t;
    ++t;
}

double step_rate(const StepState& state) {
    const double denom = state.sum_H + state.sum_lambda;
    if (denom <= 0.0)
        throw std::invalid_argument(
            "step_rate: zero curvature and zero regularization make the rate undefined; "
            "use a schedule with lambda_1 > 0 (e.g. the convex-only schedule)");
    return 1.0 / denom;
}

Vector oco_update(const Vector& u_t, const Vector& grad_f, double H_t, double lambda_t,
                  StepState& state, const std::function<Vector(const Vector&)>& project) {
    if (grad_f.size() != u_t.size())
        throw std::invalid_argument("oco_update: gradient dimension mismatch");
    state.accumulate(H_t, lambda_t);
    const double eta = step_rate(state);
    return project(u_t - eta * (grad_f + lambda_t * u_t));
}

Vector drc_agd_update(const Vector& P_t, const LossContext& ctx, double lambda_t,
                      double noise_transfer, StepState& state, const DrcConstraintSet& set) {
    if (!(noise_transfer >= 0.0))
        throw std::invalid_argument("drc_agd_update: noise transfer must be nonnegative");
    const DrcParams params = DrcParams::from_vector(P_t, ctx.m, set.d_u(), set.d_y());
    const Vector grad = memoryless_gradient(params, ctx);
    const double H_t = ctx.loss.curvature() * noise_transfer;
    return oco_update(P_t, grad, H_t, lambda_t, state,
                      [&set](const Vector& v) { return set.project(v); });
}

double strong_convexity_transfer(double H_l, double sigma_w2, double sigma_e2, const Matrix& C,
                                 const Matrix& A) {
    if (!(H_l >= 0.0) || !(sigma_w2 >= 0.0) || !(sigma_e2 >= 0.0))
        throw std::invalid_argument("strong_convexity_transfer: negative input");
    const double gain = min_singular_value(C) / (1.0 + std::pow(spectral_norm_of(A), 2));
    return H_l * (sigma_e2 + sigma_w2 * gain * gain);
}

double noise_transfer_factor(const SystemModel& model) {
    return strong_convexity_transfer(1.0, model.noise_w().variance_floor(),
                                     model.noise_e().variance_floor(), model.C(), model.A());
}

double h_tilde(const SystemModel& model, double H) {
    if (!(H >= 0.0)) throw std::invalid_argument("h_tilde: H must be nonnegative");
    return H * noise_transfer_factor(model);
}

LambdaSchedule LambdaSchedule::custom(std::vector<double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("LambdaSchedule: empty schedule");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0))
            throw std::invalid_argument("LambdaSchedule: negative regularizer");
        if (i > 0 && lambdas[i] > lambdas[i - 1])
            throw std::invalid_argument("LambdaSchedule: schedule must be non-increasing");
    }
    return LambdaSchedule(std::move(lambdas));
}

double LambdaSchedule::at(long t) const {
    if (t < 1 || t > horizon()) throw std::out_of_range("LambdaSchedule: t out of range");
    return values_[static_cast<std::size_t>(t - 1)];
}

LambdaSchedule make_lambda_schedule(int schedule_case, long T, double H_tilde, double alpha) {
    if (T < 4) throw std::invalid_argument("make_lambda_schedule: horizon must be at least 4");
    std::vector<double> values(static_cast<std::size_t>(T), 0.0);
    switch (schedule_case) {
        case 1:
            values[0] = std::sqrt(static_cast<double>(T));
            break;
        case 2:
            if (!(H_tilde > 0.0))
                throw std::invalid_argument(
                    "make_lambda_schedule: the all-zero schedule needs H_tilde > 0, otherwise "
                    "the step rate at t = 1 is undefined");
            break;
        case 3:
            if (!(H_tilde > 0.0))
                throw std::invalid_argument("make_lambda_schedule: case 3 needs H_tilde > 0");
            if (!(alpha > 0.0) || alpha > 0.5)
                throw std::invalid_argument("make_lambda_schedule: case 3 needs 0 < alpha <= 1/2");
            values[0] = H_tilde * std::pow(static_cast<double>(T), alpha);
            break;
        case 4:
            if (!(H_tilde > 0.0))
                throw std::invalid_argument("make_lambda_schedule: case 4 needs H_tilde > 0");
            if (!(alpha > 0.5))
                throw std::invalid_argument("make_lambda_schedule: case 4 needs alpha > 1/2");
            values[0] = H_tilde * std::sqrt(static_cast<double>(T));
            break;
        default:
            throw std::invalid_argument("make_lambda_schedule: case must be 1, 2, 3 or 4");
    }
    return LambdaSchedule::custom(std::move(values));
}

BoundConstants BoundConstants::from_control(double L, double r_m, double r_gstar, double r_nat,
                                            int m, int h, int d_u, int d_y) {
    if (!(L >= 0.0) || !(r_m > 0.0) || !(r_gstar >= 0.0) || !(r_nat >= 0.0))
        throw std::invalid_argument("BoundConstants: invalid magnitude");
    if (m < 1 || h < 0 || d_u < 1 || d_y < 1)
        throw std::invalid_argument("BoundConstants: invalid dimensions");
    BoundConstants c;
    c.g_f = L * std::sqrt(static_cast<double>(m)) * r_m * r_gstar * r_nat * r_nat;
    c.g_c = c.g_f;
    c.diameter = drc_diameter(d_u, d_y, r_m);
    c.h = h;
    c.L = L;
    c.r_m = r_m;
    c.r_gstar = r_gstar;
    c.r_nat = r_nat;
    c.m = m;
    c.d_u = d_u;
    c.d_y = d_y;
    c.has_control = true;
    return c;
}

BoundConstants BoundConstants::direct(double g_f, double g_c, double diameter, int h) {
    if (!(g_f >= 0.0) || !(g_c >= 0.0) || !(diameter >= 0.0) || h < 0)
        throw std::invalid_argument("BoundConstants: invalid magnitude");
    BoundConstants c;
    c.g_f = g_f;
    c.g_c = g_c;
    c.diameter = diameter;
    c.h = h;
    return c;
}

double BoundConstants::g_tilde(double lambda_t) const {
    const double base = g_f + lambda_t * diameter;
    const double hh = static_cast<double>(h);
    return std::sqrt(base * (base + 2.0 * g_c * hh * std::sqrt(hh)));
}

double BoundConstants::g_hat_sq() const {
    const double hh = static_cast<double>(h);
    return 2.0 * g_f * g_f + g_c * g_c * hh * hh * hh;
}

double BoundConstants::control_constant() const {
    if (!has_control)
        throw std::logic_error("BoundConstants: control constant needs from_control data");
    return r_m * r_m * r_gstar * r_gstar * r_nat * r_nat *
           (6.0 * L + 4.0 * static_cast<double>(m + h));
}

namespace {

double adaptive_sum(const std::vector<double>& numerators_sq, const std::vector<double>& H,
                    const std::vector<double>& lambda) {
    double sum_H = 0.0, sum_lambda = 0.0, total = 0.0;
    for (std::size_t t = 0; t < numerators_sq.size(); ++t) {
        sum_H += H[t];
        sum_lambda += lambda[t];
        const double denom = sum_H + sum_lambda;
        if (denom <= 0.0) return std::numeric_limits<double>::infinity();
        total += numerators_sq[t] / denom;
    }
    return 0.5 * total;
}

}  // namespace

double regret_bound_oco(double diameter, const std::vector<double>& G,
                        const std::vector<double>& H, const std::vector<double>& lambda) {
    if (G.size() != H.size() || G.size() != lambda.size() || G.empty())
        throw std::invalid_argument("regret_bound_oco: mismatched streams");
    std::vector<double> num(G.size());
    double sum_lambda = 0.0;
    for (std::size_t t = 0; t < G.size(); ++t) {
        const double g = G[t] + lambda[t] * diameter;
        num[t] = g * g;
        sum_lambda += lambda[t];
    }
    return 0.5 * diameter * diameter * sum_lambda + adaptive_sum(num, H, lambda);
}

double regret_bound_ocom(const BoundConstants& constants, const std::vector<double>& H,
                         const std::vector<double>& lambda) {
    if (H.size() != lambda.size() || H.empty())
        throw std::invalid_argument("regret_bound_ocom: mismatched streams");
    std::vector<double> num(H.size());
    double sum_lambda = 0.0;
    for (std::size_t t = 0; t < H.size(); ++t) {
        const double g = constants.g_tilde(lambda[t]);
        num[t] = g * g;
        sum_lambda += lambda[t];
    }
    return 0.5 * constants.diameter * constants.diameter * sum_lambda +
           adaptive_sum(num, H, lambda);
}

double regret_bound_control(const BoundConstants& constants, const std::vector<double>& H,
                            const std::vector<double>& lambda) {
    return constants.control_constant() + regret_bound_ocom(constants, H, lambda);
}

}  // namespace drclab
