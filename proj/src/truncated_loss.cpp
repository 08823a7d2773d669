#include "drclab/truncated_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drclab {

namespace {

// u at offset s into the window: sum_{r=0}^{m-1} M^[r] ynat_window[s+r].
Vector input_at_offset(const DrcParams& M, const LossContext& ctx, int s) {
    Vector u = Vector::Zero(M.d_u());
    for (int r = 0; r < M.m(); ++r) u += M.block(r) * ctx.ynat_window[s + r];
    return u;
}

void validate(const std::vector<DrcParams>& params_window, const LossContext& ctx) {
    if (static_cast<int>(params_window.size()) != ctx.h + 1)
        throw std::invalid_argument("params window must hold h+1 entries");
    if (static_cast<int>(ctx.ynat_window.size()) != ctx.m + ctx.h)
        throw std::invalid_argument("natural-output window must hold m+h entries");
    if (static_cast<int>(ctx.markov.size()) < ctx.h)
        throw std::invalid_argument("context is missing Markov operators");
    for (const auto& P : params_window)
        if (P.m() != ctx.m) throw std::invalid_argument("parameter memory length mismatch");
    const int d_y = static_cast<int>(ctx.ynat_window.front().size());
    const int d_u = params_window.front().d_u();
    if (ctx.loss.dim() != d_y + d_u)
        throw std::invalid_argument("loss dimension must equal d_y + d_u");
}

Vector stack_yu(const Vector& y, const Vector& u) {
    Vector z(y.size() + u.size());
    z.head(y.size()) = y;
    z.tail(u.size()) = u;
    return z;
}

}  // namespace

LossContext make_loss_context(const SystemModel& model, LossSpec loss, int m, int h, long t,
                              const std::vector<Vector>& recent_ynat) {
    if (m < 1 || h < 0) throw std::invalid_argument("memory lengths must satisfy m >= 1, h >= 0");
    if (loss.dim() != model.dim_y() + model.dim_u())
        throw std::invalid_argument("loss dimension must equal d_y + d_u");
    LossContext ctx{t, m, h, {}, {}, std::move(loss)};
    ctx.ynat_window.reserve(m + h);
    for (int i = 0; i < m + h; ++i)
        ctx.ynat_window.push_back(i < static_cast<int>(recent_ynat.size())
                                      ? recent_ynat[i]
                                      : Vector::Zero(model.dim_y()));
    ctx.markov.reserve(h);
    for (int s = 1; s <= h; ++s) ctx.markov.push_back(model.markov(s));
    return ctx;
}

Vector truncated_output(const std::vector<DrcParams>& params_window, const LossContext& ctx) {
    validate(params_window, ctx);
    Vector ytilde = ctx.ynat_window[0];
    for (int s = 1; s <= ctx.h; ++s) {
        const DrcParams& M = params_window[ctx.h - s];  // M_{t-s}, window is oldest first
        ytilde += ctx.markov[s - 1] * input_at_offset(M, ctx, s);
    }
    return ytilde;
}

double memory_loss_F(const std::vector<DrcParams>& params_window, const LossContext& ctx) {
    Vector ytilde = truncated_output(params_window, ctx);
    Vector u = input_at_offset(params_window.back(), ctx, 0);
    return ctx.loss.value(stack_yu(ytilde, u));
}

double memoryless_f(const DrcParams& P, const LossContext& ctx) {
    std::vector<DrcParams> window(ctx.h + 1, P);
    return memory_loss_F(window, ctx);
}

Vector memoryless_gradient(const DrcParams& P, const LossContext& ctx) {
    if (!ctx.loss.is_quadratic()) return memoryless_gradient_fd(P, ctx);

    std::vector<DrcParams> window(ctx.h + 1, P);
    Vector ytilde = truncated_output(window, ctx);
    Vector u = input_at_offset(P, ctx, 0);
    Vector g = ctx.loss.gradient(stack_yu(ytilde, u));
    const int d_y = static_cast<int>(ytilde.size());
    const int d_u = P.d_u();
    Vector g_y = g.head(d_y);
    Vector g_u = g.tail(d_u);

    // d f / d M^[r] = g_u ynat_r' + sum_{s=1}^h (G^[s]' g_y) ynat_{s+r}'
    std::vector<Vector> v(ctx.h);
    for (int s = 1; s <= ctx.h; ++s) v[s - 1] = ctx.markov[s - 1].transpose() * g_y;

    DrcParams grad(P.m(), d_u, P.d_y());
    for (int r = 0; r < P.m(); ++r) {
        grad.block(r) = g_u * ctx.ynat_window[r].transpose();
        for (int s = 1; s <= ctx.h; ++s)
            grad.block(r) += v[s - 1] * ctx.ynat_window[s + r].transpose();
    }
    return grad.vectorize();
}

Vector memoryless_gradient_fd(const DrcParams& P, const LossContext& ctx) {
    Vector p = P.vectorize();
    const double step = 1e-5 * std::max(1.0, p.norm());
    Vector grad(p.size());
    for (long i = 0; i < p.size(); ++i) {
        Vector hi = p, lo = p;
        hi(i) += step;
        lo(i) -= step;
        const double f_hi =
            memoryless_f(DrcParams::from_vector(hi, P.m(), P.d_u(), P.d_y()), ctx);
        const double f_lo =
            memoryless_f(DrcParams::from_vector(lo, P.m(), P.d_u(), P.d_y()), ctx);
        grad(i) = (f_hi - f_lo) / (2.0 * step);
    }
    return grad;
}

}  // namespace drclab
