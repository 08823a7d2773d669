#pragma once

#include <vector>

#include "drclab/adversary.hpp"
#include "drclab/drc_policy.hpp"
#include "drclab/lti_system.hpp"
#include "drclab/types.hpp"

namespace drclab {

/// Everything needed to evaluate the h-memory truncated loss at time t:
/// the m+h newest natural outputs (newest first, zero-padded below t=1),
/// the Markov operators G^[1..h], and the revealed loss l_t over (y, u).
struct LossContext {
    long t = 1;
    int m = 1;
    int h = 0;
    std::vector<Vector> ynat_window;  // newest first, length m+h
    std::vector<Matrix> markov;       // markov[s-1] = G^[s], length h
    LossSpec loss;
};

/// Builds a context from the model's cached Markov operators. recent is
/// newest-first and is zero-padded (or truncated) to length m+h.
LossContext make_loss_context(const SystemModel& model, LossSpec loss, int m, int h, long t,
                              const std::vector<Vector>& recent_ynat);

/// ytilde_t = y^nat_t + sum_{s=1}^h G^[s] u_{t-s}, where u_{t-s} is the
/// control input of window entry M_{t-s} on the natural outputs at t-s.
/// params_window holds P_{t-h..t} oldest first (h+1 entries).
Vector truncated_output(const std::vector<DrcParams>& params_window, const LossContext& ctx);

/// F_t = l_t(ytilde_t, u_t) with u_t from the newest window entry.
double memory_loss_F(const std::vector<DrcParams>& params_window, const LossContext& ctx);

/// f_t(P) = F_t[{P, ..., P}].
double memoryless_f(const DrcParams& P, const LossContext& ctx);

/// Gradient of f_t at P, stacked like DrcParams::vectorize(). Quadratic
/// losses take the exact chain rule through the affine maps ytilde(P),
/// u(P); everything else falls back to central finite differences.
Vector memoryless_gradient(const DrcParams& P, const LossContext& ctx);

/// Central finite differences with step 1e-5 * max(1, ||P||).
Vector memoryless_gradient_fd(const DrcParams& P, const LossContext& ctx);

}  // namespace drclab
