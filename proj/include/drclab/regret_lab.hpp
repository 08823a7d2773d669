#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drclab/adaptive_learner.hpp"
#include "drclab/adversary.hpp"
#include "drclab/drc_policy.hpp"
#include "drclab/lti_system.hpp"
#include "drclab/truncated_loss.hpp"
#include "drclab/types.hpp"

namespace drclab {

/// One online-control episode: the system, the loss regime (the four
/// regularization cases share ids with the schedule presets), the horizon
/// and the controller geometry. m = h = 0 defers to select_memory.
struct EpisodeConfig {
    SystemModel model;
    long T = 256;
    int loss_case = 1;       // 1 convex-only, 2 constant floor, 3 slow decay, 4 fast decay
    double alpha = 0.0;      // decay exponent for cases 3/4
    double curvature = 1.0;  // loss curvature scale for cases 2-4
    double r_m = 1.0;
    int m = 0, h = 0;
    unsigned long seed = 1;
    std::vector<double> lambda_override;  // empty: Appendix-style preset for loss_case
    std::vector<LossSpec> losses_override;

    explicit EpisodeConfig(SystemModel model_) : model(std::move(model_)) {}
};

struct EpisodeStep {
    Vector y, u, ynat, w, e;
    Vector params;             // P_t, before the update at t
    double loss = 0.0;         // realized l_t(y_t, u_t)
    double memory_loss = 0.0;  // F_t at the played parameter window
    double unary_loss = 0.0;   // f_t(P_t)
    double eta = 0.0;          // rate used by the update at t
    double H = 0.0;            // transferred curvature of l_t
    double lambda = 0.0;
};

struct EpisodeTrace {
    EpisodeConfig config;
    int m = 1, h = 0;  // resolved memory lengths
    std::vector<LossSpec> losses;
    std::vector<EpisodeStep> steps;
    std::vector<double> H_stream, lambda_stream;
    double realized_total = 0.0;
    BoundConstants constants;  // L = max certified Lipschitz scale over the run
    double bound = 0.0;        // full control regret bound for this episode

    long T() const { return static_cast<long>(steps.size()); }
};

/// Runs the online protocol: observe y_t, recover y^nat_t, play the DRC
/// input, suffer the revealed loss, take one adaptive-gradient step.
/// Windows before t = 1 count as zero; the F_t log pads the parameter
/// window with P_1 on the first h steps.
EpisodeTrace run_episode(const EpisodeConfig& config);

struct ComparatorResult {
    Vector best_params;
    double cost = 0.0;
    bool converged = true;
    long iterations = 0;
};

/// Replayed cost sum_{t=from_t}^{to_t} l_t(y^P_t, u^P_t) of the fixed
/// parameter P under the episode's logged natural outputs.
double replay_fixed_cost(const EpisodeTrace& trace, const Vector& P, long from_t, long to_t);

/// Minimizes replay_fixed_cost over the feasible set: projected gradient
/// descent with diminishing steps from 8 starts (quadratic losses get an
/// assembled closed-form objective). converged=false after the iteration
/// cap; the best iterate is still returned.
ComparatorResult best_fixed_drc(const EpisodeTrace& trace, long from_t, long to_t);

/// Same machinery on the truncated memory-less objective
/// sum_{t=from_t}^{to_t} f_t(P | y^nat).
ComparatorResult best_memoryless_fit(const EpisodeTrace& trace, long from_t, long to_t);

/// A linear dynamic controller s_{t+1} = A_pi s_t + B_pi y_t,
/// u_t = C_pi s_t + D_pi y_t; d_pi = 0 is static output feedback.
struct LdcController {
    Matrix A_pi, B_pi, C_pi, D_pi;
};

/// Replays the logged noise through the closed loop and totals the losses.
double ldc_rollout(const EpisodeTrace& trace, const LdcController& controller);

/// The computable regret split: the first four terms telescope to
/// realized_total - (best fixed DRC cost over t in [m+h+1, T]).
/// policy_gap is the diagnostic full-horizon gap between the best fixed
/// DRC and the best of a sampled set of LDC rollouts; it can be negative.
struct RegretDecomposition {
    double burn_in = 0.0;
    double algo_truncation = 0.0;
    double f_policy = 0.0;
    double comparator_truncation = 0.0;
    double policy_gap = 0.0;

    double total() const { return burn_in + algo_truncation + f_policy + comparator_truncation; }
};

RegretDecomposition decompose_regret(const EpisodeTrace& trace,
                                     const ComparatorResult& tail_comparator,
                                     int ldc_samples = 8);

struct RegretReport {
    double realized = 0.0;
    double comparator = 0.0;  // best fixed DRC over the tail window
    double regret = 0.0;
    double bound = 0.0;
    RegretDecomposition decomposition;
    bool comparator_converged = true;
};

/// Tail comparator, regret, bound and decomposition for one trace.
RegretReport evaluate_episode(const EpisodeTrace& trace, int ldc_samples = 8);

struct RateFit {
    double exponent = 0.0;  // OLS slope of log R vs log T
    double intercept = 0.0;
    std::vector<double> log_ratio;  // R_i / log T_i over the fitted points
    int excluded = 0;               // nonpositive regrets dropped
    std::string warning;
};

/// Least-squares rate fit over geometrically spaced horizons. Nonpositive
/// regrets are excluded with a warning; at least two points must remain.
RateFit fit_rate(const std::vector<double>& horizons, const std::vector<double>& regrets);

}  // namespace drclab
