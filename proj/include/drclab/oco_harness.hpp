#pragma once

#include <vector>

#include "drclab/adaptive_learner.hpp"
#include "drclab/types.hpp"

namespace drclab {

/// A synthetic OCO-with-memory instance over the ball ||u|| <= radius:
/// F_t(u_{t-h}, ..., u_t) = (z - b_t)' Q_t (z - b_t), z the stacked window
/// (oldest first). G/g_f/g_c are certified upper bounds over the feasible
/// set; H holds guarded strong-convexity floors of the unary f_t.
struct OcoMemoryInstance {
    int n = 1;
    int h = 0;
    double radius = 1.0;
    std::vector<Matrix> Q;  // T of (h+1)n x (h+1)n, PSD
    std::vector<Vector> b;  // T of (h+1)n

    // derived at construction; S is the window-stacking map u -> (u,...,u)
    std::vector<Matrix> A;   // S'Q_t S
    std::vector<Vector> c;   // S'Q_t b_t
    std::vector<double> d;   // b_t' Q_t b_t
    std::vector<double> H;   // floor of lambda_min(2 S'Q_t S)
    std::vector<double> G;   // certified sup ||grad f_t|| over the ball
    double g_f = 0.0;        // max_t G[t]
    double g_c = 0.0;        // certified coordinate-wise constant, >= g_f

    long T() const { return static_cast<long>(Q.size()); }
    int dim() const { return n * (h + 1); }
    double diameter() const { return 2.0 * radius; }
    BoundConstants constants() const;
};

/// Seeded random PSD instance. curvature_floor > 0 shifts every Q_t by
/// that multiple of the identity, pushing the unary floors to at least
/// 2 (h+1) curvature_floor.
OcoMemoryInstance random_ocom_instance(int n, int h, long T, unsigned long seed,
                                       double curvature_floor = 0.0);

/// window is oldest first with h+1 entries.
double instance_F(const OcoMemoryInstance& inst, long t, const std::vector<Vector>& window);
double instance_f(const OcoMemoryInstance& inst, long t, const Vector& u);
Vector instance_grad_f(const OcoMemoryInstance& inst, long t, const Vector& u);

/// argmin of u'M u + q'u over ||u|| <= radius for symmetric PSD M. Exact
/// trust-region solve: eigendecomposition plus bisection on the shift.
Vector min_quadratic_over_ball(const Matrix& M, const Vector& q, double radius);

struct OcomRunResult {
    double realized = 0.0;          // sum_{t=h+1}^T F_t(window)
    double comparator = 0.0;        // min_u sum_{t=h+1}^T f_t(u), exact
    double regret = 0.0;            // realized - comparator
    double bound_ocom = 0.0;        // memory-aware bound over t = 1..T
    double bound_oco = 0.0;         // memory-free bound with per-step G_t
    double max_drift_excess = 0.0;  // max_t ||u_{t+1}-u_t|| - eta_{t+1}(G_f + lambda_t D)
};

/// Runs the adaptive-gradient update over the instance from u_1 = 0 with
/// the given regularization stream (must match the horizon).
OcomRunResult run_ocom_protocol(const OcoMemoryInstance& inst, const std::vector<double>& lambda);

}  // namespace drclab
