#pragma once

#include <cstdint>
#include <vector>

#include "drclab/types.hpp"

namespace drclab {

enum class LossKind { Quadratic, SmoothedAbsolute };

/// One adversarial convex loss over z = (y, u) with a certified curvature
/// floor and the scaled local Lipschitz certificate
/// |l(z) - l(z')| <= lipschitz_scale() * max(||z||, ||z'||, 1) * ||z - z'||.
class LossSpec {
  public:
    /// l(z) = (z - b)' Q (z - b). Q is symmetrized and must be PSD; the
    /// curvature floor is taken from its smallest eigenvalue.
    static LossSpec quadratic(Matrix Q, Vector b);
    /// Same, with a caller-declared curvature floor (must not exceed the
    /// spectral floor by more than 1e-9).
    static LossSpec quadratic(Matrix Q, Vector b, double declared_curvature);
    /// l(z) = (a'z - b)^2: rank-deficient quadratic, curvature 0 for dim >= 2.
    static LossSpec rank_one(Vector a, double b);
    /// l(z) = sum_i (sqrt((z_i - b_i)^2 + eps^2) - eps): smooth convex,
    /// non-quadratic; exercises the finite-difference gradient path.
    static LossSpec smoothed_absolute(Vector b, double eps);

    int dim() const { return static_cast<int>(b_.size()); }
    LossKind kind() const { return kind_; }
    bool is_quadratic() const { return kind_ == LossKind::Quadratic; }

    double value(const Vector& z) const;
    Vector gradient(const Vector& z) const;

    /// Certified floor on lambda_min of the Hessian (H^l_t).
    double curvature() const { return curvature_; }
    /// L in the Lipschitz certificate above.
    double lipschitz_scale() const { return lipschitz_; }

    /// Quadratic only: l(z) = (z - target)' quadratic_form (z - target),
    /// Hessian = 2 * quadratic_form.
    const Matrix& quadratic_form() const;
    const Vector& target() const { return b_; }

  private:
    LossSpec(LossKind kind, Matrix Q, Vector b, double eps, double curvature, double lipschitz)
        : kind_(kind),
          Q_(std::move(Q)),
          b_(std::move(b)),
          eps_(eps),
          curvature_(curvature),
          lipschitz_(lipschitz) {}

    LossKind kind_;
    Matrix Q_;  // quadratic only
    Vector b_;
    double eps_;  // smoothed-absolute only
    double curvature_;
    double lipschitz_;
};

/// Quadratics with curvature floor exactly H * t^(-alpha): rotating random
/// eigenbases, the smallest eigenvalue of the Hessian pinned to the floor,
/// and targets b_t drifting inside the unit ball. alpha = 0 gives the
/// constant-curvature (strongly convex) stream.
std::vector<LossSpec> decaying_curvature_sequence(double alpha, double H, long T, int dim,
                                                  std::uint64_t seed);

/// Rank-one quadratics (a_t' z - b_t)^2 with sign-flipping directions;
/// curvature 0 whenever dim >= 2.
std::vector<LossSpec> convex_only_sequence(long T, int dim, std::uint64_t seed);

/// The certified floor H^l_t of a spec.
double curvature(const LossSpec& spec);

}  // namespace drclab
