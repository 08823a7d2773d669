#pragma once

#include <vector>

#include "drclab/types.hpp"

namespace drclab {

/// m-block controller parameter M^[0..m-1], each block d_u x d_y, with a
/// stacked vector form P laid out row-major inside each block:
/// P(s*q + j*d_y + k) = M^[s](j, k), q = d_u*d_y.
class DrcParams {
  public:
    DrcParams(int m, int d_u, int d_y);  // zero blocks
    explicit DrcParams(std::vector<Matrix> blocks);

    static DrcParams from_vector(const Vector& P, int m, int d_u, int d_y);

    int m() const { return static_cast<int>(blocks_.size()); }
    int d_u() const { return du_; }
    int d_y() const { return dy_; }

    const Matrix& block(int s) const { return blocks_[s]; }
    Matrix& block(int s) { return blocks_[s]; }

    Vector vectorize() const;

    /// sum_s ||M^[s]||_F
    double group_norm_sum() const;

  private:
    int du_, dy_;
    std::vector<Matrix> blocks_;
};

/// Feasible set {P : sum_s ||M^[s]||_F <= radius}. project() is the exact
/// Euclidean projection: the group-norm vector is projected onto the l1
/// ball (sorted threshold) and each block is rescaled accordingly.
class DrcConstraintSet {
  public:
    DrcConstraintSet(int m, int d_u, int d_y, double radius);

    int m() const { return m_; }
    int d_u() const { return du_; }
    int d_y() const { return dy_; }
    double radius() const { return radius_; }
    int dim() const { return m_ * du_ * dy_; }

    bool contains(const Vector& P, double tol = 1e-9) const;
    Vector project(const Vector& P) const;
    DrcParams project(const DrcParams& P) const;

    /// D = 2 sqrt(min(d_u, d_y)) * radius
    double diameter() const;

  private:
    int m_, du_, dy_;
    double radius_;
};

/// u_t = sum_{s=0}^{m-1} M^[s] y^nat_{t-s}. ynat_recent is newest first
/// (entry 0 is y^nat_t); entries beyond its length count as zero, which
/// covers the zero-padded steps t < m.
Vector control_input(const DrcParams& M, const std::vector<Vector>& ynat_recent);

/// D = 2 sqrt(min(d_u, d_y)) R_M
double drc_diameter(int d_u, int d_y, double r_m);

}  // namespace drclab
