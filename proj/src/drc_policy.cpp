#include "drclab/drc_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drclab {

DrcParams::DrcParams(int m, int d_u, int d_y) : du_(d_u), dy_(d_y) {
    if (m < 1 || d_u < 1 || d_y < 1)
        throw std::invalid_argument("DrcParams dimensions must be positive");
    blocks_.assign(m, Matrix::Zero(d_u, d_y));
}

DrcParams::DrcParams(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw std::invalid_argument("DrcParams needs at least one block");
    du_ = static_cast<int>(blocks_[0].rows());
    dy_ = static_cast<int>(blocks_[0].cols());
    if (du_ < 1 || dy_ < 1) throw std::invalid_argument("DrcParams dimensions must be positive");
    for (const auto& b : blocks_)
        if (b.rows() != du_ || b.cols() != dy_)
            throw std::invalid_argument("DrcParams blocks must share dimensions");
}

DrcParams DrcParams::from_vector(const Vector& P, int m, int d_u, int d_y) {
    if (P.size() != static_cast<long>(m) * d_u * d_y)
        throw std::invalid_argument("stacked vector length does not match (m, d_u, d_y)");
    DrcParams out(m, d_u, d_y);
    const int q = d_u * d_y;
    for (int s = 0; s < m; ++s)
        for (int j = 0; j < d_u; ++j)
            for (int k = 0; k < d_y; ++k) out.blocks_[s](j, k) = P(s * q + j * d_y + k);
    return out;
}

Vector DrcParams::vectorize() const {
    const int q = du_ * dy_;
    Vector P(static_cast<long>(m()) * q);
    for (int s = 0; s < m(); ++s)
        for (int j = 0; j < du_; ++j)
            for (int k = 0; k < dy_; ++k) P(s * q + j * dy_ + k) = blocks_[s](j, k);
    return P;
}

double DrcParams::group_norm_sum() const {
    double sum = 0.0;
    for (const auto& b : blocks_) sum += b.norm();
    return sum;
}

DrcConstraintSet::DrcConstraintSet(int m, int d_u, int d_y, double radius)
    : m_(m), du_(d_u), dy_(d_y), radius_(radius) {
    if (m < 1 || d_u < 1 || d_y < 1)
        throw std::invalid_argument("constraint set dimensions must be positive");
    if (radius < 0.0) throw std::invalid_argument("constraint radius must be nonnegative");
}

bool DrcConstraintSet::contains(const Vector& P, double tol) const {
    if (P.size() != dim()) throw std::invalid_argument("stacked vector length mismatch");
    const int q = du_ * dy_;
    double sum = 0.0;
    for (int s = 0; s < m_; ++s) sum += P.segment(static_cast<long>(s) * q, q).norm();
    return sum <= radius_ + tol;
}

Vector DrcConstraintSet::project(const Vector& P) const {
    if (P.size() != dim()) throw std::invalid_argument("stacked vector length mismatch");
    const int q = du_ * dy_;
    std::vector<double> norms(m_);
    double total = 0.0;
    for (int s = 0; s < m_; ++s) {
        norms[s] = P.segment(static_cast<long>(s) * q, q).norm();
        total += norms[s];
    }
    if (total <= radius_) return P;

    // tau >= 0 with sum_s max(norms[s] - tau, 0) = radius: project the
    // norm vector onto the l1 ball, then shrink each block toward zero.
    std::vector<double> sorted(norms);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0, tau = 0.0;
    for (int k = 0; k < m_; ++k) {
        cumsum += sorted[k];
        const double cand = (cumsum - radius_) / (k + 1);
        if (k + 1 == m_ || cand >= sorted[k + 1]) {
            tau = cand;
            break;
        }
    }
    Vector out(P.size());
    for (int s = 0; s < m_; ++s) {
        const double scale = norms[s] > 0.0 ? std::max(norms[s] - tau, 0.0) / norms[s] : 0.0;
        out.segment(static_cast<long>(s) * q, q) = P.segment(static_cast<long>(s) * q, q) * scale;
    }
    return out;
}

DrcParams DrcConstraintSet::project(const DrcParams& P) const {
    if (P.m() != m_ || P.d_u() != du_ || P.d_y() != dy_)
        throw std::invalid_argument("parameter shape does not match the constraint set");
    return DrcParams::from_vector(project(P.vectorize()), m_, du_, dy_);
}

double DrcConstraintSet::diameter() const { return drc_diameter(du_, dy_, radius_); }

Vector control_input(const DrcParams& M, const std::vector<Vector>& ynat_recent) {
    Vector u = Vector::Zero(M.d_u());
    const int upto = std::min<int>(M.m(), static_cast<int>(ynat_recent.size()));
    for (int s = 0; s < upto; ++s) {
        if (ynat_recent[s].size() != M.d_y())
            throw std::invalid_argument("natural-output dimension mismatch");
        u += M.block(s) * ynat_recent[s];
    }
    return u;
}

double drc_diameter(int d_u, int d_y, double r_m) {
    if (d_u < 1 || d_y < 1 || r_m <= 0.0)
        throw std::invalid_argument("diameter needs positive arguments");
    return 2.0 * std::sqrt(static_cast<double>(std::min(d_u, d_y))) * r_m;
}

}  // namespace drclab
