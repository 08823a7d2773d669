#include "drclab/adversary.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace drclab {

namespace {

double spectral_norm_sym(const Matrix& Q) {
    return Q.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff();
}

double lambda_min_sym(const Matrix& Q) {
    return Q.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
}

}  // namespace

LossSpec LossSpec::quadratic(Matrix Q, Vector b) {
    Matrix S = 0.5 * (Q + Q.transpose());
    const double lmin = lambda_min_sym(S);
    return quadratic(std::move(Q), std::move(b), std::max(0.0, 2.0 * lmin));
}

LossSpec LossSpec::quadratic(Matrix Q, Vector b, double declared_curvature) {
    if (Q.rows() != Q.cols()) throw std::invalid_argument("quadratic form must be square");
    if (Q.rows() != b.size()) throw std::invalid_argument("target dimension mismatch");
    Matrix S = 0.5 * (Q + Q.transpose());
    const double lmin = lambda_min_sym(S);
    if (lmin < -1e-9) throw std::invalid_argument("quadratic form must be positive semidefinite");
    if (declared_curvature < 0.0) throw std::invalid_argument("curvature floor must be >= 0");
    if (declared_curvature > std::max(0.0, 2.0 * lmin) + 1e-9)
        throw std::invalid_argument("declared curvature exceeds the Hessian floor");
    const double lip = 2.0 * spectral_norm_sym(S) * (1.0 + b.norm());
    return LossSpec(LossKind::Quadratic, std::move(S), std::move(b), 0.0, declared_curvature,
                    lip);
}

LossSpec LossSpec::rank_one(Vector a, double b) {
    const double na2 = a.squaredNorm();
    if (na2 == 0.0) throw std::invalid_argument("rank-one direction must be nonzero");
    Matrix Q = a * a.transpose();
    Vector target = a * (b / na2);  // a' target = b
    const double declared = a.size() >= 2 ? 0.0 : 2.0 * na2;
    return quadratic(std::move(Q), std::move(target), declared);
}

LossSpec LossSpec::smoothed_absolute(Vector b, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("smoothing width must be positive");
    const double lip = std::sqrt(static_cast<double>(b.size()));
    return LossSpec(LossKind::SmoothedAbsolute, Matrix(), std::move(b), eps, 0.0, lip);
}

double LossSpec::value(const Vector& z) const {
    if (z.size() != b_.size()) throw std::invalid_argument("loss argument dimension mismatch");
    if (kind_ == LossKind::Quadratic) {
        Vector d = z - b_;
        return d.dot(Q_ * d);
    }
    double v = 0.0;
    for (long i = 0; i < z.size(); ++i) {
        const double d = z(i) - b_(i);
        v += std::sqrt(d * d + eps_ * eps_) - eps_;
    }
    return v;
}

Vector LossSpec::gradient(const Vector& z) const {
    if (z.size() != b_.size()) throw std::invalid_argument("loss argument dimension mismatch");
    if (kind_ == LossKind::Quadratic) return 2.0 * (Q_ * (z - b_));
    Vector g(z.size());
    for (long i = 0; i < z.size(); ++i) {
        const double d = z(i) - b_(i);
        g(i) = d / std::sqrt(d * d + eps_ * eps_);
    }
    return g;
}

const Matrix& LossSpec::quadratic_form() const {
    if (kind_ != LossKind::Quadratic)
        throw std::logic_error("quadratic_form is only defined for quadratic losses");
    return Q_;
}

std::vector<LossSpec> decaying_curvature_sequence(double alpha, double H, long T, int dim,
                                                  std::uint64_t seed) {
    if (alpha < 0.0) throw std::invalid_argument("decay exponent must be >= 0");
    if (H <= 0.0) throw std::invalid_argument("curvature scale must be positive");
    if (T < 1 || dim < 1) throw std::invalid_argument("T and dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<LossSpec> out;
    out.reserve(T);
    Vector b = Vector::Zero(dim);
    for (long t = 1; t <= T; ++t) {
        const double floor = 0.5 * H * std::pow(static_cast<double>(t), -alpha);
        Matrix G(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) G(i, j) = g(rng);
        Matrix U = Eigen::HouseholderQR<Matrix>(G).householderQ();
        Vector ev(dim);
        ev(0) = floor;
        const double hi = std::max(1.0, 2.0 * floor);
        for (int i = 1; i < dim; ++i) ev(i) = floor + (hi - floor) * unif(rng);
        Matrix Q = U * ev.asDiagonal() * U.transpose();
        Q = 0.5 * (Q + Q.transpose());

        for (int i = 0; i < dim; ++i) b(i) += 0.25 * g(rng);
        if (b.norm() > 1.0) b *= 1.0 / b.norm();

        out.push_back(LossSpec::quadratic(Q, b, H * std::pow(static_cast<double>(t), -alpha)));
    }
    return out;
}

std::vector<LossSpec> convex_only_sequence(long T, int dim, std::uint64_t seed) {
    if (T < 1 || dim < 1) throw std::invalid_argument("T and dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<LossSpec> out;
    out.reserve(T);
    for (long t = 1; t <= T; ++t) {
        Vector a(dim);
        double n = 0.0;
        do {
            for (int i = 0; i < dim; ++i) a(i) = g(rng);
            n = a.norm();
        } while (n == 0.0);
        a /= n;
        if (t % 2 == 0) a = -a;  // deterministic sign flips on top of the rotation
        out.push_back(LossSpec::rank_one(a, unif(rng)));
    }
    return out;
}

double curvature(const LossSpec& spec) { return spec.curvature(); }

}  // namespace drclab
