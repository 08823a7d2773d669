#include "drclab/oco_harness.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace drclab {

namespace {

Matrix stacking_map(int n, int h) {
    Matrix S = Matrix::Zero((h + 1) * n, n);
    for (int k = 0; k <= h; ++k) S.block(k * n, 0, n, n) = Matrix::Identity(n, n);
    return S;
}

Vector stack_window(const std::vector<Vector>& window, int n, int h) {
    if (static_cast<int>(window.size()) != h + 1)
        throw std::invalid_argument("instance_F: window must hold h+1 decisions");
    Vector z((h + 1) * n);
    for (int k = 0; k <= h; ++k) {
        if (window[k].size() != n) throw std::invalid_argument("instance_F: bad decision size");
        z.segment(k * n, n) = window[k];
    }
    return z;
}

void check_step(const OcoMemoryInstance& inst, long t) {
    if (t < 1 || t > inst.T()) throw std::out_of_range("instance: step out of range");
}

}  // namespace

BoundConstants OcoMemoryInstance::constants() const {
    return BoundConstants::direct(g_f, g_c, diameter(), h);
}

OcoMemoryInstance random_ocom_instance(int n, int h, long T, unsigned long seed,
                                       double curvature_floor) {
    if (n < 1 || h < 0 || T < 1 || !(curvature_floor >= 0.0))
        throw std::invalid_argument("random_ocom_instance: bad shape");
    OcoMemoryInstance inst;
    inst.n = n;
    inst.h = h;
    inst.radius = 1.0;
    const int dim = inst.dim();
    const Matrix S = stacking_map(n, h);
    const double span = std::sqrt(static_cast<double>(h + 1));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double coordwise = 0.0;
    for (long t = 1; t <= T; ++t) {
        Matrix R(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) R(i, j) = gauss(rng);
        Matrix Q = (R.transpose() * R) / static_cast<double>(dim);
        Q += curvature_floor * Matrix::Identity(dim, dim);

        Vector b(dim);
        for (int i = 0; i < dim; ++i) b(i) = gauss(rng);
        const double cap = 1.5 * inst.radius * span * unif(rng);
        if (b.norm() > 0.0) b *= cap / b.norm();

        const Matrix A = S.transpose() * Q * S;
        const Vector c = S.transpose() * (Q * b);

        Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
        const double floor = std::max(0.0, 2.0 * eig.eigenvalues()(0) - 1e-10);

        const double reach = span * inst.radius + b.norm();
        const double grad_bound = 2.0 * (S.transpose() * Q).jacobiSvd().singularValues()(0) * reach;
        coordwise = std::max(coordwise, 2.0 * Q.jacobiSvd().singularValues()(0) * reach);

        inst.Q.push_back(std::move(Q));
        inst.b.push_back(std::move(b));
        inst.A.push_back(A);
        inst.c.push_back(c);
        inst.d.push_back(inst.b.back().dot(inst.Q.back() * inst.b.back()));
        inst.H.push_back(floor);
        inst.G.push_back(grad_bound);
        inst.g_f = std::max(inst.g_f, grad_bound);
    }
    inst.g_c = std::max(coordwise, inst.g_f);
    return inst;
}

double instance_F(const OcoMemoryInstance& inst, long t, const std::vector<Vector>& window) {
    check_step(inst, t);
    const Vector v = stack_window(window, inst.n, inst.h) - inst.b[t - 1];
    return v.dot(inst.Q[t - 1] * v);
}

double instance_f(const OcoMemoryInstance& inst, long t, const Vector& u) {
    check_step(inst, t);
    if (u.size() != inst.n) throw std::invalid_argument("instance_f: bad decision size");
    const std::size_t i = static_cast<std::size_t>(t - 1);
    return u.dot(inst.A[i] * u) - 2.0 * inst.c[i].dot(u) + inst.d[i];
}

Vector instance_grad_f(const OcoMemoryInstance& inst, long t, const Vector& u) {
    check_step(inst, t);
    if (u.size() != inst.n) throw std::invalid_argument("instance_grad_f: bad decision size");
    const std::size_t i = static_cast<std::size_t>(t - 1);
    return 2.0 * (inst.A[i] * u - inst.c[i]);
}

Vector min_quadratic_over_ball(const Matrix& M, const Vector& q, double radius) {
    if (M.rows() != M.cols() || M.rows() != q.size())
        throw std::invalid_argument("min_quadratic_over_ball: shape mismatch");
    if (!(radius > 0.0)) throw std::invalid_argument("min_quadratic_over_ball: radius <= 0");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
    const Vector lam = eig.eigenvalues();
    const Matrix& V = eig.eigenvectors();
    const Vector qt = V.transpose() * q;
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;

    // unconstrained minimum norm solution, when it exists
    Vector u0 = Vector::Zero(q.size());
    bool consistent = true;
    for (int i = 0; i < q.size(); ++i) {
        if (lam(i) > tol)
            u0(i) = -qt(i) / (2.0 * lam(i));
        else if (std::abs(qt(i)) > 1e-10 * std::max(1.0, q.norm()))
            consistent = false;
    }
    if (consistent && u0.norm() <= radius) return V * u0;

    // boundary: u(mu)_i = -qt_i / (2(lam_i + mu)), ||u(mu)|| decreasing in mu
    const auto norm_sq = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) {
            const double den = 2.0 * (lam(i) + mu);
            const double x = qt(i) / den;
            s += x * x;
        }
        return s;
    };
    double lo = 0.0, hi = q.norm() / (2.0 * radius) + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (norm_sq(mid) > radius * radius)
            lo = mid;
        else
            hi = mid;
    }
    Vector u(q.size());
    for (int i = 0; i < q.size(); ++i) u(i) = -qt(i) / (2.0 * (lam(i) + hi));
    return V * u;
}

OcomRunResult run_ocom_protocol(const OcoMemoryInstance& inst, const std::vector<double>& lambda) {
    const long T = inst.T();
    if (static_cast<long>(lambda.size()) != T)
        throw std::invalid_argument("run_ocom_protocol: schedule length mismatch");
    for (long t = 1; t < T; ++t)
        if (lambda[t] > lambda[t - 1])
            throw std::invalid_argument("run_ocom_protocol: schedule must be non-increasing");

    const double r = inst.radius;
    const auto ball = [r](const Vector& v) {
        const double nv = v.norm();
        return nv <= r ? v : Vector((r / nv) * v);
    };

    OcomRunResult out;
    StepState state;
    std::vector<Vector> decisions;
    decisions.reserve(static_cast<std::size_t>(T));
    Vector u = Vector::Zero(inst.n);

    for (long t = 1; t <= T; ++t) {
        decisions.push_back(u);
        if (t >= inst.h + 1) {
            std::vector<Vector> window(decisions.end() - (inst.h + 1), decisions.end());
            out.realized += instance_F(inst, t, window);
        }
        const Vector grad = instance_grad_f(inst, t, u);
        const std::size_t i = static_cast<std::size_t>(t - 1);
        const Vector next = oco_update(u, grad, inst.H[i], lambda[i], state, ball);
        const double allowed =
            step_rate(state) * (inst.g_f + lambda[i] * inst.diameter());
        out.max_drift_excess = std::max(out.max_drift_excess, (next - u).norm() - allowed);
        u = next;
    }

    Matrix M = Matrix::Zero(inst.n, inst.n);
    Vector q = Vector::Zero(inst.n);
    double constant = 0.0;
    for (long t = inst.h + 1; t <= T; ++t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        M += inst.A[i];
        q -= 2.0 * inst.c[i];
        constant += inst.d[i];
    }
    const Vector best = min_quadratic_over_ball(M, q, r);
    out.comparator = best.dot(M * best) + q.dot(best) + constant;
    out.regret = out.realized - out.comparator;
    out.bound_ocom = regret_bound_ocom(inst.constants(), inst.H, lambda);
    out.bound_oco = regret_bound_oco(inst.diameter(), inst.G, inst.H, lambda);
    return out;
}

}  // namespace drclab
