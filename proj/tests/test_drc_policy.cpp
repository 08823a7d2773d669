#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "drclab/drc_policy.hpp"

using namespace drclab;

namespace {

DrcParams random_params(int m, int du, int dy, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    DrcParams P(m, du, dy);
    for (int s = 0; s < m; ++s)
        for (int j = 0; j < du; ++j)
            for (int k = 0; k < dy; ++k) P.block(s)(j, k) = g(rng);
    return P;
}

Vector random_feasible(const DrcConstraintSet& set, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector P(set.dim());
    for (long i = 0; i < P.size(); ++i) P(i) = g(rng);
    const int q = set.d_u() * set.d_y();
    double sum = 0.0;
    for (int s = 0; s < set.m(); ++s) sum += P.segment(static_cast<long>(s) * q, q).norm();
    if (sum > 0.0) P *= unif(rng) * set.radius() / sum;
    return P;
}

// Multi-resolution grid search for the closest feasible point, m = 3,
// d_u = d_y = 1 (feasible set = l1 ball in R^3). Candidates are pulled
// back into the set by radial scaling, which preserves coverage near the
// optimum on the boundary.
Vector grid_projection_oracle(const Vector& p, double radius) {
    auto feasible = [&](Vector x) {
        const double n1 = x.cwiseAbs().sum();
        if (n1 > radius && n1 > 0.0) x *= radius / n1;
        return x;
    };
    Vector best = feasible(p);
    double best_d = (best - p).squaredNorm();
    Vector center = best;
    double span = 2.0 * radius;
    for (int level = 0; level < 18; ++level) {
        for (int i = -6; i <= 6; ++i)
            for (int j = -6; j <= 6; ++j)
                for (int k = -6; k <= 6; ++k) {
                    Vector cand(3);
                    cand << center(0) + span * i / 6.0, center(1) + span * j / 6.0,
                        center(2) + span * k / 6.0;
                    cand = feasible(cand);
                    const double d = (cand - p).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        best = cand;
                    }
                }
        center = best;
        span /= 3.0;
    }
    return best;
}

}  // namespace

TEST_CASE("stacking order and round trip") {
    SUBCASE("layout follows the row-major block convention") {
        const int m = 2, du = 2, dy = 3, q = du * dy;
        std::mt19937_64 rng(4);
        DrcParams M = random_params(m, du, dy, rng);
        Vector P = M.vectorize();
        REQUIRE(P.size() == m * q);
        for (int s = 0; s < m; ++s)
            for (int j = 0; j < du; ++j)
                for (int k = 0; k < dy; ++k) CHECK(P(s * q + j * dy + k) == M.block(s)(j, k));
    }
    SUBCASE("vectorize(devectorize(P)) = P exactly") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 20; ++trial) {
            const int m = 1 + static_cast<int>(rng() % 4);
            const int du = 1 + static_cast<int>(rng() % 3);
            const int dy = 1 + static_cast<int>(rng() % 3);
            Vector P(m * du * dy);
            std::normal_distribution<double> g(0.0, 1.0);
            for (long i = 0; i < P.size(); ++i) P(i) = g(rng);
            Vector back = DrcParams::from_vector(P, m, du, dy).vectorize();
            CHECK((back.array() == P.array()).all());
        }
    }
    SUBCASE("shape validation") {
        CHECK_THROWS_AS(DrcParams(0, 1, 1), std::invalid_argument);
        CHECK_THROWS_AS(DrcParams::from_vector(Vector::Zero(5), 2, 1, 2), std::invalid_argument);
        std::vector<Matrix> mixed{Matrix::Zero(2, 2), Matrix::Zero(1, 2)};
        CHECK_THROWS_AS(DrcParams(std::move(mixed)), std::invalid_argument);
    }
}

TEST_CASE("control_input") {
    std::mt19937_64 rng(11);
    SUBCASE("zero parameters give zero input") {
        DrcParams M(3, 2, 2);
        std::vector<Vector> hist(3, Vector::Ones(2));
        CHECK(control_input(M, hist).norm() == 0.0);
    }
    SUBCASE("identity single block echoes the newest natural output") {
        DrcParams M(1, 2, 2);
        M.block(0) = Matrix::Identity(2, 2);
        Vector y(2);
        y << 0.3, -1.2;
        std::vector<Vector> hist{y};
        CHECK((control_input(M, hist) - y).norm() == 0.0);
    }
    SUBCASE("matches a scalar triple-loop oracle") {
        const int m = 3, du = 2, dy = 3;
        for (int trial = 0; trial < 25; ++trial) {
            DrcParams M = random_params(m, du, dy, rng);
            std::vector<Vector> hist;
            std::normal_distribution<double> g(0.0, 1.0);
            for (int s = 0; s < m; ++s) {
                Vector y(dy);
                for (int k = 0; k < dy; ++k) y(k) = g(rng);
                hist.push_back(y);
            }
            Vector u = control_input(M, hist);
            for (int i = 0; i < du; ++i) {
                double oracle = 0.0;
                for (int s = 0; s < m; ++s)
                    for (int k = 0; k < dy; ++k) oracle += M.block(s)(i, k) * hist[s](k);
                CHECK(u(i) == doctest::Approx(oracle).epsilon(1e-12));
            }
        }
    }
    SUBCASE("short history is zero-padded") {
        DrcParams M = random_params(4, 2, 2, rng);
        std::vector<Vector> onestep{Vector::Ones(2)};
        Vector expect = M.block(0) * Vector::Ones(2);
        CHECK((control_input(M, onestep) - expect).norm() == 0.0);
        CHECK(control_input(M, {}).norm() == 0.0);
    }
    SUBCASE("linear in P") {
        const int m = 2, du = 2, dy = 2;
        for (int trial = 0; trial < 25; ++trial) {
            DrcParams P1 = random_params(m, du, dy, rng);
            DrcParams P2 = random_params(m, du, dy, rng);
            std::normal_distribution<double> g(0.0, 1.0);
            const double a = g(rng), b = g(rng);
            std::vector<Vector> hist;
            for (int s = 0; s < m; ++s) {
                Vector y(dy);
                for (int k = 0; k < dy; ++k) y(k) = g(rng);
                hist.push_back(y);
            }
            DrcParams mix = DrcParams::from_vector(a * P1.vectorize() + b * P2.vectorize(), m, du,
                                                   dy);
            Vector lhs = control_input(mix, hist);
            Vector rhs = a * control_input(P1, hist) + b * control_input(P2, hist);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("projection") {
    std::mt19937_64 rng(21);
    SUBCASE("interior points are returned unchanged") {
        DrcConstraintSet set(3, 2, 2, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            Vector P = random_feasible(set, rng);
            // random_feasible scales into the interior almost surely
            Vector proj = set.project(P);
            CHECK((proj.array() == P.array()).all());
        }
    }
    SUBCASE("single group reduces to the ball shrink") {
        DrcConstraintSet set(1, 2, 3, 1.5);
        std::normal_distribution<double> g(0.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vector P(set.dim());
            for (long i = 0; i < P.size(); ++i) P(i) = g(rng);
            Vector expect = P * std::min(1.0, set.radius() / P.norm());
            CHECK((set.project(P) - expect).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("matches the brute-force grid oracle (m=3, scalar blocks)") {
        DrcConstraintSet set(3, 1, 1, 1.0);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            Vector P(3);
            P << g(rng), g(rng), g(rng);
            Vector fast = set.project(P);
            Vector slow = grid_projection_oracle(P, set.radius());
            CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-5);
        }
    }
    SUBCASE("feasibility, idempotence, non-expansiveness") {
        DrcConstraintSet set(4, 2, 2, 1.0);
        std::normal_distribution<double> g(0.0, 1.5);
        for (int trial = 0; trial < 2000; ++trial) {
            Vector P1(set.dim()), P2(set.dim());
            for (long i = 0; i < P1.size(); ++i) P1(i) = g(rng);
            for (long i = 0; i < P2.size(); ++i) P2(i) = g(rng);
            Vector q1 = set.project(P1);
            Vector q2 = set.project(P2);
            CHECK(set.contains(q1, 1e-9));
            CHECK((set.project(q1) - q1).norm() < 1e-9);
            CHECK((q1 - q2).norm() <= (P1 - P2).norm() + 1e-9);
        }
    }
    SUBCASE("projection minimizes distance among feasible points") {
        DrcConstraintSet set(3, 2, 2, 1.0);
        std::normal_distribution<double> g(0.0, 1.5);
        for (int trial = 0; trial < 10; ++trial) {
            Vector P(set.dim());
            for (long i = 0; i < P.size(); ++i) P(i) = g(rng);
            Vector proj = set.project(P);
            const double d_proj = (P - proj).norm();
            for (int k = 0; k < 1000; ++k) {
                Vector Q = random_feasible(set, rng);
                CHECK(d_proj <= (P - Q).norm() + 1e-9);
            }
        }
    }
    SUBCASE("zero radius collapses to the origin") {
        DrcConstraintSet set(2, 1, 2, 0.0);
        Vector P(4);
        P << 1.0, -2.0, 3.0, 0.5;
        CHECK(set.project(P).norm() == 0.0);
    }
}

TEST_CASE("diameter") {
    CHECK(drc_diameter(1, 1, 2.0) == doctest::Approx(4.0));
    CHECK(drc_diameter(4, 1, 1.0) == doctest::Approx(2.0));
    CHECK(drc_diameter(3, 2, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
    for (double r : {0.5, 1.0, 2.0, 8.0})
        CHECK(drc_diameter(2, 3, r) == doctest::Approx(r * drc_diameter(2, 3, 1.0)));
    CHECK_THROWS_AS(drc_diameter(0, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(drc_diameter(1, 1, 0.0), std::invalid_argument);
}
