#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "drclab/adversary.hpp"

using namespace drclab;

namespace {

Vector randn(int d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = g(rng);
    return v;
}

Matrix random_psd(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix G(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) G(i, j) = g(rng);
    return G * G.transpose();
}

void check_convex_segments(const LossSpec& l, std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
        Vector z1 = randn(l.dim(), rng, 2.0);
        Vector z2 = randn(l.dim(), rng, 2.0);
        const double lam = unif(rng);
        const double lhs = l.value(lam * z1 + (1.0 - lam) * z2);
        const double rhs = lam * l.value(z1) + (1.0 - lam) * l.value(z2);
        CHECK(lhs <= rhs + 1e-9);
    }
}

void check_lipschitz_pairs(const LossSpec& l, std::mt19937_64& rng, int count, double radius) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
        Vector z1 = randn(l.dim(), rng);
        Vector z2 = randn(l.dim(), rng);
        if (z1.norm() > radius) z1 *= radius * unif(rng) / z1.norm();
        if (z2.norm() > radius) z2 *= radius * unif(rng) / z2.norm();
        const double R = std::max({z1.norm(), z2.norm(), 1.0});
        const double gap = std::abs(l.value(z1) - l.value(z2));
        CHECK(gap <= l.lipschitz_scale() * R * (z1 - z2).norm() + 1e-9);
    }
}

}  // namespace

TEST_CASE("quadratic loss spec") {
    std::mt19937_64 rng(31);
    SUBCASE("value and gradient") {
        Matrix Q(2, 2);
        Q << 2.0, 0.0, 0.0, 1.0;
        Vector b(2);
        b << 1.0, -1.0;
        auto l = LossSpec::quadratic(Q, b);
        Vector z(2);
        z << 2.0, 1.0;
        CHECK(l.value(z) == doctest::Approx(2.0 * 1.0 + 1.0 * 4.0));
        Vector g = l.gradient(z);
        CHECK(g(0) == doctest::Approx(4.0));
        CHECK(g(1) == doctest::Approx(4.0));
    }
    SUBCASE("identity form has curvature 2") {
        auto l = LossSpec::quadratic(Matrix::Identity(3, 3), Vector::Zero(3));
        CHECK(l.curvature() == doctest::Approx(2.0));
        CHECK(curvature(l) == doctest::Approx(2.0));
    }
    SUBCASE("curvature matches an independent eigen-solve") {
        for (int trial = 0; trial < 30; ++trial) {
            const int d = 2 + static_cast<int>(rng() % 3);
            Matrix Q = random_psd(d, rng);
            auto l = LossSpec::quadratic(Q, randn(d, rng));
            Eigen::SelfAdjointEigenSolver<Matrix> es(2.0 * Q);
            CHECK(l.curvature() == doctest::Approx(std::max(0.0, es.eigenvalues().minCoeff()))
                                       .epsilon(1e-10));
        }
    }
    SUBCASE("rejects indefinite forms and inflated floors") {
        Matrix Q(2, 2);
        Q << 1.0, 0.0, 0.0, -0.5;
        CHECK_THROWS_AS(LossSpec::quadratic(Q, Vector::Zero(2)), std::invalid_argument);
        CHECK_THROWS_AS(LossSpec::quadratic(Matrix::Identity(2, 2), Vector::Zero(2), 3.0),
                        std::invalid_argument);
    }
    SUBCASE("convexity and Lipschitz certificates") {
        for (int trial = 0; trial < 5; ++trial) {
            auto l = LossSpec::quadratic(random_psd(3, rng), randn(3, rng));
            check_convex_segments(l, rng, 200);
            check_lipschitz_pairs(l, rng, 200, 3.0);
        }
    }
}

TEST_CASE("rank-one loss spec") {
    std::mt19937_64 rng(37);
    SUBCASE("evaluates (a'z - b)^2") {
        Vector a(3);
        a << 1.0, 2.0, -1.0;
        auto l = LossSpec::rank_one(a, 0.5);
        Vector z(3);
        z << 1.0, 0.0, 1.0;
        CHECK(l.value(z) == doctest::Approx(std::pow(1.0 - 1.0 - 0.5, 2)));
    }
    SUBCASE("curvature 0 in dimension >= 2, full in dimension 1") {
        Vector a2(2);
        a2 << 1.0, 1.0;
        CHECK(LossSpec::rank_one(a2, 0.0).curvature() == 0.0);
        Vector a1(1);
        a1 << 3.0;
        CHECK(LossSpec::rank_one(a1, 0.0).curvature() == doctest::Approx(18.0));
    }
    SUBCASE("convexity and Lipschitz") {
        for (int trial = 0; trial < 5; ++trial) {
            auto l = LossSpec::rank_one(randn(3, rng), 0.3);
            check_convex_segments(l, rng, 200);
            check_lipschitz_pairs(l, rng, 200, 3.0);
        }
    }
}

TEST_CASE("smoothed absolute loss spec") {
    std::mt19937_64 rng(41);
    Vector b(2);
    b << 0.5, -0.5;
    auto l = LossSpec::smoothed_absolute(b, 0.1);
    SUBCASE("vanishes at the target and is nonnegative") {
        CHECK(l.value(b) == doctest::Approx(0.0));
        for (int k = 0; k < 100; ++k) CHECK(l.value(randn(2, rng, 2.0)) >= 0.0);
    }
    SUBCASE("is not quadratic and has no quadratic form") {
        CHECK(!l.is_quadratic());
        CHECK_THROWS_AS(l.quadratic_form(), std::logic_error);
    }
    SUBCASE("gradient components stay below 1") {
        for (int k = 0; k < 100; ++k) {
            Vector g = l.gradient(randn(2, rng, 3.0));
            CHECK(g.cwiseAbs().maxCoeff() <= 1.0);
        }
    }
    SUBCASE("convexity and Lipschitz") {
        check_convex_segments(l, rng, 300);
        check_lipschitz_pairs(l, rng, 300, 3.0);
    }
}

TEST_CASE("decaying curvature sequence") {
    const double H = 2.0, alpha = 0.25;
    auto seq = decaying_curvature_sequence(alpha, H, 50, 3, 7);
    REQUIRE(seq.size() == 50);
    SUBCASE("declared floors follow H t^-alpha exactly") {
        for (long t = 1; t <= 50; ++t)
            CHECK(seq[t - 1].curvature() == H * std::pow(static_cast<double>(t), -alpha));
    }
    SUBCASE("alpha = 0 gives a constant floor") {
        auto flat = decaying_curvature_sequence(0.0, 1.5, 20, 2, 9);
        for (const auto& l : flat) CHECK(l.curvature() == 1.5);
    }
    SUBCASE("hessian floor certified by eigen-decomposition") {
        for (const auto& l : seq) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(2.0 * l.quadratic_form());
            CHECK(es.eigenvalues().minCoeff() >= l.curvature() - 1e-9);
        }
    }
    SUBCASE("targets stay in the unit ball") {
        for (const auto& l : seq) CHECK(l.target().norm() <= 1.0 + 1e-12);
    }
    SUBCASE("seeded determinism") {
        auto again = decaying_curvature_sequence(alpha, H, 50, 3, 7);
        for (int t = 0; t < 50; ++t) {
            CHECK((again[t].quadratic_form().array() == seq[t].quadratic_form().array()).all());
            CHECK((again[t].target().array() == seq[t].target().array()).all());
        }
        auto other = decaying_curvature_sequence(alpha, H, 50, 3, 8);
        CHECK(!(other[0].target().array() == seq[0].target().array()).all());
    }
    SUBCASE("segment and pair certificates on every emitted loss") {
        std::mt19937_64 rng(3);
        for (int t = 0; t < 50; t += 10) {
            check_convex_segments(seq[t], rng, 100);
            check_lipschitz_pairs(seq[t], rng, 100, 2.5);
        }
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(decaying_curvature_sequence(-0.1, 1.0, 10, 2, 1), std::invalid_argument);
        CHECK_THROWS_AS(decaying_curvature_sequence(0.5, 0.0, 10, 2, 1), std::invalid_argument);
    }
}

TEST_CASE("convex-only sequence") {
    auto seq = convex_only_sequence(40, 3, 11);
    REQUIRE(seq.size() == 40);
    SUBCASE("zero declared curvature in dimension >= 2") {
        for (const auto& l : seq) CHECK(l.curvature() == 0.0);
    }
    SUBCASE("certificates hold") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 40; t += 8) {
            check_convex_segments(seq[t], rng, 100);
            check_lipschitz_pairs(seq[t], rng, 100, 2.5);
        }
    }
    SUBCASE("seeded determinism") {
        auto again = convex_only_sequence(40, 3, 11);
        for (int t = 0; t < 40; ++t)
            CHECK((again[t].target().array() == seq[t].target().array()).all());
    }
}
