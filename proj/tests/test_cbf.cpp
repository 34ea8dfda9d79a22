#include <cmath>
#include <random>

#include <doctest.h>

#include "oracle.hpp"
#include "setup.hpp"

using namespace safe_smc;
using fixtures::vec;

TEST_CASE("h at hand-evaluated points") {
    const ObstacleCbf cbf = fixtures::obstacle();
    CHECK(eval_h(cbf, vec({1, 0})) == doctest::Approx(9.0));
    CHECK(eval_h(cbf, vec({2, 4})) == doctest::Approx(0.0));
    CHECK(eval_h(cbf, vec({2, 3})) == doctest::Approx(-1.0));
}

TEST_CASE("gradient at hand-evaluated points") {
    const ObstacleCbf cbf = fixtures::obstacle();
    CHECK((grad_h(cbf, vec({1, 0})) - vec({-2, -6})).norm() == 0.0);
    CHECK(grad_h(cbf, vec({2, 3})).norm() == 0.0);
    CHECK((grad_h(cbf, vec({3, 3})) - vec({2, 0})).norm() == 0.0);
}

TEST_CASE("safe set membership") {
    const ObstacleCbf cbf = fixtures::obstacle();
    CHECK(is_safe(cbf, vec({1, 0})));
    CHECK_FALSE(is_safe(cbf, vec({2, 3})));
    const Vector edge = vec({2, 3 + std::sqrt(0.5)});
    CHECK(eval_h(cbf, edge) == doctest::Approx(-0.5));
    CHECK(is_safe(cbf, edge, 0.5));
    CHECK_FALSE(is_safe(cbf, edge, 0.0));
    CHECK_THROWS_AS(is_safe(cbf, edge, -0.1), InvalidInputError);
}

TEST_CASE("eta over boxes") {
    const ObstacleCbf cbf = fixtures::obstacle();
    CHECK(compute_eta(cbf, fixtures::box()) == doctest::Approx(2.0 * std::sqrt(34.0)).epsilon(1e-12));
    CHECK(compute_eta(cbf, StateBox(vec({2, 3}), vec({2, 3}))) == 0.0);
    CHECK(compute_eta(cbf, StateBox(vec({1, 2}), vec({3, 4}))) == doctest::Approx(2.0 * std::sqrt(2.0)));
    // a fine grid never beats the corners
    CHECK(compute_eta(cbf, fixtures::box(), 101) == doctest::Approx(compute_eta(cbf, fixtures::box())));
}

TEST_CASE("invalid construction is rejected") {
    CHECK_THROWS_AS(ObstacleCbf(vec({0, 0}), 0.0), InvalidInputError);
    CHECK_THROWS_AS(ObstacleCbf(vec({0, 0}), -1.0), InvalidInputError);
    CHECK_THROWS_AS(StateBox(vec({1, 0}), vec({0, 1})), InvalidInputError);
    CHECK_THROWS_AS(StateBox(vec({0, 0}), vec({1, 1, 1})), InvalidInputError);
    CHECK_THROWS_AS(ClassKGain(0.0), InvalidInputError);
    CHECK_THROWS_AS(compute_eta(fixtures::obstacle(), fixtures::box(), 1), InvalidInputError);
}

TEST_CASE("property: h bounded below by -r^2, gradient matches finite differences") {
    const ObstacleCbf cbf = fixtures::obstacle();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-3.0, 6.0);
    std::uniform_real_distribution<double> uy(0.0, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const Vector x = vec({ux(rng), uy(rng)});
        CHECK(eval_h(cbf, x) >= -1.0);
        const Vector numeric = oracle::numeric_gradient([&](const Vector& p) { return eval_h(cbf, p); }, x, 1e-5);
        CHECK((grad_h(cbf, x) - numeric).norm() <= 1e-6);
        for (double gamma : {0.1, 0.5, 2.0}) {
            if (is_safe(cbf, x, 0.0)) {
                CHECK(is_safe(cbf, x, gamma));
            }
        }
    }
}

TEST_CASE("property: eta over a box holding the obstacle is at least 2r") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double r = 0.1 + u(rng);
        const ObstacleCbf cbf(vec({u(rng), u(rng)}), r);
        const Vector lo = cbf.center() - vec({r + u(rng), r + u(rng)});
        const Vector hi = cbf.center() + vec({r + u(rng), r + u(rng)});
        CHECK(compute_eta(cbf, StateBox(lo, hi)) >= 2.0 * r);
    }
}
