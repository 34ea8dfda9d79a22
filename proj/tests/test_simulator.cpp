#include <cmath>
#include <limits>

#include <doctest.h>

#include "setup.hpp"

using namespace safe_smc;
using fixtures::vec;

namespace {

class ZeroLaw : public ControlLaw {
public:
    ControlSample evaluate(double, const PlantState& s) const override { return {Vector::Zero(s.dim())}; }
};

/// u = -x - 2 xdot: smooth, globally stable.
class LinearLaw : public ControlLaw {
public:
    ControlSample evaluate(double, const PlantState& s) const override {
        return {Vector(-(s.x - fixtures::vec({3, 5})) - 2.0 * s.xdot)};
    }
};

class BlowUpLaw : public ControlLaw {
public:
    ControlSample evaluate(double, const PlantState& s) const override {
        return {Vector::Constant(s.dim(), std::numeric_limits<double>::infinity())};
    }
};

SimConfig config(double dt, double horizon, Scheme scheme = Scheme::rk4) {
    SimConfig c;
    c.dt = dt;
    c.horizon = horizon;
    c.scheme = scheme;
    return c;
}

}  // namespace

TEST_CASE("ballistic motion is exact with RK4") {
    ZeroLaw law;
    const Trajectory tr = simulate(fixtures::nominal_model(), law, fixtures::filter(), config(1e-3, 1.0),
                                   fixtures::state({0, 0}, {1, 0}));
    CHECK(tr.size() == 1001);
    CHECK(tr.t.back() == doctest::Approx(1.0));
    CHECK((tr.x.back() - vec({1, 0})).norm() <= 1e-9);
    for (std::size_t k = 1; k < tr.size(); ++k) {
        REQUIRE(tr.t[k] > tr.t[k - 1]);
    }
    // positions move affinely: x(t) = x0 + t xdot0
    for (std::size_t k = 0; k < tr.size(); k += 97) {
        CHECK((tr.x[k] - tr.t[k] * vec({1, 0})).norm() <= 1e-12);
    }
}

TEST_CASE("record stride keeps the endpoints") {
    ZeroLaw law;
    SimConfig c = config(1e-3, 1.0);
    c.record_stride = 300;
    const Trajectory tr = simulate(fixtures::nominal_model(), law, fixtures::filter(), c,
                                   fixtures::state({0, 0}, {1, 0}));
    CHECK(tr.size() == 5);
    CHECK(tr.t.front() == 0.0);
    CHECK(tr.t.back() == doctest::Approx(1.0));
    CHECK(tr.sigma_norm.size() == tr.size());
    CHECK(tr.u.size() == tr.size());
}

TEST_CASE("invalid configuration and divergence") {
    ZeroLaw zero;
    const PlantState st = fixtures::state({0, 0}, {1, 0});
    CHECK_THROWS_AS(simulate(fixtures::nominal_model(), zero, fixtures::filter(), config(0.0, 1.0), st),
                    InvalidInputError);
    CHECK_THROWS_AS(simulate(fixtures::nominal_model(), zero, fixtures::filter(), config(2.0, 1.0), st),
                    InvalidInputError);
    CHECK_THROWS_AS(simulate(fixtures::nominal_model(), zero, fixtures::filter(), config(1e-3, 1.0),
                             fixtures::state({0, 0, 0}, {1, 0, 0})),
                    InvalidInputError);

    BlowUpLaw blow;
    try {
        simulate(fixtures::nominal_model(), blow, fixtures::filter(), config(1e-3, 1.0), st);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.sample() == 1);
        CHECK(e.time() == doctest::Approx(1e-3));
    }
}

TEST_CASE("batch simulation") {
    const auto factory = [](std::size_t, const PlantState&) { return std::make_unique<LinearLaw>(); };
    CHECK(batch_simulate(fixtures::nominal_model(), fixtures::filter(), config(1e-3, 1.0), {}, factory).empty());

    const std::vector<PlantState> starts{fixtures::state({1, 0}, {0, 0}), fixtures::state({-2, 5}, {0, 1}),
                                         fixtures::state({1, 0}, {0, 0})};
    for (int parallel : {1, 3}) {
        const auto out =
            batch_simulate(fixtures::nominal_model(), fixtures::filter(), config(1e-3, 1.0), starts, factory, parallel);
        REQUIRE(out.size() == 3);
        for (std::size_t i = 0; i < out.size(); ++i) {
            REQUIRE(out[i].ok());
            CHECK(out[i].trajectory->x.front() == starts[i].x);
        }
        CHECK(fixtures::identical(*out[0].trajectory, *out[2].trajectory));
    }

    const auto mixed = [](std::size_t i, const PlantState&) -> std::unique_ptr<ControlLaw> {
        if (i == 1) {
            return std::make_unique<BlowUpLaw>();
        }
        return std::make_unique<LinearLaw>();
    };
    const auto out = batch_simulate(fixtures::nominal_model(), fixtures::filter(), config(1e-3, 1.0), starts, mixed);
    CHECK(out[0].ok());
    CHECK_FALSE(out[1].ok());
    CHECK(out[1].diverged);
    CHECK(out[2].ok());
}

TEST_CASE("explicit Euler converges at first order on a smooth run") {
    const PlantState st = fixtures::state({-2, 1}, {0.5, 0});
    auto final_x = [&](double dt) {
        LinearLaw law;
        return simulate(fixtures::nominal_model(), law, fixtures::filter(), config(dt, 2.0, Scheme::euler), st)
            .x.back();
    };
    LinearLaw fine_law;
    const Vector reference =
        simulate(fixtures::nominal_model(), fine_law, fixtures::filter(), config(1e-4, 2.0), st).x.back();
    const double e1 = (final_x(1e-2) - reference).norm();
    const double e2 = (final_x(5e-3) - reference).norm();
    const double e3 = (final_x(2.5e-3) - reference).norm();
    CHECK(e2 <= 10.0 * 5e-3);
    const double order = std::log2(e2 / e3);
    CHECK(order == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::log2(e1 / e2) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("first experiment: sigma decays at rate kappa / sqrt 2 and reaches in time") {
    Scenario sc = fixtures::bundled("fig2");
    sc.sim.horizon = 1.0;
    const ResolvedScenario r = resolve(sc);
    const ResolvedRun& run = r.runs.at(0);
    const Trajectory tr = fixtures::run_first(r);
    const double dt = sc.sim.dt;

    REQUIRE(tr.events.first_reach);
    CHECK(*tr.events.first_reach <= std::sqrt(2.0) * run.sigma0 / run.kappa + 10.0 * dt);

    const double slack = 50.0 * dt * run.kappa;
    for (std::size_t k = 0; k + 1 < tr.size() && tr.t[k + 1] <= *tr.events.first_reach; ++k) {
        REQUIRE(tr.sigma_norm[k + 1] <= tr.sigma_norm[k] - run.kappa / std::sqrt(2.0) * dt + slack);
    }
}

TEST_CASE("runs are bit-identical") {
    Scenario sc = fixtures::bundled("fig3");
    sc.sim.horizon = 0.5;
    const ResolvedScenario r = resolve(sc);
    const Trajectory a = fixtures::run_first(r);
    const Trajectory b = fixtures::run_first(r);
    CHECK(fixtures::identical(a, b));
    CHECK(a.events.tau);
}
