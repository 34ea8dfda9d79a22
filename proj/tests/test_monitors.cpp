#include <cmath>

#include <doctest.h>

#include "setup.hpp"

using namespace safe_smc;
using fixtures::vec;

namespace {

Trajectory synthetic(const std::vector<Vector>& xs, const std::vector<double>& sigma, double dt) {
    Trajectory tr;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        tr.t.push_back(static_cast<double>(k) * dt);
        tr.x.push_back(xs[k]);
        tr.xdot.push_back(Vector::Zero(xs[k].size()));
        tr.sigma_norm.push_back(sigma[k]);
        tr.h.push_back(0.0);
        tr.h_gamma.push_back(0.0);
        tr.gain.push_back(0.0);
        tr.u.push_back(Vector::Zero(xs[k].size()));
    }
    return tr;
}

Trajectory constant_at(const Vector& x, double sigma, std::size_t n, double dt) {
    return synthetic(std::vector<Vector>(n, x), std::vector<double>(n, sigma), dt);
}

/// |sigma| decaying linearly at `rate` to zero.
Trajectory linear_decay(double sigma0, double rate, double dt, std::size_t n) {
    std::vector<Vector> xs;
    std::vector<double> s;
    for (std::size_t k = 0; k < n; ++k) {
        xs.push_back(vec({1, 0}));
        s.push_back(std::max(0.0, sigma0 - rate * static_cast<double>(k) * dt));
    }
    return synthetic(xs, s, dt);
}

}  // namespace

TEST_CASE("safety monitor") {
    const ObstacleCbf cbf = fixtures::obstacle();
    const MonitorVerdict at_goal = monitor_safety(constant_at(vec({3, 5}), 0.0, 10, 0.1), cbf, 0.5);
    CHECK(at_goal.pass);
    CHECK(at_goal.worst_margin == doctest::Approx(eval_h(cbf, vec({3, 5})) + 0.5));

    std::vector<Vector> line;
    for (int k = 0; k <= 40; ++k) {
        line.push_back(vec({0.0 + 0.1 * k, 3.0}));
    }
    const MonitorVerdict through = monitor_safety(synthetic(line, std::vector<double>(41, 0.0), 0.1), cbf, 0.0);
    CHECK_FALSE(through.pass);
    CHECK(through.worst_margin == doctest::Approx(-1.0));
    CHECK(through.worst_time == doctest::Approx(2.0));
}

TEST_CASE("reaching monitor") {
    const double dt = 1e-3;
    // starting on the manifold passes trivially
    const MonitorVerdict on = monitor_reaching(constant_at(vec({1, 0}), 0.0, 100, dt), {1.0, dt});
    CHECK(on.pass);

    // decay exactly at kappa / sqrt 2 meets the envelope
    const double kappa = 2.0;
    const Trajectory tr = linear_decay(1.0, kappa / std::sqrt(2.0), dt, 2000);
    CHECK(monitor_reaching(tr, {kappa, dt}).pass);
    // checked against a doubled kappa the envelope is violated
    CHECK_FALSE(monitor_reaching(tr, {2.0 * kappa, dt}).pass);
    // and against a halved kappa it holds with room to spare
    CHECK(monitor_reaching(tr, {0.5 * kappa, dt}).pass);

    // never reaching fails once the horizon covers the bound
    const Trajectory stuck = constant_at(vec({1, 0}), 1.0, 3000, dt);
    CHECK_FALSE(monitor_reaching(stuck, {1.0, dt, 1e-3, 10.0}).pass);
    // a horizon shorter than the bound cannot show a timing violation
    const Trajectory short_run = linear_decay(1.0, 0.5 / std::sqrt(2.0), dt, 100);
    CHECK(monitor_reaching(short_run, {0.5, dt}).pass);
}

TEST_CASE("reaching bound helpers") {
    CHECK(reaching_time_bound(1.0, std::sqrt(2.0)) == doctest::Approx(1.0));
    CHECK(reaching_time_bound(0.0, 3.0) == 0.0);
    const Trajectory tr = linear_decay(1.0, 1.0, 0.01, 200);
    REQUIRE(measured_reaching_time(tr, 1e-3));
    CHECK(*measured_reaching_time(tr, 1e-3) == doctest::Approx(1.0).epsilon(0.011));
    CHECK_FALSE(measured_reaching_time(constant_at(vec({1, 0}), 1.0, 5, 0.1), 1e-3));
}

TEST_CASE("h_c monitor") {
    const ObstacleCbf cbf = fixtures::obstacle();
    // on the manifold inside C1
    const MonitorVerdict on = monitor_hc(constant_at(vec({1, 0}), 0.0, 100, 1e-3), cbf, {1.0, 0.1, 0.0, 1e-3});
    CHECK(on.pass);

    // h_c(0) <= 0 is rejected
    CHECK_THROWS_AS(monitor_hc(constant_at(vec({1, 0}), 10.0, 10, 1e-3), cbf, {1.0, 0.1, 0.0, 1e-3}),
                    InitialConditionError);

    // dropping towards the obstacle faster than e^{-alpha t} fails
    std::vector<Vector> xs;
    for (int k = 0; k <= 100; ++k) {
        xs.push_back(vec({0.019 * k, 3.0}));
    }
    const Trajectory fall = synthetic(xs, std::vector<double>(101, 1.0), 1e-3);
    CHECK_FALSE(monitor_hc(fall, cbf, {1.0, 1.0, 0.0, 1e-3}).pass);
}

TEST_CASE("epsilon containment monitor") {
    const double eps = 0.0781;
    Trajectory none = constant_at(vec({1, 0}), 0.5, 10, 0.1);
    const MonitorVerdict vacuous = monitor_epsilon_containment(none, eps);
    CHECK(vacuous.pass);
    CHECK(vacuous.note == "no switch");

    Trajectory inside = constant_at(vec({1, 0}), 0.5 * eps, 10, 0.1);
    inside.sigma_norm[0] = 1.0;
    inside.events.tau = 0.1;
    CHECK(monitor_epsilon_containment(inside, eps).pass);

    Trajectory escape = inside;
    escape.sigma_norm[7] = 1.2 * eps;
    const MonitorVerdict out = monitor_epsilon_containment(escape, eps);
    CHECK_FALSE(out.pass);
    CHECK(out.worst_time == doctest::Approx(0.7));

    Trajectory clamped = inside;
    clamped.events.clamp_times.push_back(0.55);
    const MonitorVerdict c = monitor_epsilon_containment(clamped, eps);
    CHECK_FALSE(c.pass);
    CHECK(c.worst_time == 0.55);
}

TEST_CASE("monitors are pure") {
    const Trajectory tr = linear_decay(1.0, 1.0, 1e-3, 500);
    const MonitorVerdict a = monitor_reaching(tr, {std::sqrt(2.0), 1e-3});
    const MonitorVerdict b = monitor_reaching(tr, {std::sqrt(2.0), 1e-3});
    CHECK(a.pass == b.pass);
    CHECK(a.worst_margin == b.worst_margin);
    CHECK(a.worst_time == b.worst_time);
    CHECK(a.note == b.note);
}

TEST_CASE("composition on the first experiment: reaching and h_c certify safety") {
    const ResolvedScenario r = resolve(fixtures::bundled("fig2"));
    const ResolvedRun& run = r.runs.at(0);
    const Trajectory tr = fixtures::run_first(r);
    const double dt = r.scenario.sim.dt;

    const MonitorVerdict reach = monitor_reaching(tr, {run.kappa, dt});
    const MonitorVerdict hc = monitor_hc(tr, r.filter.cbf, {1.0, run.alpha_c, 0.0, dt});
    REQUIRE(reach.pass);
    REQUIRE(hc.pass);
    // after the reach sigma stays in a chattering band
    const auto reached = measured_reaching_time(tr, 1e-3);
    REQUIRE(reached);
    double band = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.t[k] >= *reached) {
            band = std::max(band, tr.sigma_norm[k]);
        }
    }
    CHECK(band <= 1e-2);
    CHECK(monitor_safety(tr, r.filter.cbf, 0.0).pass);
}

TEST_CASE("composition on the second experiment: h_c before the switch and containment after") {
    const ResolvedScenario r = resolve(fixtures::bundled("fig3"));
    const ResolvedRun& run = r.runs.at(0);
    const Trajectory tr = fixtures::run_first(r);
    const double gamma = r.scenario.controller.gamma;

    REQUIRE(tr.events.tau);
    REQUIRE(monitor_hc(tr, r.filter.cbf, {1.0, run.alpha_c, gamma, r.scenario.sim.dt}).pass);
    REQUIRE(monitor_epsilon_containment(tr, *r.epsilon).pass);
    CHECK(*r.epsilon <= *r.epsilon_max + 5e-5);
    CHECK(monitor_safety(tr, r.filter.cbf, gamma).pass);
}

TEST_CASE("reaching time shrinks as the start approaches the manifold") {
    Scenario sc = fixtures::bundled("fig2");
    sc.sim.horizon = 0.5;
    sc.controller.kappa_literal = true;
    sc.controller.kappa_value = 3.0;
    const Vector x0 = vec({1, 0});
    const Vector v0 = v_total(fixtures::filter(), x0);
    sc.initial.clear();
    sc.initial_labels.clear();
    for (double c : {1.0, 0.5, 0.25, 0.1, 0.05}) {
        sc.initial.push_back({x0, v0 + c * vec({0.6, -0.8})});
        sc.initial_labels.push_back("c" + std::to_string(c));
    }
    const ResolvedScenario r = resolve(sc);
    const ScenarioReport report = run_resolved(r);
    double previous = 1e300;
    for (const auto& rr : report.runs) {
        REQUIRE(rr.outcome.ok());
        const auto t = measured_reaching_time(*rr.outcome.trajectory, 1e-3);
        REQUIRE(t);
        CHECK(*t < previous);
        previous = *t;
    }
    CHECK(previous <= 0.05);
}
