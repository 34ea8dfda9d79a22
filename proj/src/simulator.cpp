#include "safe_smc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace safe_smc {

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInputError("dt must be positive");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidInputError("horizon must be positive");
    }
    if (dt > horizon) {
        throw InvalidInputError("dt exceeds the horizon");
    }
    if (record_stride < 1) {
        throw InvalidInputError("record stride must be >= 1");
    }
    if (gamma < 0.0) {
        throw InvalidInputError("gamma must be nonnegative");
    }
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

namespace {

bool finite(const PlantState& s) {
    return s.x.allFinite() && s.xdot.allFinite();
}

PlantState advance(const PlantState& s, const StateDerivative& d, double h) {
    return {s.x + h * d.xdot, s.xdot + h * d.xddot};
}

struct Stepper {
    const UncertaintyModel& model;
    const ControlLaw& law;
    TrajectoryEvents& events;

    StateDerivative rhs(double t, const PlantState& s) const {
        const ControlSample c = law.evaluate(t, s);
        note(t, c);
        return closed_loop_rhs(model, c.u, t, s);
    }

    void note(double t, const ControlSample& c) const {
        if (c.clamped) {
            events.clamp_times.push_back(t);
        }
        if (c.singular_gradient) {
            events.singular_gradient_times.push_back(t);
        }
    }

    // k1 reuses the control already evaluated at (t, s).
    PlantState step(Scheme scheme, double t, double dt, const PlantState& s, const Vector& u0) const {
        const StateDerivative k1 = closed_loop_rhs(model, u0, t, s);
        if (scheme == Scheme::euler) {
            return advance(s, k1, dt);
        }
        const StateDerivative k2 = rhs(t + 0.5 * dt, advance(s, k1, 0.5 * dt));
        const StateDerivative k3 = rhs(t + 0.5 * dt, advance(s, k2, 0.5 * dt));
        const StateDerivative k4 = rhs(t + dt, advance(s, k3, dt));
        return {s.x + (dt / 6.0) * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot),
                s.xdot + (dt / 6.0) * (k1.xddot + 2.0 * k2.xddot + 2.0 * k3.xddot + k4.xddot)};
    }
};

}  // namespace

Trajectory simulate(const UncertaintyModel& model, ControlLaw& law, const FilterParams& filter,
                    const SimConfig& config, const PlantState& initial) {
    config.validate();
    if (initial.x.size() != filter.cbf.dim() || initial.xdot.size() != initial.x.size()) {
        throw InvalidInputError("initial state dimension does not match the model");
    }
    if (!finite(initial)) {
        throw DivergenceError("initial state is not finite", 0, 0.0);
    }

    const std::size_t steps = config.steps();
    const auto stride = static_cast<std::size_t>(config.record_stride);
    Trajectory traj;
    const std::size_t reserve = steps / stride + 2;
    for (auto* v : {&traj.t, &traj.sigma_norm, &traj.h, &traj.h_gamma, &traj.gain}) {
        v->reserve(reserve);
    }
    traj.x.reserve(reserve);
    traj.xdot.reserve(reserve);
    traj.u.reserve(reserve);

    Stepper stepper{model, law, traj.events};
    PlantState state = initial;
    for (std::size_t k = 0;; ++k) {
        // t_k = k dt
        const double t = static_cast<double>(k) * config.dt;
        law.observe_sample(t, state);
        const ControlSample c = law.evaluate(t, state);
        stepper.note(t, c);

        if (!traj.events.first_reach && c.sigma_norm <= config.tol_reach) {
            traj.events.first_reach = t;
        }
        if (k % stride == 0 || k == steps) {
            const double h = eval_h(filter.cbf, state.x);
            traj.t.push_back(t);
            traj.x.push_back(state.x);
            traj.xdot.push_back(state.xdot);
            traj.sigma_norm.push_back(c.sigma_norm);
            traj.h.push_back(h);
            traj.h_gamma.push_back(h + config.gamma);
            traj.gain.push_back(c.gain);
            traj.u.push_back(c.u);
        }
        if (k == steps) {
            break;
        }

        state = stepper.step(config.scheme, t, config.dt, state, c.u);
        if (!finite(state)) {
            std::ostringstream msg;
            msg << "state diverged at sample " << k + 1 << " (t = " << static_cast<double>(k + 1) * config.dt
                << ")";
            throw DivergenceError(msg.str(), k + 1, static_cast<double>(k + 1) * config.dt);
        }
    }

    traj.events.tau = law.switch_time();
    return traj;
}

std::vector<RunOutcome> batch_simulate(const UncertaintyModel& model, const FilterParams& filter,
                                       const SimConfig& config, const std::vector<PlantState>& initial,
                                       const ControlLawFactory& make_law, int parallel) {
    std::vector<RunOutcome> out(initial.size());
    auto run_one = [&](std::size_t i) {
        try {
            auto law = make_law(i, initial[i]);
            out[i].trajectory = simulate(model, *law, filter, config, initial[i]);
        } catch (const DivergenceError& e) {
            out[i].error = e.what();
            out[i].diverged = true;
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    };

    const auto workers = static_cast<std::size_t>(std::max(1, parallel));
    if (workers == 1 || initial.size() < 2) {
        for (std::size_t i = 0; i < initial.size(); ++i) {
            run_one(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, initial.size()); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < initial.size(); i = next++) {
                run_one(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    return out;
}

}  // namespace safe_smc
