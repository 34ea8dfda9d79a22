#include "safe_smc/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace safe_smc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tracks the smallest margin and where it happened.
struct Worst {
    double margin = kInf;
    double time = 0.0;

    void update(double m, double t) {
        if (m < margin) {
            margin = m;
            time = t;
        }
    }
};

MonitorVerdict finish(std::string name, const Worst& w, double tol) {
    MonitorVerdict v;
    v.name = std::move(name);
    v.tolerance = tol;
    v.worst_margin = w.margin == kInf ? 0.0 : w.margin;
    v.worst_time = w.time;
    v.pass = v.worst_margin >= -tol;
    return v;
}

std::size_t sample_at(const Trajectory& traj, double t) {
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - traj.t.begin(),
                                                             static_cast<std::ptrdiff_t>(traj.size()) - 1));
}

}  // namespace

MonitorVerdict monitor_safety(const Trajectory& traj, const ObstacleCbf& cbf, double gamma, double tol_h) {
    if (gamma < 0.0) {
        throw InvalidInputError("gamma must be nonnegative");
    }
    Worst w;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        w.update(eval_h(cbf, traj.x[i]) + gamma, traj.t[i]);
    }
    std::ostringstream name;
    name << "safety(gamma=" << gamma << ")";
    return finish(name.str(), w, tol_h);
}

double reaching_time_bound(double sigma0_norm, double kappa) {
    return std::numbers::sqrt2 * sigma0_norm / kappa;
}

std::optional<double> measured_reaching_time(const Trajectory& traj, double threshold) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.sigma_norm[i] <= threshold) {
            return traj.t[i];
        }
    }
    return std::nullopt;
}

MonitorVerdict monitor_reaching(const Trajectory& traj, const ReachingCheck& check) {
    if (!(check.kappa > 0.0) || !(check.dt > 0.0)) {
        throw InvalidInputError("reaching check needs kappa > 0 and dt > 0");
    }
    const double tol_reach = check.tol_reach > 0.0 ? check.tol_reach : 50.0 * check.kappa * check.dt;
    const double tol_T = check.tol_T > 0.0 ? check.tol_T : 10.0 * check.dt;
    if (traj.empty()) {
        MonitorVerdict v;
        v.name = "reaching";
        v.note = "empty trajectory";
        return v;
    }

    const double sigma0 = traj.sigma_norm.front();
    const double rate = check.kappa / std::numbers::sqrt2;
    const double t_end = traj.events.tau.value_or(kInf);

    Worst w;
    for (std::size_t i = 0; i < traj.size() && traj.t[i] <= t_end; ++i) {
        const double envelope = std::max(0.0, sigma0 - rate * traj.t[i]);
        w.update(envelope - traj.sigma_norm[i], traj.t[i]);
    }
    MonitorVerdict v = finish("reaching", w, tol_reach);

    std::ostringstream note;
    if (sigma0 <= check.tol_sigma) {
        note << "starts on the manifold, T = 0";
        v.note = note.str();
        return v;
    }

    double level = check.tol_sigma;
    std::optional<double> reached;
    if (traj.events.tau) {
        reached = traj.events.tau;
        level = traj.sigma_norm[sample_at(traj, *traj.events.tau)];
    } else {
        reached = measured_reaching_time(traj, check.tol_sigma);
    }
    const double bound = std::numbers::sqrt2 * std::max(0.0, sigma0 - level) / check.kappa;
    if (!reached) {
        if (traj.t.back() < bound + tol_T) {
            note << "not reached before the horizon " << traj.t.back() << ", which ends before the bound " << bound;
        } else {
            v.pass = false;
            note << "manifold never reached; bound " << bound;
        }
    } else {
        const double time_margin = bound + tol_T - *reached;
        note << "reached at " << *reached << ", bound " << bound;
        if (time_margin < 0.0) {
            v.pass = false;
            if (time_margin < v.worst_margin) {
                v.worst_margin = time_margin;
                v.worst_time = *reached;
            }
        }
    }
    v.note = note.str();
    return v;
}

MonitorVerdict monitor_hc(const Trajectory& traj, const ObstacleCbf& cbf, const HcCheck& check) {
    if (!(check.alpha > 0.0) || !(check.alpha_c > 0.0) || check.gamma < 0.0 || !(check.dt > 0.0)) {
        throw InvalidInputError("h_c check needs alpha, alpha_c, dt > 0 and gamma >= 0");
    }
    const double tol = check.tol_hc > 0.0 ? check.tol_hc : 1e-4 + 10.0 * check.dt;
    std::ostringstream name;
    name << "h_c(gamma=" << check.gamma << ")";
    if (traj.empty()) {
        MonitorVerdict v;
        v.name = name.str();
        v.note = "empty trajectory";
        return v;
    }

    auto hc = [&](std::size_t i) {
        const double s = traj.sigma_norm[i];
        return -0.5 * s * s + check.alpha_c * (eval_h(cbf, traj.x[i]) + check.gamma);
    };
    const double hc0 = hc(0);
    if (!(hc0 > 0.0)) {
        throw InitialConditionError("h_c(x0) <= 0: initial state violates the safe-reaching precondition");
    }

    double t_end = kInf;
    if (traj.events.tau) {
        t_end = *traj.events.tau;
    } else if (auto reach = measured_reaching_time(traj, check.tol_sigma)) {
        t_end = *reach;
    }

    Worst w;
    for (std::size_t i = 0; i < traj.size() && traj.t[i] <= t_end; ++i) {
        w.update(hc(i) - hc0 * std::exp(-check.alpha * traj.t[i]), traj.t[i]);
    }
    MonitorVerdict v = finish(name.str(), w, tol);
    std::ostringstream note;
    note << "checked on [0, " << (t_end == kInf ? traj.t.back() : t_end) << "]";
    v.note = note.str();
    return v;
}

MonitorVerdict monitor_epsilon_containment(const Trajectory& traj, double epsilon, double tol_eps) {
    if (!(epsilon > 0.0)) {
        throw InvalidInputError("epsilon must be positive");
    }
    const double tol = tol_eps >= 0.0 ? tol_eps : 0.05 * epsilon;
    if (!traj.events.tau) {
        MonitorVerdict v;
        v.name = "epsilon_containment";
        v.tolerance = tol;
        v.note = "no switch";
        if (!traj.events.clamp_times.empty()) {
            v.pass = false;
            v.worst_time = traj.events.clamp_times.front();
            v.note = "clamp event without switch";
        }
        return v;
    }

    Worst w;
    for (std::size_t i = sample_at(traj, *traj.events.tau); i < traj.size(); ++i) {
        w.update(epsilon - traj.sigma_norm[i], traj.t[i]);
    }
    MonitorVerdict v = finish("epsilon_containment", w, tol);
    // Strict inequality: touching epsilon + tol is already outside.
    if (v.worst_margin <= -tol) {
        v.pass = false;
    }
    std::ostringstream note;
    note << "tau = " << *traj.events.tau;
    if (!traj.events.clamp_times.empty()) {
        v.pass = false;
        v.worst_time = traj.events.clamp_times.front();
        note << "; barrier gain clamped at t = " << traj.events.clamp_times.front();
    }
    v.note = note.str();
    return v;
}

}  // namespace safe_smc
