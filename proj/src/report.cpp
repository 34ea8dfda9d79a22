#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "safe_smc/scenario.hpp"

namespace safe_smc {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string vec_text(const Vector& v) {
    std::ostringstream out;
    out << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << (i ? ", " : "") << v[i];
    }
    out << ')';
    return out.str();
}

nlohmann::json vec_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void print_report(std::ostream& out, const char* name, const AssumptionReport& r) {
    out << name << ".samples = " << r.samples << '\n'
        << name << ".violations = " << r.violations.size() << '\n'
        << name << ".max_norm = " << r.max_norm << '\n'
        << name << ".max_excess = " << r.max_excess << '\n';
}

}  // namespace

void print_resolved(std::ostream& out, const ResolvedScenario& r, const AssumptionSummary* checks) {
    const Scenario& sc = r.scenario;
    const bool adaptive = sc.controller.kind == ControllerSpec::Kind::adaptive;
    out << "scenario = " << sc.name << '\n'
        << "controller = " << (adaptive ? "adaptive" : "smc") << '\n'
        << "alpha = " << sc.alpha << '\n'
        << "s = " << sc.s << '\n'
        << "mu = " << r.model.mu << '\n'
        << "gamma_db = " << r.model.gamma_db << '\n'
        << "eta = " << r.eta << (sc.controller.eta_literal ? " (literal)" : " (computed)") << '\n'
        << "eta.computed = " << r.eta_computed << '\n';
    if (adaptive) {
        out << "gamma = " << sc.controller.gamma << '\n'
            << "epsilon = " << *r.epsilon << (sc.controller.epsilon_literal ? " (literal)" : " (max admissible)")
            << '\n'
            << "epsilon.max_admissible = " << *r.epsilon_max << '\n'
            << "d_bar = " << sc.controller.d_bar << '\n';
    }
    out << "runs = " << r.runs.size() << '\n';
    for (const auto& run : r.runs) {
        const std::string p = "run." + run.label + ".";
        out << p << "x0 = " << vec_text(run.initial.x) << '\n'
            << p << "xdot0 = " << vec_text(run.initial.xdot) << '\n'
            << p << "h0 = " << run.h0 << '\n'
            << p << "sigma0 = " << run.sigma0 << '\n'
            << p << "alpha_c = " << run.alpha_c << '\n'
            << p << "kappa = " << run.kappa << (sc.controller.kappa_literal ? " (literal)" : " (eq8)") << '\n'
            << p << "kappa.eq8 = " << run.kappa_eq8 << '\n'
            << p << "reaching_bound = " << run.reaching_bound << '\n';
        if (run.step_warning) {
            out << p << "warning = kappa * dt >= |sigma0|\n";
        }
    }
    if (checks != nullptr) {
        print_report(out, "assumption1", checks->assumption1);
        print_report(out, "assumption2", checks->assumption2);
        out << "assumption2.min_lambda = " << checks->assumption2.min_lambda << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Eigen::Index n = traj.empty() ? 0 : traj.x.front().size();
    out << 't';
    for (Eigen::Index i = 1; i <= n; ++i) {
        out << ",x" << i;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
        out << ",v" << i;
    }
    out << ",sigma_norm,h,h_gamma,gain";
    for (Eigen::Index i = 1; i <= n; ++i) {
        out << ",u" << i;
    }
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << fmt17(traj.t[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            out << ',' << fmt17(traj.x[k][i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            out << ',' << fmt17(traj.xdot[k][i]);
        }
        out << ',' << fmt17(traj.sigma_norm[k]) << ',' << fmt17(traj.h[k]) << ',' << fmt17(traj.h_gamma[k]) << ','
            << fmt17(traj.gain[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            out << ',' << fmt17(traj.u[k][i]);
        }
        out << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw InvalidInputError("trajectory CSV is empty");
    }
    std::size_t columns = 1;
    for (char c : header) {
        columns += c == ',' ? 1 : 0;
    }
    if (columns < 5 || (columns - 5) % 3 != 0) {
        throw InvalidInputError("trajectory CSV header has an unexpected column count");
    }
    const auto n = static_cast<Eigen::Index>((columns - 5) / 3);

    Trajectory traj;
    std::string line;
    std::vector<double> row(columns);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const char* p = line.c_str();
        for (std::size_t c = 0; c < columns; ++c) {
            char* end = nullptr;
            row[c] = std::strtod(p, &end);
            if (end == p || (c + 1 < columns && *end != ',')) {
                throw InvalidInputError("malformed trajectory CSV row: " + line);
            }
            p = end + 1;
        }
        std::size_t c = 0;
        traj.t.push_back(row[c++]);
        traj.x.push_back(Eigen::Map<Vector>(row.data() + c, n));
        c += static_cast<std::size_t>(n);
        traj.xdot.push_back(Eigen::Map<Vector>(row.data() + c, n));
        c += static_cast<std::size_t>(n);
        traj.sigma_norm.push_back(row[c++]);
        traj.h.push_back(row[c++]);
        traj.h_gamma.push_back(row[c++]);
        traj.gain.push_back(row[c++]);
        traj.u.push_back(Eigen::Map<Vector>(row.data() + c, n));
    }
    return traj;
}

std::string report_json(const ResolvedScenario& r, const ScenarioReport& report) {
    using nlohmann::json;
    const Scenario& sc = r.scenario;
    json j;
    j["scenario"] = sc.name;
    j["controller"] = sc.controller.kind == ControllerSpec::Kind::adaptive ? "adaptive" : "smc";
    j["eta"] = r.eta;
    j["eta_computed"] = r.eta_computed;
    j["epsilon"] = opt_json(r.epsilon);
    j["epsilon_max_admissible"] = opt_json(r.epsilon_max);
    j["dt"] = sc.sim.dt;
    j["horizon"] = sc.sim.horizon;
    j["exit_code"] = report.exit_code;

    json runs = json::array();
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const RunReport& rr = report.runs[i];
        json run;
        run["index"] = i;
        run["label"] = rr.run.label;
        run["x0"] = vec_json(rr.run.initial.x);
        run["xdot0"] = vec_json(rr.run.initial.xdot);
        run["h0"] = rr.run.h0;
        run["sigma0"] = rr.run.sigma0;
        run["kappa"] = rr.run.kappa;
        run["kappa_eq8"] = rr.run.kappa_eq8;
        run["alpha_c"] = rr.run.alpha_c;
        run["reaching_bound"] = rr.run.reaching_bound;
        run["passed"] = rr.passed();
        if (rr.outcome.ok()) {
            const Trajectory& traj = *rr.outcome.trajectory;
            run["tau"] = opt_json(traj.events.tau);
            run["first_reach"] = opt_json(traj.events.first_reach);
            run["clamp_events"] = traj.events.clamp_times.size();
            run["singular_gradient_events"] = traj.events.singular_gradient_times.size();
            run["final_x"] = vec_json(traj.x.back());
            run["final_goal_distance"] = (traj.x.back() - r.filter.goal).norm();
            json monitors = json::array();
            for (const auto& v : rr.verdicts) {
                monitors.push_back({{"name", v.name},
                                    {"pass", v.pass},
                                    {"worst_margin", v.worst_margin},
                                    {"worst_time", v.worst_time},
                                    {"tolerance", v.tolerance},
                                    {"note", v.note}});
            }
            run["monitors"] = monitors;
        } else {
            run["error"] = rr.outcome.error;
            run["diverged"] = rr.outcome.diverged;
        }
        runs.push_back(run);
    }
    j["runs"] = runs;
    return j.dump(2);
}

}  // namespace safe_smc
