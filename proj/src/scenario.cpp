#include "safe_smc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace safe_smc {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

// Flat key tree: `dotted.key = value`, `#` starts a comment.
class KeyTree {
public:
    void add(const std::string& key, std::string value, int line) {
        if (key.rfind("initial.", 0) == 0) {
            const std::string label = key.substr(8);
            if (label.empty()) {
                throw ScenarioError(key, "initial condition needs a label");
            }
            for (const auto& [l, v] : initial_) {
                if (l == label) {
                    throw ScenarioError(key, "duplicate key (line " + std::to_string(line) + ")");
                }
            }
            initial_.emplace_back(label, Entry{std::move(value), line, true});
            return;
        }
        if (!entries_.emplace(key, Entry{std::move(value), line, false}).second) {
            throw ScenarioError(key, "duplicate key (line " + std::to_string(line) + ")");
        }
    }

    const std::string* raw(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return nullptr;
        }
        it->second.used = true;
        return &it->second.value;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const std::string* v = raw(key);
        return v ? *v : fallback;
    }

    std::string choice(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) {
        const std::string v = text(key, fallback);
        if (allowed.count(v) == 0) {
            std::string list;
            for (const auto& a : allowed) {
                list += (list.empty() ? "" : ", ") + a;
            }
            throw ScenarioError(key, "unknown value '" + v + "' (expected one of: " + list + ")");
        }
        return v;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const std::string* v = raw(key);
        if (!v) {
            if (!fallback) {
                throw ScenarioError(key, "required key is missing");
            }
            return *fallback;
        }
        return parse_number(key, *v);
    }

    Vector vector(const std::string& key, std::optional<Eigen::Index> size = std::nullopt) {
        const std::string* v = raw(key);
        if (!v) {
            throw ScenarioError(key, "required key is missing");
        }
        return parse_vector(key, *v, size);
    }

    const std::vector<std::pair<std::string, Entry>>& initial() const { return initial_; }

    void reject_unused() const {
        for (const auto& [k, e] : entries_) {
            if (!e.used) {
                throw ScenarioError(k, "unknown key (line " + std::to_string(e.line) + ")");
            }
        }
    }

    static double parse_number(const std::string& key, const std::string& text) {
        std::istringstream in(text);
        double x = 0.0;
        std::string rest;
        if (!(in >> x) || (in >> rest) || !std::isfinite(x)) {
            throw ScenarioError(key, "expected a finite number, got '" + text + "'");
        }
        return x;
    }

    static Vector parse_vector(const std::string& key, const std::string& text, std::optional<Eigen::Index> size) {
        std::istringstream in(text);
        std::vector<double> values;
        std::string token;
        while (in >> token) {
            values.push_back(parse_number(key, token));
        }
        if (values.empty()) {
            throw ScenarioError(key, "expected a list of numbers");
        }
        if (size && static_cast<Eigen::Index>(values.size()) != *size) {
            throw ScenarioError(key, "expected " + std::to_string(*size) + " numbers, got " +
                                         std::to_string(values.size()));
        }
        return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }

private:
    std::map<std::string, Entry> entries_;
    std::vector<std::pair<std::string, Entry>> initial_;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

DisturbanceSpec::Kind disturbance_kind(const std::string& name) {
    if (name == "constant") {
        return DisturbanceSpec::Kind::constant;
    }
    if (name == "sinusoidal") {
        return DisturbanceSpec::Kind::sinusoidal;
    }
    if (name == "piecewise_sinusoidal") {
        return DisturbanceSpec::Kind::piecewise_sinusoidal;
    }
    return DisturbanceSpec::Kind::zero;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& name) {
    KeyTree tree;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError("", "line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ScenarioError("", "line " + std::to_string(number) + ": empty key");
        }
        tree.add(key, trim(line.substr(eq + 1)), number);
    }

    Scenario sc;
    sc.name = tree.text("name", name);

    sc.obstacle_center = tree.vector("obstacle.center");
    const Eigen::Index n = sc.obstacle_center.size();
    sc.dim = static_cast<int>(n);
    sc.obstacle_radius = tree.number("obstacle.radius");
    sc.box_lower = tree.vector("box.lower", n);
    sc.box_upper = tree.vector("box.upper", n);
    sc.goal = tree.vector("filter.goal", n);
    sc.alpha = tree.number("filter.alpha", 1.0);
    sc.s = tree.number("filter.s", 0.5);

    PlantSpec& p = sc.plant;
    p.g_scale = tree.number("plant.g.scale", 1.0);
    const std::string db = tree.choice("plant.delta_b.kind", "zero", {"zero", "ones_sin"});
    p.delta_b_kind = db == "ones_sin" ? PlantSpec::DeltaBKind::ones_sin : PlantSpec::DeltaBKind::zero;
    p.delta_b_amplitude = tree.number("plant.delta_b.amplitude", 0.0);
    p.delta_b_componentwise =
        tree.choice("plant.delta_b.argument", "first", {"first", "componentwise"}) == "componentwise";

    const std::string dk =
        tree.choice("plant.delta.kind", "zero", {"zero", "constant", "sinusoidal", "piecewise_sinusoidal"});
    p.delta.kind = disturbance_kind(dk);
    p.delta.amplitude = tree.number("plant.delta.amplitude", 0.0);
    p.delta.amplitude_after = tree.number("plant.delta.amplitude_after", 0.0);
    p.delta.frequency = tree.number("plant.delta.frequency", 0.0);
    p.delta.switch_time = tree.number("plant.delta.switch_time", 0.0);
    if (p.delta.kind == DisturbanceSpec::Kind::piecewise_sinusoidal && p.delta.switch_time < 0.0) {
        throw ScenarioError("plant.delta.switch_time", "must be >= 0");
    }

    const std::string bk = tree.choice("plant.d.kind", "delta_norm", {"delta_norm", "constant"});
    p.d_kind = bk == "constant" ? PlantSpec::BoundKind::constant : PlantSpec::BoundKind::delta_norm;
    p.d_value = tree.number("plant.d.value", 0.0);
    p.mu = tree.number("plant.mu", 0.0);
    p.gamma_db = tree.number("plant.gamma", 0.0);

    ControllerSpec& c = sc.controller;
    c.kind = tree.choice("controller.kind", "smc", {"smc", "adaptive"}) == "adaptive" ? ControllerSpec::Kind::adaptive
                                                                                    : ControllerSpec::Kind::smc;
    c.beta = tree.number("controller.beta", 0.1);
    c.eta_literal = tree.choice("controller.eta.mode", "computed", {"computed", "literal"}) == "literal";
    c.eta_value = c.eta_literal ? tree.number("controller.eta.value") : tree.number("controller.eta.value", 0.0);
    c.kappa_literal = tree.choice("controller.kappa.mode", "eq8", {"eq8", "literal"}) == "literal";
    c.kappa_value =
        c.kappa_literal ? tree.number("controller.kappa.value") : tree.number("controller.kappa.value", 0.0);
    const bool adaptive = c.kind == ControllerSpec::Kind::adaptive;
    c.gamma = adaptive ? tree.number("controller.gamma") : tree.number("controller.gamma", 0.0);
    c.epsilon_literal =
        tree.choice("controller.epsilon.mode", "max_admissible", {"max_admissible", "literal"}) == "literal";
    c.epsilon_value = c.epsilon_literal ? tree.number("controller.epsilon.value")
                                        : tree.number("controller.epsilon.value", 0.0);
    c.d_bar = adaptive ? tree.number("controller.d_bar") : tree.number("controller.d_bar", 0.0);
    c.tol_sigma = tree.number("controller.tol_sigma", 1e-9);
    c.k_max = tree.number("controller.k_max", kDefaultBarrierGainMax);

    sc.sim.dt = tree.number("sim.dt", 1e-4);
    sc.sim.horizon = tree.number("sim.horizon", 10.0);
    sc.sim.scheme = tree.choice("sim.scheme", "rk4", {"rk4", "euler"}) == "euler" ? Scheme::euler : Scheme::rk4;
    const double stride = tree.number("sim.record_stride", 1.0);
    if (stride < 1.0 || stride != std::floor(stride)) {
        throw ScenarioError("sim.record_stride", "must be a positive integer");
    }
    sc.sim.record_stride = static_cast<int>(stride);
    sc.sim.tol_reach = tree.number("sim.tol_reach", 1e-3);
    sc.sim.gamma = adaptive ? c.gamma : 0.0;

    for (const auto& [label, entry] : tree.initial()) {
        const std::string key = "initial." + label;
        const Vector full = KeyTree::parse_vector(key, entry.value, 2 * n);
        sc.initial_labels.push_back(label);
        sc.initial.push_back({full.head(n), full.tail(n)});
    }

    tree.reject_unused();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("", "cannot read scenario file " + path.string());
    }
    return parse_scenario(in, path.stem().string());
}

namespace {

UncertaintyModel build_model(const Scenario& sc) {
    const Eigen::Index n = sc.dim;
    const PlantSpec& p = sc.plant;
    if (p.g_scale == 0.0) {
        throw ScenarioError("plant.g.scale", "G must be nonsingular");
    }
    UncertaintyModel m;
    m.G = [n, g = p.g_scale](const PlantState&) -> Matrix { return g * Matrix::Identity(n, n); };
    if (p.delta_b_kind == PlantSpec::DeltaBKind::ones_sin) {
        m.delta_b = make_ones_sin_uncertainty(p.delta_b_amplitude, n, p.delta_b_componentwise);
    } else {
        m.delta_b = [n](double, const PlantState&) -> Matrix { return Matrix::Zero(n, n); };
    }
    try {
        m.delta = make_disturbance(p.delta, n);
    } catch (const InvalidInputError& e) {
        throw ScenarioError("plant.delta", e.what());
    }
    if (p.d_kind == PlantSpec::BoundKind::constant) {
        if (p.d_value < 0.0) {
            throw ScenarioError("plant.d.value", "must be nonnegative");
        }
        m.d_bound = [v = p.d_value](double, const PlantState&) { return v; };
    } else {
        m.d_bound = [delta = m.delta](double t, const PlantState& s) { return delta(t, s).norm(); };
    }
    if (!(p.mu > -1.0)) {
        throw ScenarioError("plant.mu", "must exceed -1");
    }
    m.mu = p.mu;
    m.gamma_db = p.gamma_db;
    return m;
}

template <typename Build>
auto field(const std::string& key, Build&& build) {
    try {
        return build();
    } catch (const ScenarioError&) {
        throw;
    } catch (const InvalidInputError& e) {
        throw ScenarioError(key, e.what());
    }
}

}  // namespace

ResolvedScenario resolve(const Scenario& sc) {
    auto cbf = field("obstacle", [&] { return ObstacleCbf(sc.obstacle_center, sc.obstacle_radius); });
    auto alpha = field("filter.alpha", [&] { return ClassKGain(sc.alpha); });
    auto filter = field("filter.s", [&] { return FilterParams(cbf, alpha, sc.s, sc.goal); });
    auto box = field("box", [&] { return StateBox(sc.box_lower, sc.box_upper); });
    field("sim", [&] {
        sc.sim.validate();
        return 0;
    });

    ResolvedScenario r{sc, build_model(sc), filter, box, 0.0, 0.0, std::nullopt, std::nullopt, {}};
    const ControllerSpec& c = sc.controller;
    r.eta_computed = compute_eta(cbf, box);
    if (c.eta_literal && !(c.eta_value > 0.0)) {
        throw ScenarioError("controller.eta.value", "must be positive");
    }
    r.eta = c.eta_literal ? c.eta_value : r.eta_computed;
    if (!(c.beta > 0.0)) {
        throw ScenarioError("controller.beta", "must be positive");
    }
    if (c.kappa_literal && !(c.kappa_value > 0.0)) {
        throw ScenarioError("controller.kappa.value", "must be positive");
    }
    if (!(c.tol_sigma > 0.0)) {
        throw ScenarioError("controller.tol_sigma", "must be positive");
    }

    if (c.kind == ControllerSpec::Kind::adaptive) {
        if (!(c.gamma > 0.0)) {
            throw ScenarioError("controller.gamma", "must be positive");
        }
        if (!(c.d_bar >= 0.0)) {
            throw ScenarioError("controller.d_bar", "must be nonnegative");
        }
        if (!(c.k_max > 1.0)) {
            throw ScenarioError("controller.k_max", "must exceed 1");
        }
        r.epsilon_max = max_admissible_epsilon(sc.alpha, c.gamma, r.eta);
        r.epsilon = c.epsilon_literal ? c.epsilon_value : *r.epsilon_max;
        field("controller.epsilon.value", [&] { return AdaptiveGainState(*r.epsilon, c.gamma, sc.alpha, r.eta); });
    }

    for (std::size_t i = 0; i < sc.initial.size(); ++i) {
        ResolvedRun run;
        run.label = sc.initial_labels[i];
        run.initial = sc.initial[i];
        run.h0 = eval_h(cbf, run.initial.x);
        if (!(run.h0 > 0.0)) {
            throw InitialConditionError("initial." + run.label + ": h(x0) = " + std::to_string(run.h0) +
                                        " is not strictly inside the safe set");
        }
        run.sigma0 = sigma(filter, run.initial).norm;
        const SafeReachingGain g = kappa_safe_reaching(sc.alpha, run.sigma0, c.beta, run.h0, r.eta);
        run.kappa_eq8 = g.kappa;
        run.alpha_c = g.alpha_c;
        run.kappa = c.kappa_literal ? c.kappa_value : g.kappa;
        run.reaching_bound = reaching_time_bound(run.sigma0, run.kappa);
        run.step_warning = run.sigma0 > 0.0 && run.kappa * sc.sim.dt >= run.sigma0;
        r.runs.push_back(std::move(run));
    }
    return r;
}

std::unique_ptr<ControlLaw> ResolvedScenario::make_law(std::size_t i) const {
    const ResolvedRun& run = runs.at(i);
    const ControllerSpec& c = scenario.controller;
    SmcGains gains;
    gains.kappa = run.kappa;
    gains.mu = model.mu;
    gains.beta = c.beta;
    gains.alpha_c = run.alpha_c;
    gains.tol_sigma = c.tol_sigma;
    if (c.kind == ControllerSpec::Kind::smc) {
        gains.d = model.d_bound;
        return std::make_unique<SmcController>(filter, std::move(gains), model);
    }
    gains.d = [d = c.d_bar](double, const PlantState&) { return d; };
    AdaptiveGainState adapt(*epsilon, c.gamma, scenario.alpha, eta);
    return std::make_unique<AdaptiveController>(filter, std::move(gains), adapt, model, c.k_max);
}

AssumptionSummary check_assumptions(const ResolvedScenario& r, int points_per_axis, int time_samples) {
    SampleGrid grid{r.box, points_per_axis, time_samples, r.scenario.sim.horizon, Vector()};
    UncertaintyModel checked = r.model;
    if (r.scenario.controller.kind == ControllerSpec::Kind::adaptive) {
        checked.d_bound = [d = r.scenario.controller.d_bar](double, const PlantState&) { return d; };
    }
    return {check_assumption1(checked, grid), check_assumption2(checked, grid)};
}

bool RunReport::passed() const {
    if (!outcome.ok()) {
        return false;
    }
    for (const auto& v : verdicts) {
        if (!v.pass) {
            return false;
        }
    }
    return true;
}

std::vector<MonitorVerdict> run_monitors(const ResolvedScenario& r, const ResolvedRun& run, const Trajectory& traj) {
    const Scenario& sc = r.scenario;
    const double dt = sc.sim.dt;
    const bool adaptive = sc.controller.kind == ControllerSpec::Kind::adaptive;
    const double gamma = adaptive ? sc.controller.gamma : 0.0;

    std::vector<MonitorVerdict> out;
    out.push_back(monitor_safety(traj, r.filter.cbf, gamma));
    ReachingCheck reach{run.kappa, dt, sc.sim.tol_reach};
    out.push_back(monitor_reaching(traj, reach));
    HcCheck hc{sc.alpha, run.alpha_c, gamma, dt, sc.sim.tol_reach};
    out.push_back(monitor_hc(traj, r.filter.cbf, hc));
    if (adaptive) {
        out.push_back(monitor_epsilon_containment(traj, *r.epsilon));
    }
    return out;
}

ScenarioReport run_resolved(const ResolvedScenario& r, int parallel) {
    std::vector<PlantState> initial;
    for (const auto& run : r.runs) {
        initial.push_back(run.initial);
    }
    auto outcomes = batch_simulate(
        r.model, r.filter, r.scenario.sim, initial,
        [&r](std::size_t i, const PlantState&) { return r.make_law(i); }, parallel);

    ScenarioReport report;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        RunReport rr{r.runs[i], std::move(outcomes[i]), {}};
        if (rr.outcome.ok()) {
            rr.verdicts = run_monitors(r, rr.run, *rr.outcome.trajectory);
        }
        report.runs.push_back(std::move(rr));
    }
    report.exit_code = scenario_exit_code(report.runs);
    return report;
}

int scenario_exit_code(const std::vector<RunReport>& runs) {
    bool diverged = false;
    bool failed = false;
    for (const auto& rr : runs) {
        diverged = diverged || rr.outcome.diverged;
        failed = failed || !rr.passed();
    }
    return diverged ? 3 : (failed ? 1 : 0);
}

}  // namespace safe_smc
