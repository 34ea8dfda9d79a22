#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safe_smc/monitors.hpp"
#include "safe_smc/plant.hpp"
#include "safe_smc/safety_filter.hpp"
#include "safe_smc/simulator.hpp"
#include "safe_smc/sliding_control.hpp"

namespace safe_smc {

/// Scenario file problem, reported with the dotted key path at fault.
class ScenarioError : public Error {
public:
    ScenarioError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct PlantSpec {
    double g_scale = 1.0;  ///< G = g_scale * I

    enum class DeltaBKind { zero, ones_sin };
    DeltaBKind delta_b_kind = DeltaBKind::zero;
    double delta_b_amplitude = 0.0;
    bool delta_b_componentwise = false;

    DisturbanceSpec delta;

    enum class BoundKind { delta_norm, constant };
    BoundKind d_kind = BoundKind::delta_norm;
    double d_value = 0.0;

    double mu = 0.0;
    double gamma_db = 0.0;
};

struct ControllerSpec {
    enum class Kind { smc, adaptive };
    Kind kind = Kind::smc;
    double beta = 0.1;

    bool eta_literal = false;
    double eta_value = 0.0;

    bool kappa_literal = false;
    double kappa_value = 0.0;

    double gamma = 0.0;  ///< adaptive only
    bool epsilon_literal = false;
    double epsilon_value = 0.0;
    double d_bar = 0.0;  ///< adaptive only: constant overestimate used before the switch

    double tol_sigma = 1e-9;
    double k_max = kDefaultBarrierGainMax;
};

struct Scenario {
    std::string name;
    int dim = 2;
    PlantSpec plant;
    Vector obstacle_center;
    double obstacle_radius = 1.0;
    Vector box_lower;
    Vector box_upper;
    Vector goal;
    double alpha = 1.0;
    double s = 0.5;
    ControllerSpec controller;
    SimConfig sim;
    std::vector<std::string> initial_labels;
    std::vector<PlantState> initial;
};

/// Parses the `key = value` scenario format. Throws ScenarioError.
Scenario parse_scenario(std::istream& in, const std::string& name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

/// Constants derived for one initial condition.
struct ResolvedRun {
    std::string label;
    PlantState initial;
    double h0 = 0.0;
    double sigma0 = 0.0;
    double kappa = 0.0;
    double kappa_eq8 = 0.0;
    double alpha_c = 0.0;
    double reaching_bound = 0.0;
    bool step_warning = false;  ///< kappa dt >= |sigma0| with sigma0 != 0
};

/// Everything the run needs, derived from a Scenario without simulating.
struct ResolvedScenario {
    Scenario scenario;
    UncertaintyModel model;
    FilterParams filter;
    StateBox box;
    double eta = 0.0;           ///< value in use
    double eta_computed = 0.0;  ///< corner maximum of |grad h| over the box
    std::optional<double> epsilon;
    std::optional<double> epsilon_max;
    std::vector<ResolvedRun> runs;

    /// Control law for run `i`.
    std::unique_ptr<ControlLaw> make_law(std::size_t i) const;
};

/// Throws ScenarioError on bad values and InitialConditionError when some x0 has h(x0) <= 0.
ResolvedScenario resolve(const Scenario& scenario);

struct AssumptionSummary {
    AssumptionReport assumption1;
    AssumptionReport assumption2;
};

/// Assumption checkers over a 50 x 50 grid on the box and 100 times on [0, horizon].
AssumptionSummary check_assumptions(const ResolvedScenario& resolved, int points_per_axis = 50,
                                    int time_samples = 100);

struct RunReport {
    ResolvedRun run;
    RunOutcome outcome;
    std::vector<MonitorVerdict> verdicts;

    bool passed() const;
};

struct ScenarioReport {
    std::vector<RunReport> runs;
    int exit_code = 0;  ///< 0 all pass, 1 monitor failure, 3 divergence
};

/// Monitors applicable to the controller kind, evaluated on one trajectory.
std::vector<MonitorVerdict> run_monitors(const ResolvedScenario& resolved, const ResolvedRun& run,
                                         const Trajectory& traj);

ScenarioReport run_resolved(const ResolvedScenario& resolved, int parallel = 1);

/// 3 if any run diverged, else 1 if any run failed, else 0.
int scenario_exit_code(const std::vector<RunReport>& runs);

/// Human-readable dump of every derived constant.
void print_resolved(std::ostream& out, const ResolvedScenario& resolved, const AssumptionSummary* checks = nullptr);

/// CSV with columns t, x1..xn, v1..vn, sigma_norm, h, h_gamma, gain, u1..un (17 significant digits).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Inverse of write_trajectory_csv; events are not part of the CSV and come back empty.
Trajectory read_trajectory_csv(std::istream& in);

/// JSON run-level report.
std::string report_json(const ResolvedScenario& resolved, const ScenarioReport& report);

}  // namespace safe_smc
