// Command-line front end: run, resolve and check scenario files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "safe_smc/scenario.hpp"

namespace fs = std::filesystem;
using namespace safe_smc;

namespace {

constexpr int kExitMonitor = 1;
constexpr int kExitSchema = 2;
constexpr int kExitDivergence = 3;

struct RunOptions {
    std::string scenario;
    std::string out = "out";
    std::optional<double> dt;
    std::optional<double> horizon;
    int parallel = 1;
};

ResolvedScenario load_and_resolve(const std::string& path, const RunOptions* overrides = nullptr) {
    Scenario sc = load_scenario(path);
    if (overrides != nullptr) {
        if (overrides->dt) {
            sc.sim.dt = *overrides->dt;
        }
        if (overrides->horizon) {
            sc.sim.horizon = *overrides->horizon;
        }
    }
    return resolve(sc);
}

int cmd_run(const RunOptions& opt) {
    const ResolvedScenario r = load_and_resolve(opt.scenario, &opt);
    const ScenarioReport report = run_resolved(r, opt.parallel);

    fs::create_directories(opt.out);
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const RunReport& rr = report.runs[i];
        std::cout << "run " << i << " [" << rr.run.label << "] ";
        if (!rr.outcome.ok()) {
            std::cout << (rr.outcome.diverged ? "DIVERGED: " : "ERROR: ") << rr.outcome.error << '\n';
            continue;
        }
        const fs::path csv = fs::path(opt.out) / ("traj_" + std::to_string(i) + "_" + rr.run.label + ".csv");
        std::ofstream file(csv);
        write_trajectory_csv(file, *rr.outcome.trajectory);
        std::cout << (rr.passed() ? "PASS" : "FAIL") << " -> " << csv.string() << '\n';
        for (const auto& v : rr.verdicts) {
            std::cout << "  " << (v.pass ? "pass " : "FAIL ") << v.name << "  worst margin " << v.worst_margin
                      << " at t = " << v.worst_time;
            if (!v.note.empty()) {
                std::cout << "  (" << v.note << ")";
            }
            std::cout << '\n';
        }
    }
    const fs::path json = fs::path(opt.out) / "report.json";
    std::ofstream(json) << report_json(r, report) << '\n';
    std::cout << "report -> " << json.string() << '\n';
    return report.exit_code;
}

int cmd_resolve(const std::string& path) {
    const ResolvedScenario r = load_and_resolve(path);
    const AssumptionSummary checks = check_assumptions(r);
    print_resolved(std::cout, r, &checks);
    return 0;
}

int cmd_check(const std::string& path) {
    const ResolvedScenario r = load_and_resolve(path);
    const AssumptionSummary checks = check_assumptions(r);
    std::cout << "assumption1 (|delta| <= d): " << checks.assumption1.samples << " samples, "
              << checks.assumption1.violations.size() << " violations, max |delta| " << checks.assumption1.max_norm
              << '\n'
              << "assumption2 (|Delta_b| <= " << r.model.gamma_db << ", lambda_min >= " << r.model.mu
              << "): " << checks.assumption2.samples << " samples, " << checks.assumption2.violations.size()
              << " violations, max |Delta_b| " << checks.assumption2.max_norm << ", min lambda "
              << checks.assumption2.min_lambda << '\n';
    for (const auto* rep : {&checks.assumption1, &checks.assumption2}) {
        for (std::size_t i = 0; i < rep->violations.size() && i < 5; ++i) {
            const auto& v = rep->violations[i];
            std::cout << "  violation: " << v.what << " at t = " << v.t << ", excess " << v.excess << '\n';
        }
    }
    return checks.assumption1.ok() && checks.assumption2.ok() ? 0 : kExitMonitor;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe sliding-mode control of uncertain double integrators"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "simulate every initial condition and check the monitors");
    run_cmd->add_option("scenario", run.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run.out, "output directory for CSVs and report.json");
    run_cmd->add_option("--dt", run.dt, "override sim.dt");
    run_cmd->add_option("--horizon", run.horizon, "override sim.horizon");
    run_cmd->add_option("--parallel", run.parallel, "worker threads")->check(CLI::PositiveNumber);

    std::string resolve_path;
    auto* resolve_cmd = app.add_subcommand("resolve", "print derived constants without simulating");
    resolve_cmd->add_option("scenario", resolve_path, "scenario file")->required()->check(CLI::ExistingFile);

    std::string check_path;
    auto* check_cmd = app.add_subcommand("check", "run the uncertainty assumption checkers");
    check_cmd->add_option("scenario", check_path, "scenario file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchema;
    }

    try {
        if (*run_cmd) {
            return cmd_run(run);
        }
        if (*resolve_cmd) {
            return cmd_resolve(resolve_path);
        }
        return cmd_check(check_path);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const InitialConditionError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSchema;
    }
}
