#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safe_smc/plant.hpp"
#include "safe_smc/safety_filter.hpp"

namespace safe_smc {

enum class Scheme { euler, rk4 };

struct SimConfig {
    double dt = 1e-4;
    double horizon = 10.0;
    Scheme scheme = Scheme::rk4;
    int record_stride = 1;
    double tol_reach = 1e-3;  ///< |sigma| threshold for the first-reach event
    double gamma = 0.0;       ///< margin used for the h_gamma series

    void validate() const;
    std::size_t steps() const;
};

struct TrajectoryEvents {
    std::optional<double> tau;          ///< switching time latched by the adaptive law
    std::optional<double> first_reach;  ///< first sample with |sigma| <= tol_reach
    std::vector<double> clamp_times;    ///< evaluations where the barrier gain saturated
    std::vector<double> singular_gradient_times;
};

/// Recorded closed-loop run; every series has one entry per recorded sample.
struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> xdot;
    std::vector<double> sigma_norm;
    std::vector<double> h;
    std::vector<double> h_gamma;
    std::vector<double> gain;
    std::vector<Vector> u;
    TrajectoryEvents events;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
};

/// Fixed-step integration of the closed loop over [0, horizon].
///
/// With RK4 the law is re-evaluated at every stage state. The law observes each
/// recorded sample before it is evaluated there. Throws DivergenceError on the
/// first non-finite state.
Trajectory simulate(const UncertaintyModel& model, ControlLaw& law, const FilterParams& filter,
                    const SimConfig& config, const PlantState& initial);

/// Builds the law for run `index` starting from `initial`.
using ControlLawFactory = std::function<std::unique_ptr<ControlLaw>(std::size_t index, const PlantState& initial)>;

struct RunOutcome {
    std::optional<Trajectory> trajectory;
    std::string error;
    bool diverged = false;

    bool ok() const { return trajectory.has_value(); }
};

/// Independent runs, one per initial condition, results in input order.
/// Per-run failures are stored in the outcome and do not stop the batch.
std::vector<RunOutcome> batch_simulate(const UncertaintyModel& model, const FilterParams& filter,
                                       const SimConfig& config, const std::vector<PlantState>& initial,
                                       const ControlLawFactory& make_law, int parallel = 1);

}  // namespace safe_smc
