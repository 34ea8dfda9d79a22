#pragma once

#include <string>

#include "safe_smc/cbf.hpp"
#include "safe_smc/simulator.hpp"

namespace safe_smc {

/// Outcome of checking one inequality on a recorded trajectory.
///
/// `worst_margin` is the smallest (bound slack) seen over the checked samples,
/// so pass <=> worst_margin >= -tolerance.
struct MonitorVerdict {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;
    double worst_time = 0.0;
    double tolerance = 0.0;
    std::string note;
};

/// min_t h(x(t)) + gamma >= -tol_h.
MonitorVerdict monitor_safety(const Trajectory& traj, const ObstacleCbf& cbf, double gamma, double tol_h = 1e-6);

struct ReachingCheck {
    double kappa;
    double dt;
    double tol_sigma = 1e-3;  ///< |sigma| threshold that counts as reaching the manifold
    double tol_reach = 0.0;   ///< envelope slack, defaults to 50 kappa dt when <= 0
    double tol_T = 0.0;       ///< reaching-time slack, defaults to 10 dt when <= 0
};

/// |sigma(t)| <= max(0, |sigma0| - kappa t / sqrt 2) + tol_reach on pre-switch samples,
/// and the first |sigma| <= tol_sigma happens by sqrt(2) |sigma0| / kappa + tol_T.
/// When a switch was latched the timing check uses tau and the level |sigma(tau)|.
/// A trajectory that ends before the time bound without reaching is not a timing failure.
MonitorVerdict monitor_reaching(const Trajectory& traj, const ReachingCheck& check);

/// Reaching time bound sqrt(2) |sigma0| / kappa.
double reaching_time_bound(double sigma0_norm, double kappa);

/// First sample time with |sigma| <= threshold.
std::optional<double> measured_reaching_time(const Trajectory& traj, double threshold);

struct HcCheck {
    double alpha;
    double alpha_c;
    double gamma = 0.0;
    double dt;
    double tol_sigma = 1e-3;  ///< end of the reaching phase when no switch is latched
    double tol_hc = 0.0;      ///< defaults to 1e-4 + 10 dt when <= 0
};

/// h_cg(t) = -|sigma|^2 / 2 + alpha_c (h + gamma) >= h_cg(0) e^{-alpha t} - tol_hc
/// up to tau (adaptive) or the first manifold reach. Throws InitialConditionError
/// when h_cg(0) <= 0.
MonitorVerdict monitor_hc(const Trajectory& traj, const ObstacleCbf& cbf, const HcCheck& check);

/// |sigma(t)| < epsilon + tol_eps for every sample at or after tau; any clamp event fails.
MonitorVerdict monitor_epsilon_containment(const Trajectory& traj, double epsilon, double tol_eps = -1.0);

}  // namespace safe_smc
