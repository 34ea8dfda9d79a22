#pragma once

#include <optional>

#include "safe_smc/plant.hpp"
#include "safe_smc/safety_filter.hpp"

namespace safe_smc {

/// sigma = xdot - v(x) together with its norm.
struct SlidingVar {
    Vector sigma;
    double norm = 0.0;
};

/// Constants of the first-order sliding-mode gain k = (kappa + rho) / (1 + mu).
struct SmcGains {
    double kappa = 1.0;
    double mu = 0.0;
    double beta = 0.1;
    double alpha_c = 0.0;
    ScalarField d;  ///< disturbance bound entering rho; must return >= 0
    double tol_sigma = 1e-9;

    void validate() const;
};

struct SafeReachingGain {
    double kappa;
    double alpha_c;
};

SlidingVar sigma(const FilterParams& filter, const PlantState& state);

/// |G| d(t, state) + |vdot| with the spectral norm of G.
double rho(const SmcGains& gains, const Matrix& G, double t, const PlantState& state, const Vector& vdot);

/// kappa = (alpha / 2) |sigma0| + alpha_c eta with alpha_c = (|sigma0|^2 + beta) / (2 h0).
/// Throws InitialConditionError unless h0 > 0.
SafeReachingGain kappa_safe_reaching(double alpha, double sigma0_norm, double beta, double h0, double eta);

/// u = -((kappa + rho) / (1 + mu)) G^-1 sigma / max(|sigma|, tol_sigma).
Vector smc_control(const SmcGains& gains, const Matrix& G_inv, const SlidingVar& sv, double rho_val);

struct BarrierGain {
    double value;
    bool clamped;
};

inline constexpr double kDefaultBarrierGainMax = 1e6;

/// r / (epsilon - r), saturated at k_max once r >= epsilon (1 - 1/k_max).
BarrierGain barrier_gain(double sigma_norm, double epsilon, double k_max = kDefaultBarrierGainMax);

/// Largest epsilon admitted by the tube-safety condition epsilon <= alpha gamma / eta.
double max_admissible_epsilon(double alpha, double gamma, double eta);

/// Switching state of the barrier-gain controller.
class AdaptiveGainState {
public:
    /// Rejects epsilon > alpha gamma / eta + tolerance.
    AdaptiveGainState(double epsilon, double gamma, double alpha, double eta, double tolerance = 5e-5);

    double epsilon() const { return epsilon_; }
    double gamma() const { return gamma_; }
    bool switched() const { return tau_.has_value(); }
    std::optional<double> tau() const { return tau_; }

    /// Latches tau at the first observation with |sigma| <= epsilon / 2; later calls never unlatch.
    void observe(double t, double sigma_norm);

private:
    double epsilon_;
    double gamma_;
    std::optional<double> tau_;
};

struct AdaptiveOutput {
    ControlSample sample;
    AdaptiveGainState state;
};

/// Everything the adaptive law needs to evaluate u at one state.
struct AdaptiveContext {
    const SmcGains& gains;
    const FilterParams& filter;
    const UncertaintyModel& model;
    double k_max = kDefaultBarrierGainMax;
};

/// Full gain k(t, x) until tau, k_b(|sigma|) afterwards, both with u = -k G^-1 sigma / |sigma|.
/// The returned state has tau latched if this evaluation is the first inside S_{eps/2}.
AdaptiveOutput adaptive_control(const AdaptiveGainState& adapt, const AdaptiveContext& ctx, double t,
                                const PlantState& state);

/// Same law for a fixed switching state (no latching).
ControlSample adaptive_control_fixed(const AdaptiveGainState& adapt, const AdaptiveContext& ctx, double t,
                                     const PlantState& state);

/// Sliding-mode law with the safe-reaching gain.
class SmcController : public ControlLaw {
public:
    SmcController(FilterParams filter, SmcGains gains, UncertaintyModel model);

    ControlSample evaluate(double t, const PlantState& state) const override;

    const SmcGains& gains() const { return gains_; }

private:
    FilterParams filter_;
    SmcGains gains_;
    UncertaintyModel model_;
};

/// Barrier-gain law; the switch is latched on accepted samples only.
class AdaptiveController : public ControlLaw {
public:
    AdaptiveController(FilterParams filter, SmcGains gains, AdaptiveGainState initial,
                       UncertaintyModel model, double k_max = kDefaultBarrierGainMax);

    ControlSample evaluate(double t, const PlantState& state) const override;
    void observe_sample(double t, const PlantState& state) override;
    std::optional<double> switch_time() const override { return state_.tau(); }

    const AdaptiveGainState& state() const { return state_; }

private:
    FilterParams filter_;
    SmcGains gains_;
    AdaptiveGainState state_;
    UncertaintyModel model_;
    double k_max_;
};

}  // namespace safe_smc
