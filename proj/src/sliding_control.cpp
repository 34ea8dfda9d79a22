#include "safe_smc/sliding_control.hpp"

#include <algorithm>
#include <cmath>

namespace safe_smc {

void SmcGains::validate() const {
    if (!(kappa > 0.0)) {
        throw InvalidInputError("kappa must be positive");
    }
    if (!(mu > -1.0)) {
        throw InvalidInputError("mu must exceed -1");
    }
    if (!(beta > 0.0)) {
        throw InvalidInputError("beta must be positive");
    }
    if (!(tol_sigma > 0.0)) {
        throw InvalidInputError("tol_sigma must be positive");
    }
    if (!d) {
        throw InvalidInputError("disturbance bound d is not set");
    }
}

SlidingVar sigma(const FilterParams& filter, const PlantState& state) {
    SlidingVar sv;
    sv.sigma = state.xdot - v_total(filter, state.x);
    sv.norm = sv.sigma.norm();
    return sv;
}

double rho(const SmcGains& gains, const Matrix& G, double t, const PlantState& state, const Vector& vdot) {
    const double d = gains.d(t, state);
    if (d < 0.0) {
        throw InvalidInputError("disturbance bound d must be nonnegative");
    }
    return spectral_norm(G) * d + vdot.norm();
}

SafeReachingGain kappa_safe_reaching(double alpha, double sigma0_norm, double beta, double h0, double eta) {
    if (!(h0 > 0.0)) {
        throw InitialConditionError("safe reaching gain needs h(x0) > 0: initial position on or outside the safe boundary");
    }
    if (!(beta > 0.0)) {
        throw InvalidInputError("beta must be positive");
    }
    if (!(eta >= 0.0)) {
        throw InvalidInputError("eta must be nonnegative");
    }
    const double alpha_c = (sigma0_norm * sigma0_norm + beta) / (2.0 * h0);
    return {0.5 * alpha * sigma0_norm + alpha_c * eta, alpha_c};
}

Vector smc_control(const SmcGains& gains, const Matrix& G_inv, const SlidingVar& sv, double rho_val) {
    const double k = (gains.kappa + rho_val) / (1.0 + gains.mu);
    return -k * (G_inv * sv.sigma) / std::max(sv.norm, gains.tol_sigma);
}

BarrierGain barrier_gain(double sigma_norm, double epsilon, double k_max) {
    if (!(epsilon > 0.0)) {
        throw InvalidInputError("epsilon must be positive");
    }
    const double r = std::max(sigma_norm, 0.0);
    if (r >= epsilon * (1.0 - 1.0 / k_max)) {
        return {k_max, true};
    }
    return {r / (epsilon - r), false};
}

double max_admissible_epsilon(double alpha, double gamma, double eta) {
    if (!(alpha > 0.0) || !(gamma > 0.0) || !(eta > 0.0)) {
        throw InvalidInputError("alpha, gamma and eta must be positive");
    }
    return alpha * gamma / eta;
}

AdaptiveGainState::AdaptiveGainState(double epsilon, double gamma, double alpha, double eta, double tolerance)
    : epsilon_(epsilon), gamma_(gamma) {
    if (!(epsilon_ > 0.0)) {
        throw InvalidInputError("epsilon must be positive");
    }
    const double limit = max_admissible_epsilon(alpha, gamma, eta);
    if (epsilon_ > limit + tolerance) {
        throw InvalidInputError("epsilon exceeds alpha * gamma / eta: tube would leave C_gamma");
    }
}

void AdaptiveGainState::observe(double t, double sigma_norm) {
    if (!tau_ && sigma_norm <= 0.5 * epsilon_) {
        tau_ = t;
    }
}

namespace {

struct LocalTerms {
    SlidingVar sv;
    Matrix G;
    Matrix G_inv;
    Vector vdot;
    bool singular_gradient = false;
};

LocalTerms local_terms(const FilterParams& filter, const UncertaintyModel& model, const PlantState& state,
                       bool need_vdot) {
    LocalTerms lt;
    FilterDiagnostics diag;
    lt.sv.sigma = state.xdot - v_total(filter, state.x, &diag);
    lt.sv.norm = lt.sv.sigma.norm();
    lt.singular_gradient = diag.singular_gradient;
    lt.G = model.G(state);
    Eigen::FullPivLU<Matrix> lu(lt.G);
    if (!lu.isInvertible()) {
        throw ConfigurationError("input matrix G is singular at the current state");
    }
    lt.G_inv = lu.inverse();
    if (need_vdot) {
        lt.vdot = v_dot(filter, state.x, state.xdot);
    }
    return lt;
}

ControlSample full_gain_sample(const SmcGains& gains, const LocalTerms& lt, double t, const PlantState& state) {
    const double rho_val = rho(gains, lt.G, t, state, lt.vdot);
    ControlSample out;
    out.u = smc_control(gains, lt.G_inv, lt.sv, rho_val);
    out.gain = (gains.kappa + rho_val) / (1.0 + gains.mu);
    out.sigma_norm = lt.sv.norm;
    out.singular_gradient = lt.singular_gradient;
    return out;
}

}  // namespace

ControlSample adaptive_control_fixed(const AdaptiveGainState& adapt, const AdaptiveContext& ctx, double t,
                                     const PlantState& state) {
    if (!adapt.switched()) {
        return full_gain_sample(ctx.gains, local_terms(ctx.filter, ctx.model, state, true), t, state);
    }
    const LocalTerms lt = local_terms(ctx.filter, ctx.model, state, false);
    const BarrierGain kb = barrier_gain(lt.sv.norm, adapt.epsilon(), ctx.k_max);
    ControlSample out;
    // u = -k_b G^-1 sigma / |sigma|
    out.u = -kb.value * (lt.G_inv * lt.sv.sigma) / std::max(lt.sv.norm, ctx.gains.tol_sigma);
    out.gain = kb.value;
    out.sigma_norm = lt.sv.norm;
    out.clamped = kb.clamped;
    out.singular_gradient = lt.singular_gradient;
    return out;
}

AdaptiveOutput adaptive_control(const AdaptiveGainState& adapt, const AdaptiveContext& ctx, double t,
                                const PlantState& state) {
    AdaptiveGainState next = adapt;
    next.observe(t, sigma(ctx.filter, state).norm);
    return {adaptive_control_fixed(next, ctx, t, state), next};
}

SmcController::SmcController(FilterParams filter, SmcGains gains, UncertaintyModel model)
    : filter_(std::move(filter)), gains_(std::move(gains)), model_(std::move(model)) {
    gains_.validate();
}

ControlSample SmcController::evaluate(double t, const PlantState& state) const {
    return full_gain_sample(gains_, local_terms(filter_, model_, state, true), t, state);
}

AdaptiveController::AdaptiveController(FilterParams filter, SmcGains gains, AdaptiveGainState initial,
                                       UncertaintyModel model, double k_max)
    : filter_(std::move(filter)), gains_(std::move(gains)), state_(initial), model_(std::move(model)), k_max_(k_max) {
    gains_.validate();
    if (!(k_max_ > 1.0)) {
        throw InvalidInputError("barrier gain clamp k_max must exceed 1");
    }
}

ControlSample AdaptiveController::evaluate(double t, const PlantState& state) const {
    return adaptive_control_fixed(state_, AdaptiveContext{gains_, filter_, model_, k_max_}, t, state);
}

void AdaptiveController::observe_sample(double t, const PlantState& state) {
    state_.observe(t, sigma(filter_, state).norm);
}

}  // namespace safe_smc
