#include "safe_smc/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace safe_smc {

FilterParams::FilterParams(ObstacleCbf cbf_, ClassKGain alpha_, double s_, Vector goal_)
    : cbf(std::move(cbf_)), alpha(alpha_), s(s_), goal(std::move(goal_)) {
    if (!(s > 0.0)) {
        throw InvalidInputError("smoothing width s must be positive");
    }
    if (goal.size() != cbf.dim()) {
        throw InvalidInputError("goal and obstacle dimensions differ");
    }
}

Vector v_des(const FilterParams& params, const Vector& x) {
    return -(x - params.goal);
}

double nu0(double z) {
    return z >= 0.0 ? 0.0 : z;
}

double nu_s(double z, double s) {
    if (!(s > 0.0)) {
        throw InvalidInputError("smoothing width s must be positive");
    }
    if (z >= 0.0) {
        return 0.0;
    }
    if (z <= -s) {
        return z;
    }
    return 0.5 * z * (1.0 - std::cos(z * std::numbers::pi / s));
}

NuComponents nu_components(const FilterParams& params, const Vector& x) {
    const Vector grad = grad_h(params.cbf, x);
    const double grad_sq = grad.squaredNorm();
    if (grad_sq == 0.0) {
        throw SingularGradientError("barrier gradient vanishes at the obstacle center");
    }
    const double nu1 = grad.dot(v_des(params, x)) + params.alpha(eval_h(params.cbf, x));
    return {nu1, -grad / grad_sq};
}

Vector v_safe_raw(const FilterParams& params, const Vector& x) {
    const NuComponents nu = nu_components(params, x);
    return nu0(nu.nu1) * nu.nu2;
}

Vector v_safe_smooth(const FilterParams& params, const Vector& x) {
    const NuComponents nu = nu_components(params, x);
    return nu_s(nu.nu1, params.s) * nu.nu2;
}

Vector v_total(const FilterParams& params, const Vector& x, FilterDiagnostics* diag) {
    Vector v = v_des(params, x);
    if (grad_h(params.cbf, x).squaredNorm() == 0.0) {
        if (diag != nullptr) {
            diag->singular_gradient = true;
        }
        return v;
    }
    v += v_safe_smooth(params, x);
    return v;
}

Vector v_dot(const FilterParams& params, const Vector& x, const Vector& xdot) {
    const double speed = xdot.norm();
    if (speed == 0.0) {
        return Vector::Zero(x.size());
    }
    const double step = 1e-6 * std::max(1.0, x.norm());
    const Vector dir = xdot / speed;
    const Vector forward = v_total(params, x + step * dir);
    const Vector backward = v_total(params, x - step * dir);
    return (speed / (2.0 * step)) * (forward - backward);
}

}  // namespace safe_smc
