#pragma once

#include "safe_smc/cbf.hpp"

namespace safe_smc {

/// Everything that defines the filtered velocity field v(x).
struct FilterParams {
    ObstacleCbf cbf;
    ClassKGain alpha;
    double s;     ///< smoothing width of nu_s, > 0
    Vector goal;  ///< v_des(x) = -(x - goal)

    FilterParams(ObstacleCbf cbf_, ClassKGain alpha_, double s_, Vector goal_);
};

/// Factors of the closed-form QP solution: v_safe = nu0(nu1) * nu2.
struct NuComponents {
    double nu1;  ///< constraint residual grad_h . v_des + alpha h
    Vector nu2;  ///< -grad_h / |grad_h|^2
};

/// Optional sink for diagnostics raised while evaluating the field.
struct FilterDiagnostics {
    bool singular_gradient = false;
};

Vector v_des(const FilterParams& params, const Vector& x);

double nu0(double z);

/// C^1 approximation of nu0 on (-s, 0). Throws InvalidInputError for s <= 0.
double nu_s(double z, double s);

/// Throws SingularGradientError where grad h vanishes.
NuComponents nu_components(const FilterParams& params, const Vector& x);

/// Exact QP correction; zero unless nu1 < 0 strictly.
Vector v_safe_raw(const FilterParams& params, const Vector& x);

/// Smoothed correction nu_s(nu1) * nu2.
Vector v_safe_smooth(const FilterParams& params, const Vector& x);

/// v_des + v_safe_smooth. At the obstacle center, where the gradient vanishes,
/// the correction is taken as zero and `diag->singular_gradient` is set.
Vector v_total(const FilterParams& params, const Vector& x, FilterDiagnostics* diag = nullptr);

/// Directional derivative J_v(x) * xdot by central differences,
/// step 1e-6 * max(1, |x|) along the unit direction of xdot.
Vector v_dot(const FilterParams& params, const Vector& x, const Vector& xdot);

}  // namespace safe_smc
