#pragma once

#include "safe_smc/types.hpp"

namespace safe_smc {

/// Circular (spherical for n > 2) obstacle barrier h(x) = |x - center|^2 - radius^2.
class ObstacleCbf {
public:
    ObstacleCbf(Vector center, double radius);

    const Vector& center() const { return center_; }
    double radius() const { return radius_; }
    Eigen::Index dim() const { return center_.size(); }

private:
    Vector center_;
    double radius_;
};

/// Axis-aligned box of positions, lower <= upper componentwise.
class StateBox {
public:
    StateBox(Vector lower, Vector upper);

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    Eigen::Index dim() const { return lower_.size(); }
    bool contains(const Vector& x) const;

private:
    Vector lower_;
    Vector upper_;
};

/// Linear extended class-K map h -> alpha * h.
class ClassKGain {
public:
    explicit ClassKGain(double alpha);

    double alpha() const { return alpha_; }
    double operator()(double h) const { return alpha_ * h; }

private:
    double alpha_;
};

double eval_h(const ObstacleCbf& cbf, const Vector& x);

/// Gradient of h, returned as a column vector (the transpose of the row gradient).
Vector grad_h(const ObstacleCbf& cbf, const Vector& x);

inline constexpr double kSafeSetRoundoff = 1e-12;

/// Membership in C_gamma = {h + gamma >= 0}; gamma = 0 gives C_1.
/// Points within kSafeSetRoundoff * max(1, r^2, gamma) of the boundary count as members.
bool is_safe(const ObstacleCbf& cbf, const Vector& x, double gamma = 0.0);

/// Maximum of |grad h| over the box.
///
/// |grad h| = 2|x - center| is convex, so the maximum sits on a corner and the
/// corner sweep is exact. The grid sweep is kept so non-quadratic barriers can
/// reuse the signature; for this barrier it never exceeds the corner value.
double compute_eta(const ObstacleCbf& cbf, const StateBox& box, int grid_resolution = 2);

}  // namespace safe_smc
