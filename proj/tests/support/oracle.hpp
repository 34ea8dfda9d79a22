#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

// Reference computations written without touching the library under test.
namespace oracle {

using Vec = Eigen::VectorXd;

/// min |v - v_des|^2 subject to a . v >= -b.
struct QpProblem {
    Vec v_des;
    Vec a;
    double b = 0.0;
};

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Euclidean projection of v_des onto the halfspace {a . v >= -b}.
Vec solve_qp_projection(const QpProblem& p);

/// KKT residuals at a candidate solution.
struct KktReport {
    bool active = false;
    double constraint_residual = 0.0;  ///< a . v + b
    double parallel_residual = 0.0;    ///< component of v - v_des orthogonal to a
    double multiplier = 0.0;           ///< lambda with v - v_des = lambda a
};

KktReport kkt(const QpProblem& p, const Vec& v);

using VecFn = std::function<Vec(const Vec&)>;

/// Central difference (f(x + h d) - f(x - h d)) / 2h.
Vec central_difference(const VecFn& f, const Vec& x, const Vec& direction, double h = 1e-6);

/// |claimed - central difference|.
double check_derivative(const VecFn& f, const Vec& claimed, const Vec& x, const Vec& direction, double h = 1e-6);

/// Richardson combination of two central differences (steps h and h / 2).
Vec richardson_derivative(const VecFn& f, const Vec& x, const Vec& direction, double h = 1e-4);

/// Gradient of a scalar function by central differences.
Vec numeric_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5);

}  // namespace oracle
