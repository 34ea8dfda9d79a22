#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safe_smc/cbf.hpp"
#include "safe_smc/types.hpp"

namespace safe_smc {

using MatrixField = std::function<Matrix(double t, const PlantState&)>;
using VectorField = std::function<Vector(double t, const PlantState&)>;
using ScalarField = std::function<double(double t, const PlantState&)>;

/// Matched uncertainty of x'' = G (( I + Delta_b) u + delta).
///
/// All callables must be pure; one model is shared read-only across runs.
struct UncertaintyModel {
    std::function<Matrix(const PlantState&)> G;
    MatrixField delta_b;
    VectorField delta;
    ScalarField d_bound;  ///< bound on |delta| used by the controller gain
    double mu = 0.0;        ///< lower bound on the symmetric part of G Delta_b G^-1
    double gamma_db = 0.0;  ///< bound on |Delta_b| (spectral norm), < 1
};

/// Disturbance descriptions available from scenario files.
struct DisturbanceSpec {
    enum class Kind { zero, constant, sinusoidal, piecewise_sinusoidal };
    Kind kind = Kind::zero;
    double amplitude = 0.0;        ///< constant value or sine amplitude (before the switch)
    double amplitude_after = 0.0;  ///< piecewise only: amplitude for t > switch_time
    double frequency = 0.0;        ///< rad/s
    double switch_time = 0.0;

    void validate() const;
};

/// a * sin(w t) * 1 (and the piecewise variant) as a vector field of dimension n.
VectorField make_disturbance(const DisturbanceSpec& spec, Eigen::Index n);

/// Delta_b = amplitude * sin(x_1) * ones(n, n), or with row i scaled by sin(x_i)
/// when `componentwise` is set.
MatrixField make_ones_sin_uncertainty(double amplitude, Eigen::Index n, bool componentwise);

/// Control applied at one evaluation, with the quantities recorded alongside it.
struct ControlSample {
    Vector u;
    double gain = 0.0;
    double sigma_norm = 0.0;
    bool clamped = false;
    bool singular_gradient = false;
};

/// A feedback law u(t, state). `evaluate` must not mutate observable state;
/// the simulator calls `observe_sample` once per recorded sample, before
/// evaluating the law there, so events latch on post-step values.
class ControlLaw {
public:
    virtual ~ControlLaw() = default;
    virtual ControlSample evaluate(double t, const PlantState& state) const = 0;
    virtual void observe_sample(double /*t*/, const PlantState& /*state*/) {}
    /// Time at which the law switched regimes, if it has one.
    virtual std::optional<double> switch_time() const { return std::nullopt; }
};

/// Second-order dynamics with the stacked derivative split back into the pair.
struct StateDerivative {
    Vector xdot;
    Vector xddot;
};

/// (xdot, G((I + Delta_b) u + delta)). Throws ConfigurationError when G is singular.
StateDerivative closed_loop_rhs(const UncertaintyModel& model, const Vector& u, double t,
                                const PlantState& state);

StateDerivative closed_loop_rhs(const UncertaintyModel& model, const ControlLaw& law, double t,
                                const PlantState& state);

/// Samples used by the assumption checkers: a position grid on `box`,
/// velocities fixed to `velocity`, times evenly spaced on [0, t_end].
struct SampleGrid {
    StateBox box;
    int points_per_axis = 50;
    int time_samples = 100;
    double t_end = 10.0;
    Vector velocity;  ///< empty means zero velocity
};

struct AssumptionViolation {
    double t;
    Vector x;
    std::string what;
    double excess;  ///< amount by which the bound is exceeded
};

struct AssumptionReport {
    std::size_t samples = 0;
    std::vector<AssumptionViolation> violations;
    double max_excess = 0.0;   ///< largest (value - bound) seen; <= 0 when all samples pass
    double max_norm = 0.0;     ///< largest |delta| (assumption 1) or |Delta_b| (assumption 2)
    double min_lambda = 0.0;   ///< assumption 2 only: smallest lambda_min of the symmetric part

    bool ok() const { return violations.empty(); }
};

/// |delta(t, x)| <= d(t, x) on every sample.
AssumptionReport check_assumption1(const UncertaintyModel& model, const SampleGrid& grid);

/// |Delta_b| <= gamma_db < 1 and lambda_min(sym(G Delta_b G^-1)) >= mu on every sample.
AssumptionReport check_assumption2(const UncertaintyModel& model, const SampleGrid& grid);

/// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace safe_smc
