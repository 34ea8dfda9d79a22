#include "safe_smc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace safe_smc {

void DisturbanceSpec::validate() const {
    if (!std::isfinite(amplitude) || !std::isfinite(amplitude_after) || !std::isfinite(frequency)) {
        throw InvalidInputError("disturbance parameters must be finite");
    }
    if (kind == Kind::piecewise_sinusoidal && !(switch_time >= 0.0)) {
        throw InvalidInputError("piecewise disturbance switch time must be >= 0");
    }
}

VectorField make_disturbance(const DisturbanceSpec& spec, Eigen::Index n) {
    spec.validate();
    switch (spec.kind) {
        case DisturbanceSpec::Kind::zero:
            return [n](double, const PlantState&) -> Vector { return Vector::Zero(n); };
        case DisturbanceSpec::Kind::constant:
            return [n, a = spec.amplitude](double, const PlantState&) -> Vector {
                return Vector::Constant(n, a);
            };
        case DisturbanceSpec::Kind::sinusoidal:
            return [n, a = spec.amplitude, w = spec.frequency](double t, const PlantState&) -> Vector {
                return Vector::Constant(n, a * std::sin(w * t));
            };
        case DisturbanceSpec::Kind::piecewise_sinusoidal:
            return [n, spec](double t, const PlantState&) -> Vector {
                const double a = t <= spec.switch_time ? spec.amplitude : spec.amplitude_after;
                return Vector::Constant(n, a * std::sin(spec.frequency * t));
            };
    }
    throw InvalidInputError("unknown disturbance kind");
}

MatrixField make_ones_sin_uncertainty(double amplitude, Eigen::Index n, bool componentwise) {
    if (componentwise) {
        return [amplitude, n](double, const PlantState& s) -> Matrix {
            Matrix m(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                m.row(i).setConstant(amplitude * std::sin(s.x[i]));
            }
            return m;
        };
    }
    return [amplitude, n](double, const PlantState& s) -> Matrix {
        return Matrix::Constant(n, n, amplitude * std::sin(s.x[0]));
    };
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

StateDerivative closed_loop_rhs(const UncertaintyModel& model, const Vector& u, double t,
                                const PlantState& state) {
    const auto n = state.dim();
    const Matrix g = model.G(state);
    Eigen::FullPivLU<Matrix> lu(g);
    if (!lu.isInvertible()) {
        throw ConfigurationError("input matrix G is singular at the current state");
    }
    Vector inner = u + model.delta_b(t, state) * u + model.delta(t, state);
    if (inner.size() != n) {
        throw ConfigurationError("uncertainty model dimension does not match the state");
    }
    return {state.xdot, g * inner};
}

StateDerivative closed_loop_rhs(const UncertaintyModel& model, const ControlLaw& law, double t,
                                const PlantState& state) {
    return closed_loop_rhs(model, law.evaluate(t, state).u, t, state);
}

namespace {

template <typename Visit>
void for_each_sample(const SampleGrid& grid, Visit&& visit) {
    const auto n = grid.box.dim();
    if (grid.points_per_axis < 1 || grid.time_samples < 1) {
        throw InvalidInputError("sample grid needs at least one point per axis and one time");
    }
    PlantState state{Vector(n), grid.velocity.size() == n ? grid.velocity : Vector::Zero(n)};
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const int m = grid.points_per_axis;
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double frac = m == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (m - 1);
            state.x[i] = grid.box.lower()[i] + frac * (grid.box.upper()[i] - grid.box.lower()[i]);
        }
        for (int k = 0; k < grid.time_samples; ++k) {
            const double t = grid.time_samples == 1 ? 0.0 : grid.t_end * k / (grid.time_samples - 1);
            visit(t, state);
        }
        Eigen::Index j = 0;
        while (j < n && ++idx[static_cast<std::size_t>(j)] == m) {
            idx[static_cast<std::size_t>(j)] = 0;
            ++j;
        }
        if (j == n) {
            break;
        }
    }
}

}  // namespace

AssumptionReport check_assumption1(const UncertaintyModel& model, const SampleGrid& grid) {
    AssumptionReport report;
    report.max_excess = -std::numeric_limits<double>::infinity();
    for_each_sample(grid, [&](double t, const PlantState& s) {
        const double norm = model.delta(t, s).norm();
        const double bound = model.d_bound(t, s);
        const double excess = norm - bound;
        ++report.samples;
        report.max_norm = std::max(report.max_norm, norm);
        report.max_excess = std::max(report.max_excess, excess);
        // relative slack of 1e-12
        if (excess > 1e-12 * std::max(1.0, norm) || bound < 0.0) {
            report.violations.push_back({t, s.x, "|delta| exceeds d", excess});
        }
    });
    return report;
}

AssumptionReport check_assumption2(const UncertaintyModel& model, const SampleGrid& grid) {
    AssumptionReport report;
    report.max_excess = -std::numeric_limits<double>::infinity();
    report.min_lambda = std::numeric_limits<double>::infinity();
    if (!(model.gamma_db < 1.0)) {
        report.violations.push_back({0.0, Vector(), "gamma bound is not below 1", model.gamma_db - 1.0});
    }
    if (!(model.mu > -1.0)) {
        report.violations.push_back({0.0, Vector(), "mu is not above -1", -1.0 - model.mu});
    }
    constexpr double slack = 1e-12;
    for_each_sample(grid, [&](double t, const PlantState& s) {
        ++report.samples;
        const Matrix db = model.delta_b(t, s);
        const double norm = spectral_norm(db);
        report.max_norm = std::max(report.max_norm, norm);
        report.max_excess = std::max(report.max_excess, norm - model.gamma_db);
        if (norm > model.gamma_db + slack || norm >= 1.0) {
            report.violations.push_back({t, s.x, "|Delta_b| exceeds gamma", norm - model.gamma_db});
        }

        const Matrix g = model.G(s);
        const Matrix similar = g * db * g.inverse();
        const Matrix sym = 0.5 * (similar + similar.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
        const double lambda_min = eig.eigenvalues()(0);
        report.min_lambda = std::min(report.min_lambda, lambda_min);
        report.max_excess = std::max(report.max_excess, model.mu - lambda_min);
        if (lambda_min < model.mu - slack) {
            report.violations.push_back({t, s.x, "lambda_min below mu", model.mu - lambda_min});
        }
    });
    return report;
}

}  // namespace safe_smc
