#include "safe_smc/cbf.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace safe_smc {

ObstacleCbf::ObstacleCbf(Vector center, double radius)
    : center_(std::move(center)), radius_(radius) {
    if (center_.size() == 0) {
        throw InvalidInputError("obstacle center must have dimension >= 1");
    }
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
        throw InvalidInputError("obstacle radius must be positive and finite");
    }
}

StateBox::StateBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() == 0 || lower_.size() != upper_.size()) {
        throw InvalidInputError("box corners must share a nonzero dimension");
    }
    // A box collapsed to a point is allowed; an inverted one is empty.
    if ((lower_.array() > upper_.array()).any()) {
        throw InvalidInputError("empty box: lower corner exceeds upper corner");
    }
}

bool StateBox::contains(const Vector& x) const {
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

ClassKGain::ClassKGain(double alpha) : alpha_(alpha) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
        throw InvalidInputError("class-K gain alpha must be positive");
    }
}

double eval_h(const ObstacleCbf& cbf, const Vector& x) {
    return (x - cbf.center()).squaredNorm() - cbf.radius() * cbf.radius();
}

Vector grad_h(const ObstacleCbf& cbf, const Vector& x) {
    return 2.0 * (x - cbf.center());
}

bool is_safe(const ObstacleCbf& cbf, const Vector& x, double gamma) {
    if (gamma < 0.0) {
        throw InvalidInputError("safety margin gamma must be nonnegative");
    }
    const double r2 = cbf.radius() * cbf.radius();
    return eval_h(cbf, x) + gamma >= -kSafeSetRoundoff * std::max({1.0, r2, gamma});
}

double compute_eta(const ObstacleCbf& cbf, const StateBox& box, int grid_resolution) {
    if (grid_resolution < 2) {
        throw InvalidInputError("grid resolution must be at least 2 per axis");
    }
    if (box.dim() != cbf.dim()) {
        throw InvalidInputError("box and obstacle dimensions differ");
    }
    const auto n = box.dim();
    if (n > 20) {
        throw InvalidInputError("corner enumeration supports at most 20 dimensions");
    }

    double best = 0.0;
    Vector corner(n);
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        for (Eigen::Index i = 0; i < n; ++i) {
            corner[i] = (mask >> i) & 1UL ? box.upper()[i] : box.lower()[i];
        }
        best = std::max(best, grad_h(cbf, corner).norm());
    }

    // Grid sweep; only matters for barriers whose gradient norm is not convex.
    if (n <= 3) {
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        Vector p(n);
        while (true) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double frac = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (grid_resolution - 1);
                p[i] = box.lower()[i] + frac * (box.upper()[i] - box.lower()[i]);
            }
            best = std::max(best, grad_h(cbf, p).norm());
            Eigen::Index k = 0;
            while (k < n && ++idx[static_cast<std::size_t>(k)] == grid_resolution) {
                idx[static_cast<std::size_t>(k)] = 0;
                ++k;
            }
            if (k == n) {
                break;
            }
        }
    }
    return best;
}

}  // namespace safe_smc
