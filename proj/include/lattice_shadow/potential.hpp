#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lattice_shadow/errors.hpp"

namespace lattice_shadow {

/// Quartic spring potential V(h) = (k/2)h^2 + (a/3)h^3 + (b/4)h^4.
///
/// Every member of the family has V(0) = V'(0) = 0 and V''(0) = k, so k > 0
/// is the only constraint.
struct Potential {
    double k = 1.0;
    double a = 1.0;
    double b = 0.0;

    void validate() const {
        if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("k must be > 0");
        if (!std::isfinite(a)) throw ValidationError("a must be finite");
        if (!std::isfinite(b)) throw ValidationError("b must be finite");
    }

    double value(double h) const noexcept {
        return h * h * (0.5 * k + h * (a / 3.0 + 0.25 * b * h));
    }
    double d1(double h) const noexcept { return h * (k + h * (a + b * h)); }
    double d2(double h) const noexcept { return k + h * (2.0 * a + 3.0 * b * h); }
    double d3(double h) const noexcept { return 2.0 * a + 6.0 * b * h; }

    bool operator==(const Potential&) const = default;
};

/// Exact [min, max] of V'' over [-alpha, alpha].
inline std::pair<double, double> second_derivative_range(const Potential& v, double alpha) {
    alpha = std::abs(alpha);
    double lo = std::min(v.d2(-alpha), v.d2(alpha));
    double hi = std::max(v.d2(-alpha), v.d2(alpha));
    if (v.b != 0.0) {
        const double vertex = -v.a / (3.0 * v.b);
        if (std::abs(vertex) <= alpha) {
            lo = std::min(lo, v.d2(vertex));
            hi = std::max(hi, v.d2(vertex));
        }
    }
    return {lo, hi};
}

/// Largest alpha with V''([-alpha, alpha]) inside [k/2, 2k]; +inf when V'' never leaves it.
inline double d3_alpha_bound(const Potential& v) {
    double best = std::numeric_limits<double>::infinity();
    // V''(h) = c  <=>  3b h^2 + 2a h + (k - c) = 0
    for (const double c : {0.5 * v.k, 2.0 * v.k}) {
        const double qa = 3.0 * v.b;
        const double qb = 2.0 * v.a;
        const double qc = v.k - c;
        if (qa == 0.0) {
            if (qb != 0.0) best = std::min(best, std::abs(-qc / qb));
            continue;
        }
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) continue;
        const double s = std::sqrt(disc);
        // numerically stable pair of roots
        const double q = -0.5 * (qb + std::copysign(s, qb == 0.0 ? 1.0 : qb));
        if (q != 0.0) {
            best = std::min(best, std::abs(q / qa));
            best = std::min(best, std::abs(qc / q));
        }
    }
    return best;
}

}  // namespace lattice_shadow
