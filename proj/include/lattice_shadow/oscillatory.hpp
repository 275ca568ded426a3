#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lattice_shadow/dynamics.hpp"
#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/fit.hpp"

// Integration-by-parts expansion of
//
//   I(t) = int_0^t exp(i w (t - s)) f(s) ds
//        = (i/w) sum_j (-i/w)^j f^(j)(t) - (i e^{iwt}/w) sum_j (-i/w)^j f^(j)(0) + remainder
//
// and of its real counterpart  I_mu[Q](t) = -(1/w) Im int_0^t e^{iw(t-s)} Q(s) ds,
// which is the delay term of the resonator convolution with Q = dP/dt.

namespace lattice_shadow {

using Complex = std::complex<double>;

/// Derivative values f^(j)(t) and f^(j)(0) for j = 0, 1, ... at frequency omega.
struct ExpansionInput {
    std::vector<double> derivs_at_t;
    std::vector<double> derivs_at_0;
    double omega = 1.0;
    double t = 0.0;
};

/// A test function exposes its derivatives: f(order, s) = f^(order)(s).
template <class F>
concept DerivativeFunction = requires(const F& f, int order, double s) {
    { f(order, s) } -> std::convertible_to<double>;
};

template <DerivativeFunction F>
ExpansionInput make_expansion_input(const F& f, int max_order, double omega, double t) {
    ExpansionInput in;
    in.omega = omega;
    in.t = t;
    for (int j = 0; j <= max_order; ++j) {
        in.derivs_at_t.push_back(f(j, t));
        in.derivs_at_0.push_back(f(j, 0.0));
    }
    return in;
}

/// (-i)^j without rounding.
inline Complex minus_i_power(int j) {
    switch (((j % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

/// Im(i e^{i w t} (-i)^j), evaluated in complex arithmetic.
inline double parity_term(int j, double omega, double t) {
    const Complex i{0.0, 1.0};
    return (i * std::exp(i * (omega * t)) * minus_i_power(j)).imag();
}

struct OscQuadrature {
    double points_per_period = 40.0;
    /// 0 chooses the panel count from points_per_period
    std::size_t panels = 0;
};

struct QuadratureResult {
    Complex value;
    /// |I(2N panels) - I(N panels)|
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

/// Minimum panels per fast period accepted for an explicit grid.
inline constexpr double min_osc_points_per_period = 20.0;

namespace detail {

template <class F>
Complex gauss_osc(const F& f, double omega, double t, std::size_t panels) {
    const double h = t / static_cast<double>(panels);
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < panels; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * h;
        for (std::size_t g = 0; g < gauss5_nodes.size(); ++g) {
            const double s = mid + 0.5 * h * gauss5_nodes[g];
            const double ph = omega * (t - s);
            acc += 0.5 * h * gauss5_weights[g] * Complex(std::cos(ph), std::sin(ph)) * f(s);
        }
    }
    return acc;
}

}  // namespace detail

/// int_0^t e^{i w (t - s)} f(s) ds by composite 5-point Gauss-Legendre, with a
/// grid-halving error estimate. f is called as f(s).
template <class F>
QuadratureResult osc_integral_exact(const F& f, double omega, double t, const OscQuadrature& quad = {}) {
    if (!(omega > 0.0)) throw ValidationError("omega must be > 0");
    if (t == 0.0) return {};
    const double period = 2.0 * std::numbers::pi / omega;
    std::size_t panels = quad.panels;
    if (panels == 0) {
        if (quad.points_per_period < min_osc_points_per_period)
            throw ConfigurationError("oscillatory quadrature grid unresolved");
        panels = std::max<std::size_t>(
            8, static_cast<std::size_t>(std::ceil(std::abs(t) / period * quad.points_per_period)));
    } else if (std::abs(t) / static_cast<double>(panels) > period / min_osc_points_per_period) {
        throw ConfigurationError("oscillatory quadrature grid unresolved");
    }
    const Complex coarse = detail::gauss_osc(f, omega, t, panels);
    const Complex fine = detail::gauss_osc(f, omega, t, 2 * panels);
    return {fine, std::abs(fine - coarse), 2 * panels};
}

/// Boundary sums of the expansion through order n (n = -1 gives 0).
inline Complex osc_expansion(const ExpansionInput& in, int n) {
    if (n < -1) throw ArityError("expansion order must be >= -1");
    const auto need = static_cast<std::size_t>(n + 1);
    if (in.derivs_at_t.size() < need || in.derivs_at_0.size() < need)
        throw ArityError("expansion of order " + std::to_string(n) + " needs " + std::to_string(need) +
                         " derivatives");
    const Complex i{0.0, 1.0};
    const Complex step = -i / in.omega;
    Complex pw{1.0, 0.0}, at_t{0.0, 0.0}, at_0{0.0, 0.0};
    for (int j = 0; j <= n; ++j) {
        at_t += pw * in.derivs_at_t[static_cast<std::size_t>(j)];
        at_0 += pw * in.derivs_at_0[static_cast<std::size_t>(j)];
        pw *= step;
    }
    const Complex e = std::exp(i * (in.omega * in.t));
    return (i / in.omega) * at_t - (i * e / in.omega) * at_0;
}

/// Real truncation of I_mu[Q](t) at half-order m:
///   - w^-2 sum_{k<m} (-1)^k w^-2k Q^(2k)(t)
///   + w^-2 (sum_{k<m} (-1)^k w^-2k Q^(2k)(0)) cos(wt)
///   + w^-3 (sum_{k<m} (-1)^k w^-2k Q^(2k+1)(0)) sin(wt)
inline double i_mu_expansion(const ExpansionInput& in, int m) {
    if (m < 0) throw ArityError("half-order must be >= 0");
    if (m == 0) return 0.0;
    const auto mm = static_cast<std::size_t>(m);
    if (in.derivs_at_t.size() < 2 * mm - 1 || in.derivs_at_0.size() < 2 * mm)
        throw ArityError("half-order " + std::to_string(m) + " needs " + std::to_string(2 * mm) + " derivatives");
    const double w = in.omega;
    const double w2 = w * w;
    double even_t = 0.0, even_0 = 0.0, odd_0 = 0.0;
    double pw = 1.0;  // (-1)^k / w^(2k)
    for (std::size_t k = 0; k < mm; ++k) {
        even_t += pw * in.derivs_at_t[2 * k];
        even_0 += pw * in.derivs_at_0[2 * k];
        odd_0 += pw * in.derivs_at_0[2 * k + 1];
        pw *= -1.0 / w2;
    }
    const double wt = w * in.t;
    return -even_t / w2 + even_0 * std::cos(wt) / w2 + odd_0 * std::sin(wt) / (w2 * w);
}

/// Truncated resonator displacement at one site: the homogeneous part plus
/// i_mu_expansion with Q = dP/dt.  `q0` is p(0) - P(0).
inline double f_mu_expansion(double r0, double q0, const ExpansionInput& dP, int m) {
    const double wt = dP.omega * dP.t;
    return r0 * std::cos(wt) + q0 * std::sin(wt) / dP.omega + i_mu_expansion(dP, m);
}

struct OrderFitResult {
    std::vector<double> omegas;
    /// |exact - expansion through order n - 1|
    std::vector<double> remainders;
    std::vector<double> quadrature_errors;
    std::optional<SlopeFit> fit;
    /// every remainder at rounding level: the expansion closes exactly
    bool exact_closure = false;
};

/// Decay rate in omega of the remainder left after the order n - 1 expansion.
/// The remainder is O(omega^-(n+1)) when f^(n) does not vanish.
template <DerivativeFunction F>
OrderFitResult error_order_fit(const F& f, int n, std::span<const double> omegas, double t = 1.0,
                               const OscQuadrature& quad = {}) {
    if (n < 0) throw ArityError("order must be >= 0");
    OrderFitResult out;
    bool all_tiny = true;
    for (const double w : omegas) {
        const auto value = [&f](double s) { return f(0, s); };
        const QuadratureResult exact = osc_integral_exact(value, w, t, quad);
        const ExpansionInput in = make_expansion_input(f, n, w, t);
        const double rem = std::abs(exact.value - osc_expansion(in, n - 1));
        out.omegas.push_back(w);
        out.remainders.push_back(rem);
        out.quadrature_errors.push_back(exact.error_estimate);
        const double scale = std::max(1.0, std::abs(exact.value));
        if (rem > 1e-12 * scale) all_tiny = false;
    }
    if (all_tiny) {
        out.exact_closure = true;
        return out;
    }
    out.fit = fit_loglog_slope(out.omegas, out.remainders);
    return out;
}

}  // namespace lattice_shadow
