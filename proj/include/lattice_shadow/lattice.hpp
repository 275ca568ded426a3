#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/potential.hpp"

namespace lattice_shadow {

using Sequence = std::vector<double>;

enum class Direction { plus, minus };

/// Periodic forward (plus) or backward (minus) difference written into `out`.
///   plus:  out_j = q_{j+1} - q_j
///   minus: out_j = q_j - q_{j-1}
inline void difference_into(std::span<const double> q, Direction dir, std::span<double> out) {
    const std::size_t n = q.size();
    if (n < 2) throw InvalidLatticeError("difference needs at least 2 sites");
    if (out.size() != n) throw InvalidLatticeError("difference output length mismatch");
    if (dir == Direction::plus) {
        for (std::size_t j = 0; j + 1 < n; ++j) out[j] = q[j + 1] - q[j];
        out[n - 1] = q[0] - q[n - 1];
    } else {
        // walk backwards so in-place use (out aliasing q) stays correct
        const double first = q[0] - q[n - 1];
        for (std::size_t j = n - 1; j > 0; --j) out[j] = q[j] - q[j - 1];
        out[0] = first;
    }
}

inline Sequence difference(std::span<const double> q, Direction dir) {
    Sequence out(q.size());
    difference_into(q, dir, out);
    return out;
}

inline double sum_squares(std::span<const double> q) noexcept {
    double s = 0.0;
    for (const double v : q) s += v * v;
    return s;
}

inline double l2_norm(std::span<const double> q) noexcept { return std::sqrt(sum_squares(q)); }

inline double linf_norm(std::span<const double> q) noexcept {
    double m = 0.0;
    for (const double v : q) m = std::max(m, std::abs(v));
    return m;
}

/// Physical constants and ring size. mu = 0 selects the FPUT limit.
struct LatticeParams {
    double kappa = 1.0;
    double mu = 0.01;
    Potential potential{};
    std::size_t num_sites = 256;

    void validate() const {
        potential.validate();
        if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be > 0");
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be ≥ 0");
        if (num_sites < 2) throw ValidationError("num_sites must be ≥ 2");
    }

    /// Resonator frequency sqrt(kappa / mu); requires mu > 0.
    double omega() const {
        if (!(mu > 0.0)) throw SingularLimitError("resonator frequency is undefined at mu = 0");
        return std::sqrt(kappa / mu);
    }

    double fast_period() const { return 2.0 * std::numbers::pi / omega(); }

    bool operator==(const LatticeParams&) const = default;
};

/// One snapshot (R, P, r, p) of the lattice.
struct LatticeState {
    Sequence R;
    Sequence P;
    Sequence r;
    Sequence p;

    static LatticeState zeros(std::size_t sites) {
        return {Sequence(sites, 0.0), Sequence(sites, 0.0), Sequence(sites, 0.0), Sequence(sites, 0.0)};
    }

    std::size_t size() const noexcept { return R.size(); }

    void validate() const {
        const std::size_t n = R.size();
        if (n < 2) throw InvalidLatticeError("lattice state needs at least 2 sites");
        if (P.size() != n || r.size() != n || p.size() != n)
            throw InvalidLatticeError("lattice state components differ in length");
    }

    bool all_finite() const noexcept {
        for (const Sequence* c : {&R, &P, &r, &p})
            for (const double v : *c)
                if (!std::isfinite(v)) return false;
        return true;
    }

    /// this += alpha * other
    LatticeState& axpy(double alpha, const LatticeState& other) {
        for (std::size_t j = 0; j < R.size(); ++j) {
            R[j] += alpha * other.R[j];
            P[j] += alpha * other.P[j];
            r[j] += alpha * other.r[j];
            p[j] += alpha * other.p[j];
        }
        return *this;
    }

    LatticeState& scale(double alpha) {
        for (Sequence* c : {&R, &P, &r, &p})
            for (double& v : *c) v *= alpha;
        return *this;
    }

    bool operator==(const LatticeState&) const = default;
};

inline LatticeState operator-(LatticeState lhs, const LatticeState& rhs) {
    lhs.axpy(-1.0, rhs);
    return lhs;
}

inline LatticeState operator*(double alpha, LatticeState s) {
    s.scale(alpha);
    return s;
}

inline void check_compatible(const LatticeState& s, const LatticeParams& params) {
    s.validate();
    if (s.size() != params.num_sites)
        throw InvalidLatticeError("state has " + std::to_string(s.size()) + " sites, params expect " +
                                  std::to_string(params.num_sites));
}

/// sqrt(k/2 |R|^2 + 1/2 |P|^2 + kappa/2 |r|^2 + mu/2 |p|^2)
inline double mu_norm(const LatticeState& s, const LatticeParams& params) {
    s.validate();
    const double k = params.potential.k;
    return std::sqrt(0.5 * (k * sum_squares(s.R) + sum_squares(s.P) + params.kappa * sum_squares(s.r) +
                            params.mu * sum_squares(s.p)));
}

/// Mechanical energy H; conserved along the mass-in-mass flow.
inline double energy_H(const LatticeState& s, const LatticeParams& params) {
    s.validate();
    const Potential& v = params.potential;
    double h = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        h += v.value(s.R[j]) + 0.5 * s.P[j] * s.P[j] + 0.5 * params.kappa * s.r[j] * s.r[j] +
             0.5 * params.mu * s.p[j] * s.p[j];
    }
    return h;
}

/// Shifted potential W(z; base) = V(base + z) - V(base) - V'(base) z.
///
/// Evaluated through its Taylor polynomial in z, which is exact for the quartic
/// family and avoids cancellation when z is small next to base.
inline double shifted_potential(const Potential& v, double base, double z) noexcept {
    return z * z * (0.5 * v.d2(base) + z * (v.d3(base) / 6.0 + 0.25 * v.b * z));
}

/// Modified energy of an error state psi around the approximator displacement R_tilde.
inline double modified_energy_E(const LatticeState& psi, std::span<const double> R_tilde,
                                const LatticeParams& params) {
    psi.validate();
    if (R_tilde.size() != psi.size()) throw InvalidLatticeError("base point length differs from state");
    const Potential& v = params.potential;
    double e = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        e += shifted_potential(v, R_tilde[j], psi.R[j]) + 0.5 * psi.P[j] * psi.P[j] +
             0.5 * params.kappa * psi.r[j] * psi.r[j] + 0.5 * params.mu * psi.p[j] * psi.p[j];
    }
    return e;
}

}  // namespace lattice_shadow
