#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/lattice.hpp"
#include "lattice_shadow/trajectory.hpp"

namespace lattice_shadow {

namespace detail {

/// out = scale * delta^-[V'(R)]
inline void force_into(std::span<const double> R, const Potential& v, double scale, std::span<double> out) {
    for (std::size_t j = 0; j < R.size(); ++j) out[j] = v.d1(R[j]);
    difference_into(out, Direction::minus, out);
    if (scale != 1.0)
        for (double& x : out) x *= scale;
}

inline double force_scale(System system, double mu) {
    return system == System::fput_modified ? 1.0 / (1.0 + mu) : 1.0;
}

inline bool resonators_dynamic(System system, ResonatorMode mode) {
    return system == System::mim || mode == ResonatorMode::driven;
}

}  // namespace detail

/// Mass-in-mass vector field (dR, dP, dr, dp).
inline LatticeState mim_rhs(const LatticeState& s, const LatticeParams& params) {
    check_compatible(s, params);
    if (!(params.mu > 0.0))
        throw SingularLimitError("mass-in-mass equations are singular at mu = 0; use the FPUT flow");
    const std::size_t n = s.size();
    LatticeState d = LatticeState::zeros(n);
    difference_into(s.P, Direction::plus, d.R);
    detail::force_into(s.R, params.potential, 1.0, d.P);
    const double stiff = params.kappa / params.mu;
    for (std::size_t j = 0; j < n; ++j) {
        d.P[j] += params.kappa * s.r[j];
        d.r[j] = s.p[j] - s.P[j];
        d.p[j] = -stiff * s.r[j];
    }
    return d;
}

struct FputDerivative {
    Sequence dR;
    Sequence dP;
};

/// FPUT vector field; `modified` scales the force by 1 / (1 + mu).
inline FputDerivative fput_rhs(std::span<const double> R, std::span<const double> P, const LatticeParams& params,
                               bool modified) {
    if (R.size() != P.size()) throw InvalidLatticeError("R and P differ in length");
    FputDerivative d{Sequence(R.size()), Sequence(R.size())};
    difference_into(P, Direction::plus, d.dR);
    detail::force_into(R, params.potential, modified ? 1.0 / (1.0 + params.mu) : 1.0, d.dP);
    return d;
}

/// dP/dt and d^2P/dt^2 at a state, from the flow's own equations (no differencing).
///
/// FPUT-type: dP = c delta^-[V'(R)],  d2P = c delta^-[V''(R) delta^+ P]
/// MiM:       dP = delta^-[V'(R)] + kappa r,  d2P = delta^-[V''(R) delta^+ P] + kappa (p - P)
inline std::pair<Sequence, Sequence> velocity_derivatives(const LatticeState& s, const LatticeParams& params,
                                                          System system) {
    const std::size_t n = s.size();
    const Potential& v = params.potential;
    const double c = detail::force_scale(system, params.mu);
    Sequence dP(n), d2P(n), dR(n);
    detail::force_into(s.R, v, c, dP);
    difference_into(s.P, Direction::plus, dR);
    for (std::size_t j = 0; j < n; ++j) d2P[j] = v.d2(s.R[j]) * dR[j];
    difference_into(d2P, Direction::minus, d2P);
    for (double& x : d2P) x *= c;
    if (system == System::mim) {
        for (std::size_t j = 0; j < n; ++j) {
            dP[j] += params.kappa * s.r[j];
            d2P[j] += params.kappa * (s.p[j] - s.P[j]);
        }
    }
    return {std::move(dP), std::move(d2P)};
}

/// Full-state vector field of a flow, reusing an internal scratch buffer.
class VectorField {
public:
    VectorField(const LatticeParams& params, System system, ResonatorMode mode)
        : params_(params), system_(system), mode_(mode), scale_(detail::force_scale(system, params.mu)) {
        if (detail::resonators_dynamic(system, mode) && !(params.mu > 0.0))
            throw SingularLimitError(system == System::mim
                                         ? "mass-in-mass equations are singular at mu = 0; use the FPUT flow"
                                         : "driven resonators are singular at mu = 0");
        stiff_ = params.mu > 0.0 ? params.kappa / params.mu : 0.0;
    }

    /// Whole vector field.
    void operator()(const LatticeState& s, LatticeState& d) const {
        slow(s, d);
        fast(s, d);
    }

    /// (R, P) part with r held fixed; resonator slots of d are zeroed.
    void slow(const LatticeState& s, LatticeState& d) const {
        difference_into(s.P, Direction::plus, d.R);
        detail::force_into(s.R, params_.potential, scale_, d.P);
        if (system_ == System::mim)
            for (std::size_t j = 0; j < s.size(); ++j) d.P[j] += params_.kappa * s.r[j];
        std::fill(d.r.begin(), d.r.end(), 0.0);
        std::fill(d.p.begin(), d.p.end(), 0.0);
    }

    bool dynamic_resonators() const noexcept { return detail::resonators_dynamic(system_, mode_); }
    System system() const noexcept { return system_; }
    ResonatorMode mode() const noexcept { return mode_; }
    const LatticeParams& params() const noexcept { return params_; }

    /// Exact flow of r' = p - P, p' = -omega^2 r with P frozen, over time h.
    void rotate_resonators(LatticeState& s, double h) const {
        if (!dynamic_resonators()) return;
        const double w = std::sqrt(stiff_);
        const double c = std::cos(w * h);
        const double sn = std::sin(w * h);
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double q = s.p[j] - s.P[j];
            const double r = s.r[j];
            s.r[j] = r * c + q * sn / w;
            s.p[j] = s.P[j] - w * r * sn + q * c;
        }
    }

    /// Slaved resonators follow the host exactly.
    void enforce_constraints(LatticeState& s) const {
        if (dynamic_resonators()) return;
        std::fill(s.r.begin(), s.r.end(), 0.0);
        s.p = s.P;
    }

    /// Energy the flow conserves (resonator terms only for the full lattice).
    double conserved_energy(const LatticeState& s) const {
        const Potential& v = params_.potential;
        double e = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) e += scale_ * v.value(s.R[j]) + 0.5 * s.P[j] * s.P[j];
        if (system_ == System::mim)
            for (std::size_t j = 0; j < s.size(); ++j)
                e += 0.5 * params_.kappa * s.r[j] * s.r[j] + 0.5 * params_.mu * s.p[j] * s.p[j];
        return e;
    }

private:
    void fast(const LatticeState& s, LatticeState& d) const {
        if (dynamic_resonators()) {
            for (std::size_t j = 0; j < s.size(); ++j) {
                d.r[j] = s.p[j] - s.P[j];
                d.p[j] = -stiff_ * s.r[j];
            }
        } else {
            d.p = d.P;
        }
    }

    LatticeParams params_;
    System system_;
    ResonatorMode mode_;
    double scale_;
    double stiff_ = 0.0;
};

/// Fixed-step stepper holding its stage buffers.
class Stepper {
public:
    Stepper(const VectorField& field, Scheme scheme, std::size_t sites)
        : field_(field),
          scheme_(scheme),
          k1_(LatticeState::zeros(sites)),
          k2_(LatticeState::zeros(sites)),
          k3_(LatticeState::zeros(sites)),
          k4_(LatticeState::zeros(sites)),
          tmp_(LatticeState::zeros(sites)) {}

    void step(LatticeState& y, double h) {
        if (scheme_ == Scheme::rk4_fixed)
            rk4(y, h);
        else
            strang(y, h);
        field_.enforce_constraints(y);
    }

private:
    void rk4(LatticeState& y, double h) {
        field_(y, k1_);
        tmp_ = y;
        tmp_.axpy(0.5 * h, k1_);
        field_(tmp_, k2_);
        tmp_ = y;
        tmp_.axpy(0.5 * h, k2_);
        field_(tmp_, k3_);
        tmp_ = y;
        tmp_.axpy(h, k3_);
        field_(tmp_, k4_);
        const double h6 = h / 6.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            y.R[j] += h6 * (k1_.R[j] + 2.0 * (k2_.R[j] + k3_.R[j]) + k4_.R[j]);
            y.P[j] += h6 * (k1_.P[j] + 2.0 * (k2_.P[j] + k3_.P[j]) + k4_.P[j]);
            y.r[j] += h6 * (k1_.r[j] + 2.0 * (k2_.r[j] + k3_.r[j]) + k4_.r[j]);
            y.p[j] += h6 * (k1_.p[j] + 2.0 * (k2_.p[j] + k3_.p[j]) + k4_.p[j]);
        }
    }

    // half rotation / explicit midpoint on (R, P) / half rotation
    void strang(LatticeState& y, double h) {
        field_.rotate_resonators(y, 0.5 * h);
        field_.slow(y, k1_);
        tmp_ = y;
        tmp_.axpy(0.5 * h, k1_);
        field_.slow(tmp_, k2_);
        for (std::size_t j = 0; j < y.size(); ++j) {
            y.R[j] += h * k2_.R[j];
            y.P[j] += h * k2_.P[j];
        }
        field_.rotate_resonators(y, 0.5 * h);
    }

    const VectorField& field_;
    Scheme scheme_;
    LatticeState k1_, k2_, k3_, k4_, tmp_;
};

/// Step size actually used and the number of steps per sample interval.
inline std::pair<double, std::size_t> effective_step(const StepPolicy& policy, const LatticeParams& params,
                                                     bool dynamic_resonators, double sample_dt) {
    policy.validate();
    double h_max = policy.dt;
    if (dynamic_resonators) {
        if (policy.fast_resolution < min_fast_resolution)
            throw ConfigurationError("fast resonator period unresolved: fast_resolution " +
                                     std::to_string(policy.fast_resolution) + " is below the minimum " +
                                     std::to_string(min_fast_resolution));
        h_max = std::min(h_max, params.fast_period() / policy.fast_resolution);
    }
    const auto steps = static_cast<std::size_t>(std::ceil(sample_dt / h_max * (1.0 - 1e-12)));
    const std::size_t m = std::max<std::size_t>(steps, 1);
    return {sample_dt / static_cast<double>(m), m};
}

/// Integrate forward and backward from t = 0, sampling [-t_final, t_final] every sample_dt.
///
/// For FPUT-type systems the resonator slots are either slaved (r = 0, p = P)
/// or evolved as oscillators driven by P; see ResonatorMode.
inline Trajectory integrate(const LatticeState& state0, const LatticeParams& params, const StepPolicy& policy,
                            System system, double t_final, double sample_dt,
                            ResonatorMode resonators = ResonatorMode::driven) {
    params.validate();
    check_compatible(state0, params);
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be > 0");
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw ValidationError("sample_dt must be > 0");
    const double ratio = t_final / sample_dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw ValidationError("t_final must be a whole multiple of sample_dt");

    const VectorField field(params, system, resonators);
    const auto [h, steps] = effective_step(policy, params, field.dynamic_resonators(), sample_dt);

    Trajectory traj;
    traj.params = params;
    traj.times.resize(2 * n + 1);
    traj.states.resize(2 * n + 1);
    for (std::size_t i = 0; i <= 2 * n; ++i)
        traj.times[i] = (static_cast<double>(i) - static_cast<double>(n)) * sample_dt;

    LatticeState y0 = state0;
    field.enforce_constraints(y0);
    traj.states[n] = y0;

    Stepper stepper(field, policy.scheme, y0.size());
    for (const int dir : {1, -1}) {
        LatticeState y = y0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t s = 0; s < steps; ++s) stepper.step(y, dir * h);
            const std::size_t idx = dir > 0 ? n + i : n - i;
            if (!y.all_finite())
                throw BlowUpError("non-finite state at t = " + std::to_string(traj.times[idx]), traj.times[idx]);
            traj.states[idx] = y;
        }
    }

    IntegratorMeta& meta = traj.meta;
    meta.scheme = policy.scheme;
    meta.system = system;
    meta.resonators = resonators;
    meta.dt_effective = h;
    meta.steps_per_sample = steps;
    meta.energy_drift_bound = policy.scheme == Scheme::rk4_fixed ? 1e-8 : 1e-4;
    const double e0 = field.conserved_energy(y0);
    const double denom = std::max(std::abs(e0), 1e-300);
    meta.initial_norm = mu_norm(y0, params);
    for (const LatticeState& s : traj.states) {
        meta.max_relative_energy_drift =
            std::max(meta.max_relative_energy_drift, std::abs(field.conserved_energy(s) - e0) / denom);
        if (meta.initial_norm > 0.0)
            meta.max_norm_ratio = std::max(meta.max_norm_ratio, mu_norm(s, params) / meta.initial_norm);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Closed-form driven resonator
// ---------------------------------------------------------------------------

/// Five-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 5> gauss5_nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                    0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> gauss5_weights{0.2369268850561891, 0.4786286704993665,
                                                      0.5688888888888889, 0.4786286704993665,
                                                      0.2369268850561891};

struct SHOQuadrature {
    double fast_resolution = 20.0;
    /// 0 picks the panel count from fast_resolution and the driver's grid.
    std::size_t panels = 0;
};

/// A driver supplies P(t) and dP/dt(t) for every site.
template <class D>
concept VelocityDriver = requires(const D& d, double t, std::span<double> out) {
    d.velocity(t, out);
    d.acceleration(t, out);
    { d.sites() } -> std::convertible_to<std::size_t>;
    { d.max_panel_width() } -> std::convertible_to<double>;
};

struct DrivenResonator {
    Sequence r;
    Sequence p;
};

/// Resonator state at time t by variation of parameters:
///   r(t) = r0 cos(wt) + (p0 - P(0)) sin(wt) / w - (1/w) int_0^t sin(w(t-s)) P'(s) ds
///   p(t) = P(t) - w r0 sin(wt) + (p0 - P(0)) cos(wt) - int_0^t cos(w(t-s)) P'(s) ds
/// The convolutions use composite 5-point Gauss-Legendre panels no wider than
/// fast_period / fast_resolution.
template <VelocityDriver Driver>
DrivenResonator driven_sho_solve(std::span<const double> r0, std::span<const double> p0, const Driver& driver,
                                 const LatticeParams& params, double t, const SHOQuadrature& quad = {}) {
    const std::size_t n = driver.sites();
    if (r0.size() != n || p0.size() != n) throw InvalidLatticeError("resonator data length differs from driver");
    const double w = params.omega();
    const double period = 2.0 * std::numbers::pi / w;
    if (quad.fast_resolution < min_fast_resolution)
        throw ConfigurationError("quadrature cannot resolve the fast period");
    const double h_max = std::min(period / quad.fast_resolution, driver.max_panel_width());

    std::size_t panels = quad.panels;
    if (panels == 0) {
        panels = static_cast<std::size_t>(std::ceil(std::abs(t) / h_max * (1.0 - 1e-12)));
    } else if (std::abs(t) / static_cast<double>(panels) > period / quad.fast_resolution) {
        throw ConfigurationError("quadrature grid coarser than the fast period allows");
    }

    DrivenResonator out{Sequence(n), Sequence(n)};
    Sequence P0(n), Pt(n), q(n);
    driver.velocity(0.0, P0);
    driver.velocity(t, Pt);
    const double c = std::cos(w * t), s = std::sin(w * t);
    for (std::size_t j = 0; j < n; ++j) {
        const double q0 = p0[j] - P0[j];
        out.r[j] = r0[j] * c + q0 * s / w;
        out.p[j] = Pt[j] - w * r0[j] * s + q0 * c;
    }
    if (panels == 0) return out;

    Sequence sin_int(n, 0.0), cos_int(n, 0.0);
    const double h = t / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * h;
        for (std::size_t g = 0; g < gauss5_nodes.size(); ++g) {
            const double tau = mid + 0.5 * h * gauss5_nodes[g];
            const double wt = 0.5 * h * gauss5_weights[g];
            driver.acceleration(tau, q);
            const double ks = std::sin(w * (t - tau)) * wt;
            const double kc = std::cos(w * (t - tau)) * wt;
            for (std::size_t j = 0; j < n; ++j) {
                sin_int[j] += ks * q[j];
                cos_int[j] += kc * q[j];
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        out.r[j] -= sin_int[j] / w;
        out.p[j] -= cos_int[j];
    }
    return out;
}

/// Driver backed by a sampled trajectory. P and dP/dt between samples come from
/// cubic Hermite interpolation with derivatives taken from the flow's equations.
class TrajectoryDriver {
public:
    explicit TrajectoryDriver(const Trajectory& traj) : t0_(traj.times.front()), dt_(traj.sample_dt()) {
        if (traj.size() < 2) throw InvalidLatticeError("driver trajectory needs at least 2 samples");
        sites_ = traj.states.front().size();
        for (const LatticeState& s : traj.states) {
            auto [dP, d2P] = velocity_derivatives(s, traj.params, traj.meta.system);
            P_.push_back(s.P);
            dP_.push_back(std::move(dP));
            d2P_.push_back(std::move(d2P));
        }
    }

    std::size_t sites() const noexcept { return sites_; }
    double max_panel_width() const noexcept { return dt_; }

    void velocity(double t, std::span<double> out) const { hermite(t, P_, dP_, out); }
    void acceleration(double t, std::span<double> out) const { hermite(t, dP_, d2P_, out); }

private:
    void hermite(double t, const std::vector<Sequence>& f, const std::vector<Sequence>& df,
                 std::span<double> out) const {
        const double x = (t - t0_) / dt_;
        const auto last = static_cast<double>(f.size() - 1);
        if (x < -1e-9 || x > last + 1e-9) throw ValidationError("driver evaluated outside its trajectory");
        const auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, last - 1.0));
        const double u = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
        const double u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        for (std::size_t j = 0; j < sites_; ++j)
            out[j] = h00 * f[i][j] + h10 * dt_ * df[i][j] + h01 * f[i + 1][j] + h11 * dt_ * df[i + 1][j];
    }

    double t0_;
    double dt_;
    std::size_t sites_ = 0;
    std::vector<Sequence> P_, dP_, d2P_;
};

/// driven_sho_solve against a stored trajectory, evaluated at its sample `index`.
inline DrivenResonator driven_sho_solve(std::span<const double> r0, std::span<const double> p0,
                                        const Trajectory& driver_traj, const LatticeParams& params,
                                        std::size_t index, const SHOQuadrature& quad = {}) {
    const TrajectoryDriver driver(driver_traj);
    return driven_sho_solve(r0, p0, driver, params, driver_traj.times.at(index), quad);
}

}  // namespace lattice_shadow
