#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lattice_shadow/dynamics.hpp"
#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/lattice.hpp"
#include "lattice_shadow/trajectory.hpp"

namespace lattice_shadow {

/// Where the time derivatives of a candidate trajectory come from.
///   vector_field        the approximator's own defining equations (exact)
///   centered_difference second-order centered differences of the samples
enum class DerivativeSource { vector_field, centered_difference };

/// Defects obtained by substituting a candidate into the mass-in-mass equations.
struct ResidualSample {
    double t = 0.0;
    Sequence res1, res2, res3, res4;
    double weighted_norm = 0.0;
    DerivativeSource source = DerivativeSource::vector_field;
};

/// sqrt(|res1|^2 + |res2|^2 + |res3|^2 + |res4|^2 / mu)
inline double weighted_residual_norm(const ResidualSample& s, double mu) {
    if (!(mu > 0.0)) throw SingularLimitError("weighted residual norm needs mu > 0");
    return std::sqrt(sum_squares(s.res1) + sum_squares(s.res2) + sum_squares(s.res3) + sum_squares(s.res4) / mu);
}

namespace detail {

inline LatticeState trajectory_derivative(const Trajectory& traj, std::size_t index, DerivativeSource source) {
    const LatticeState& s = traj.states.at(index);
    if (source == DerivativeSource::vector_field) {
        const VectorField field(traj.params, traj.meta.system, traj.meta.resonators);
        LatticeState d = LatticeState::zeros(s.size());
        field(s, d);
        return d;
    }
    if (index == 0 || index + 1 >= traj.size())
        throw DerivativeUnavailableError("centered differences unavailable at trajectory endpoint t = " +
                                         std::to_string(traj.times[index]));
    LatticeState d = traj.states[index + 1] - traj.states[index - 1];
    d.scale(1.0 / (traj.times[index + 1] - traj.times[index - 1]));
    return d;
}

}  // namespace detail

/// All four residuals of `approx` at sample `index`, evaluated with `params`.
inline ResidualSample residuals(const Trajectory& approx, const LatticeParams& params, std::size_t index,
                                DerivativeSource source = DerivativeSource::vector_field) {
    const LatticeState& s = approx.states.at(index);
    check_compatible(s, params);
    const LatticeState d = detail::trajectory_derivative(approx, index, source);
    const std::size_t n = s.size();

    ResidualSample out;
    out.t = approx.times[index];
    out.source = source;
    out.res1 = difference(s.P, Direction::plus);
    out.res2.resize(n);
    detail::force_into(s.R, params.potential, 1.0, out.res2);
    out.res3.resize(n);
    out.res4.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.res1[j] -= d.R[j];
        out.res2[j] += params.kappa * s.r[j] - d.P[j];
        out.res3[j] = s.p[j] - s.P[j] - d.r[j];
        out.res4[j] = -params.kappa * s.r[j] - params.mu * d.p[j];
    }
    out.weighted_norm = weighted_residual_norm(out, params.mu);
    return out;
}

/// Weighted residual norm at every sample where derivatives are available.
inline std::vector<ResidualSample> residual_series(const Trajectory& approx, const LatticeParams& params,
                                                   DerivativeSource source = DerivativeSource::vector_field) {
    std::vector<ResidualSample> out;
    out.reserve(approx.size());
    const std::size_t skip = source == DerivativeSource::centered_difference ? 1 : 0;
    for (std::size_t i = skip; i + skip < approx.size(); ++i) out.push_back(residuals(approx, params, i, source));
    return out;
}

/// Sup over the sample grid of the weighted residual norm.
inline double weighted_residual_sup(const Trajectory& approx, const LatticeParams& params,
                                    DerivativeSource source = DerivativeSource::vector_field) {
    double sup = 0.0;
    for (const ResidualSample& s : residual_series(approx, params, source)) sup = std::max(sup, s.weighted_norm);
    return sup;
}

struct ApproximatorReport {
    double alpha_observed = 0.0;
    double beta_observed = 0.0;
    /// largest alpha the potential tolerates
    double alpha_bound = 0.0;
    bool d3_satisfied = false;
};

/// Boundedness of R and dR/dt along the approximator, and whether V'' stays in
/// [k/2, 2k] on [-alpha, alpha].
inline ApproximatorReport good_approximator_check(const Trajectory& approx, const LatticeParams& params) {
    ApproximatorReport rep;
    Sequence dR(params.num_sites);
    for (const LatticeState& s : approx.states) {
        check_compatible(s, params);
        rep.alpha_observed = std::max(rep.alpha_observed, linf_norm(s.R));
        difference_into(s.P, Direction::plus, dR);
        rep.beta_observed = std::max(rep.beta_observed, linf_norm(dR));
    }
    const Potential& v = params.potential;
    const auto [lo, hi] = second_derivative_range(v, rep.alpha_observed);
    rep.d3_satisfied = lo >= 0.5 * v.k && hi <= 2.0 * v.k;
    rep.alpha_bound = d3_alpha_bound(v);
    return rep;
}

}  // namespace lattice_shadow
