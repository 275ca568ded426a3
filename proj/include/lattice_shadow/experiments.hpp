#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "lattice_shadow/dynamics.hpp"
#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/fit.hpp"
#include "lattice_shadow/lattice.hpp"
#include "lattice_shadow/trajectory.hpp"

namespace lattice_shadow {

/// Approximation level and the shadowing order it is expected to achieve.
///   0  plain FPUT with slaved resonators                 O(mu^1/2)
///   1  plain FPUT driving free resonators                O(mu)
///   2  FPUT with force / (1 + mu) driving resonators     O(mu^2)
struct ApproximationLevel {
    int level = 0;

    static ApproximationLevel from_int(int level) {
        if (level < 0 || level > 2) throw ValidationError("level must be 0, 1 or 2");
        return {level};
    }

    double expected_order() const noexcept {
        static constexpr double orders[] = {0.5, 1.0, 2.0};
        return orders[level];
    }

    /// Acceptance window around the expected slope.
    double slope_tolerance() const noexcept { return level == 2 ? 0.2 : 0.15; }

    System approximator_system() const noexcept { return level == 2 ? System::fput_modified : System::fput; }
    ResonatorMode approximator_resonators() const noexcept {
        return level == 0 ? ResonatorMode::slaved : ResonatorMode::driven;
    }

    bool operator==(const ApproximationLevel&) const = default;
};

/// Smooth localized (R0, P0) from which every experiment starts.
struct BaseData {
    Sequence R0;
    Sequence P0;

    double norm() const noexcept { return std::sqrt(sum_squares(R0) + sum_squares(P0)); }

    /// Gaussian displacement pulse centred on the ring, P0 = 0, scaled so
    /// sqrt(|R0|^2 + |P0|^2) = target_norm.
    static BaseData gaussian_pulse(std::size_t sites, double width, double target_norm) {
        BaseData d{Sequence(sites), Sequence(sites, 0.0)};
        const double centre = 0.5 * static_cast<double>(sites);
        for (std::size_t j = 0; j < sites; ++j) {
            const double x = (static_cast<double>(j) - centre) / width;
            d.R0[j] = std::exp(-x * x);
        }
        d.rescale(target_norm);
        return d;
    }

    /// Random values under a Gaussian envelope, reproducible from `seed`.
    static BaseData random_localized(std::size_t sites, double width, double target_norm, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        // map raw 64-bit draws directly so the values do not depend on the
        // standard library's distribution implementation
        const auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
        BaseData d{Sequence(sites), Sequence(sites)};
        const double centre = 0.5 * static_cast<double>(sites);
        for (std::size_t j = 0; j < sites; ++j) {
            const double x = (static_cast<double>(j) - centre) / width;
            const double env = std::exp(-x * x);
            d.R0[j] = env * uniform();
            d.P0[j] = env * uniform();
        }
        d.rescale(target_norm);
        return d;
    }

private:
    void rescale(double target_norm) {
        const double n = norm();
        if (n == 0.0) return;
        for (double& v : R0) v *= target_norm / n;
        for (double& v : P0) v *= target_norm / n;
    }
};

struct InitialPair {
    LatticeState mim_init;
    LatticeState approx_init;
};

/// Initial states for the lattice and the level's approximator; the two are equal.
///   level 0, 1:  r = 0, p = P0
///   level 2:     r = -(mu/kappa) delta^-[V'(R0)],
///                p = P0 - (mu/kappa) delta^-[V''(R0) delta^+ P0]
inline InitialPair build_initial_data(ApproximationLevel level, std::span<const double> R0,
                                      std::span<const double> P0, const LatticeParams& params) {
    if (R0.size() != P0.size()) throw InvalidLatticeError("R0 and P0 differ in length");
    const std::size_t n = R0.size();
    LatticeState s{Sequence(R0.begin(), R0.end()), Sequence(P0.begin(), P0.end()), Sequence(n, 0.0),
                   Sequence(P0.begin(), P0.end())};
    s.validate();
    if (level.level == 2) {
        // plain System::fput gives the unscaled chain-rule terms
        const auto [dP, d2P] = velocity_derivatives(s, params, System::fput);
        const double c = params.mu / params.kappa;
        for (std::size_t j = 0; j < n; ++j) {
            s.r[j] = -c * dP[j];
            s.p[j] = P0[j] - c * d2P[j];
        }
    }
    return {s, s};
}

/// Left side of the resonator initial-data condition for the level:
///   level 0, 1:  |r| + sqrt(mu) |p - P|
///   level 2:     |r + (mu/kappa) delta^-[V'(R)]| + sqrt(mu) |p - P + (mu/kappa) delta^-[V''(R) delta^+ P]|
inline double initial_constraint_defect(ApproximationLevel level, const LatticeState& s,
                                        const LatticeParams& params) {
    const std::size_t n = s.size();
    Sequence a = s.r, b(n);
    for (std::size_t j = 0; j < n; ++j) b[j] = s.p[j] - s.P[j];
    if (level.level == 2) {
        const auto [dP, d2P] = velocity_derivatives(s, params, System::fput);
        const double c = params.mu / params.kappa;
        for (std::size_t j = 0; j < n; ++j) {
            a[j] += c * dP[j];
            b[j] += c * d2P[j];
        }
    }
    return l2_norm(a) + std::sqrt(params.mu) * l2_norm(b);
}

/// Shared numerical settings of a shadowing experiment; params.mu is replaced per run.
struct ExperimentConfig {
    LatticeParams params{};
    StepPolicy policy{};
    double t_star = 10.0;
    double sample_dt = 0.1;
};

struct ShadowRun {
    double mu = 0.0;
    double sup_error = 0.0;
    std::vector<double> times;
    /// ||Phi(t) - Phi~(t)||_mu per sample
    std::vector<double> errors;
    IntegratorMeta mim_meta;
    IntegratorMeta approx_meta;
};

/// Integrate the lattice and the level's approximator from the same data and
/// record the mu-norm distance at every sample.
inline ShadowRun shadowing_run(ApproximationLevel level, double mu, const BaseData& base,
                               const ExperimentConfig& config) {
    LatticeParams params = config.params;
    params.mu = mu;
    params.validate();
    const InitialPair init = build_initial_data(level, base.R0, base.P0, params);

    const Trajectory mim = integrate(init.mim_init, params, config.policy, System::mim, config.t_star,
                                     config.sample_dt);
    const Trajectory approx = integrate(init.approx_init, params, config.policy, level.approximator_system(),
                                        config.t_star, config.sample_dt, level.approximator_resonators());

    ShadowRun run;
    run.mu = mu;
    run.times = mim.times;
    run.errors.reserve(mim.size());
    for (std::size_t i = 0; i < mim.size(); ++i) {
        const double e = mu_norm(mim.states[i] - approx.states[i], params);
        run.errors.push_back(e);
        run.sup_error = std::max(run.sup_error, e);
    }
    run.mim_meta = mim.meta;
    run.approx_meta = approx.meta;
    return run;
}

/// max over the sample grid of ||Phi(t) - Phi~(t)||_mu
inline double shadowing_error(ApproximationLevel level, double mu, const BaseData& base,
                              const ExperimentConfig& config) {
    return shadowing_run(level, mu, base, config).sup_error;
}

/// Run `task(i)` for i in [0, count) on up to `workers` threads. Results must be
/// written by index so the outcome does not depend on scheduling.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, const Task& task) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct RunRecord {
    double mu = 0.0;
    bool failed = false;
    std::string failure;
    std::optional<IntegratorMeta> mim_meta;
    std::optional<IntegratorMeta> approx_meta;
};

struct ConvergenceReport {
    ApproximationLevel level;
    /// successful runs only, strictly decreasing
    std::vector<double> mu_values;
    std::vector<double> sup_errors;
    double fitted_slope = std::numeric_limits<double>::quiet_NaN();
    double fit_intercept = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    std::vector<RunRecord> runs_meta;
    /// some run failed or the fit could not be formed
    bool partial = false;
    std::string fit_failure;

    bool within_tolerance() const {
        return std::abs(fitted_slope - level.expected_order()) <= level.slope_tolerance();
    }
    /// decay faster than the proven rate; the bound holds but is not attained
    bool bound_unsaturated() const { return fitted_slope > level.expected_order() + level.slope_tolerance(); }
};

inline void validate_mu_grid(std::span<const double> mu_grid) {
    if (mu_grid.size() < 4) throw ValidationError("mu_grid needs at least 4 points");
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        if (!(mu_grid[i] > 0.0) || !std::isfinite(mu_grid[i])) throw ValidationError("mu_grid values must be > 0");
        if (i > 0 && !(mu_grid[i] < mu_grid[i - 1])) throw ValidationError("mu_grid must be strictly decreasing");
    }
    if (mu_grid.front() / mu_grid.back() < 100.0 * (1.0 - 1e-12))
        throw ValidationError("mu_grid must span at least 2 decades");
}

/// Fit the order of `error_of(mu)` over the grid. `error_of` may throw; the run
/// is then recorded as failed and left out of the fit.
template <class ErrorFn>
ConvergenceReport convergence_sweep_with(ApproximationLevel level, std::span<const double> mu_grid,
                                         const ErrorFn& error_of, std::size_t workers = 1) {
    validate_mu_grid(mu_grid);
    struct Slot {
        double error = 0.0;
        RunRecord record;
    };
    std::vector<Slot> slots(mu_grid.size());
    parallel_for(mu_grid.size(), workers, [&](std::size_t i) {
        Slot& slot = slots[i];
        slot.record.mu = mu_grid[i];
        try {
            slot.error = error_of(mu_grid[i], slot.record);
            if (!(slot.error >= 0.0) || !std::isfinite(slot.error)) {
                slot.record.failed = true;
                slot.record.failure = "non-finite error";
            }
        } catch (const std::exception& e) {
            slot.record.failed = true;
            slot.record.failure = e.what();
        }
    });

    ConvergenceReport rep;
    rep.level = level;
    for (Slot& s : slots) {
        if (!s.record.failed) {
            rep.mu_values.push_back(s.record.mu);
            rep.sup_errors.push_back(s.error);
        } else {
            rep.partial = true;
        }
        rep.runs_meta.push_back(std::move(s.record));
    }
    try {
        const SlopeFit fit = fit_loglog_slope(rep.mu_values, rep.sup_errors);
        rep.fitted_slope = fit.slope;
        rep.fit_intercept = fit.intercept;
        rep.fit_r2 = fit.r2;
    } catch (const Error& e) {
        rep.partial = true;
        rep.fit_failure = e.what();
    }
    return rep;
}

/// Shadowing error for every mu in the grid and the fitted log-log slope.
inline ConvergenceReport convergence_sweep(ApproximationLevel level, std::span<const double> mu_grid,
                                           const BaseData& base, const ExperimentConfig& config,
                                           std::size_t workers = 1) {
    return convergence_sweep_with(
        level, mu_grid,
        [&](double mu, RunRecord& rec) {
            const ShadowRun run = shadowing_run(level, mu, base, config);
            rec.mim_meta = run.mim_meta;
            rec.approx_meta = run.approx_meta;
            return run.sup_error;
        },
        workers);
}

/// mu values (present in both reports) where `finer` is not below `coarser`.
inline std::vector<double> level_ordering_violations(const ConvergenceReport& finer,
                                                     const ConvergenceReport& coarser) {
    std::vector<double> out;
    for (std::size_t i = 0; i < finer.mu_values.size(); ++i) {
        for (std::size_t k = 0; k < coarser.mu_values.size(); ++k) {
            if (coarser.mu_values[k] == finer.mu_values[i] && finer.sup_errors[i] > coarser.sup_errors[k])
                out.push_back(finer.mu_values[i]);
        }
    }
    return out;
}

/// 10^-1, 10^-1.5, ..., 10^-4
inline std::vector<double> default_mu_grid() {
    std::vector<double> g;
    for (int i = 0; i < 7; ++i) g.push_back(std::pow(10.0, -1.0 - 0.5 * i));
    return g;
}

}  // namespace lattice_shadow
