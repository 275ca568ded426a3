#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/lattice.hpp"

namespace lattice_shadow {

enum class Scheme { rk4_fixed, strang_split };

/// Which flow a trajectory follows.
///   mim            full mass-in-mass lattice
///   fput           plain FPUT for (R, P)
///   fput_modified  FPUT with the force scaled by 1 / (1 + mu)
enum class System { mim, fput, fput_modified };

/// How an FPUT-type flow fills the resonator slots.
///   slaved  r = 0, p = P at all times
///   driven  (r, p) solve r' = p - P, mu p' = -kappa r with P from the FPUT flow
enum class ResonatorMode { slaved, driven };

inline constexpr std::string_view to_string(Scheme s) {
    return s == Scheme::rk4_fixed ? "rk4-fixed" : "strang-split";
}

inline constexpr std::string_view to_string(System s) {
    switch (s) {
        case System::mim: return "mim";
        case System::fput: return "fput";
        case System::fput_modified: return "fput-modified";
    }
    return "?";
}

inline constexpr std::string_view to_string(ResonatorMode m) {
    return m == ResonatorMode::slaved ? "slaved" : "driven";
}

/// Resolutions below this cannot follow the resonator oscillation.
inline constexpr double min_fast_resolution = 4.0;

/// Fixed step policy. `dt` is an upper bound; when resonators are dynamic the
/// effective step is further capped at fast_period / fast_resolution.
struct StepPolicy {
    Scheme scheme = Scheme::rk4_fixed;
    double dt = 0.01;
    double fast_resolution = 20.0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
        if (!(fast_resolution > 0.0) || !std::isfinite(fast_resolution))
            throw ValidationError("fast_resolution must be > 0");
    }

    bool operator==(const StepPolicy&) const = default;
};

struct IntegratorMeta {
    Scheme scheme = Scheme::rk4_fixed;
    System system = System::mim;
    ResonatorMode resonators = ResonatorMode::driven;
    double dt_effective = 0.0;
    std::size_t steps_per_sample = 0;
    /// max_t |E(t) - E(0)| / max(|E(0)|, tiny) for the flow's conserved energy
    double max_relative_energy_drift = 0.0;
    double energy_drift_bound = 0.0;
    /// max_t ||Phi(t)||_mu / ||Phi(0)||_mu (0 for the zero trajectory)
    double max_norm_ratio = 0.0;
    double initial_norm = 0.0;

    bool energy_within_bound() const noexcept { return max_relative_energy_drift <= energy_drift_bound; }
};

/// Uniformly sampled solution on [-T, T].
struct Trajectory {
    LatticeParams params;
    std::vector<double> times;
    std::vector<LatticeState> states;
    IntegratorMeta meta;

    std::size_t size() const noexcept { return times.size(); }
    double sample_dt() const noexcept { return times.size() > 1 ? times[1] - times[0] : 0.0; }

    /// Index of the sample at t = 0.
    std::size_t origin_index() const noexcept { return times.size() / 2; }
};

}  // namespace lattice_shadow
