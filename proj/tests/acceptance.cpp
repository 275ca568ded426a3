// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [artifact_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lattice_shadow/lattice_shadow.hpp"
#include "lattice_shadow/cli.hpp"

using namespace lattice_shadow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double max_abs_diff(const LatticeState& a, const LatticeState& b) {
    const LatticeState d = a - b;
    return std::max({linf_norm(d.R), linf_norm(d.P), linf_norm(d.r), linf_norm(d.p)});
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Default desk-scale setup shared by the lattice criteria.
struct Defaults {
    RunConfig cfg;
    BaseData base = cfg.base_data();
    ExperimentConfig exp = cfg.experiment();
};

Outcome energy_and_bound(const Defaults& d, bool energy) {
    LatticeParams p = d.cfg.params;
    p.mu = 1e-2;
    const InitialPair init = build_initial_data({0}, d.base.R0, d.base.P0, p);
    const Trajectory tr = integrate(init.mim_init, p, d.cfg.policy, System::mim, d.cfg.t_star, d.cfg.sample_dt);
    if (energy)
        return {tr.meta.max_relative_energy_drift <= 1e-8,
                "max relative drift " + fmt(tr.meta.max_relative_energy_drift) + " (limit 1e-08)"};
    double worst = 0.0;
    for (const LatticeState& s : tr.states) worst = std::max(worst, mu_norm(s, p) / tr.meta.initial_norm);
    return {worst <= 2.0, "max norm ratio " + fmt(worst) + " (limit 2)"};
}

Outcome residual_identity(const Defaults& d) {
    std::vector<double> mus, sups;
    double worst_rel = 0.0;
    for (const double mu : d.cfg.mu_grid) {
        LatticeParams p = d.cfg.params;
        p.mu = mu;
        const InitialPair init = build_initial_data({0}, d.base.R0, d.base.P0, p);
        const Trajectory tr = integrate(init.approx_init, p, d.cfg.policy, System::fput, d.cfg.t_star,
                                        d.cfg.sample_dt, ResonatorMode::slaved);
        double sup_force = 0.0;
        Sequence f(p.num_sites);
        for (const LatticeState& s : tr.states) {
            for (std::size_t j = 0; j < s.size(); ++j) f[j] = p.potential.d1(s.R[j]);
            sup_force = std::max(sup_force, l2_norm(difference(f, Direction::minus)));
        }
        const double predicted = std::sqrt(mu) * sup_force;
        const double sup = weighted_residual_sup(tr, p);
        worst_rel = std::max(worst_rel, std::abs(sup - predicted) / predicted);
        mus.push_back(mu);
        sups.push_back(sup);
    }
    const double slope = fit_loglog_slope(mus, sups).slope;
    return {worst_rel <= 1e-12 && std::abs(slope - 0.5) <= 0.02,
            "max relative mismatch " + fmt(worst_rel) + ", slope " + fmt(slope)};
}

Outcome rate(const ConvergenceReport& r, bool escape_allowed) {
    const double expected = r.level.expected_order();
    const double tol = r.level.slope_tolerance();
    std::string detail = "slope " + fmt(r.fitted_slope) + " (expected " + fmt(expected) + " +/- " + fmt(tol) +
                         ", r2 " + fmt(r.fit_r2) + ")";
    if (r.partial) return {false, detail + ", partial sweep: " + r.fit_failure};
    if (r.within_tolerance()) return {true, detail};
    if (escape_allowed && r.bound_unsaturated()) return {true, detail + ", bound unsaturated"};
    return {false, detail};
}

Outcome level_ordering(const Defaults& d) {
    const double e0 = shadowing_error({0}, 1e-3, d.base, d.exp);
    const double e2 = shadowing_error({2}, 1e-3, d.base, d.exp);
    return {e2 < e0 / 10.0, "level 2 " + fmt(e2) + " vs level 0 " + fmt(e0) + " (ratio " + fmt(e0 / e2) + ")"};
}

Outcome oscillatory_order() {
    const auto sin_derivs = [](int k, double s) {
        switch (k % 4) {
            case 0: return std::sin(s);
            case 1: return std::cos(s);
            case 2: return -std::sin(s);
            default: return -std::cos(s);
        }
    };
    const std::vector<double> ws{25, 50, 100, 200};
    bool pass = true;
    std::string detail;
    for (const int n : {0, 2}) {
        const OrderFitResult r = error_order_fit(sin_derivs, n, ws);
        const double slope = r.fit ? r.fit->slope : 0.0;
        pass = pass && r.fit && slope <= -(n + 1) + 0.2;
        detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + " slope " + fmt(slope);
    }
    return {pass, detail};
}

Outcome oracle_equivalence() {
    std::mt19937_64 gen(4);
    const auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 0.1 - 0.05; };
    LatticeParams p;
    p.num_sites = 4;
    p.mu = 1e-2;
    LatticeState s0 = LatticeState::zeros(4);
    for (auto* v : {&s0.R, &s0.P, &s0.r, &s0.p})
        for (double& x : *v) x = uniform();

    const StepPolicy rk{Scheme::rk4_fixed, 0.01, 20.0};
    const StepPolicy st{Scheme::strang_split, 0.01, 20.0};
    StepPolicy st_half = st;
    st_half.dt /= 2;
    st_half.fast_resolution *= 2;
    const auto at_one = [&](const StepPolicy& pol) { return integrate(s0, p, pol, System::mim, 1.0, 1.0).states.back(); };
    const LatticeState y_rk = at_one(rk), y_st = at_one(st), y_half = at_one(st_half);
    const double richardson = max_abs_diff(y_st, y_half) * 4.0 / 3.0;
    const double gap = max_abs_diff(y_rk, y_st);
    const bool schemes_ok = gap <= 10.0 * richardson;

    // closed-form resonator against the resonators integrated alongside a driven FPUT flow
    s0.r.assign(4, 0.0);
    s0.p = s0.P;
    const Trajectory tr = integrate(s0, p, StepPolicy{Scheme::rk4_fixed, 0.001, 80.0}, System::fput, 1.0, 0.01,
                                    ResonatorMode::driven);
    const std::size_t o = tr.origin_index();
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); i += 10) {
        const DrivenResonator c = driven_sho_solve(tr.states[o].r, tr.states[o].p, tr, p, i);
        const LatticeState& s = tr.states[i];
        for (std::size_t j = 0; j < 4; ++j) {
            worst = std::max(worst, std::abs(c.r[j] - s.r[j]) / std::max(linf_norm(s.r), 1e-300));
            worst = std::max(worst, std::abs(c.p[j] - s.p[j]) / std::max(linf_norm(s.p), 1e-300));
        }
    }
    return {schemes_ok && worst <= 1e-6, "scheme gap " + fmt(gap) + " vs 10x Richardson " + fmt(10 * richardson) +
                                             ", closed-form resonator relative error " + fmt(worst)};
}

Outcome exhaustive_identities() {
    double parity_err = 0.0;
    for (const double w : {1.0, 7.5, 200.0})
        for (const double t : {-1.0, 0.0, 0.3, 2.0}) {
            const double c = std::cos(w * t), s = std::sin(w * t);
            const double expected[] = {c, s, -c, -s};
            for (int j = 0; j <= 7; ++j) parity_err = std::max(parity_err, std::abs(parity_term(j, w, t) - expected[j % 4]));
        }
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double sbp_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 30;
        Sequence f(n), g(n);
        for (std::size_t j = 0; j < n; ++j) f[j] = u(gen), g[j] = u(gen);
        const Sequence df = difference(f, Direction::plus), dg = difference(g, Direction::minus);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            lhs += df[j] * g[j];
            rhs -= f[j] * dg[j];
        }
        sbp_err = std::max(sbp_err, std::abs(lhs - rhs));
    }
    return {parity_err <= 1e-12 && sbp_err <= 1e-12,
            "parity max error " + fmt(parity_err) + ", summation by parts max error " + fmt(sbp_err)};
}

Outcome determinism(const fs::path& root) {
    const fs::path a = root / "converge_a", b = root / "converge_b";
    fs::remove_all(a);
    fs::remove_all(b);
    std::ostringstream sink;
    const int ca = cli::run_command({"converge", "--out", a.string(), "--workers", "2"}, sink, sink);
    const int cb = cli::run_command({"converge", "--out", b.string(), "--workers", "1"}, sink, sink);
    bool same = ca == cli::ok && cb == cli::ok;
    for (const char* f : {"converge.csv", "converge.json"}) {
        const std::string x = slurp(a / f), y = slurp(b / f);
        same = same && !x.empty() && x == y;
    }
    return {same, "exit codes " + std::to_string(ca) + "/" + std::to_string(cb) +
                      (same ? ", artifacts byte-identical" : ", artifacts differ")};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path artifacts = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_artifacts");
    fs::create_directories(artifacts);
    const Defaults d;

    std::vector<ConvergenceReport> sweeps;
    const auto sweep = [&](int level) -> const ConvergenceReport& {
        if (sweeps.empty())
            for (int l = 0; l <= 2; ++l) sweeps.push_back(convergence_sweep({l}, d.cfg.mu_grid, d.base, d.exp, 0));
        return sweeps[static_cast<std::size_t>(level)];
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"energy conservation", [&] { return energy_and_bound(d, true); }},
        {"global norm bound", [&] { return energy_and_bound(d, false); }},
        {"FPUT residual identity", [&] { return residual_identity(d); }},
        {"level 0 shadowing rate", [&] { return rate(sweep(0), true); }},
        {"level 1 shadowing rate", [&] { return rate(sweep(1), true); }},
        {"level 2 shadowing rate", [&] { return rate(sweep(2), false); }},
        {"level ordering at mu=1e-3", [&] { return level_ordering(d); }},
        {"oscillatory remainder order", [] { return oscillatory_order(); }},
        {"oracle equivalence", [] { return oracle_equivalence(); }},
        {"parity and summation by parts", [] { return exhaustive_identities(); }},
        {"converge determinism", [&] { return determinism(artifacts); }},
    };

    int failures = 0;
    std::ostringstream summary;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
             << " [" << fmt(secs) << " s]";
        std::cout << line.str() << std::endl;
        summary << line.str() << "\n";
        failures += o.pass ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    std::ofstream(artifacts / "acceptance_summary.txt") << summary.str();
    return failures == 0 ? 0 : 1;
}
