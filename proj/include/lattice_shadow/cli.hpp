#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lattice_shadow/config.hpp"
#include "lattice_shadow/csv.hpp"
#include "lattice_shadow/dynamics.hpp"
#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/experiments.hpp"
#include "lattice_shadow/oscillatory.hpp"
#include "lattice_shadow/residuals.hpp"
#include "lattice_shadow/version.hpp"

namespace lattice_shadow::cli {

using Json = nlohmann::ordered_json;

enum ExitStatus : int { ok = 0, validation_failure = 1, numerical_failure = 2 };

/// Settings given on the command line on top of the config document.
struct Overrides {
    std::string config = "default";
    std::optional<int> level;
    std::optional<double> mu;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> system;
};

inline RunConfig load_config(const Overrides& o) {
    RunConfig cfg;
    if (o.config != "default") {
        std::ifstream f(o.config, std::ios::binary);
        if (!f) throw IoError("cannot read config " + o.config);
        const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        cfg = parse_config(text);
    }
    if (o.mu) cfg.params.mu = *o.mu;
    if (o.out) cfg.output_dir = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.level) cfg.levels = {*o.level};
    if (o.system) {
        if (*o.system == "mim") cfg.system = System::mim;
        else if (*o.system == "fput") cfg.system = System::fput;
        else if (*o.system == "fput-modified") cfg.system = System::fput_modified;
        else throw ValidationError("system must be mim, fput or fput-modified");
    }
    cfg.validate();
    return cfg;
}

/// LATTICE_SHADOW_WORKERS wins over --workers; 0 means all cores.
inline std::size_t resolve_workers(const Overrides& o) {
    if (const char* env = std::getenv("LATTICE_SHADOW_WORKERS"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ValidationError("LATTICE_SHADOW_WORKERS must be a non-negative integer");
        return static_cast<std::size_t>(v);
    }
    return o.workers.value_or(0);
}

inline std::string artifact_comment(const RunConfig& cfg) {
    return std::string(tool_name) + " " + std::string(tool_version) + " config=" + config_hash(cfg);
}

inline Json artifact_header(const RunConfig& cfg) {
    return Json{{"tool", tool_name}, {"version", tool_version}, {"config_hash", config_hash(cfg)}};
}

inline std::string output_path(const RunConfig& cfg, const std::string& file) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    return (std::filesystem::path(cfg.output_dir) / file).string();
}

inline void write_json(const RunConfig& cfg, const std::string& file, const Json& j) {
    write_text_file(output_path(cfg, file), j.dump(2) + "\n");
}

inline Json to_json(const IntegratorMeta& m) {
    return Json{{"scheme", to_string(m.scheme)},
                {"system", to_string(m.system)},
                {"resonators", to_string(m.resonators)},
                {"dt_effective", m.dt_effective},
                {"steps_per_sample", m.steps_per_sample},
                {"max_relative_energy_drift", m.max_relative_energy_drift},
                {"energy_drift_bound", m.energy_drift_bound},
                {"max_norm_ratio", m.max_norm_ratio},
                {"initial_norm", m.initial_norm}};
}

inline Json to_json(const ConvergenceReport& r) {
    Json runs = Json::array();
    for (const RunRecord& rec : r.runs_meta) {
        Json j{{"mu", rec.mu}, {"failed", rec.failed}, {"failure", rec.failure}};
        if (rec.mim_meta) j["mim"] = to_json(*rec.mim_meta);
        if (rec.approx_meta) j["approximator"] = to_json(*rec.approx_meta);
        runs.push_back(std::move(j));
    }
    return Json{{"level", r.level.level},
                {"expected_order", r.level.expected_order()},
                {"slope_tolerance", r.level.slope_tolerance()},
                {"mu_values", r.mu_values},
                {"sup_errors", r.sup_errors},
                {"fitted_slope", r.fitted_slope},
                {"fit_intercept", r.fit_intercept},
                {"fit_r2", r.fit_r2},
                {"within_tolerance", r.within_tolerance()},
                {"bound_unsaturated", r.bound_unsaturated()},
                {"partial", r.partial},
                {"fit_failure", r.fit_failure},
                {"runs", std::move(runs)}};
}

/// Initial lattice state for single-run commands: level 0/1 data unless a
/// level was requested explicitly.
inline LatticeState single_run_state(const RunConfig& cfg, const Overrides& o) {
    const BaseData base = cfg.base_data();
    const ApproximationLevel level = ApproximationLevel::from_int(o.level.value_or(0));
    return build_initial_data(level, base.R0, base.P0, cfg.params).mim_init;
}

inline int cmd_simulate(const RunConfig& cfg, const Overrides& o, std::ostream& out) {
    const Trajectory traj = integrate(single_run_state(cfg, o), cfg.params, cfg.policy, cfg.system, cfg.t_star,
                                      cfg.sample_dt, ResonatorMode::driven);
    Table table({"t", "site", "R", "P", "r", "p"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const LatticeState& s = traj.states[i];
        for (std::size_t j = 0; j < s.size(); ++j)
            table.add_row({traj.times[i], static_cast<double>(j), s.R[j], s.P[j], s.r[j], s.p[j]});
    }
    const std::string path = output_path(cfg, "trajectory.csv");
    emit_csv(table, path, artifact_comment(cfg));
    out << "simulate: " << to_string(cfg.system) << " mu=" << format_double(cfg.params.mu)
        << " samples=" << traj.size() << " max_norm_ratio=" << format_double(traj.meta.max_norm_ratio)
        << " max_relative_energy_drift=" << format_double(traj.meta.max_relative_energy_drift) << "\n"
        << "wrote " << path << "\n";
    return ok;
}

inline int cmd_residuals(const RunConfig& cfg, const Overrides& o, std::ostream& out) {
    const ApproximationLevel level = ApproximationLevel::from_int(o.level.value_or(cfg.levels.front()));
    const BaseData base = cfg.base_data();
    const InitialPair init = build_initial_data(level, base.R0, base.P0, cfg.params);
    const Trajectory approx = integrate(init.approx_init, cfg.params, cfg.policy, level.approximator_system(),
                                        cfg.t_star, cfg.sample_dt, level.approximator_resonators());
    Table table({"t", "res1", "res2", "res3", "res4", "weighted"});
    double sup = 0.0;
    for (const ResidualSample& s : residual_series(approx, cfg.params)) {
        table.add_row({s.t, l2_norm(s.res1), l2_norm(s.res2), l2_norm(s.res3), l2_norm(s.res4), s.weighted_norm});
        sup = std::max(sup, s.weighted_norm);
    }
    const std::string path = output_path(cfg, "residuals.csv");
    emit_csv(table, path, artifact_comment(cfg));
    const ApproximatorReport rep = good_approximator_check(approx, cfg.params);
    out << "residuals: level " << level.level << " mu=" << format_double(cfg.params.mu)
        << " weighted_sup=" << format_double(sup) << " alpha=" << format_double(rep.alpha_observed)
        << " beta=" << format_double(rep.beta_observed) << " d3_satisfied=" << (rep.d3_satisfied ? "true" : "false")
        << "\nwrote " << path << "\n";
    return ok;
}

inline int cmd_converge(const RunConfig& cfg, std::size_t workers, std::ostream& out) {
    validate_mu_grid(cfg.mu_grid);
    const BaseData base = cfg.base_data();
    const ExperimentConfig exp = cfg.experiment();
    std::vector<ConvergenceReport> reports;
    for (const int l : cfg.levels)
        reports.push_back(convergence_sweep(ApproximationLevel::from_int(l), cfg.mu_grid, base, exp, workers));

    Table table({"mu", "sup_error", "level"});
    Json json_reports = Json::array();
    bool failed = false;
    for (const ConvergenceReport& r : reports) {
        for (std::size_t i = 0; i < r.mu_values.size(); ++i)
            table.add_row({r.mu_values[i], r.sup_errors[i], static_cast<double>(r.level.level)});
        json_reports.push_back(to_json(r));
        failed = failed || r.partial;
        out << "level " << r.level.level << ": fitted_slope=" << format_double(r.fitted_slope)
            << " expected=" << format_double(r.level.expected_order()) << " r2=" << format_double(r.fit_r2)
            << (r.bound_unsaturated() ? " (bound unsaturated)" : "") << (r.partial ? " (partial)" : "") << "\n";
    }
    Json ordering = Json::array();
    for (const ConvergenceReport& finer : reports) {
        for (const ConvergenceReport& coarser : reports) {
            if (finer.level.level != coarser.level.level + 1) continue;
            ordering.push_back(Json{{"finer_level", finer.level.level},
                                    {"coarser_level", coarser.level.level},
                                    {"violations_at_mu", level_ordering_violations(finer, coarser)}});
        }
    }
    const std::string csv_path = output_path(cfg, "converge.csv");
    emit_csv(table, csv_path, artifact_comment(cfg));
    write_json(cfg, "converge.json",
               Json{{"header", artifact_header(cfg)}, {"reports", json_reports}, {"level_ordering", ordering}});
    out << "wrote " << csv_path << " and converge.json\n";
    return failed ? numerical_failure : ok;
}

inline int cmd_oscillatory(const RunConfig& cfg, std::ostream& out) {
    struct TestFn {
        const char* name;
        double (*f)(int, double);
    };
    const TestFn fns[] = {
        {"sin",
         [](int k, double s) {
             switch (k % 4) {
                 case 0: return std::sin(s);
                 case 1: return std::cos(s);
                 case 2: return -std::sin(s);
                 default: return -std::cos(s);
             }
         }},
        {"exp", [](int, double s) { return std::exp(s); }},
    };
    Table table({"function", "n", "omega", "remainder", "quadrature_error"});
    Json slopes = Json::array();
    for (std::size_t fi = 0; fi < std::size(fns); ++fi) {
        for (int n = 0; n <= 3; ++n) {
            const OrderFitResult res = error_order_fit(fns[fi].f, n, cfg.omega_grid);
            for (std::size_t i = 0; i < res.omegas.size(); ++i)
                table.add_row({static_cast<double>(fi), static_cast<double>(n), res.omegas[i], res.remainders[i],
                               res.quadrature_errors[i]});
            Json j{{"function", fns[fi].name}, {"function_id", fi}, {"n", n},
                   {"expected_slope", -(n + 1)}, {"exact_closure", res.exact_closure}};
            j["slope"] = res.fit ? res.fit->slope : std::numeric_limits<double>::quiet_NaN();
            j["r2"] = res.fit ? res.fit->r2 : std::numeric_limits<double>::quiet_NaN();
            out << fns[fi].name << " n=" << n << " slope=" << format_double(res.fit ? res.fit->slope : 0.0) << "\n";
            slopes.push_back(std::move(j));
        }
    }
    const std::string path = output_path(cfg, "oscillatory.csv");
    emit_csv(table, path, artifact_comment(cfg));
    write_json(cfg, "oscillatory.json", Json{{"header", artifact_header(cfg)}, {"t", 1.0}, {"fits", slopes}});
    out << "wrote " << path << " and oscillatory.json\n";
    return ok;
}

inline int cmd_energy_audit(const RunConfig& cfg, const Overrides& o, std::ostream& out) {
    const Trajectory traj = integrate(single_run_state(cfg, o), cfg.params, cfg.policy, System::mim, cfg.t_star,
                                      cfg.sample_dt);
    const double h0 = energy_H(traj.states[traj.origin_index()], cfg.params);
    const double n0 = traj.meta.initial_norm;
    Table table({"t", "H", "relative_drift", "norm_ratio"});
    double max_drift = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double h = energy_H(traj.states[i], cfg.params);
        const double drift = std::abs(h - h0) / std::max(std::abs(h0), 1e-300);
        max_drift = std::max(max_drift, drift);
        table.add_row({traj.times[i], h, drift, n0 > 0.0 ? mu_norm(traj.states[i], cfg.params) / n0 : 0.0});
    }
    const std::string path = output_path(cfg, "energy.csv");
    emit_csv(table, path, artifact_comment(cfg));
    out << "energy-audit: mu=" << format_double(cfg.params.mu) << " max_relative_drift=" << format_double(max_drift)
        << " max_norm_ratio=" << format_double(traj.meta.max_norm_ratio) << "\nwrote " << path << "\n";
    return ok;
}

/// Entry point shared by the executable and the tests. `args` excludes the program name.
inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mass-in-mass lattice shadowing experiments", std::string(tool_name)};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    Overrides o;
    const auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "Config file, or 'default' for built-in defaults");
        sub->add_option("--level", o.level, "Approximation level")->check(CLI::IsMember({0, 1, 2}));
        sub->add_option("--mu", o.mu, "Internal resonator mass");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
        sub->add_option("--seed", o.seed, "Seed for random initial data");
        sub->add_option("--system", o.system, "mim | fput | fput-modified");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "Integrate one flow and write the trajectory");
    CLI::App* residuals = app.add_subcommand("residuals", "Residuals of a level's approximator over time");
    CLI::App* converge = app.add_subcommand("converge", "mu sweep and fitted shadowing orders");
    CLI::App* oscillatory = app.add_subcommand("oscillatory", "Remainder decay of the oscillatory expansion");
    CLI::App* audit = app.add_subcommand("energy-audit", "Energy drift of a mass-in-mass run");
    for (CLI::App* sub : {simulate, residuals, converge, oscillatory, audit}) add_common(sub);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : validation_failure;
    }

    try {
        const RunConfig cfg = load_config(o);
        if (simulate->parsed()) return cmd_simulate(cfg, o, out);
        if (residuals->parsed()) return cmd_residuals(cfg, o, out);
        if (converge->parsed()) return cmd_converge(cfg, resolve_workers(o), out);
        if (oscillatory->parsed()) return cmd_oscillatory(cfg, out);
        if (audit->parsed()) return cmd_energy_audit(cfg, o, out);
    } catch (const BlowUpError& e) {
        err << "error: blow-up: " << e.what() << "\n";
        return numerical_failure;
    } catch (const ConfigurationError& e) {
        err << "error: unresolved stiffness: " << e.what() << "\n";
        return numerical_failure;
    } catch (const FitError& e) {
        err << "error: " << e.what() << "\n";
        return numerical_failure;
    } catch (const SingularLimitError& e) {
        err << "error: singular limit: " << e.what() << "\n";
        return validation_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return validation_failure;
    }
    return validation_failure;
}

}  // namespace lattice_shadow::cli
