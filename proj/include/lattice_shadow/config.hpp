#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/experiments.hpp"
#include "lattice_shadow/lattice.hpp"
#include "lattice_shadow/trajectory.hpp"

// Run configuration document. Flat INI-style sections:
//
//   # comment
//   [lattice]
//   k = 1
//   a = 1
//   b = 0
//   kappa = 1
//   mu = 0.01
//   num_sites = 256
//
//   [integrator]
//   scheme = rk4-fixed          # or strang-split
//   dt = 0.01
//   fast_resolution = 20
//
//   [experiment]
//   system = mim                # mim | fput | fput-modified
//   t_star = 10
//   sample_dt = 0.1
//   levels = 0, 1, 2
//   mu_grid = 0.1, 0.0316..., ...
//   omega_grid = 25, 50, 100, 200
//   initial_data = gaussian     # or random
//   pulse_width = 5
//   pulse_norm = 0.1
//   seed = 0
//   output_dir = out
//
// Every key is optional; missing keys keep their defaults.

namespace lattice_shadow {

enum class InitialDataKind { gaussian, random };

struct RunConfig {
    LatticeParams params{};
    StepPolicy policy{};
    System system = System::mim;
    double t_star = 10.0;
    double sample_dt = 0.1;
    std::vector<int> levels{0, 1, 2};
    std::vector<double> mu_grid = default_mu_grid();
    std::vector<double> omega_grid{25.0, 50.0, 100.0, 200.0};
    InitialDataKind initial_data = InitialDataKind::gaussian;
    double pulse_width = 5.0;
    double pulse_norm = 0.1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    void validate() const {
        params.validate();
        policy.validate();
        if (!(t_star > 0.0) || !std::isfinite(t_star)) throw ValidationError("t_star must be > 0");
        if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw ValidationError("sample_dt must be > 0");
        const double ratio = t_star / sample_dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw ValidationError("t_star must be a whole multiple of sample_dt");
        if (levels.empty()) throw ValidationError("levels must not be empty");
        for (const int l : levels)
            if (l < 0 || l > 2) throw ValidationError("levels must be 0, 1 or 2");
        if (mu_grid.empty()) throw ValidationError("mu_grid must not be empty");
        for (const double m : mu_grid)
            if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("mu_grid values must be > 0");
        for (const double w : omega_grid)
            if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("omega_grid values must be > 0");
        if (!(pulse_width > 0.0)) throw ValidationError("pulse_width must be > 0");
        if (!(pulse_norm >= 0.0)) throw ValidationError("pulse_norm must be ≥ 0");
        if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
    }

    ExperimentConfig experiment() const { return {params, policy, t_star, sample_dt}; }

    BaseData base_data() const {
        return initial_data == InitialDataKind::gaussian
                   ? BaseData::gaussian_pulse(params.num_sites, pulse_width, pulse_norm)
                   : BaseData::random_localized(params.num_sites, pulse_width, pulse_norm, seed);
    }

    bool operator==(const RunConfig&) const = default;
};

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigCursor {
    std::size_t line;
    std::size_t column;  // 1-based column of the value
};

inline double parse_number(std::string_view text, ConfigCursor at) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        throw ParseError("expected a number, got '" + std::string(text) + "'", at.line, at.column);
    return v;
}

inline std::uint64_t parse_unsigned(std::string_view text, ConfigCursor at) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        throw ParseError("expected a non-negative integer, got '" + std::string(text) + "'", at.line, at.column);
    return v;
}

template <class T, class ParseOne>
std::vector<T> parse_list(std::string_view text, ConfigCursor at, ParseOne one) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        const std::string_view raw = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
        const std::string_view item = trim(raw);
        const std::size_t lead = raw.find_first_not_of(" \t");
        out.push_back(one(item, ConfigCursor{at.line, at.column + pos + (lead == raw.npos ? 0 : lead)}));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Parse and validate a configuration document.
inline RunConfig parse_config(std::string_view source) {
    using detail::ConfigCursor;
    RunConfig cfg;
    std::string section;
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        const auto eol = source.find('\n', pos);
        std::string_view line = source.substr(pos, eol == std::string_view::npos ? source.npos : eol - pos);
        pos = eol == std::string_view::npos ? source.size() + 1 : eol + 1;
        ++line_no;

        const auto hash = line.find_first_of("#;");
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        const std::size_t indent = line.find_first_not_of(" \t") + 1;

        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError("unterminated section header", line_no, indent);
            section = std::string(detail::trim(body.substr(1, body.size() - 2)));
            if (section != "lattice" && section != "integrator" && section != "experiment")
                throw ParseError("unknown section [" + section + "]", line_no, indent);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, indent);
        if (section.empty()) throw ParseError("key outside of a section", line_no, indent);
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view raw_value = line.substr(eq + 1);
        const std::string_view value = detail::trim(raw_value);
        const auto lead = raw_value.find_first_not_of(" \t");
        const ConfigCursor at{line_no, eq + 2 + (lead == raw_value.npos ? 0 : lead)};
        if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no, at.column);

        const std::string qualified = section + "." + key;
        for (const auto& s : seen)
            if (s == qualified) throw ParseError("duplicate key '" + key + "' in [" + section + "]", line_no, indent);
        seen.push_back(qualified);

        const auto number = [&] { return detail::parse_number(value, at); };
        if (qualified == "lattice.k") cfg.params.potential.k = number();
        else if (qualified == "lattice.a") cfg.params.potential.a = number();
        else if (qualified == "lattice.b") cfg.params.potential.b = number();
        else if (qualified == "lattice.kappa") cfg.params.kappa = number();
        else if (qualified == "lattice.mu") cfg.params.mu = number();
        else if (qualified == "lattice.num_sites") cfg.params.num_sites = detail::parse_unsigned(value, at);
        else if (qualified == "integrator.scheme") {
            if (value == "rk4-fixed") cfg.policy.scheme = Scheme::rk4_fixed;
            else if (value == "strang-split") cfg.policy.scheme = Scheme::strang_split;
            else throw ParseError("scheme must be rk4-fixed or strang-split", line_no, at.column);
        } else if (qualified == "integrator.dt") cfg.policy.dt = number();
        else if (qualified == "integrator.fast_resolution") cfg.policy.fast_resolution = number();
        else if (qualified == "experiment.system") {
            if (value == "mim") cfg.system = System::mim;
            else if (value == "fput") cfg.system = System::fput;
            else if (value == "fput-modified") cfg.system = System::fput_modified;
            else throw ParseError("system must be mim, fput or fput-modified", line_no, at.column);
        } else if (qualified == "experiment.t_star") cfg.t_star = number();
        else if (qualified == "experiment.sample_dt") cfg.sample_dt = number();
        else if (qualified == "experiment.levels")
            cfg.levels = detail::parse_list<int>(value, at, [](std::string_view s, ConfigCursor c) {
                return static_cast<int>(detail::parse_unsigned(s, c));
            });
        else if (qualified == "experiment.mu_grid")
            cfg.mu_grid = detail::parse_list<double>(value, at, detail::parse_number);
        else if (qualified == "experiment.omega_grid")
            cfg.omega_grid = detail::parse_list<double>(value, at, detail::parse_number);
        else if (qualified == "experiment.initial_data") {
            if (value == "gaussian") cfg.initial_data = InitialDataKind::gaussian;
            else if (value == "random") cfg.initial_data = InitialDataKind::random;
            else throw ParseError("initial_data must be gaussian or random", line_no, at.column);
        } else if (qualified == "experiment.pulse_width") cfg.pulse_width = number();
        else if (qualified == "experiment.pulse_norm") cfg.pulse_norm = number();
        else if (qualified == "experiment.seed") cfg.seed = detail::parse_unsigned(value, at);
        else if (qualified == "experiment.output_dir") cfg.output_dir = std::string(value);
        else throw ParseError("unknown key '" + key + "' in [" + section + "]", line_no, indent);
    }
    cfg.validate();
    return cfg;
}

namespace detail {

template <class T, class Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += fmt(values[i]);
    }
    return out;
}

}  // namespace detail

/// Canonical text of a configuration; parse_config(serialize_config(c)) == c.
/// With include_output = false the output directory is left out, which is the
/// form hashed into artifact headers.
inline std::string serialize_config(const RunConfig& c, bool include_output = true) {
    std::string s;
    const auto kv = [&s](std::string_view k, const std::string& v) {
        s += k;
        s += " = ";
        s += v;
        s += '\n';
    };
    s += "[lattice]\n";
    kv("k", format_double(c.params.potential.k));
    kv("a", format_double(c.params.potential.a));
    kv("b", format_double(c.params.potential.b));
    kv("kappa", format_double(c.params.kappa));
    kv("mu", format_double(c.params.mu));
    kv("num_sites", std::to_string(c.params.num_sites));
    s += "\n[integrator]\n";
    kv("scheme", std::string(to_string(c.policy.scheme)));
    kv("dt", format_double(c.policy.dt));
    kv("fast_resolution", format_double(c.policy.fast_resolution));
    s += "\n[experiment]\n";
    kv("system", std::string(to_string(c.system)));
    kv("t_star", format_double(c.t_star));
    kv("sample_dt", format_double(c.sample_dt));
    kv("levels", detail::join(c.levels, [](int l) { return std::to_string(l); }));
    kv("mu_grid", detail::join(c.mu_grid, format_double));
    kv("omega_grid", detail::join(c.omega_grid, format_double));
    kv("initial_data", c.initial_data == InitialDataKind::gaussian ? "gaussian" : "random");
    kv("pulse_width", format_double(c.pulse_width));
    kv("pulse_norm", format_double(c.pulse_norm));
    kv("seed", std::to_string(c.seed));
    if (include_output) kv("output_dir", c.output_dir);
    return s;
}

/// 64-bit FNV-1a of the text, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(serialize_config(c, false)); }

}  // namespace lattice_shadow
