#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kinproj/errors.hpp"
#include "kinproj/grid.hpp"
#include "kinproj/inner_scheme.hpp"

namespace kinproj {

enum class Model { Linear, SuOlson };
enum class RunMode { Inner, Projective, Heat, Reference, Compare };
enum class DtPolicy { EpsSquared, EpsCubed, Explicit };

enum class SourceKind { Default, None, Box, File };

// Su-Olson source description. Default is the unit box on [-1/2, 1/2],
// evaluated pointwise at cell centers; Box generalizes amplitude and bounds;
// File reads one value per cell.
struct SourceSpec {
    SourceKind kind = SourceKind::Default;
    double amplitude = 1.0;
    double x_lo = -0.5;
    double x_hi = 0.5;
    std::string path;
};

struct RunConfig {
    Model model = Model::Linear;
    int p = 0;
    double eps = 0.0;
    double x_left = -1.0;
    double x_right = 1.0;
    int n_cells = 0;
    BoundaryCondition bc = BoundaryCondition::Periodic;
    FluxKind flux = FluxKind::Centered;
    RunMode mode = RunMode::Projective;
    DtPolicy dt_policy = DtPolicy::EpsSquared;
    bool dt_policy_set = false;
    double dt_explicit = 0.0;
    double nu = 1.0;
    std::optional<int> k_inner;  // nullopt = auto (exact spectral check)
    double t_end = 0.0;
    std::vector<double> snapshot_times;
    double sigma_a = 1.0;
    SourceSpec source;
    double a_init = 1.0;
    std::vector<double> a_values;
    std::string output_dir = "out";
    long long cost_ceiling = 100'000'000;
    double dt_heat_factor = 0.4;
    int workers = 1;
    // sweep drivers
    std::string sweep;  // "eps" | "nu"
    std::vector<double> eps_values;
    std::vector<double> nu_values;
    std::vector<double> error_times;
    std::string ref_dt = "auto";  // eps3 | eps2 | auto
    // spectral drivers
    int zeta_samples = 0;
    std::vector<double> dt_scales{1.0};
    std::vector<FluxKind> flux_list;
    std::vector<int> k_values{1, 2, 3, 4};
    int k_max = 64;
    bool export_distribution = false;
};

inline double config_dx(const RunConfig& c) { return (c.x_right - c.x_left) / c.n_cells; }

inline double config_dt_inner(const RunConfig& c) {
    switch (c.dt_policy) {
        case DtPolicy::EpsSquared: return c.eps * c.eps;
        case DtPolicy::EpsCubed: return c.eps * c.eps * c.eps;
        case DtPolicy::Explicit: return c.dt_explicit;
    }
    return 0.0;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, int line) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw ConfigError("expected a number, got '" + t + "'", line);
    return v;
}

inline long long parse_int(const std::string& s, int line) {
    const std::string t = trim(s);
    long long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size())
        throw ConfigError("expected an integer, got '" + t + "'", line);
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::vector<double> parse_double_list(const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& part : split(s, ','))
        if (!trim(part).empty()) out.push_back(parse_double(part, line));
    if (out.empty()) throw ConfigError("expected a comma-separated list of numbers", line);
    return out;
}

inline FluxKind parse_flux(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t == "centered") return FluxKind::Centered;
    if (t == "upwind") return FluxKind::Upwind;
    throw ConfigError("flux must be 'centered' or 'upwind', got '" + t + "'", line);
}

inline SourceSpec parse_source(const std::string& s, int line) {
    const std::string t = trim(s);
    SourceSpec spec;
    if (t == "default") return spec;
    if (t == "none") {
        spec.kind = SourceKind::None;
        return spec;
    }
    if (t.rfind("box:", 0) == 0) {
        const auto parts = split(t.substr(4), ':');
        if (parts.size() != 3)
            throw ConfigError("box source must be 'box:AMPLITUDE:XLO:XHI'", line);
        spec.kind = SourceKind::Box;
        spec.amplitude = parse_double(parts[0], line);
        spec.x_lo = parse_double(parts[1], line);
        spec.x_hi = parse_double(parts[2], line);
        if (!(spec.x_hi > spec.x_lo)) throw ConfigError("box source needs XHI > XLO", line);
        return spec;
    }
    if (t.rfind("file:", 0) == 0) {
        spec.kind = SourceKind::File;
        spec.path = trim(t.substr(5));
        if (spec.path.empty()) throw ConfigError("file source needs a path", line);
        return spec;
    }
    throw ConfigError("source must be 'default', 'none', 'box:A:LO:HI' or 'file:PATH'", line);
}

} // namespace detail

// Plain-text `key = value` configuration; '#' starts a comment; unknown and
// duplicate keys are errors, each reported with its line number.
inline RunConfig parse_config(std::istream& in) {
    using detail::parse_double;
    using detail::parse_int;
    using detail::trim;
    RunConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    bool snapshot_set = false;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', got '" + text + "'", line);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line);
        if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);

        if (key == "model") {
            if (value == "linear") cfg.model = Model::Linear;
            else if (value == "suolson") cfg.model = Model::SuOlson;
            else throw ConfigError("model must be 'linear' or 'suolson'", line);
        } else if (key == "p") {
            cfg.p = static_cast<int>(parse_int(value, line));
        } else if (key == "eps") {
            cfg.eps = parse_double(value, line);
        } else if (key == "x_left") {
            cfg.x_left = parse_double(value, line);
        } else if (key == "x_right") {
            cfg.x_right = parse_double(value, line);
        } else if (key == "n_cells") {
            cfg.n_cells = static_cast<int>(parse_int(value, line));
        } else if (key == "bc") {
            if (value == "periodic") cfg.bc = BoundaryCondition::Periodic;
            else if (value == "neumann") cfg.bc = BoundaryCondition::NeumannHomogeneous;
            else throw ConfigError("bc must be 'periodic' or 'neumann'", line);
        } else if (key == "flux") {
            cfg.flux = detail::parse_flux(value, line);
        } else if (key == "mode") {
            if (value == "inner") cfg.mode = RunMode::Inner;
            else if (value == "projective") cfg.mode = RunMode::Projective;
            else if (value == "heat") cfg.mode = RunMode::Heat;
            else if (value == "reference") cfg.mode = RunMode::Reference;
            else if (value == "compare") cfg.mode = RunMode::Compare;
            else throw ConfigError(
                "mode must be one of inner|projective|heat|reference|compare", line);
        } else if (key == "dt_inner") {
            cfg.dt_policy_set = true;
            if (value == "eps2") cfg.dt_policy = DtPolicy::EpsSquared;
            else if (value == "eps3") cfg.dt_policy = DtPolicy::EpsCubed;
            else {
                cfg.dt_policy = DtPolicy::Explicit;
                cfg.dt_explicit = parse_double(value, line);
                if (!(cfg.dt_explicit > 0.0))
                    throw ConfigError("dt_inner must be positive", line);
            }
        } else if (key == "nu") {
            cfg.nu = parse_double(value, line);
        } else if (key == "k_inner") {
            if (value == "auto") cfg.k_inner.reset();
            else {
                cfg.k_inner = static_cast<int>(parse_int(value, line));
                if (*cfg.k_inner < 1) throw ConfigError("k_inner must be >= 1", line);
            }
        } else if (key == "t_end") {
            cfg.t_end = parse_double(value, line);
        } else if (key == "snapshot_times") {
            cfg.snapshot_times = detail::parse_double_list(value, line);
            snapshot_set = true;
        } else if (key == "sigma_a") {
            cfg.sigma_a = parse_double(value, line);
        } else if (key == "source") {
            cfg.source = detail::parse_source(value, line);
        } else if (key == "a_init") {
            cfg.a_init = parse_double(value, line);
        } else if (key == "a_values") {
            cfg.a_values = detail::parse_double_list(value, line);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "cost_ceiling") {
            cfg.cost_ceiling = parse_int(value, line);
        } else if (key == "dt_heat_factor") {
            cfg.dt_heat_factor = parse_double(value, line);
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(parse_int(value, line));
        } else if (key == "sweep") {
            if (value != "eps" && value != "nu")
                throw ConfigError("sweep must be 'eps' or 'nu'", line);
            cfg.sweep = value;
        } else if (key == "eps_values") {
            cfg.eps_values = detail::parse_double_list(value, line);
        } else if (key == "nu_values") {
            cfg.nu_values = detail::parse_double_list(value, line);
        } else if (key == "error_times") {
            cfg.error_times = detail::parse_double_list(value, line);
        } else if (key == "ref_dt") {
            if (value != "eps3" && value != "eps2" && value != "auto")
                throw ConfigError("ref_dt must be 'eps3', 'eps2' or 'auto'", line);
            cfg.ref_dt = value;
        } else if (key == "zeta_samples") {
            cfg.zeta_samples = static_cast<int>(parse_int(value, line));
        } else if (key == "dt_scales") {
            cfg.dt_scales = detail::parse_double_list(value, line);
        } else if (key == "flux_list") {
            cfg.flux_list.clear();
            for (const auto& part : detail::split(value, ','))
                cfg.flux_list.push_back(detail::parse_flux(part, line));
        } else if (key == "k_values") {
            cfg.k_values.clear();
            for (const auto& part : detail::split(value, ','))
                cfg.k_values.push_back(static_cast<int>(parse_int(part, line)));
        } else if (key == "k_max") {
            cfg.k_max = static_cast<int>(parse_int(value, line));
        } else if (key == "export_distribution") {
            if (value == "true" || value == "1") cfg.export_distribution = true;
            else if (value == "false" || value == "0") cfg.export_distribution = false;
            else throw ConfigError("export_distribution must be true or false", line);
        } else {
            throw ConfigError("unknown key '" + key + "'", line);
        }
    }
    if (!snapshot_set && cfg.t_end > 0.0) cfg.snapshot_times = {cfg.t_end};
    if (cfg.mode == RunMode::Reference && !cfg.dt_policy_set) cfg.dt_policy = DtPolicy::EpsCubed;
    if (cfg.a_values.empty()) cfg.a_values = {cfg.a_init};
    if (cfg.error_times.empty() && cfg.t_end > 0.0) cfg.error_times = {cfg.t_end};
    return cfg;
}

// Cross-field invariants; every module-level precondition that can be
// checked from the configuration alone fails here, before any compute.
inline void validate(const RunConfig& c) {
    if (c.p < 1) throw ConfigError("p must be a positive integer");
    if (!(c.eps > 0.0)) throw ConfigError("eps must be positive");
    if (c.eps < 1e-8)
        throw ConfigError("eps = " + std::to_string(c.eps) +
                          " is below the 1e-8 floor (dt_inner = eps^2 would underflow "
                          "double precision usefulness)");
    if (c.n_cells < 1) throw ConfigError("n_cells must be a positive integer");
    if (!(c.x_right > c.x_left)) throw ConfigError("domain requires x_right > x_left");
    if (!(c.nu > 0.0)) throw ConfigError("nu must be positive");
    if (c.sigma_a < 0.0) throw ConfigError("sigma_a must be nonnegative");
    if (!(c.a_init > 0.0)) throw ConfigError("a_init must be positive");
    for (double a : c.a_values)
        if (!(a > 0.0)) throw ConfigError("a_values must all be positive");
    if (c.t_end < 0.0) throw ConfigError("t_end must be nonnegative");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.k_max < 1) throw ConfigError("k_max must be >= 1");
    if (c.cost_ceiling < 1) throw ConfigError("cost_ceiling must be >= 1");
    if (c.dt_policy == DtPolicy::Explicit && !(c.dt_explicit > 0.0))
        throw ConfigError("explicit dt_inner must be positive");
    const double dt = config_dt_inner(c);
    if (dt > 2.0 * c.eps * c.eps * (1.0 + 1e-12))
        throw ConfigError("dt_inner = " + std::to_string(dt) +
                          " exceeds the inner stability ceiling 2*eps^2");
    const double v_max = (2.0 * c.p - 1.0) / (2.0 * c.p);
    if (c.flux == FluxKind::Centered && dt >= 0.999 * c.eps * c.eps &&
        config_dx(c) < v_max * c.eps * (1.0 - 1e-12))
        throw ConfigError(
            "centered flux with dt_inner = eps^2 requires dx >= v_max*eps for inner "
            "stability; got dx = " + std::to_string(config_dx(c)) + ", v_max*eps = " +
            std::to_string(v_max * c.eps));
    for (double t : c.snapshot_times)
        if (t < 0.0 || t > c.t_end * (1.0 + 1e-12))
            throw ConfigError("snapshot_times must lie in [0, t_end]");
    if (c.sweep == "eps" && c.eps_values.empty())
        throw ConfigError("sweep = eps requires eps_values");
    if (c.sweep == "nu" && c.nu_values.empty())
        throw ConfigError("sweep = nu requires nu_values");
    for (int k : c.k_values)
        if (k < 1) throw ConfigError("k_values must all be >= 1");
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    RunConfig cfg = parse_config(in);
    validate(cfg);
    return cfg;
}

// Materialize the Su-Olson source vector on a grid.
inline std::vector<double> build_source(const SourceSpec& spec, const Grid& grid) {
    std::vector<double> s(static_cast<std::size_t>(grid.n_cells()), 0.0);
    switch (spec.kind) {
        case SourceKind::None:
            break;
        case SourceKind::Default:
            for (int i = 0; i < grid.n_cells(); ++i)
                if (std::abs(grid.center(i)) <= 0.5) s[static_cast<std::size_t>(i)] = 1.0;
            break;
        case SourceKind::Box:
            for (int i = 0; i < grid.n_cells(); ++i)
                if (grid.center(i) >= spec.x_lo && grid.center(i) <= spec.x_hi)
                    s[static_cast<std::size_t>(i)] = spec.amplitude;
            break;
        case SourceKind::File: {
            std::ifstream in(spec.path);
            if (!in) throw ConfigError("cannot open source file " + spec.path);
            for (int i = 0; i < grid.n_cells(); ++i)
                if (!(in >> s[static_cast<std::size_t>(i)]))
                    throw ConfigError("source file " + spec.path + " has fewer than " +
                                      std::to_string(grid.n_cells()) + " values");
            double extra;
            if (in >> extra)
                throw ConfigError("source file " + spec.path + " has more than " +
                                  std::to_string(grid.n_cells()) + " values");
            break;
        }
    }
    return s;
}

} // namespace kinproj
