#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kinproj/config.hpp"
#include "kinproj/csv.hpp"
#include "kinproj/diagnostics.hpp"
#include "kinproj/errors.hpp"
#include "kinproj/projective.hpp"
#include "kinproj/reference.hpp"

namespace kinproj {
namespace detail {

inline std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Index-chunked worker pool; tasks must only touch their own slot. The first
// failure (by task index) is rethrown after all workers drain.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::vector<double> sorted_times(std::vector<double> ts) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

// Walks the requested times in order, advancing with `advance(state, t)` and
// emitting a snapshot at each; returns the state at the last time.
template <class State, class Advance, class Emit>
State advance_with_snapshots(State s, double t_now, const std::vector<double>& times,
                             Advance&& advance, Emit&& emit) {
    for (double t : sorted_times(times)) {
        if (t > t_now + 1e-12 * std::max(1.0, t)) {
            s = advance(std::move(s), t);
            t_now = t;
        }
        emit(s, t);
    }
    return s;
}

struct MethodSetup {
    InnerParams inner;
    std::optional<ProjectiveParams> proj;  // engaged for projective runs
    std::optional<double> k_closed_form;
};

inline InnerParams make_inner(const RunConfig& cfg, const Grid& grid,
                              const VelocitySpace& vs, double dt) {
    InnerParams p;
    p.eps = cfg.eps;
    p.dt = dt;
    p.flux = cfg.flux;
    p.sigma_a = cfg.sigma_a;
    if (cfg.model == Model::SuOlson) p.source = build_source(cfg.source, grid);
    validate(p, grid, vs);
    return p;
}

// Projective setup: dt_outer = nu dx^2/<v^2>; K explicit from the config or
// the minimal stable K from the exact spectral check.
inline MethodSetup make_projective_setup(const RunConfig& cfg, const Grid& grid,
                                         const VelocitySpace& vs, double nu) {
    MethodSetup ms;
    const double dt_inner = config_dt_inner(cfg);
    ms.inner = make_inner(cfg, grid, vs, dt_inner);
    ProjectiveParams pp;
    pp.dt_inner = dt_inner;
    pp.dt_outer = nu * grid.dx() * grid.dx() / vs.second_moment();
    pp.t_end = cfg.t_end;
    auto mk = min_inner_steps(vs, grid, cfg.eps, dt_inner, pp.dt_outer, cfg.flux, cfg.k_max);
    ms.k_closed_form = mk.closed_form_bound;
    if (cfg.k_inner) {
        pp.k_inner = *cfg.k_inner;
    } else {
        if (!mk.k)
            throw ConfigError("k_inner = auto found no stable K <= " +
                              std::to_string(cfg.k_max) + " for nu = " + tag(nu));
        pp.k_inner = *mk.k;
    }
    validate(pp);
    ms.proj = pp;
    return ms;
}

inline void write_state_snapshot(const std::filesystem::path& dir, const std::string& name,
                                 const Grid& grid, const VelocitySpace& vs, double eps,
                                 const KineticState& s, const std::vector<double>* theta,
                                 bool with_distribution) {
    const auto rho = density(s);
    const auto j = flux(s, vs, eps);
    write_file_atomic(dir / ("snapshot_" + name + ".csv"),
                      snapshot_csv(grid, rho, j,
                                   theta ? std::span<const double>(*theta)
                                         : std::span<const double>{}));
    if (with_distribution)
        write_file_atomic(dir / ("distribution_" + name + ".csv"),
                          distribution_csv(grid, vs, s));
}

inline void write_flux_ratio(const std::filesystem::path& dir, const std::string& name,
                             const Grid& grid, const VelocitySpace& vs, double eps,
                             const KineticState& s) {
    const auto rho = density(s);
    const auto j = flux(s, vs, eps);
    std::string out = "x,eps_J_over_rho\n";
    for (int i = 0; i < grid.n_cells(); ++i) {
        out += format_float(grid.center(i));
        out += ',';
        out += format_float(eps * j[static_cast<std::size_t>(i)] / rho[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    write_file_atomic(dir / ("fluxratio_" + name + ".csv"), out);
}

// Run-log accumulator: one `step,t,rho_min,rho_max,mass` line per outer step.
class RunLog {
public:
    explicit RunLog(double dx) : dx_(dx) { body_ = "step,t,rho_min,rho_max,mass\n"; }

    void record(const KineticState& s) {
        const auto rho = density(s);
        double lo = rho[0], hi = rho[0], mass = 0.0;
        for (double r : rho) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            mass += r;
        }
        mass *= dx_;
        body_ += std::to_string(++count_) + ',' + format_float(s.t) + ',' + format_float(lo) +
                 ',' + format_float(hi) + ',' + format_float(mass) + '\n';
    }
    void record(const SuOlsonState& s) { record(s.kinetic); }

    const std::string& text() const { return body_; }

private:
    double dx_;
    long long count_ = 0;
    std::string body_;
};

// Density/flux (and Θ) of a reference trajectory at the requested times,
// cached on disk keyed by everything that shapes the trajectory.
struct ReferenceFrame {
    double t = 0.0;
    std::vector<double> rho;
    std::vector<double> j;
    std::vector<double> theta;
};

inline std::string reference_cache_key(const RunConfig& cfg, double dt, double a,
                                       const std::vector<double>& times) {
    std::ostringstream key;
    key.precision(17);
    key << (cfg.model == Model::Linear ? "linear" : "suolson") << "|p=" << cfg.p
        << "|eps=" << cfg.eps << "|dom=" << cfg.x_left << ',' << cfg.x_right
        << "|n=" << cfg.n_cells << "|bc=" << (cfg.bc == BoundaryCondition::Periodic ? "p" : "n")
        << "|flux=" << to_string(cfg.flux) << "|dt=" << dt << "|a=" << a
        << "|sigma=" << cfg.sigma_a << "|src=" << static_cast<int>(cfg.source.kind) << ','
        << cfg.source.amplitude << ',' << cfg.source.x_lo << ',' << cfg.source.x_hi << ','
        << cfg.source.path << "|times=";
    for (double t : times) key << t << ';';
    return key.str();
}

inline std::optional<std::vector<ReferenceFrame>> load_reference_cache(
    const std::filesystem::path& file, const std::string& key, std::size_t n_cells,
    std::size_t n_times, bool with_theta) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != "# " + key) return std::nullopt;
    std::vector<ReferenceFrame> frames;
    while (std::getline(in, line)) {
        if (line.rfind("t,", 0) == 0) {
            ReferenceFrame fr;
            fr.t = std::strtod(line.c_str() + 2, nullptr);
            frames.push_back(std::move(fr));
            continue;
        }
        if (frames.empty()) return std::nullopt;
        std::istringstream row(line);
        double rho, j, theta = 0.0;
        char c1, c2;
        if (!(row >> rho >> c1 >> j)) return std::nullopt;
        if (with_theta && !(row >> c2 >> theta)) return std::nullopt;
        frames.back().rho.push_back(rho);
        frames.back().j.push_back(j);
        if (with_theta) frames.back().theta.push_back(theta);
    }
    if (frames.size() != n_times) return std::nullopt;
    for (const auto& fr : frames)
        if (fr.rho.size() != n_cells) return std::nullopt;
    return frames;
}

inline void store_reference_cache(const std::filesystem::path& file, const std::string& key,
                                  const std::vector<ReferenceFrame>& frames, bool with_theta) {
    std::ostringstream out;
    out << "# " << key << '\n';
    for (const auto& fr : frames) {
        out << "t," << format_float(fr.t) << '\n';
        for (std::size_t i = 0; i < fr.rho.size(); ++i) {
            out << format_float(fr.rho[i]) << ',' << format_float(fr.j[i]);
            if (with_theta) out << ',' << format_float(fr.theta[i]);
            out << '\n';
        }
    }
    write_file_atomic(file, out.str());
}

template <class State>
State make_initial(const RunConfig& cfg, const Grid& grid, const VelocitySpace& vs, double a);

template <>
inline KineticState make_initial<KineticState>(const RunConfig&, const Grid& grid,
                                               const VelocitySpace& vs, double) {
    return init_linear_benchmark(grid, vs);
}

template <>
inline SuOlsonState make_initial<SuOlsonState>(const RunConfig&, const Grid& grid,
                                               const VelocitySpace& vs, double a) {
    return init_suolson(grid, vs, a);
}

template <class State>
std::vector<ReferenceFrame> reference_frames(const RunConfig& cfg, const Grid& grid,
                                             const VelocitySpace& vs, double dt, double a,
                                             const std::vector<double>& times) {
    const bool with_theta = cfg.model == Model::SuOlson;
    const auto ts = sorted_times(times);
    const std::string key = reference_cache_key(cfg, dt, a, ts);
    const auto cache_dir = std::filesystem::path(cfg.output_dir) / "reference_cache";
    const auto file = cache_dir / ("ref_" + std::to_string(std::hash<std::string>{}(key)) + ".csv");
    if (auto cached = load_reference_cache(file, key, static_cast<std::size_t>(grid.n_cells()),
                                           ts.size(), with_theta))
        return *cached;

    InnerParams inner = make_inner(cfg, grid, vs, dt);
    ReferenceOptions opt{dt, cfg.cost_ceiling};
    detail::check_cost(0.0, ts.back(), opt);
    State s = make_initial<State>(cfg, grid, vs, a);
    std::vector<ReferenceFrame> frames;
    s = advance_with_snapshots(
        std::move(s), 0.0, ts,
        [&](State st, double t) { return run_inner_to(std::move(st), grid, vs, inner, t); },
        [&](const State& st, double t) {
            ReferenceFrame fr;
            fr.t = t;
            if constexpr (std::is_same_v<State, KineticState>) {
                fr.rho = density(st);
                fr.j = flux(st, vs, cfg.eps);
            } else {
                fr.rho = density(st.kinetic);
                fr.j = flux(st.kinetic, vs, cfg.eps);
                fr.theta = st.theta;
            }
            frames.push_back(std::move(fr));
        });
    store_reference_cache(file, key, frames, with_theta);
    return frames;
}

// Resolve the reference dt policy: eps^3 when the cost guard permits,
// otherwise eps^2. Returns (dt, policy-name).
inline std::pair<double, std::string> resolve_reference_dt(const RunConfig& cfg, double horizon) {
    const double e3 = cfg.eps * cfg.eps * cfg.eps;
    const double e2 = cfg.eps * cfg.eps;
    if (cfg.ref_dt == "eps3") return {e3, "eps3"};
    if (cfg.ref_dt == "eps2") return {e2, "eps2"};
    const double est = std::ceil(horizon / e3);
    if (est <= static_cast<double>(cfg.cost_ceiling)) return {e3, "eps3"};
    return {e2, "eps2"};
}

} // namespace detail

// ---------------------------------------------------------------------------
// run: single simulation (inner | projective | heat | reference) or the
// four-method comparison (all of them plus the heat limit on one config).
// ---------------------------------------------------------------------------
inline void cmd_run(const RunConfig& cfg) {
    const auto vs = VelocitySpace::build(cfg.p);
    const Grid grid(cfg.x_left, cfg.x_right, cfg.n_cells, cfg.bc);
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    if (!(cfg.t_end > 0.0)) throw ConfigError("run requires t_end > 0");
    const auto times = detail::sorted_times(cfg.snapshot_times);

    const auto run_kinetic_method = [&](const std::string& method, const InnerParams& inner,
                                        const std::optional<ProjectiveParams>& proj) {
        detail::RunLog log(grid.dx());
        if (cfg.model == Model::Linear) {
            KineticState s = init_linear_benchmark(grid, vs);
            auto advance = [&](KineticState st, double t) {
                if (proj) {
                    ProjectiveParams pp = *proj;
                    pp.t_end = t;
                    return run_projective<KineticState>(
                        std::move(st), grid, vs, inner, pp,
                        [&log](long long, const KineticState& x) { log.record(x); });
                }
                return run_inner_to(std::move(st), grid, vs, inner, t);
            };
            detail::advance_with_snapshots(std::move(s), 0.0, times, advance,
                                           [&](const KineticState& st, double t) {
                                               detail::write_state_snapshot(
                                                   dir, method + "_t" + detail::tag(t), grid, vs,
                                                   cfg.eps, st, nullptr, cfg.export_distribution);
                                           });
        } else {
            SuOlsonState s = init_suolson(grid, vs, cfg.a_init);
            auto advance = [&](SuOlsonState st, double t) {
                if (proj) {
                    ProjectiveParams pp = *proj;
                    pp.t_end = t;
                    return run_projective<SuOlsonState>(
                        std::move(st), grid, vs, inner, pp,
                        [&log](long long, const SuOlsonState& x) { log.record(x); });
                }
                return run_inner_to(std::move(st), grid, vs, inner, t);
            };
            detail::advance_with_snapshots(std::move(s), 0.0, times, advance,
                                           [&](const SuOlsonState& st, double t) {
                                               detail::write_state_snapshot(
                                                   dir, method + "_t" + detail::tag(t), grid, vs,
                                                   cfg.eps, st.kinetic, &st.theta,
                                                   cfg.export_distribution);
                                           });
        }
        if (proj) write_file_atomic(dir / ("run_log_" + method + ".csv"), log.text());
    };

    const auto run_heat_method = [&](const std::string& method) {
        HeatParams hp{vs.second_moment(),
                      cfg.dt_heat_factor * grid.dx() * grid.dx() / vs.second_moment()};
        validate(hp, grid);
        std::vector<double> rho;
        if (cfg.model == Model::Linear)
            rho = density(init_linear_benchmark(grid, vs));
        else
            rho = density(init_suolson(grid, vs, cfg.a_init).kinetic);
        double t_now = 0.0;
        for (double t : times) {
            if (t > t_now) rho = run_heat(std::move(rho), grid, hp, t - t_now);
            t_now = t;
            // Diffusion-limit flux -<v^2> d(rho)/dx stands in for J.
            std::vector<double> j(rho.size());
            for (int i = 0; i < grid.n_cells(); ++i)
                j[static_cast<std::size_t>(i)] =
                    -vs.second_moment() *
                    (rho[static_cast<std::size_t>(grid.right_index(i))] -
                     rho[static_cast<std::size_t>(grid.left_index(i))]) /
                    (2.0 * grid.dx());
            write_file_atomic(dir / ("snapshot_" + method + "_t" + detail::tag(t) + ".csv"),
                              snapshot_csv(grid, rho, j));
        }
    };

    switch (cfg.mode) {
        case RunMode::Inner:
            run_kinetic_method("inner", detail::make_inner(cfg, grid, vs, config_dt_inner(cfg)),
                               std::nullopt);
            break;
        case RunMode::Reference: {
            const double dt = config_dt_inner(cfg);
            detail::check_cost(0.0, cfg.t_end, ReferenceOptions{dt, cfg.cost_ceiling});
            run_kinetic_method("reference", detail::make_inner(cfg, grid, vs, dt), std::nullopt);
            break;
        }
        case RunMode::Projective: {
            auto ms = detail::make_projective_setup(cfg, grid, vs, cfg.nu);
            std::cout << "projective: dt_inner=" << format_float(ms.proj->dt_inner)
                      << " dt_outer=" << format_float(ms.proj->dt_outer)
                      << " K=" << ms.proj->k_inner
                      << " (closed-form sufficient K=" << format_float(*ms.k_closed_form) << ")\n";
            run_kinetic_method("projective", ms.inner, ms.proj);
            break;
        }
        case RunMode::Heat:
            run_heat_method("heat");
            break;
        case RunMode::Compare: {
            run_kinetic_method("inner", detail::make_inner(cfg, grid, vs, cfg.eps * cfg.eps),
                               std::nullopt);
            const double ref_dt = cfg.eps * cfg.eps * cfg.eps;
            detail::check_cost(0.0, cfg.t_end, ReferenceOptions{ref_dt, cfg.cost_ceiling});
            run_kinetic_method("reference", detail::make_inner(cfg, grid, vs, ref_dt),
                               std::nullopt);
            auto ms = detail::make_projective_setup(cfg, grid, vs, cfg.nu);
            run_kinetic_method("projective", ms.inner, ms.proj);
            run_heat_method("heat");
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// spectrum: eigenvalues of the inner amplification symbol per mode, plus the
// enclosing disks, for each (flux, dt-scale) combination.
// ---------------------------------------------------------------------------
inline void cmd_spectrum(const RunConfig& cfg) {
    const auto vs = VelocitySpace::build(cfg.p);
    const Grid grid(cfg.x_left, cfg.x_right, cfg.n_cells, cfg.bc);
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const double base_dt = config_dt_inner(cfg);
    std::vector<FluxKind> fluxes = cfg.flux_list.empty()
                                       ? std::vector<FluxKind>{cfg.flux}
                                       : cfg.flux_list;
    std::optional<double> dt_outer;
    std::optional<int> k;
    if (cfg.k_inner) {
        dt_outer = cfg.nu * grid.dx() * grid.dx() / vs.second_moment();
        k = *cfg.k_inner;
    }
    for (FluxKind flux : fluxes)
        for (double scale : cfg.dt_scales) {
            const double dt = scale * base_dt;
            auto rep = analyze_spectrum(vs, grid, cfg.eps, dt, flux, cfg.zeta_samples,
                                        dt_outer, k);
            const std::string stem = std::string(to_string(flux)) + "_scale" + detail::tag(scale);
            write_file_atomic(dir / ("spectrum_" + stem + ".csv"), spectrum_csv(rep));
            write_file_atomic(dir / ("disks_" + stem + ".csv"), disks_csv(rep));
            int bad = 0;
            for (const auto& m : rep.modes)
                if (!m.enclosure_ok) ++bad;
            std::cout << "spectrum " << stem << ": " << rep.modes.size() << " modes, "
                      << bad << " enclosure failures\n";
        }
}

// ---------------------------------------------------------------------------
// stability: outer-step stability verdict per K, plus advised parameters.
// ---------------------------------------------------------------------------
inline void cmd_stability(const RunConfig& cfg) {
    const auto vs = VelocitySpace::build(cfg.p);
    const Grid grid(cfg.x_left, cfg.x_right, cfg.n_cells, cfg.bc);
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const double dt_inner = config_dt_inner(cfg);
    const double dt_outer = cfg.nu * grid.dx() * grid.dx() / vs.second_moment();
    std::vector<StabilityRow> rows;
    for (int k : cfg.k_values) {
        auto chk = check_stability(vs, grid, cfg.eps, dt_inner, dt_outer, k, cfg.flux);
        rows.push_back({k, chk.stable, chk.worst_zeta, chk.worst_amplification});
        std::cout << "K=" << k << (chk.stable ? " stable" : " unstable")
                  << " worst |amp|=" << format_float(chk.worst_amplification)
                  << " at zeta=" << format_float(chk.worst_zeta) << '\n';
    }
    write_file_atomic(dir / "stability.csv", stability_csv(rows));

    auto mk = min_inner_steps(vs, grid, cfg.eps, dt_inner, dt_outer, cfg.flux, cfg.k_max);
    std::string advice = "eps,dx,p,dt_inner,dt_outer,k_exact,k_closed_form\n";
    advice += format_float(cfg.eps) + "," + format_float(grid.dx()) + "," +
              std::to_string(cfg.p) + "," + format_float(dt_inner) + "," +
              format_float(dt_outer) + "," + (mk.k ? std::to_string(*mk.k) : "-1") + "," +
              format_float(mk.closed_form_bound) + "\n";
    write_file_atomic(dir / "advice.csv", advice);
    std::cout << "exact minimal K: " << (mk.k ? std::to_string(*mk.k) : "none") << "  "
              << "closed-form sufficient K: " << format_float(mk.closed_form_bound) << '\n';
}

// ---------------------------------------------------------------------------
// converge: eps-sweep (inner and projective error against a fine reference)
// or nu-sweep (projective error as a function of the outer step).
// ---------------------------------------------------------------------------
inline void cmd_converge(const RunConfig& cfg) {
    if (cfg.model != Model::Linear)
        throw ConfigError("converge sweeps support the linear model only");
    if (cfg.sweep != "eps" && cfg.sweep != "nu")
        throw ConfigError("converge requires sweep = eps or sweep = nu");
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const auto times = detail::sorted_times(
        cfg.error_times.empty() ? std::vector<double>{cfg.t_end} : cfg.error_times);
    if (times.empty() || !(times.back() > 0.0))
        throw ConfigError("converge requires positive error_times or t_end");

    std::vector<ErrorRecord> records;
    struct SlopeSeries {
        std::string label;
        double t;
        std::vector<double> xs, err_rho, err_flux;
    };
    std::vector<SlopeSeries> series;

    if (cfg.sweep == "eps") {
        const int n = static_cast<int>(cfg.eps_values.size());
        std::vector<std::vector<ErrorRecord>> slots(static_cast<std::size_t>(n));
        detail::parallel_for(n, cfg.workers, [&](int idx) {
            RunConfig point = cfg;
            point.eps = cfg.eps_values[static_cast<std::size_t>(idx)];
            validate(point);
            const auto vs = VelocitySpace::build(point.p);
            const Grid grid(point.x_left, point.x_right, point.n_cells, point.bc);
            const auto [ref_dt, ref_name] = detail::resolve_reference_dt(point, times.back());
            const auto ref =
                detail::reference_frames<KineticState>(point, grid, vs, ref_dt, 1.0, times);

            auto measure = [&](const std::string& label, auto&& advance) {
                KineticState s = init_linear_benchmark(grid, vs);
                std::size_t frame = 0;
                detail::advance_with_snapshots(
                    std::move(s), 0.0, times, advance,
                    [&](const KineticState& st, double t) {
                        const auto rho = density(st);
                        const auto j = flux(st, vs, point.eps);
                        ErrorRecord rec;
                        rec.label = label + "_vs_" + ref_name;
                        rec.eps = point.eps;
                        rec.dx = grid.dx();
                        rec.t = t;
                        rec.err_rho = l2_error(rho, ref[frame].rho, grid.dx());
                        rec.err_flux = l2_error(j, ref[frame].j, grid.dx());
                        slots[static_cast<std::size_t>(idx)].push_back(rec);
                        ++frame;
                    });
            };

            InnerParams inner =
                detail::make_inner(point, grid, vs, point.eps * point.eps);
            measure("inner", [&](KineticState st, double t) {
                return run_inner_to(std::move(st), grid, vs, inner, t);
            });
            auto ms = detail::make_projective_setup(point, grid, vs, point.nu);
            measure("projective", [&](KineticState st, double t) {
                ProjectiveParams pp = *ms.proj;
                pp.t_end = t;
                return run_projective<KineticState>(std::move(st), grid, vs, ms.inner, pp);
            });
            for (auto& rec : slots[static_cast<std::size_t>(idx)])
                if (rec.label.rfind("projective", 0) == 0) rec.dt_outer = ms.proj->dt_outer;
        });
        for (auto& slot : slots)
            for (auto& rec : slot) records.push_back(std::move(rec));
        // slope of error against eps per (method, time)
        for (const std::string method : {"inner", "projective"})
            for (double t : times) {
                SlopeSeries s;
                s.label = method;
                s.t = t;
                for (const auto& rec : records)
                    if (rec.t == t && rec.label.rfind(method + "_vs_", 0) == 0) {
                        s.xs.push_back(rec.eps);
                        s.err_rho.push_back(rec.err_rho);
                        s.err_flux.push_back(rec.err_flux);
                    }
                if (s.xs.size() >= 2) series.push_back(std::move(s));
            }
    } else {  // nu sweep
        RunConfig base = cfg;
        validate(base);
        const auto vs = VelocitySpace::build(base.p);
        const Grid grid(base.x_left, base.x_right, base.n_cells, base.bc);
        const auto [ref_dt, ref_name] = detail::resolve_reference_dt(base, times.back());
        const auto ref = detail::reference_frames<KineticState>(base, grid, vs, ref_dt, 1.0, times);
        const int n = static_cast<int>(cfg.nu_values.size());
        std::vector<std::vector<ErrorRecord>> slots(static_cast<std::size_t>(n));
        detail::parallel_for(n, cfg.workers, [&](int idx) {
            const double nu = cfg.nu_values[static_cast<std::size_t>(idx)];
            auto ms = detail::make_projective_setup(base, grid, vs, nu);
            KineticState s = init_linear_benchmark(grid, vs);
            std::size_t frame = 0;
            detail::advance_with_snapshots(
                std::move(s), 0.0, times,
                [&](KineticState st, double t) {
                    ProjectiveParams pp = *ms.proj;
                    pp.t_end = t;
                    return run_projective<KineticState>(std::move(st), grid, vs, ms.inner, pp);
                },
                [&](const KineticState& st, double t) {
                    const auto rho = density(st);
                    const auto j = flux(st, vs, base.eps);
                    ErrorRecord rec;
                    rec.label = "projective_vs_" + ref_name;
                    rec.eps = base.eps;
                    rec.dx = grid.dx();
                    rec.dt_outer = ms.proj->dt_outer;
                    rec.t = t;
                    rec.err_rho = l2_error(rho, ref[frame].rho, grid.dx());
                    rec.err_flux = l2_error(j, ref[frame].j, grid.dx());
                    slots[static_cast<std::size_t>(idx)].push_back(rec);
                    ++frame;
                });
        });
        for (auto& slot : slots)
            for (auto& rec : slot) records.push_back(std::move(rec));
        for (double t : times) {
            SlopeSeries s;
            s.label = "projective";
            s.t = t;
            for (const auto& rec : records)
                if (rec.t == t) {
                    s.xs.push_back(rec.dt_outer);
                    s.err_rho.push_back(rec.err_rho);
                    s.err_flux.push_back(rec.err_flux);
                }
            if (s.xs.size() >= 2) series.push_back(std::move(s));
        }
    }

    write_file_atomic(dir / "errors.csv", errors_csv(records));
    std::string slopes = "label,t,slope_rho,slope_flux\n";
    for (const auto& s : series) {
        const double sr = slope(s.xs, s.err_rho);
        const double sf = slope(s.xs, s.err_flux);
        slopes += s.label + "," + format_float(s.t) + "," + format_float(sr) + "," +
                  format_float(sf) + "\n";
        std::cout << "slope[" << s.label << ", t=" << detail::tag(s.t) << "]: rho "
                  << format_float(sr) << ", flux " << format_float(sf) << '\n';
    }
    write_file_atomic(dir / "slopes.csv", slopes);
}

// ---------------------------------------------------------------------------
// suolson: benchmark runs for each initial level A — full forward Euler,
// projective, and the fine reference — with snapshots, flux-ratio profiles,
// limited-flux margins and errors against the reference.
// ---------------------------------------------------------------------------
inline void cmd_suolson(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    cfg.model = Model::SuOlson;
    if (!(cfg.t_end > 0.0)) throw ConfigError("suolson requires t_end > 0");
    const auto vs = VelocitySpace::build(cfg.p);
    const Grid grid(cfg.x_left, cfg.x_right, cfg.n_cells, cfg.bc);
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const auto times = detail::sorted_times(cfg.snapshot_times);

    const int n = static_cast<int>(cfg.a_values.size());
    std::vector<std::vector<ErrorRecord>> err_slots(static_cast<std::size_t>(n));
    std::vector<std::string> margin_rows(static_cast<std::size_t>(n));
    std::vector<std::string> summary(static_cast<std::size_t>(n));

    detail::parallel_for(n, cfg.workers, [&](int idx) {
        const double a = cfg.a_values[static_cast<std::size_t>(idx)];
        const std::string a_tag = "a" + detail::tag(a);
        const auto [ref_dt, ref_name] = detail::resolve_reference_dt(cfg, times.back());
        const auto ref = detail::reference_frames<SuOlsonState>(cfg, grid, vs, ref_dt, a, times);

        struct MethodResult {
            std::string name;
            SuOlsonState final;
            std::vector<double> err_rho, err_flux;  // per time
        };
        std::vector<MethodResult> methods;

        auto run_method = [&](const std::string& name, const InnerParams& inner,
                              const std::optional<ProjectiveParams>& proj) {
            detail::RunLog log(grid.dx());
            SuOlsonState s = init_suolson(grid, vs, a);
            MethodResult res;
            res.name = name;
            std::size_t frame = 0;
            s = detail::advance_with_snapshots(
                std::move(s), 0.0, times,
                [&](SuOlsonState st, double t) {
                    if (proj) {
                        ProjectiveParams pp = *proj;
                        pp.t_end = t;
                        return run_projective<SuOlsonState>(
                            std::move(st), grid, vs, inner, pp,
                            [&log](long long, const SuOlsonState& x) { log.record(x); });
                    }
                    return run_inner_to(std::move(st), grid, vs, inner, t);
                },
                [&](const SuOlsonState& st, double t) {
                    const std::string stem = name + "_" + a_tag + "_t" + detail::tag(t);
                    detail::write_state_snapshot(dir, stem, grid, vs, cfg.eps, st.kinetic,
                                                 &st.theta, cfg.export_distribution);
                    detail::write_flux_ratio(dir, stem, grid, vs, cfg.eps, st.kinetic);
                    res.err_rho.push_back(
                        l2_error(density(st.kinetic), ref[frame].rho, grid.dx()));
                    res.err_flux.push_back(
                        l2_error(flux(st.kinetic, vs, cfg.eps), ref[frame].j, grid.dx()));
                    ++frame;
                });
            if (proj)
                write_file_atomic(dir / ("run_log_projective_" + a_tag + ".csv"), log.text());
            res.final = std::move(s);
            methods.push_back(std::move(res));
        };

        run_method("inner", detail::make_inner(cfg, grid, vs, cfg.eps * cfg.eps), std::nullopt);
        auto ms = detail::make_projective_setup(cfg, grid, vs, cfg.nu);
        run_method("projective", ms.inner, ms.proj);

        std::string margins;
        for (const auto& m : methods) {
            const double margin = limited_flux_margin(m.final.kinetic, vs, cfg.eps);
            margins += detail::tag(a) + "," + m.name + "," + format_float(margin) + "\n";
            for (std::size_t f = 0; f < times.size(); ++f) {
                ErrorRecord rec;
                rec.label = m.name + "_" + a_tag + "_vs_" + ref_name;
                rec.eps = cfg.eps;
                rec.dx = grid.dx();
                rec.dt_outer = m.name == "projective" ? ms.proj->dt_outer : 0.0;
                rec.t = times[f];
                rec.err_rho = m.err_rho[f];
                rec.err_flux = m.err_flux[f];
                err_slots[static_cast<std::size_t>(idx)].push_back(rec);
            }
        }
        margin_rows[static_cast<std::size_t>(idx)] = margins;
        const double fe_err = methods[0].err_rho.back();
        const double pi_err = methods[1].err_rho.back();
        summary[static_cast<std::size_t>(idx)] =
            "A=" + detail::tag(a) + ": inner err_rho " + format_float(fe_err) +
            ", projective err_rho " + format_float(pi_err) +
            (fe_err > 0.0 ? ", ratio " + format_float(pi_err / fe_err) : "");
    });

    std::vector<ErrorRecord> records;
    for (auto& slot : err_slots)
        for (auto& rec : slot) records.push_back(std::move(rec));
    write_file_atomic(dir / "errors.csv", errors_csv(records));
    std::string margins = "a,method,limited_flux_margin\n";
    for (const auto& m : margin_rows) margins += m;
    write_file_atomic(dir / "margins.csv", margins);
    for (const auto& s : summary) std::cout << s << '\n';
}

} // namespace kinproj
