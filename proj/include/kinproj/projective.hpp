#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "kinproj/errors.hpp"
#include "kinproj/inner_scheme.hpp"
#include "kinproj/spectral.hpp"

namespace kinproj {

// Outer-integrator parameters. One outer step takes K+1 inner steps of size
// dt_inner, then extrapolates over the remaining dt_outer - (K+1) dt_inner.
struct ProjectiveParams {
    double dt_inner = 0.0;
    int k_inner = 1;
    double dt_outer = 0.0;
    double t_end = 0.0;
};

inline void validate(const ProjectiveParams& p) {
    if (!(p.dt_inner > 0.0)) throw ConfigError("dt_inner must be positive");
    if (!(p.dt_outer > 0.0)) throw ConfigError("dt_outer must be positive");
    if (p.k_inner < 1) throw ConfigError("k_inner must be >= 1");
    if (p.dt_outer < (p.k_inner + 1) * p.dt_inner * (1.0 - 1e-12))
        throw ConfigError("dt_outer = " + std::to_string(p.dt_outer) +
                          " is shorter than (K+1)*dt_inner = " +
                          std::to_string((p.k_inner + 1) * p.dt_inner) +
                          "; the extrapolation length would be negative");
}

namespace detail {

inline void extrapolate_span(std::span<double> next, std::span<const double> prev, double m) {
    for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = next[i] + m * (next[i] - prev[i]);
}

inline void extrapolate_state(KineticState& last, const KineticState& prev, double m) {
    extrapolate_span(last.f, prev.f, m);
}

inline void extrapolate_state(SuOlsonState& last, const SuOlsonState& prev, double m) {
    extrapolate_span(last.kinetic.f, prev.kinetic.f, m);
    extrapolate_span(last.theta, prev.theta, m);
}

inline double state_time(const KineticState& s) { return s.t; }
inline double state_time(const SuOlsonState& s) { return s.time(); }
inline void set_state_time(KineticState& s, double t) { s.t = t; }
inline void set_state_time(SuOlsonState& s, double t) { s.kinetic.t = t; }

inline double sup_norm(const KineticState& s) {
    double m = 0.0;
    for (double x : s.f) m = std::max(m, std::abs(x));
    return m;
}

inline double sup_norm(const SuOlsonState& s) {
    double m = sup_norm(s.kinetic);
    for (double x : s.theta) m = std::max(m, std::abs(x));
    return m;
}

} // namespace detail

// One projective forward Euler step: K+1 inner steps giving f^{N,K} and
// f^{N,K+1}, then f^{N+1} = f^{N,K+1} + (Δt-(K+1)δt)(f^{N,K+1}-f^{N,K})/δt.
// For the Su-Olson state, f and Θ are extrapolated jointly. The time
// advances by exactly dt_outer.
template <class State>
State projective_step(State s, const Grid& grid, const VelocitySpace& vs,
                      const InnerParams& inner, const ProjectiveParams& pp) {
    if (std::abs(inner.dt - pp.dt_inner) > 1e-15 * pp.dt_inner)
        throw std::invalid_argument("projective_step: inner.dt must equal dt_inner");
    const double t0 = detail::state_time(s);
    State scratch;
    for (int k = 0; k < pp.k_inner; ++k) detail::step_once(s, scratch, grid, vs, inner);
    State prev = s;                              // f^{N,K}
    detail::step_once(s, scratch, grid, vs, inner);  // f^{N,K+1}
    const double m = (pp.dt_outer - (pp.k_inner + 1) * pp.dt_inner) / pp.dt_inner;
    detail::extrapolate_state(s, prev, m);
    detail::set_state_time(s, t0 + pp.dt_outer);
    detail::check_finite(s, 0);
    return s;
}

template <class State>
using OuterHook = std::function<void(long long step, const State&)>;

// Repeat projective steps until t_end. The final step shortens dt_outer to
// land exactly on t_end; when the remainder is shorter than (K+1) dt_inner,
// plain inner steps finish the run instead. A growth guard aborts with a
// DivergenceError once the sup norm exceeds blowup_factor times its initial
// value.
template <class State>
State run_projective(State s, const Grid& grid, const VelocitySpace& vs,
                     const InnerParams& inner, const ProjectiveParams& pp,
                     const OuterHook<State>& hook = {}, double blowup_factor = 1e3) {
    validate(pp);
    const double t_start = detail::state_time(s);
    const double tol = 1e-12 * std::max(1.0, std::abs(pp.t_end));
    if (pp.t_end < t_start - tol)
        throw std::invalid_argument("run_projective: t_end lies before the state's time");
    // A forced run legitimately grows from tiny initial data at the source's
    // injection rate, so the guard scale includes ||S||_inf * horizon.
    double source_sup = 0.0;
    for (double x : inner.source) source_sup = std::max(source_sup, std::abs(x));
    const double scale = std::max(detail::sup_norm(s),
                                  source_sup * std::max(pp.t_end - t_start, 1.0));
    const double guard = blowup_factor * std::max(scale, 1e-300);
    long long step = 0;
    while (pp.t_end - detail::state_time(s) > tol) {
        const double remaining = pp.t_end - detail::state_time(s);
        if (remaining >= pp.dt_outer * (1.0 - 1e-12)) {
            s = projective_step(std::move(s), grid, vs, inner, pp);
            // Rebase to keep t free of accumulated roundoff.
            detail::set_state_time(s, t_start + static_cast<double>(step + 1) * pp.dt_outer);
        } else if (remaining >= (pp.k_inner + 1) * pp.dt_inner * (1.0 - 1e-12)) {
            ProjectiveParams last = pp;
            last.dt_outer = remaining;
            s = projective_step(std::move(s), grid, vs, inner, last);
            detail::set_state_time(s, pp.t_end);
        } else {
            s = run_inner_to(std::move(s), grid, vs, inner, pp.t_end);
        }
        ++step;
        if (detail::sup_norm(s) > guard)
            throw DivergenceError("projective run exceeded the growth guard (" +
                                      std::to_string(blowup_factor) + "x initial sup norm)",
                                  step, detail::state_time(s));
        if (hook) hook(step, s);
    }
    return s;
}

// Parameter choices that make the outer step heat-like: dt_inner = eps^2,
// dt_outer = nu dx^2 / <v^2>, centered flux, and the smallest K passing the
// exact per-mode stability check (the sufficient closed-form bound is
// reported alongside for comparison).
struct ParameterAdvice {
    double dt_inner = 0.0;
    double dt_outer = 0.0;
    int k_inner = 0;
    double k_closed_form = 0.0;
    FluxKind flux = FluxKind::Centered;
};

inline ParameterAdvice advise_params(const VelocitySpace& vs, const Grid& grid, double eps,
                                     double nu, int k_max = 64) {
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(nu > 0.0) || nu > 2.0)
        throw ConfigError("nu must lie in (0, 2]; the outer step is unstable beyond nu = 2");
    if (grid.dx() < vs.v_max() * eps * (1.0 - 1e-12))
        throw ConfigError(
            "centered flux with dt_inner = eps^2 requires dx >= v_max*eps for inner "
            "stability; got dx = " + std::to_string(grid.dx()) + ", v_max*eps = " +
            std::to_string(vs.v_max() * eps));
    ParameterAdvice adv;
    adv.dt_inner = eps * eps;
    adv.dt_outer = nu * grid.dx() * grid.dx() / vs.second_moment();
    adv.flux = FluxKind::Centered;
    auto mk = min_inner_steps(vs, grid, eps, adv.dt_inner, adv.dt_outer, adv.flux, k_max);
    adv.k_closed_form = mk.closed_form_bound;
    if (!mk.k)
        throw ConfigError("no stable inner-step count K <= " + std::to_string(k_max) +
                          " exists for these parameters");
    adv.k_inner = *mk.k;
    return adv;
}

} // namespace kinproj
