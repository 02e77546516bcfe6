#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinproj/errors.hpp"
#include "kinproj/grid.hpp"
#include "kinproj/state.hpp"
#include "kinproj/velocity_space.hpp"

namespace kinproj {

enum class FluxKind { Upwind, Centered };

inline const char* to_string(FluxKind f) {
    return f == FluxKind::Upwind ? "upwind" : "centered";
}

// Parameters of the inner forward Euler stepper S_dt. `source` is the
// per-cell Su-Olson source S_i; empty means zero.
struct InnerParams {
    double eps = 0.0;
    double dt = 0.0;
    FluxKind flux = FluxKind::Centered;
    double sigma_a = 1.0;
    std::vector<double> source;
};

// Checks the stepper's own stability ceilings. dt <= 2 eps^2 keeps the
// relaxation term stable; with the centered flux at dt = eps^2 the mesh must
// additionally satisfy dx >= v_max * eps.
inline void validate(const InnerParams& p, const Grid& grid, const VelocitySpace& vs) {
    if (!(p.eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(p.dt > 0.0)) throw ConfigError("dt_inner must be positive");
    if (p.dt > 2.0 * p.eps * p.eps * (1.0 + 1e-12))
        throw ConfigError("dt_inner = " + std::to_string(p.dt) +
                          " exceeds the inner stability ceiling 2*eps^2 = " +
                          std::to_string(2.0 * p.eps * p.eps));
    if (p.flux == FluxKind::Centered && p.dt >= 0.999 * p.eps * p.eps &&
        grid.dx() < vs.v_max() * p.eps * (1.0 - 1e-12))
        throw ConfigError(
            "centered flux with dt_inner = eps^2 requires dx >= v_max*eps for inner "
            "stability; got dx = " + std::to_string(grid.dx()) + ", v_max*eps = " +
            std::to_string(vs.v_max() * p.eps));
    if (p.sigma_a < 0.0) throw ConfigError("sigma_a must be nonnegative");
    if (!p.source.empty() && p.source.size() != static_cast<std::size_t>(grid.n_cells()))
        throw ConfigError("source vector length " + std::to_string(p.source.size()) +
                          " does not match n_cells = " + std::to_string(grid.n_cells()));
}

namespace detail {

// Neighbor-row resolver. Periodic wraps; a homogeneous Neumann wall uses the
// specular ghost (boundary cell with velocities flipped), which keeps the
// density gradient zero at the wall and makes the wall mass flux exactly
// zero. A plain value copy instead lets the centered flux trap the boundary
// cell and leak mass through the wall.
class NeighborRows {
public:
    NeighborRows(const KineticState& s, const Grid& grid) : s_(&s), grid_(&grid) {
        if (grid.bc() == BoundaryCondition::NeumannHomogeneous) {
            const int m = s.n_velocities;
            left_ghost_.resize(static_cast<std::size_t>(m));
            right_ghost_.resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) {
                left_ghost_[static_cast<std::size_t>(j)] = s(0, m - 1 - j);
                right_ghost_[static_cast<std::size_t>(j)] = s(s.n_cells - 1, m - 1 - j);
            }
        }
    }

    std::span<const double> left(int i) const {
        if (i > 0) return s_->row(i - 1);
        if (grid_->bc() == BoundaryCondition::Periodic) return s_->row(s_->n_cells - 1);
        return left_ghost_;
    }
    std::span<const double> right(int i) const {
        if (i < s_->n_cells - 1) return s_->row(i + 1);
        if (grid_->bc() == BoundaryCondition::Periodic) return s_->row(0);
        return right_ghost_;
    }

private:
    const KineticState* s_;
    const Grid* grid_;
    std::vector<double> left_ghost_, right_ghost_;
};

} // namespace detail

// Flux-difference operator Phi(f)_{i,j} = (phi_{i+1/2,j} - phi_{i-1/2,j}) / dx,
// approximating v_j ∂x f. Ghost cells follow the grid's boundary condition.
inline void phi_into(const KineticState& s, const Grid& grid, const VelocitySpace& vs,
                     FluxKind flux, std::span<double> out) {
    const int n = s.n_cells;
    const int m = s.n_velocities;
    const auto v = vs.velocities();
    const double inv_dx = 1.0 / grid.dx();
    const double inv_2dx = 0.5 * inv_dx;
    const detail::NeighborRows nb(s, grid);
    for (int i = 0; i < n; ++i) {
        const double* fm = nb.left(i).data();
        const double* f0 = s.row(i).data();
        const double* fp = nb.right(i).data();
        double* oi = out.data() + static_cast<std::size_t>(i) * m;
        if (flux == FluxKind::Centered) {
            for (int k = 0; k < m; ++k) oi[k] = v[k] * (fp[k] - fm[k]) * inv_2dx;
        } else {
            // First half of the velocity order is v > 0, second half v < 0.
            const int half = m / 2;
            for (int k = 0; k < half; ++k) oi[k] = v[k] * (f0[k] - fm[k]) * inv_dx;
            for (int k = half; k < m; ++k) oi[k] = v[k] * (fp[k] - f0[k]) * inv_dx;
        }
    }
}

inline std::vector<double> phi(const KineticState& s, const Grid& grid,
                               const VelocitySpace& vs, FluxKind flux) {
    std::vector<double> out(s.f.size());
    phi_into(s, grid, vs, flux, out);
    return out;
}

namespace detail {

inline void check_finite(const KineticState& s, long long step) {
    if (!all_finite(s))
        throw DivergenceError("inner step produced non-finite values", step, s.t);
}

// One linear step: dst = src - (dt/eps) Phi(src) + (dt/eps^2)(rho - src),
// with rho taken from the pre-update src.
inline void step_linear_into(const KineticState& src, const Grid& grid,
                             const VelocitySpace& vs, const InnerParams& p,
                             KineticState& dst) {
    const int n = src.n_cells;
    const int m = src.n_velocities;
    dst.n_cells = n;
    dst.n_velocities = m;
    dst.f.resize(src.f.size());
    const auto v = vs.velocities();
    const double a = p.dt / p.eps;
    const double b = p.dt / (p.eps * p.eps);
    const double inv_dx = 1.0 / grid.dx();
    const double inv_2dx = 0.5 * inv_dx;
    const double w = 1.0 / m;
    const int half = m / 2;
    const NeighborRows nb(src, grid);
    for (int i = 0; i < n; ++i) {
        const double* fm = nb.left(i).data();
        const double* f0 = src.row(i).data();
        const double* fp = nb.right(i).data();
        double rho = 0.0;
        for (int k = 0; k < m; ++k) rho += f0[k];
        rho *= w;
        double* di = dst.f.data() + static_cast<std::size_t>(i) * m;
        if (p.flux == FluxKind::Centered) {
            for (int k = 0; k < m; ++k) {
                const double ph = v[k] * (fp[k] - fm[k]) * inv_2dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]);
            }
        } else {
            for (int k = 0; k < half; ++k) {
                const double ph = v[k] * (f0[k] - fm[k]) * inv_dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]);
            }
            for (int k = half; k < m; ++k) {
                const double ph = v[k] * (fp[k] - f0[k]) * inv_dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]);
            }
        }
    }
    dst.t = src.t + p.dt;
}

// One Su-Olson step; both updates use the pre-update rho.
inline void step_suolson_into(const SuOlsonState& src, const Grid& grid,
                              const VelocitySpace& vs, const InnerParams& p,
                              SuOlsonState& dst) {
    const KineticState& fsrc = src.kinetic;
    const int n = fsrc.n_cells;
    const int m = fsrc.n_velocities;
    dst.kinetic.n_cells = n;
    dst.kinetic.n_velocities = m;
    dst.kinetic.f.resize(fsrc.f.size());
    dst.theta.resize(src.theta.size());
    const auto v = vs.velocities();
    const double a = p.dt / p.eps;
    const double b = p.dt / (p.eps * p.eps);
    const double inv_dx = 1.0 / grid.dx();
    const double inv_2dx = 0.5 * inv_dx;
    const double w = 1.0 / m;
    const int half = m / 2;
    const bool has_source = !p.source.empty();
    const NeighborRows nb(fsrc, grid);
    for (int i = 0; i < n; ++i) {
        const double* fm = nb.left(i).data();
        const double* f0 = fsrc.row(i).data();
        const double* fp = nb.right(i).data();
        double rho = 0.0;
        for (int k = 0; k < m; ++k) rho += f0[k];
        rho *= w;
        const double theta = src.theta[static_cast<std::size_t>(i)];
        const double s_i = has_source ? p.source[static_cast<std::size_t>(i)] : 0.0;
        const double coupling = p.dt * (p.sigma_a * (theta - rho) + s_i);
        double* di = dst.kinetic.f.data() + static_cast<std::size_t>(i) * m;
        if (p.flux == FluxKind::Centered) {
            for (int k = 0; k < m; ++k) {
                const double ph = v[k] * (fp[k] - fm[k]) * inv_2dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]) + coupling;
            }
        } else {
            for (int k = 0; k < half; ++k) {
                const double ph = v[k] * (f0[k] - fm[k]) * inv_dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]) + coupling;
            }
            for (int k = half; k < m; ++k) {
                const double ph = v[k] * (fp[k] - f0[k]) * inv_dx;
                di[k] = f0[k] - a * ph + b * (rho - f0[k]) + coupling;
            }
        }
        dst.theta[static_cast<std::size_t>(i)] = theta + p.dt * p.sigma_a * (rho - theta);
    }
    dst.kinetic.t = fsrc.t + p.dt;
}

inline void step_once(KineticState& s, KineticState& scratch, const Grid& grid,
                      const VelocitySpace& vs, const InnerParams& p) {
    step_linear_into(s, grid, vs, p, scratch);
    std::swap(s, scratch);
}

inline void step_once(SuOlsonState& s, SuOlsonState& scratch, const Grid& grid,
                      const VelocitySpace& vs, const InnerParams& p) {
    step_suolson_into(s, grid, vs, p, scratch);
    std::swap(s, scratch);
}

inline void check_finite(const SuOlsonState& s, long long step) {
    if (!all_finite(s))
        throw DivergenceError("inner step produced non-finite values", step, s.time());
}

} // namespace detail

inline KineticState step_linear(const KineticState& s, const Grid& grid,
                                const VelocitySpace& vs, const InnerParams& p) {
    KineticState out;
    detail::step_linear_into(s, grid, vs, p, out);
    detail::check_finite(out, 0);
    return out;
}

inline SuOlsonState step_suolson(const SuOlsonState& s, const Grid& grid,
                                 const VelocitySpace& vs, const InnerParams& p) {
    SuOlsonState out;
    detail::step_suolson_into(s, grid, vs, p, out);
    detail::check_finite(out, 0);
    return out;
}

// n_steps applications of the appropriate step. Double-buffered; the
// finiteness check runs every step so a divergence reports its step index.
template <class State>
State run_inner(State s, const Grid& grid, const VelocitySpace& vs, const InnerParams& p,
                long long n_steps) {
    if (n_steps < 0) throw std::invalid_argument("run_inner: n_steps must be >= 0");
    State scratch;
    for (long long k = 0; k < n_steps; ++k) {
        detail::step_once(s, scratch, grid, vs, p);
        detail::check_finite(s, k);
    }
    return s;
}

// Advance to t_end exactly: full steps of p.dt plus, when t_end is not a
// multiple of dt, one shorter remainder step.
template <class State>
State run_inner_to(State s, const Grid& grid, const VelocitySpace& vs, const InnerParams& p,
                   double t_end) {
    double t0;
    if constexpr (std::is_same_v<State, KineticState>) t0 = s.t; else t0 = s.time();
    const double remaining = t_end - t0;
    if (remaining < -1e-12 * std::max(1.0, std::abs(t_end)))
        throw std::invalid_argument("run_inner_to: t_end lies before the state's time");
    if (remaining <= 0.0) return s;
    const double steps_exact = remaining / p.dt;
    long long n_full = static_cast<long long>(std::floor(steps_exact + 1e-9));
    double dt_last = remaining - n_full * p.dt;
    if (dt_last <= 1e-9 * p.dt) dt_last = 0.0;
    s = run_inner(std::move(s), grid, vs, p, n_full);
    if (dt_last > 0.0) {
        InnerParams tail = p;
        tail.dt = dt_last;
        State scratch;
        detail::step_once(s, scratch, grid, vs, tail);
        detail::check_finite(s, n_full);
    }
    if constexpr (std::is_same_v<State, KineticState>) s.t = t_end; else s.kinetic.t = t_end;
    return s;
}

} // namespace kinproj
