#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "kinproj/errors.hpp"
#include "kinproj/grid.hpp"
#include "kinproj/inner_scheme.hpp"

namespace kinproj {

// Explicit 3-point stencil for the limiting heat equation rho_t = d rho_xx.
struct HeatParams {
    double diffusivity = 0.0;  // <v^2>
    double dt = 0.0;
};

inline void validate(const HeatParams& p, const Grid& grid) {
    if (!(p.diffusivity > 0.0)) throw ConfigError("heat diffusivity must be positive");
    if (!(p.dt > 0.0)) throw ConfigError("heat dt must be positive");
    const double ceiling = grid.dx() * grid.dx() / (2.0 * p.diffusivity);
    if (p.dt > ceiling * (1.0 + 1e-12))
        throw ConfigError("heat dt = " + std::to_string(p.dt) +
                          " violates the explicit stability bound dx^2/(2d) = " +
                          std::to_string(ceiling));
}

inline std::vector<double> heat_step(std::span<const double> rho, const Grid& grid,
                                     const HeatParams& p) {
    validate(p, grid);
    const int n = grid.n_cells();
    const double mu = p.diffusivity * p.dt / (grid.dx() * grid.dx());
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double left = rho[static_cast<std::size_t>(grid.left_index(i))];
        const double right = rho[static_cast<std::size_t>(grid.right_index(i))];
        const double mid = rho[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = mid + mu * (right - 2.0 * mid + left);
    }
    return out;
}

// Advance the heat solution over `duration`, full steps plus one shorter
// remainder step to land exactly.
inline std::vector<double> run_heat(std::vector<double> rho, const Grid& grid,
                                    const HeatParams& p, double duration) {
    if (duration < 0.0) throw std::invalid_argument("run_heat: duration must be >= 0");
    const long long n_full = static_cast<long long>(std::floor(duration / p.dt + 1e-9));
    for (long long k = 0; k < n_full; ++k) rho = heat_step(rho, grid, p);
    const double rem = duration - static_cast<double>(n_full) * p.dt;
    if (rem > 1e-9 * p.dt) {
        HeatParams tail = p;
        tail.dt = rem;
        rho = heat_step(rho, grid, tail);
    }
    return rho;
}

// Fine-step kinetic reference: plain inner integration, usually at
// dt = eps^3. Refuses runs whose estimated step count exceeds the ceiling.
struct ReferenceOptions {
    double dt = 0.0;
    long long cost_ceiling = 100'000'000;
};

namespace detail {
inline void check_cost(double t_from, double t_end, const ReferenceOptions& opt) {
    if (!(opt.dt > 0.0)) throw ConfigError("reference dt must be positive");
    const double est = std::ceil((t_end - t_from) / opt.dt);
    if (est > static_cast<double>(opt.cost_ceiling))
        throw CostCeilingError(
            "reference run would take about " + std::to_string(static_cast<long long>(est)) +
                " steps, above the cost ceiling " + std::to_string(opt.cost_ceiling),
            static_cast<long long>(est));
}
} // namespace detail

template <class State>
State kinetic_reference(State s, const Grid& grid, const VelocitySpace& vs,
                        InnerParams inner, double t_end, const ReferenceOptions& opt) {
    double t0;
    if constexpr (std::is_same_v<State, KineticState>) t0 = s.t; else t0 = s.time();
    detail::check_cost(t0, t_end, opt);
    inner.dt = opt.dt;
    validate(inner, grid, vs);
    return run_inner_to(std::move(s), grid, vs, inner, t_end);
}

} // namespace kinproj
