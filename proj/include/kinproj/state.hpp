#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinproj/grid.hpp"
#include "kinproj/velocity_space.hpp"

namespace kinproj {

// Cell-averaged distribution values f_{i,j} (row-major: cell i, velocity j)
// plus the current time. Value-semantic; moves freely between threads.
struct KineticState {
    int n_cells = 0;
    int n_velocities = 0;
    double t = 0.0;
    std::vector<double> f;

    KineticState() = default;
    KineticState(int cells, int velocities, double value = 0.0)
        : n_cells(cells),
          n_velocities(velocities),
          f(static_cast<std::size_t>(cells) * static_cast<std::size_t>(velocities), value) {}

    double& operator()(int i, int j) {
        return f[static_cast<std::size_t>(i) * n_velocities + j];
    }
    double operator()(int i, int j) const {
        return f[static_cast<std::size_t>(i) * n_velocities + j];
    }
    std::span<double> row(int i) {
        return {f.data() + static_cast<std::size_t>(i) * n_velocities,
                static_cast<std::size_t>(n_velocities)};
    }
    std::span<const double> row(int i) const {
        return {f.data() + static_cast<std::size_t>(i) * n_velocities,
                static_cast<std::size_t>(n_velocities)};
    }
};

// Su-Olson state: distribution plus the material temperature field Θ = T^4.
// Time lives on the kinetic part.
struct SuOlsonState {
    KineticState kinetic;
    std::vector<double> theta;

    double time() const { return kinetic.t; }
};

inline bool all_finite(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += std::abs(x);
    return std::isfinite(s);
}

inline bool all_finite(const KineticState& s) { return all_finite(std::span<const double>(s.f)); }

inline bool all_finite(const SuOlsonState& s) {
    return all_finite(s.kinetic) && all_finite(std::span<const double>(s.theta));
}

// rho_i = <f_i> over velocities (uniform weight 1/(2p)).
inline std::vector<double> density(const KineticState& s) {
    std::vector<double> rho(static_cast<std::size_t>(s.n_cells));
    const double w = 1.0 / s.n_velocities;
    for (int i = 0; i < s.n_cells; ++i) {
        double acc = 0.0;
        for (double x : s.row(i)) acc += x;
        rho[static_cast<std::size_t>(i)] = w * acc;
    }
    return rho;
}

// J_i = (1/eps) <v f_i>.
inline std::vector<double> flux(const KineticState& s, const VelocitySpace& vs, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("flux: eps must be positive");
    if (vs.size() != s.n_velocities)
        throw std::invalid_argument("flux: state and velocity space disagree on 2p");
    std::vector<double> j(static_cast<std::size_t>(s.n_cells));
    const double w = vs.weight() / eps;
    const auto v = vs.velocities();
    for (int i = 0; i < s.n_cells; ++i) {
        const auto fi = s.row(i);
        double acc = 0.0;
        for (int k = 0; k < s.n_velocities; ++k) acc += v[static_cast<std::size_t>(k)] * fi[static_cast<std::size_t>(k)];
        j[static_cast<std::size_t>(i)] = w * acc;
    }
    return j;
}

namespace detail {
// Fraction of cell [a,b] covered by [lo,hi].
inline double overlap_fraction(double a, double b, double lo, double hi) {
    const double cut = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    return cut / (b - a);
}
} // namespace detail

// Benchmark datum: f = 2 on {-0.5 <= x <= 0.5} x {-0.75 <= v <= 0.25}, else 1.
// Cells are assigned exact sub-interval averages of the piecewise-constant
// datum; the velocity condition is pointwise at each discrete v_j.
inline KineticState init_linear_benchmark(const Grid& grid, const VelocitySpace& vs) {
    if (grid.x_left() > -1.0 + 1e-12 || grid.x_right() < 1.0 - 1e-12)
        throw std::invalid_argument("benchmark initial condition expects the grid to cover [-1,1]");
    KineticState s(grid.n_cells(), vs.size());
    const auto v = vs.velocities();
    for (int i = 0; i < grid.n_cells(); ++i) {
        const double frac =
            detail::overlap_fraction(grid.left_edge(i), grid.right_edge(i), -0.5, 0.5);
        auto fi = s.row(i);
        for (int k = 0; k < vs.size(); ++k) {
            const bool in_v = v[static_cast<std::size_t>(k)] >= -0.75 && v[static_cast<std::size_t>(k)] <= 0.25;
            fi[static_cast<std::size_t>(k)] = 1.0 + (in_v ? frac : 0.0);
        }
    }
    return s;
}

// Flat initial data f = Θ = a.
inline SuOlsonState init_suolson(const Grid& grid, const VelocitySpace& vs, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("init_suolson: a must be positive");
    SuOlsonState s;
    s.kinetic = KineticState(grid.n_cells(), vs.size(), a);
    s.theta.assign(static_cast<std::size_t>(grid.n_cells()), a);
    return s;
}

} // namespace kinproj
