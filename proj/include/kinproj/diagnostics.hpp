#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinproj/grid.hpp"
#include "kinproj/inner_scheme.hpp"
#include "kinproj/state.hpp"
#include "kinproj/velocity_space.hpp"

namespace kinproj {

struct ErrorRecord {
    std::string label;
    double eps = 0.0;
    double dx = 0.0;
    double dt_outer = 0.0;
    double t = 0.0;
    double err_rho = 0.0;
    double err_flux = 0.0;
};

// Discrete L2 distance sqrt(dx * sum (a_i - b_i)^2).
inline double l2_error(std::span<const double> a, std::span<const double> b, double dx) {
    if (a.size() != b.size())
        throw std::invalid_argument("l2_error: length mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(dx * acc);
}

// Least-squares slope of log(y) against log(x); both must be positive.
inline double slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("slope: need >= 2 aligned points");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("slope: all values must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    if (den == 0.0) throw std::invalid_argument("slope: xs are all equal");
    return num / den;
}

// min_i (v_max rho_i - eps |J_i|); nonnegative means the limited-flux bound
// eps|J| <= ||v||_inf rho holds everywhere.
inline double limited_flux_margin(const KineticState& s, const VelocitySpace& vs, double eps) {
    const auto rho = density(s);
    const auto j = flux(s, vs, eps);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rho.size(); ++i)
        margin = std::min(margin, vs.v_max() * rho[i] - eps * std::abs(j[i]));
    return margin;
}

// Distance of f from the first two terms of its small-eps expansion,
// rho - eps Phi(rho): the weighted L2 norm of f - rho + eps Phi(rho), where
// Phi applies the centered operator to the velocity-independent state.
inline double hilbert_residual(const KineticState& s, const VelocitySpace& vs,
                               const Grid& grid, double eps) {
    const auto rho = density(s);
    KineticState eq(s.n_cells, s.n_velocities);
    for (int i = 0; i < s.n_cells; ++i) {
        auto row = eq.row(i);
        for (double& x : row) x = rho[static_cast<std::size_t>(i)];
    }
    const auto correction = phi(eq, grid, vs, FluxKind::Centered);
    double acc = 0.0;
    for (int i = 0; i < s.n_cells; ++i)
        for (int k = 0; k < s.n_velocities; ++k) {
            const std::size_t idx = static_cast<std::size_t>(i) * s.n_velocities + k;
            const double r = s.f[idx] - rho[static_cast<std::size_t>(i)] + eps * correction[idx];
            acc += r * r;
        }
    return std::sqrt(grid.dx() / s.n_velocities * acc);
}

} // namespace kinproj
