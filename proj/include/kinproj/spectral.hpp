#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kinproj/grid.hpp"
#include "kinproj/inner_scheme.hpp"
#include "kinproj/velocity_space.hpp"

namespace kinproj {

using Complex = std::complex<double>;

struct SymbolParams {
    double eps = 0.0;
    double dt = 0.0;
    double dx = 0.0;
    FluxKind flux = FluxKind::Centered;
};

// Per-mode amplification matrix of the inner forward Euler step,
//   A(zeta) = (1 - dt/eps^2) I + i (dt/eps) V(zeta) + (dt/eps^2) P,
// with P the orthogonal projection onto the constant vector, i.e.
// A = diag(base_diag) + coupling * ones, coupling = dt/(2p eps^2).
struct AmplificationSymbol {
    double zeta = 0.0;
    SymbolParams params;
    int dim = 0;
    std::vector<Complex> base_diag;  // (1 - dt/eps^2) + i (dt/eps) V_kk(zeta)
    double coupling = 0.0;
    std::vector<Complex> matrix;     // row-major dim x dim

    Complex at(int r, int c) const { return matrix[static_cast<std::size_t>(r) * dim + c]; }
};

inline AmplificationSymbol symbol(double zeta, const VelocitySpace& vs, double eps,
                                  double dt, double dx, FluxKind flux) {
    if (!(eps > 0.0) || !(dt > 0.0) || !(dx > 0.0))
        throw std::invalid_argument("symbol: eps, dt, dx must be positive");
    AmplificationSymbol sym;
    sym.zeta = zeta;
    sym.params = {eps, dt, dx, flux};
    sym.dim = vs.size();
    const int n = sym.dim;
    sym.coupling = dt / (n * eps * eps);
    sym.base_diag.resize(static_cast<std::size_t>(n));
    const double relax = 1.0 - dt / (eps * eps);
    const double scale = dt / eps;
    const auto v = vs.velocities();
    if (flux == FluxKind::Centered) {
        const double s = std::sin(zeta) / dx;
        for (int k = 0; k < n; ++k)
            sym.base_diag[static_cast<std::size_t>(k)] =
                Complex(relax, scale * s * v[static_cast<std::size_t>(k)]);
    } else {
        const double s = 2.0 * std::sin(zeta / 2.0) / dx;
        const int half = n / 2;
        const Complex plus = std::polar(1.0, zeta / 2.0);
        const Complex minus = std::conj(plus);
        for (int k = 0; k < n; ++k) {
            const Complex phase = k < half ? plus : minus;
            // i * s * v_k * e^{± i zeta/2}
            sym.base_diag[static_cast<std::size_t>(k)] =
                relax + Complex(0.0, scale * s * v[static_cast<std::size_t>(k)]) * phase;
        }
    }
    sym.matrix.assign(static_cast<std::size_t>(n) * n, Complex(sym.coupling, 0.0));
    for (int k = 0; k < n; ++k)
        sym.matrix[static_cast<std::size_t>(k) * n + k] += sym.base_diag[static_cast<std::size_t>(k)];
    return sym;
}

struct ModeEigenvalues {
    std::vector<Complex> values;  // sorted: descending real part, then descending imag
    bool dense_fallback = false;
};

namespace detail {

inline void sort_eigenvalues(std::vector<Complex>& vals) {
    std::sort(vals.begin(), vals.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

// Roots of the rank-one secular equation  sum_g w_g / (lambda - d_g) = 1
// by Aberth-Ehrlich simultaneous iteration on chi = Q * (1 - S), evaluated
// through the structured form (no expanded polynomial coefficients).
// Assumes the poles d_g are pairwise distinct.
inline bool aberth_secular(std::span<const Complex> poles, std::span<const double> weights,
                           std::span<Complex> roots) {
    const std::size_t g = poles.size();
    const int max_iter = 200;
    for (int iter = 0; iter < max_iter; ++iter) {
        double worst = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            const Complex z = roots[k];
            Complex s{}, t{}, q{};  // S, S' magnitude part, Q'/Q
            for (std::size_t j = 0; j < g; ++j) {
                const Complex inv = 1.0 / (z - poles[j]);
                s += weights[j] * inv;
                t += weights[j] * inv * inv;
                q += inv;
            }
            const Complex one_minus_s = 1.0 - s;
            // d/dz log chi = Q'/Q + (1-S)'/(1-S), (1-S)' = T
            const Complex logderiv = q + t / one_minus_s;
            if (!std::isfinite(logderiv.real()) || !std::isfinite(logderiv.imag())) {
                roots[k] += 1e-8 * (1.0 + std::abs(z)) * Complex(1.0, 1.0);
                worst = 1.0;
                continue;
            }
            Complex newton = 1.0 / logderiv;
            Complex repulse{};
            for (std::size_t j = 0; j < g; ++j)
                if (j != k) repulse += 1.0 / (z - roots[j]);
            const Complex denom = 1.0 - newton * repulse;
            const Complex w = std::abs(denom) > 1e-300 ? newton / denom : newton;
            roots[k] = z - w;
            worst = std::max(worst, std::abs(w) / (1.0 + std::abs(z)));
        }
        if (worst <= 1e-14) return true;
    }
    return false;  // stalled; caller validates residuals before accepting
}

// Eigenvalues of diag(base) + c * ones via pole grouping plus the secular
// equation. Returns nothing when the result fails residual or trace checks;
// the caller then falls back to the dense solver.
inline std::optional<std::vector<Complex>> secular_eigenvalues(std::span<const Complex> base,
                                                               double c) {
    const std::size_t n = base.size();
    if (n == 0) return std::vector<Complex>{};
    double scale = 0.0;
    for (const Complex& a : base) scale = std::max(scale, std::abs(a));
    const double group_tol = 1e-13 * (1.0 + scale);

    // Group (near-)coincident poles; a pole of multiplicity m contributes the
    // pole itself m-1 times, and the secular equation gets weight m*c there.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (base[a].real() != base[b].real()) return base[a].real() < base[b].real();
        return base[a].imag() < base[b].imag();
    });
    std::vector<Complex> poles;
    std::vector<int> mult;
    for (std::size_t idx : order) {
        if (!poles.empty() && std::abs(base[idx] - poles.back()) <= group_tol)
            ++mult.back();
        else {
            poles.push_back(base[idx]);
            mult.push_back(1);
        }
    }
    const std::size_t groups = poles.size();

    std::vector<Complex> values;
    values.reserve(n);
    for (std::size_t gi = 0; gi < groups; ++gi)
        for (int r = 1; r < mult[gi]; ++r) values.push_back(poles[gi]);

    Complex trace{};
    for (const Complex& a : base) trace += a;
    trace += static_cast<double>(n) * c;

    if (groups == 1) {
        // sum m c / (lambda - d) = 1  =>  lambda = d + n c, exactly.
        values.push_back(poles[0] + static_cast<double>(n) * c);
    } else if (groups == 2) {
        // quadratic chi = (l-d1)(l-d2) - w1 (l-d2) - w2 (l-d1), solved with
        // the cancellation-safe root pairing
        const Complex d1 = poles[0], d2 = poles[1];
        const double w1 = mult[0] * c, w2 = mult[1] * c;
        const Complex b = -(d1 + d2 + w1 + w2);
        const Complex q = d1 * d2 + w1 * d2 + w2 * d1;
        Complex s = std::sqrt(b * b - 4.0 * q);
        if ((std::conj(b) * s).real() < 0.0) s = -s;
        const Complex r1 = -0.5 * (b + s);
        const Complex r2 = std::abs(r1) > 0.0 ? q / r1 : -0.5 * (b - s);
        values.push_back(r1);
        values.push_back(r2);
    } else {
        std::vector<double> weights(groups);
        for (std::size_t gi = 0; gi < groups; ++gi) weights[gi] = mult[gi] * c;

        // Residual acceptance: |1 - S(z)| relative to the magnitude of the
        // terms entering S. A stalled multiple root still has a tiny
        // residual, which is the best attainable conditioning there.
        const auto roots_ok = [&](const std::vector<Complex>& roots) {
            for (const Complex& z : roots) {
                Complex s{};
                double mag = 1.0;
                for (std::size_t gi = 0; gi < groups; ++gi) {
                    const Complex term = weights[gi] / (z - poles[gi]);
                    s += term;
                    mag += std::abs(term);
                }
                if (!(std::abs(1.0 - s) <= 1e-10 * mag)) return false;
            }
            return true;
        };

        Complex mean{};
        for (std::size_t gi = 0; gi < groups; ++gi)
            mean += static_cast<double>(mult[gi]) * poles[gi];
        mean /= static_cast<double>(n);

        // First attempt: midpoints between poles sorted along the imaginary
        // axis (the fast cluster interlaces them) plus one seed at the
        // outlier's zeroth-order location mean(d) + n c.
        std::vector<std::size_t> by_imag(groups);
        for (std::size_t i = 0; i < groups; ++i) by_imag[i] = i;
        std::sort(by_imag.begin(), by_imag.end(), [&](std::size_t a, std::size_t b) {
            if (poles[a].imag() != poles[b].imag()) return poles[a].imag() < poles[b].imag();
            return poles[a].real() < poles[b].real();
        });
        std::vector<Complex> roots(groups);
        for (std::size_t i = 0; i + 1 < groups; ++i)
            roots[i] = 0.5 * (poles[by_imag[i]] + poles[by_imag[i + 1]]) + c;
        roots[groups - 1] = mean + static_cast<double>(n) * c;
        for (std::size_t i = 0; i < groups; ++i)
            for (std::size_t gi = 0; gi < groups; ++gi)
                if (std::abs(roots[i] - poles[gi]) < 1e-12 * (1.0 + scale))
                    roots[i] += 1e-8 * (1.0 + scale) * Complex(1.0, 0.5);
        aberth_secular(poles, weights, roots);

        if (!roots_ok(roots)) {
            // Retry from a circle enclosing every pole and the outlier;
            // midpoint seeds go astray when the coupling is large against
            // the pole gaps.
            double reach = 0.0;
            for (const Complex& d : poles) reach = std::max(reach, std::abs(d - mean));
            const double radius = 1.5 * reach + static_cast<double>(n) * c + 1e-6 * (1.0 + scale);
            for (std::size_t i = 0; i < groups; ++i)
                roots[i] = mean + std::polar(radius, 2.0 * std::numbers::pi *
                                                         (static_cast<double>(i) + 0.17) /
                                                         static_cast<double>(groups));
            aberth_secular(poles, weights, roots);
            if (!roots_ok(roots)) return std::nullopt;
        }
        values.insert(values.end(), roots.begin(), roots.end());
    }

    Complex sum{};
    for (const Complex& v : values) sum += v;
    if (!(std::abs(sum - trace) <= 1e-11 * (1.0 + std::abs(trace)))) return std::nullopt;

    sort_eigenvalues(values);
    return values;
}

inline std::vector<Complex> dense_eigenvalues_impl(const AmplificationSymbol& sym) {
    const int n = sym.dim;
    Eigen::MatrixXcd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = sym.at(r, c);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dense eigensolver failed to converge");
    std::vector<Complex> vals(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) vals[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    sort_eigenvalues(vals);
    return vals;
}

} // namespace detail

// General-purpose dense route; primary use is as the independent oracle for
// the structured solver and as its runtime fallback.
inline std::vector<Complex> dense_eigenvalues(const AmplificationSymbol& sym) {
    return detail::dense_eigenvalues_impl(sym);
}

inline ModeEigenvalues eigenvalues(const AmplificationSymbol& sym) {
    ModeEigenvalues out;
    auto secular = detail::secular_eigenvalues(sym.base_diag, sym.coupling);
    if (secular) {
        out.values = std::move(*secular);
    } else {
        out.values = detail::dense_eigenvalues_impl(sym);
        out.dense_fallback = true;
    }
    return out;
}

// Fast-cluster disk of one symbol: center 1 - dt/eps^2, radius
// max_k (|Re tau_k| + |Im tau_k|) with tau the transport diagonal. All
// eigenvalues but one real outlier must land inside.
struct EnclosureCheck {
    bool ok = false;
    Complex center;
    double radius = 0.0;
    int outside_count = 0;
    Complex outlier;
    double outlier_imag = 0.0;
    double worst_inside_margin = 0.0;  // min over inside eigenvalues of radius - |λ - center|
};

inline EnclosureCheck verify_enclosures(const AmplificationSymbol& sym,
                                        std::span<const Complex> eigs) {
    constexpr double kMembershipTol = 1e-12;
    constexpr double kRealTol = 1e-10;
    EnclosureCheck chk;
    const double relax = 1.0 - sym.params.dt / (sym.params.eps * sym.params.eps);
    chk.center = Complex(relax, 0.0);
    double radius = 0.0;
    for (const Complex& a : sym.base_diag) {
        const Complex tau = a - relax;
        radius = std::max(radius, std::abs(tau.real()) + std::abs(tau.imag()));
    }
    chk.radius = radius;
    chk.worst_inside_margin = std::numeric_limits<double>::infinity();
    for (const Complex& ev : eigs) {
        const double dist = std::abs(ev - chk.center);
        if (dist > radius + kMembershipTol) {
            ++chk.outside_count;
            chk.outlier = ev;
        } else {
            chk.worst_inside_margin = std::min(chk.worst_inside_margin, radius + kMembershipTol - dist);
        }
    }
    chk.outlier_imag = chk.outside_count == 1 ? std::abs(chk.outlier.imag()) : 0.0;
    chk.ok = chk.outside_count == 1 && chk.outlier_imag <= kRealTol;
    return chk;
}

// One outer step multiplies an inner-scheme eigenmode by
// [(M+1) λ - M] λ^K with M = (Δt - (K+1) δt)/δt.
inline Complex outer_amplification(Complex lambda, double dt_inner, double dt_outer, int k) {
    if (k < 1) throw std::invalid_argument("outer_amplification: k must be >= 1");
    const double m = (dt_outer - (k + 1) * dt_inner) / dt_inner;
    Complex pow_k(1.0, 0.0);
    for (int i = 0; i < k; ++i) pow_k *= lambda;
    return ((m + 1.0) * lambda - m) * pow_k;
}

struct StabilityCheck {
    bool stable = false;
    double worst_zeta = 0.0;
    double worst_amplification = 0.0;
    Complex worst_lambda;
    bool any_dense_fallback = false;
};

namespace detail {

inline std::vector<double> grid_mode_zetas(int n_cells) {
    std::vector<double> zs(static_cast<std::size_t>(n_cells));
    for (int m = 0; m < n_cells; ++m)
        zs[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * m / n_cells;
    return zs;
}

inline StabilityCheck stability_from_eigenvalues(
    const std::vector<double>& zetas, const std::vector<std::vector<Complex>>& mode_eigs,
    double dt_inner, double dt_outer, int k) {
    StabilityCheck chk;
    chk.worst_amplification = -1.0;
    for (std::size_t m = 0; m < zetas.size(); ++m) {
        for (const Complex& ev : mode_eigs[m]) {
            const double amp = std::abs(outer_amplification(ev, dt_inner, dt_outer, k));
            if (amp > chk.worst_amplification) {
                chk.worst_amplification = amp;
                chk.worst_zeta = zetas[m];
                chk.worst_lambda = ev;
            }
        }
    }
    chk.stable = chk.worst_amplification <= 1.0 + 1e-12;
    return chk;
}

} // namespace detail

// Exact per-mode check over the discrete mode set zeta_m = 2 pi m / N_x.
inline StabilityCheck check_stability(const VelocitySpace& vs, const Grid& grid, double eps,
                                      double dt_inner, double dt_outer, int k, FluxKind flux) {
    const auto zetas = detail::grid_mode_zetas(grid.n_cells());
    std::vector<std::vector<Complex>> eigs;
    eigs.reserve(zetas.size());
    bool fallback = false;
    for (double z : zetas) {
        auto me = eigenvalues(symbol(z, vs, eps, dt_inner, grid.dx(), flux));
        fallback = fallback || me.dense_fallback;
        eigs.push_back(std::move(me.values));
    }
    auto chk = detail::stability_from_eigenvalues(zetas, eigs, dt_inner, dt_outer, k);
    chk.any_dense_fallback = fallback;
    return chk;
}

struct MinInnerSteps {
    std::optional<int> k;        // smallest K passing the exact check, if any
    double closed_form_bound = 0.0;  // sufficient-K bound from the limiting-disk analysis
};

// Closed-form sufficient bound, with r = eps/dx and nu = <v^2> dt_outer/dx^2:
//   K >= 2 / (1 + log(v_p)/log(r)) + log(<v^2>/nu) / log(r v_p).
inline double min_inner_steps_bound(const VelocitySpace& vs, double eps, double dx,
                                    double dt_outer) {
    const double r = eps / dx;
    const double nu = vs.second_moment() * dt_outer / (dx * dx);
    const double lr = std::log(r);
    const double lrv = std::log(r * vs.v_max());
    if (!(lr < 0.0) || !(lrv < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 / (1.0 + std::log(vs.v_max()) / lr) + std::log(vs.second_moment() / nu) / lrv;
}

inline MinInnerSteps min_inner_steps(const VelocitySpace& vs, const Grid& grid, double eps,
                                     double dt_inner, double dt_outer, FluxKind flux,
                                     int k_max = 64) {
    if (k_max < 1) throw std::invalid_argument("min_inner_steps: k_max must be >= 1");
    MinInnerSteps out;
    out.closed_form_bound = min_inner_steps_bound(vs, eps, grid.dx(), dt_outer);
    const auto zetas = detail::grid_mode_zetas(grid.n_cells());
    std::vector<std::vector<Complex>> eigs;
    eigs.reserve(zetas.size());
    for (double z : zetas)
        eigs.push_back(eigenvalues(symbol(z, vs, eps, dt_inner, grid.dx(), flux)).values);
    for (int k = 1; k <= k_max; ++k) {
        if (dt_outer < (k + 1) * dt_inner * (1.0 - 1e-12)) break;  // no extrapolation room left
        if (detail::stability_from_eigenvalues(zetas, eigs, dt_inner, dt_outer, k).stable) {
            out.k = k;
            return out;
        }
    }
    return out;
}

// Aggregate per-mode data for CSV emission and the CLI.
struct ModeReport {
    double zeta = 0.0;
    std::vector<Complex> eigenvalues;
    Complex dominant;       // largest real part
    bool enclosure_ok = false;
    bool dense_fallback = false;
};

struct DiskSpec {
    std::string name;
    Complex center;
    double radius = 0.0;
};

struct SpectralReport {
    std::vector<ModeReport> modes;
    std::vector<DiskSpec> disks;
    std::optional<bool> stable;
    std::optional<int> min_k;
};

// zeta_samples == 0 scans the grid's discrete modes; > 0 scans a uniform
// continuum sample of [0, 2pi) with that many points (plotting aid).
inline SpectralReport analyze_spectrum(const VelocitySpace& vs, const Grid& grid, double eps,
                                       double dt, FluxKind flux, int zeta_samples = 0,
                                       std::optional<double> dt_outer = std::nullopt,
                                       std::optional<int> k = std::nullopt) {
    SpectralReport rep;
    std::vector<double> zetas;
    if (zeta_samples > 0) {
        zetas.resize(static_cast<std::size_t>(zeta_samples));
        for (int m = 0; m < zeta_samples; ++m)
            zetas[static_cast<std::size_t>(m)] = 2.0 * std::numbers::pi * m / zeta_samples;
    } else {
        zetas = detail::grid_mode_zetas(grid.n_cells());
    }
    double fast_radius = 0.0;
    for (double z : zetas) {
        auto sym = symbol(z, vs, eps, dt, grid.dx(), flux);
        auto me = eigenvalues(sym);
        auto enc = verify_enclosures(sym, me.values);
        fast_radius = std::max(fast_radius, enc.radius);
        ModeReport mr;
        mr.zeta = z;
        mr.dominant = me.values.front();
        mr.eigenvalues = std::move(me.values);
        mr.enclosure_ok = enc.ok;
        mr.dense_fallback = me.dense_fallback;
        rep.modes.push_back(std::move(mr));
    }
    const double relax = 1.0 - dt / (eps * eps);
    rep.disks.push_back({"fast", Complex(relax, 0.0), fast_radius});
    if (dt_outer && k) {
        rep.disks.push_back({"slow_pi", Complex(1.0 - dt / *dt_outer, 0.0), dt / *dt_outer});
        rep.disks.push_back({"fast_pi", Complex(0.0, 0.0), std::pow(dt / *dt_outer, 1.0 / *k)});
        std::vector<std::vector<Complex>> eigs;
        eigs.reserve(rep.modes.size());
        for (const auto& m : rep.modes) eigs.push_back(m.eigenvalues);
        rep.stable = detail::stability_from_eigenvalues(zetas, eigs, dt, *dt_outer, *k).stable;
    }
    return rep;
}

} // namespace kinproj
