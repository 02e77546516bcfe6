#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "kinproj/diagnostics.hpp"
#include "kinproj/inner_scheme.hpp"
#include "kinproj/spectral.hpp"
#include "support/test_utils.hpp"

using namespace kinproj;
using testutil::mode_coefficients;

namespace {

KineticState random_state(const Grid& grid, const VelocitySpace& vs, std::uint64_t seed) {
    KineticState s(grid.n_cells(), vs.size());
    auto gen = testutil::rng(seed);
    std::uniform_real_distribution<double> dist(0.2, 2.0);
    for (auto& x : s.f) x = dist(gen);
    return s;
}

double total_mass(const KineticState& s) {
    double m = 0.0;
    for (double x : s.f) m += x;
    return m;
}

} // namespace

TEST_CASE("phi on constant and linear profiles") {
    const auto vs = VelocitySpace::build(4);
    const Grid grid(-1.0, 1.0, 16, BoundaryCondition::Periodic);

    SECTION("constant in x vanishes for both flux kinds") {
        KineticState s(16, 8, 2.5);
        for (double v : phi(s, grid, vs, FluxKind::Centered)) REQUIRE(std::abs(v) <= 1e-15);
        for (double v : phi(s, grid, vs, FluxKind::Upwind)) REQUIRE(std::abs(v) <= 1e-15);
    }
    SECTION("centered differentiates a linear profile exactly at interior cells") {
        KineticState s(16, 8);
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 8; ++j) s(i, j) = grid.center(i);
        const auto out = phi(s, grid, vs, FluxKind::Centered);
        for (int i = 1; i < 15; ++i)
            for (int j = 0; j < 8; ++j)
                REQUIRE(out[static_cast<std::size_t>(i) * 8 + j] ==
                        Catch::Approx(vs.velocity(j)).margin(1e-13));
    }
}

TEST_CASE("phi matches the transport symbol on Fourier modes") {
    const auto vs = VelocitySpace::build(3);
    const Grid grid(-1.0, 1.0, 16, BoundaryCondition::Periodic);
    const double eps = 0.1, dt = eps * eps;

    for (FluxKind flux : {FluxKind::Centered, FluxKind::Upwind}) {
        KineticState s = random_state(grid, vs, 42);
        KineticState out(16, 6);
        out.f = phi(s, grid, vs, flux);
        for (int m = 0; m < 16; ++m) {
            const double zeta = 2.0 * std::numbers::pi * m / 16.0;
            const auto sym = symbol(zeta, vs, eps, dt, grid.dx(), flux);
            const double relax = 1.0 - dt / (eps * eps);
            const auto fin = mode_coefficients(s, m);
            const auto fout = mode_coefficients(out, m);
            for (int j = 0; j < 6; ++j) {
                // A carries the transport as +i (dt/eps) V, so phi itself acts
                // as -(eps/dt) * (base_diag - relax) on each mode.
                const auto tau = sym.base_diag[static_cast<std::size_t>(j)] - relax;
                const auto expected = -(eps / dt) * tau * fin[static_cast<std::size_t>(j)];
                REQUIRE(std::abs(fout[static_cast<std::size_t>(j)] - expected) <= 1e-12);
            }
        }
    }
}

TEST_CASE("step_linear basics") {
    const auto vs = VelocitySpace::build(10);
    const Grid grid(-1.0, 1.0, 20, BoundaryCondition::Periodic);
    InnerParams p;
    p.eps = 0.05;
    p.dt = p.eps * p.eps;
    p.flux = FluxKind::Centered;
    validate(p, grid, vs);

    SECTION("constant states are fixed points") {
        KineticState s(20, 20, 1.3);
        const auto out = step_linear(s, grid, vs, p);
        for (double x : out.f) REQUIRE(x == Catch::Approx(1.3).margin(1e-15));
        REQUIRE(out.t == Catch::Approx(p.dt));
    }
    SECTION("dt = eps^2 relaxes x-constant data to its density in one step") {
        KineticState s(20, 20);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) s(i, j) = 1.0 + 0.25 * vs.velocity(j);
        const auto rho = density(s);
        const auto out = step_linear(s, grid, vs, p);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j)
                REQUIRE(out(i, j) == Catch::Approx(rho[static_cast<std::size_t>(i)]).margin(1e-14));
    }
    SECTION("equilibrium states f = rho constant in x are fixed points") {
        KineticState s(20, 20, 0.8);
        auto out = step_linear(s, grid, vs, p);
        out = step_linear(out, grid, vs, p);
        for (double x : out.f) REQUIRE(x == Catch::Approx(0.8).margin(1e-15));
    }
}

TEST_CASE("step_linear acts mode-by-mode as the amplification symbol") {
    const auto vs = VelocitySpace::build(3);
    const Grid grid(-1.0, 1.0, 16, BoundaryCondition::Periodic);
    for (FluxKind flux : {FluxKind::Centered, FluxKind::Upwind}) {
        InnerParams p;
        p.eps = 0.08;
        p.dt = 0.7 * p.eps * p.eps;
        p.flux = flux;
        const KineticState s = random_state(grid, vs, 7);
        const auto out = step_linear(s, grid, vs, p);
        for (int m = 0; m < 16; ++m) {
            const double zeta = 2.0 * std::numbers::pi * m / 16.0;
            const auto sym = symbol(zeta, vs, p.eps, p.dt, grid.dx(), flux);
            const auto fin = mode_coefficients(s, m);
            const auto fout = mode_coefficients(out, m);
            for (int r = 0; r < 6; ++r) {
                std::complex<double> expected{};
                for (int c = 0; c < 6; ++c) expected += sym.at(r, c) * fin[static_cast<std::size_t>(c)];
                REQUIRE(std::abs(fout[static_cast<std::size_t>(r)] - expected) <= 1e-12);
            }
        }
    }
}

TEST_CASE("step_linear is linear in the state") {
    const auto vs = VelocitySpace::build(4);
    const Grid grid(-1.0, 1.0, 12, BoundaryCondition::Periodic);
    InnerParams p;
    p.eps = 0.1;
    p.dt = 0.5 * p.eps * p.eps;
    const auto a = random_state(grid, vs, 11);
    const auto b = random_state(grid, vs, 12);
    KineticState combo(12, 8);
    const double ca = 0.6, cb = -1.2;
    for (std::size_t i = 0; i < combo.f.size(); ++i) combo.f[i] = ca * a.f[i] + cb * b.f[i];
    const auto sa = step_linear(a, grid, vs, p);
    const auto sb = step_linear(b, grid, vs, p);
    const auto sc = step_linear(combo, grid, vs, p);
    for (std::size_t i = 0; i < sc.f.size(); ++i)
        REQUIRE(sc.f[i] == Catch::Approx(ca * sa.f[i] + cb * sb.f[i]).margin(1e-13));
}

TEST_CASE("inner params validation") {
    const auto vs = VelocitySpace::build(10);
    const Grid grid(-1.0, 1.0, 20, BoundaryCondition::Periodic);
    InnerParams p;
    p.eps = 0.05;
    p.dt = 3.0 * p.eps * p.eps;  // above the 2 eps^2 ceiling
    CHECK_THROWS_AS(validate(p, grid, vs), ConfigError);

    p.dt = p.eps * p.eps;
    const Grid fine(-1.0, 1.0, 100, BoundaryCondition::Periodic);  // dx = 0.02 < v_max*eps
    p.eps = 0.1;
    p.dt = p.eps * p.eps;
    CHECK_THROWS_AS(validate(p, fine, vs), ConfigError);
    CHECK_NOTHROW([&] {
        InnerParams q;
        q.eps = 0.1;
        q.dt = q.eps * q.eps;
        q.flux = FluxKind::Upwind;  // mesh bound applies to the centered flux
        validate(q, fine, vs);
    }());
}

TEST_CASE("step_suolson") {
    const auto vs = VelocitySpace::build(10);
    const Grid grid(-1.0, 3.0, 40, BoundaryCondition::NeumannHomogeneous);
    InnerParams p;
    p.eps = 0.05;
    p.dt = p.eps * p.eps;
    p.sigma_a = 1.0;

    SECTION("global equilibrium is a fixed point when S = 0") {
        auto s = init_suolson(grid, vs, 1.0);
        const auto out = step_suolson(s, grid, vs, p);
        for (double x : out.kinetic.f) REQUIRE(x == Catch::Approx(1.0).margin(1e-15));
        for (double x : out.theta) REQUIRE(x == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("sigma_a = 0 and S = 0 reduces to the linear step with frozen theta") {
        InnerParams q = p;
        q.sigma_a = 0.0;
        SuOlsonState s;
        s.kinetic = random_state(grid, vs, 5);
        s.theta.assign(40, 0.7);
        const auto out = step_suolson(s, grid, vs, q);
        const auto lin = step_linear(s.kinetic, grid, vs, q);
        for (std::size_t i = 0; i < lin.f.size(); ++i)
            REQUIRE(out.kinetic.f[i] == Catch::Approx(lin.f[i]).margin(1e-15));
        for (double th : out.theta) REQUIRE(th == 0.7);
    }
    SECTION("one step from flat data with an indicator source") {
        InnerParams q = p;
        q.source.assign(40, 0.0);
        for (int i = 0; i < 40; ++i)
            if (std::abs(grid.center(i)) <= 0.5) q.source[static_cast<std::size_t>(i)] = 1.0;
        const auto s = init_suolson(grid, vs, 1.0);
        const auto out = step_suolson(s, grid, vs, q);
        const auto rho = density(out.kinetic);
        for (int i = 0; i < 40; ++i) {
            REQUIRE(rho[static_cast<std::size_t>(i)] ==
                    Catch::Approx(1.0 + q.dt * q.source[static_cast<std::size_t>(i)]).margin(1e-15));
            REQUIRE(out.theta[static_cast<std::size_t>(i)] == Catch::Approx(1.0).margin(1e-15));
        }
    }
}

TEST_CASE("run_inner") {
    const auto vs = VelocitySpace::build(10);
    const Grid grid(-1.0, 1.0, 20, BoundaryCondition::Periodic);
    InnerParams p;
    p.eps = 0.05;
    p.dt = p.eps * p.eps;

    SECTION("zero steps is the identity") {
        const auto s = init_linear_benchmark(grid, vs);
        const auto out = run_inner(s, grid, vs, p, 0);
        REQUIRE(out.f == s.f);
        REQUIRE(out.t == s.t);
    }
    SECTION("two steps equal step-of-step") {
        const auto s = init_linear_benchmark(grid, vs);
        const auto out = run_inner(s, grid, vs, p, 2);
        const auto manual = step_linear(step_linear(s, grid, vs, p), grid, vs, p);
        REQUIRE(out.f == manual.f);
    }
    SECTION("negative step count rejected") {
        CHECK_THROWS_AS(run_inner(KineticState(20, 20, 1.0), grid, vs, p, -1),
                        std::invalid_argument);
    }
    SECTION("mass is conserved to t = 2.5 on the benchmark") {
        auto s = init_linear_benchmark(grid, vs);
        const double m0 = total_mass(s);
        s = run_inner_to(std::move(s), grid, vs, p, 2.5);
        REQUIRE(s.t == 2.5);
        REQUIRE(std::abs(total_mass(s) - m0) <= 1e-12 * std::abs(m0));
    }
    SECTION("run_inner_to lands exactly on a non-multiple t_end") {
        auto s = init_linear_benchmark(grid, vs);
        s = run_inner_to(std::move(s), grid, vs, p, 0.01001);
        REQUIRE(s.t == 0.01001);
        REQUIRE(all_finite(s));
    }
}

TEST_CASE("neumann walls are flux-tight and do not trap the boundary cell") {
    const auto vs = VelocitySpace::build(10);
    const Grid grid(-1.0, 3.0, 40, BoundaryCondition::NeumannHomogeneous);
    InnerParams p;
    p.eps = 0.05;
    p.dt = p.eps * p.eps;

    SECTION("mass conserved without source or absorption") {
        KineticState s(40, 20);
        auto gen = testutil::rng(314);
        std::uniform_real_distribution<double> dist(0.5, 1.5);
        for (auto& x : s.f) x = dist(gen);
        double m0 = 0.0;
        for (double x : s.f) m0 += x;
        s = run_inner(std::move(s), grid, vs, p, 500);
        double m1 = 0.0;
        for (double x : s.f) m1 += x;
        REQUIRE(std::abs(m1 - m0) <= 1e-12 * std::abs(m0));
    }
    SECTION("a source-driven wave fills the wall cell") {
        InnerParams q = p;
        q.sigma_a = 1.0;
        q.source.assign(40, 0.0);
        for (int i = 0; i < 40; ++i)
            if (std::abs(grid.center(i)) <= 0.5) q.source[static_cast<std::size_t>(i)] = 1.0;
        auto s = init_suolson(grid, vs, 1e-10);
        s = run_inner_to(std::move(s), grid, vs, q, 1.0);
        const auto rho = density(s.kinetic);
        // the wall cell tracks its neighbor instead of freezing at 1e-10
        REQUIRE(rho[0] > 0.05);
        REQUIRE(std::abs(rho[0] - rho[1]) <= 0.25 * rho[1]);
    }
}

TEST_CASE("divergence is detected and reports the step index") {
    const auto vs = VelocitySpace::build(2);
    const Grid grid(-1.0, 1.0, 8, BoundaryCondition::Periodic);
    InnerParams p;
    p.eps = 0.05;
    p.dt = p.eps * p.eps;
    KineticState s(8, 4, 1.0);
    s(3, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        run_inner(s, grid, vs, p, 5);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.step() == 0);
    }
}

TEST_CASE("dt = eps^2 recovers the first two expansion terms from smooth data") {
    const Grid grid(-1.0, 1.0, 20, BoundaryCondition::Periodic);
    const auto vs = VelocitySpace::build(10);
    // residual/eps^2 stays below a common constant across eps
    for (double eps : {0.05, 0.02, 0.01}) {
        InnerParams p;
        p.eps = eps;
        p.dt = eps * eps;
        auto s = testutil::smooth_state(grid, vs);
        s = run_inner(std::move(s), grid, vs, p, 3);
        const double ratio = hilbert_residual(s, vs, grid, eps) / (eps * eps);
        CAPTURE(eps, ratio);
        REQUIRE(ratio <= 5.0);
    }
}
