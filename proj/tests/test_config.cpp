#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "kinproj/config.hpp"

using namespace kinproj;

namespace {
RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    RunConfig cfg = parse_config(in);
    validate(cfg);
    return cfg;
}
} // namespace

TEST_CASE("minimal linear config with defaults") {
    const auto cfg = parse(
        "model = linear\n"
        "p = 10\n"
        "eps = 0.05\n"
        "n_cells = 20\n"
        "t_end = 2.5\n");
    CHECK(cfg.model == Model::Linear);
    CHECK(cfg.p == 10);
    CHECK(cfg.x_left == -1.0);
    CHECK(cfg.x_right == 1.0);
    CHECK(config_dx(cfg) == Catch::Approx(0.1).margin(1e-15));
    CHECK(cfg.flux == FluxKind::Centered);
    CHECK(cfg.mode == RunMode::Projective);
    CHECK(cfg.dt_policy == DtPolicy::EpsSquared);
    CHECK(config_dt_inner(cfg) == Catch::Approx(0.0025).margin(1e-18));
    CHECK_FALSE(cfg.k_inner.has_value());
    REQUIRE(cfg.snapshot_times.size() == 1);
    CHECK(cfg.snapshot_times[0] == 2.5);
    CHECK(cfg.workers == 1);
}

TEST_CASE("comparison config honors the explicit K") {
    const auto cfg = parse(
        "# solution comparison, eps = 0.05, dx = 0.1\n"
        "model = linear\n"
        "p = 10\n"
        "eps = 0.05\n"
        "x_left = -1\n"
        "x_right = 1\n"
        "n_cells = 20\n"
        "nu = 1\n"
        "k_inner = 4\n"
        "t_end = 2.5\n"
        "mode = compare\n");
    REQUIRE(cfg.k_inner.has_value());
    CHECK(*cfg.k_inner == 4);
    CHECK(cfg.nu == 1.0);
    CHECK(cfg.mode == RunMode::Compare);
}

TEST_CASE("parse errors carry line numbers and name the rule") {
    SECTION("negative eps") {
        std::istringstream in("p = 10\neps = -1\nn_cells = 20\n");
        auto cfg = parse_config(in);
        try {
            validate(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("eps must be positive") != std::string::npos);
        }
    }
    SECTION("unknown key") {
        try {
            parse("p = 10\nepsilon = 0.1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
        }
    }
    SECTION("duplicate key") {
        try {
            parse("p = 10\np = 11\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 2);
        }
    }
    SECTION("malformed number") {
        try {
            parse("p = 10\neps = fast\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 2);
        }
    }
    SECTION("mesh too fine for eps with centered flux at dt = eps^2") {
        try {
            parse("p = 10\neps = 0.1\nn_cells = 40\nt_end = 1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("v_max*eps") != std::string::npos);
        }
    }
    SECTION("eps below the degenerate-precision floor") {
        CHECK_THROWS_AS(parse("p = 10\neps = 1e-9\nn_cells = 20\nt_end = 1\n"), ConfigError);
    }
}

TEST_CASE("dt_inner policies") {
    auto cfg = parse("p = 10\neps = 0.05\nn_cells = 20\nt_end = 1\ndt_inner = eps3\n");
    CHECK(cfg.dt_policy == DtPolicy::EpsCubed);
    CHECK(config_dt_inner(cfg) == Catch::Approx(1.25e-4).margin(1e-18));

    cfg = parse("p = 10\neps = 0.05\nn_cells = 20\nt_end = 1\ndt_inner = 0.001\n");
    CHECK(cfg.dt_policy == DtPolicy::Explicit);
    CHECK(config_dt_inner(cfg) == 0.001);

    // reference mode defaults to eps^3 when no policy is given
    cfg = parse("p = 10\neps = 0.05\nn_cells = 20\nt_end = 1\nmode = reference\n");
    CHECK(cfg.dt_policy == DtPolicy::EpsCubed);

    // the 2 eps^2 ceiling applies to explicit values
    CHECK_THROWS_AS(parse("p = 10\neps = 0.05\nn_cells = 20\nt_end = 1\ndt_inner = 0.01\n"),
                    ConfigError);
}

TEST_CASE("su-olson source specifications") {
    const Grid grid(-1.0, 30.0, 310, BoundaryCondition::NeumannHomogeneous);

    SECTION("default unit box on [-1/2, 1/2]") {
        SourceSpec spec;
        const auto s = build_source(spec, grid);
        int on = 0;
        for (double x : s) on += x == 1.0 ? 1 : 0;
        CHECK(on == 10);
        CHECK(s[0] == 0.0);
    }
    SECTION("source = none") {
        const auto cfg = parse(
            "model = suolson\np = 10\neps = 0.05\nx_left = -1\nx_right = 30\n"
            "n_cells = 310\nbc = neumann\nt_end = 1\nsource = none\n");
        const auto s = build_source(cfg.source, grid);
        for (double x : s) REQUIRE(x == 0.0);
    }
    SECTION("box source") {
        const auto cfg = parse(
            "model = suolson\np = 10\neps = 0.05\nx_left = -1\nx_right = 30\n"
            "n_cells = 310\nbc = neumann\nt_end = 1\nsource = box:2.5:0:1\n");
        const auto s = build_source(cfg.source, grid);
        double total = 0.0;
        for (double x : s) total += x;
        CHECK(total == Catch::Approx(2.5 * 10).margin(1e-12));
    }
    SECTION("malformed source string") {
        CHECK_THROWS_AS(parse("model = suolson\np = 10\neps = 0.05\nn_cells = 20\n"
                              "t_end = 1\nsource = ramp\n"),
                        ConfigError);
    }
}

TEST_CASE("list-valued keys") {
    const auto cfg = parse(
        "model = linear\np = 10\neps = 5e-3\nn_cells = 20\nt_end = 1.25\n"
        "sweep = nu\nnu_values = 0.125, 0.25, 0.5, 1\nerror_times = 1.25\n"
        "k_inner = 3\nref_dt = eps2\n");
    REQUIRE(cfg.nu_values.size() == 4);
    CHECK(cfg.nu_values[3] == 1.0);
    CHECK(cfg.ref_dt == "eps2");

    CHECK_THROWS_AS(parse("p = 10\neps = 0.05\nn_cells = 20\nt_end = 1\nsweep = nu\n"),
                    ConfigError);
}
