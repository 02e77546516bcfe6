#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kinproj/csv.hpp"
#include "kinproj/experiments.hpp"
#include "support/test_utils.hpp"

using namespace kinproj;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("kinproj_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("floats round-trip through the 17-digit format") {
    auto gen = testutil::rng(2718);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        const double x = dist(gen) * std::pow(10.0, (i % 13) - 6);
        const std::string s = format_float(x);
        REQUIRE(std::strtod(s.c_str(), nullptr) == x);
        REQUIRE(s.find(',') == std::string::npos);
    }
}

TEST_CASE("csv headers match the interface schemas") {
    const Grid grid(-1.0, 1.0, 4, BoundaryCondition::Periodic);
    std::vector<double> rho{1, 2, 3, 4}, j{0, 0, 0, 0}, theta{5, 6, 7, 8};
    CHECK(snapshot_csv(grid, rho, j).rfind("x,rho,J\n", 0) == 0);
    CHECK(snapshot_csv(grid, rho, j, theta).rfind("x,rho,J,theta\n", 0) == 0);

    const auto vs = VelocitySpace::build(2);
    KineticState s(4, 4, 1.0);
    CHECK(distribution_csv(grid, vs, s).rfind("x,v,f\n", 0) == 0);

    std::vector<StabilityRow> rows{{1, false, 0.5, 2.0}};
    CHECK(stability_csv(rows).rfind("K,stable,worst_zeta,worst_amplification\n", 0) == 0);

    std::vector<ErrorRecord> recs{{"inner_vs_eps3", 0.05, 0.1, 0.0, 1.25, 1e-3, 2e-3}};
    CHECK(errors_csv(recs).rfind("label,eps,dx,dt_outer,t,err_rho,err_flux\n", 0) == 0);

    const auto rep = analyze_spectrum(vs, grid, 0.1, 0.01, FluxKind::Centered);
    CHECK(spectrum_csv(rep).rfind("zeta,re,im,is_dominant\n", 0) == 0);
    CHECK(disks_csv(rep).rfind("name,center_re,center_im,radius\n", 0) == 0);
    // one row per eigenvalue per mode
    const auto body = spectrum_csv(rep);
    CHECK(std::count(body.begin(), body.end(), '\n') == 1 + 4 * 4);
}

TEST_CASE("atomic writes leave no temp files behind") {
    const auto dir = fresh_dir("atomic");
    write_file_atomic(dir / "a.csv", "x\n1\n");
    CHECK(read_file(dir / "a.csv") == "x\n1\n");
    CHECK_FALSE(fs::exists(dir / "a.csv.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("stability driver writes the pinned schema and verdicts") {
    RunConfig cfg;
    cfg.model = Model::Linear;
    cfg.p = 10;
    cfg.eps = 1e-2;
    cfg.x_left = -1.0;
    cfg.x_right = 1.0;
    cfg.n_cells = 40;
    cfg.nu = 2.0;
    cfg.k_values = {1, 2, 3};
    const auto dir = fresh_dir("stability");
    cfg.output_dir = dir.string();
    validate(cfg);
    cmd_stability(cfg);

    const auto table = read_file(dir / "stability.csv");
    CHECK(table.rfind("K,stable,worst_zeta,worst_amplification\n", 0) == 0);
    CHECK(table.find("\n1,0,") != std::string::npos);
    CHECK(table.find("\n2,0,") != std::string::npos);
    CHECK(table.find("\n3,1,") != std::string::npos);

    const auto advice = read_file(dir / "advice.csv");
    CHECK(advice.rfind("eps,dx,p,dt_inner,dt_outer,k_exact,k_closed_form\n", 0) == 0);
    CHECK(advice.find(",3,") != std::string::npos);  // exact K column
    fs::remove_all(dir);
}

TEST_CASE("spectrum driver emits one file per flux and dt scale") {
    RunConfig cfg;
    cfg.p = 10;
    cfg.eps = 1e-2;
    cfg.n_cells = 40;
    cfg.dt_scales = {1.0, 0.5};
    cfg.flux_list = {FluxKind::Upwind, FluxKind::Centered};
    const auto dir = fresh_dir("spectrum");
    cfg.output_dir = dir.string();
    validate(cfg);
    cmd_spectrum(cfg);
    for (const char* stem : {"spectrum_upwind_scale1", "spectrum_upwind_scale0.5",
                             "spectrum_centered_scale1", "spectrum_centered_scale0.5"}) {
        CAPTURE(stem);
        REQUIRE(fs::exists(dir / (std::string(stem) + ".csv")));
    }
    // zeta = 0 rows carry the {1, 0, ...} spectrum
    const auto body = read_file(dir / "spectrum_centered_scale1.csv");
    CHECK(body.find("0,1,0,1\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("converge driver is deterministic across runs and workers") {
    RunConfig cfg;
    cfg.model = Model::Linear;
    cfg.p = 10;
    cfg.eps = 0.05;
    cfg.n_cells = 20;
    cfg.t_end = 0.25;
    cfg.sweep = "eps";
    cfg.eps_values = {0.05, 0.02};
    cfg.error_times = {0.25};
    cfg.k_inner = 3;
    cfg.ref_dt = "eps3";

    const auto dir1 = fresh_dir("conv1");
    cfg.output_dir = dir1.string();
    cfg.workers = 1;
    validate(cfg);
    cmd_converge(cfg);

    const auto dir2 = fresh_dir("conv2");
    cfg.output_dir = dir2.string();
    cfg.workers = 4;
    cmd_converge(cfg);

    CHECK(read_file(dir1 / "errors.csv") == read_file(dir2 / "errors.csv"));
    CHECK(read_file(dir1 / "slopes.csv") == read_file(dir2 / "slopes.csv"));
    CHECK(read_file(dir1 / "errors.csv").rfind("label,eps,dx,dt_outer,t,err_rho,err_flux\n", 0) ==
          0);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("compare mode writes one snapshot per method") {
    RunConfig cfg;
    cfg.model = Model::Linear;
    cfg.p = 10;
    cfg.eps = 0.05;
    cfg.n_cells = 20;
    cfg.t_end = 0.25;
    cfg.snapshot_times = {0.25};
    cfg.k_inner = 4;
    cfg.mode = RunMode::Compare;
    const auto dir = fresh_dir("compare");
    cfg.output_dir = dir.string();
    validate(cfg);
    cmd_run(cfg);
    for (const char* method : {"inner", "reference", "projective", "heat"}) {
        CAPTURE(method);
        REQUIRE(fs::exists(dir / ("snapshot_" + std::string(method) + "_t0.25.csv")));
    }
    fs::remove_all(dir);
}

TEST_CASE("suolson driver emits snapshots, flux ratios, margins and errors") {
    RunConfig cfg;
    cfg.p = 10;
    cfg.eps = 0.05;
    cfg.x_left = -1.0;
    cfg.x_right = 3.0;
    cfg.n_cells = 40;
    cfg.bc = BoundaryCondition::NeumannHomogeneous;
    cfg.t_end = 0.25;
    cfg.snapshot_times = {0.25};
    cfg.k_inner = 3;
    cfg.a_values = {1.0};
    const auto dir = fresh_dir("suolson");
    cfg.output_dir = dir.string();
    validate(cfg);
    cmd_suolson(cfg);
    REQUIRE(fs::exists(dir / "snapshot_inner_a1_t0.25.csv"));
    REQUIRE(fs::exists(dir / "snapshot_projective_a1_t0.25.csv"));
    REQUIRE(fs::exists(dir / "fluxratio_projective_a1_t0.25.csv"));
    CHECK(read_file(dir / "snapshot_inner_a1_t0.25.csv").rfind("x,rho,J,theta\n", 0) == 0);
    CHECK(read_file(dir / "margins.csv").rfind("a,method,limited_flux_margin\n", 0) == 0);
    const auto errors = read_file(dir / "errors.csv");
    CHECK(errors.find("inner_a1_vs_eps3") != std::string::npos);
    CHECK(errors.find("projective_a1_vs_eps3") != std::string::npos);
    // second invocation hits the reference cache and reproduces the bytes
    const auto first = errors;
    cmd_suolson(cfg);
    CHECK(read_file(dir / "errors.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("run driver writes snapshots and the per-step run log") {
    RunConfig cfg;
    cfg.model = Model::Linear;
    cfg.p = 10;
    cfg.eps = 0.05;
    cfg.n_cells = 20;
    cfg.t_end = 0.25;
    cfg.snapshot_times = {0.25};
    cfg.k_inner = 4;
    cfg.nu = 1.0;
    cfg.mode = RunMode::Projective;
    cfg.export_distribution = true;
    const auto dir = fresh_dir("run");
    cfg.output_dir = dir.string();
    validate(cfg);
    cmd_run(cfg);
    REQUIRE(fs::exists(dir / "snapshot_projective_t0.25.csv"));
    REQUIRE(fs::exists(dir / "distribution_projective_t0.25.csv"));
    CHECK(read_file(dir / "distribution_projective_t0.25.csv").rfind("x,v,f\n", 0) == 0);
    const auto log = read_file(dir / "run_log_projective.csv");
    CHECK(log.rfind("step,t,rho_min,rho_max,mass\n", 0) == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') >= 3);
    fs::remove_all(dir);
}
