// kinproj: projective-integration solver suite for discrete-velocity kinetic
// equations in the diffusion limit. Subcommands drive single runs, Von
// Neumann spectra, outer-step stability tables, convergence sweeps and the
// Su-Olson benchmark; all output is CSV under --out.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kinproj/config.hpp"
#include "kinproj/errors.hpp"
#include "kinproj/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to a key = value config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides output_dir)");
    cmd->add_option("--workers", args.workers, "concurrent sweep workers (overrides workers)");
}

kinproj::RunConfig load(const CommonArgs& args) {
    kinproj::RunConfig cfg = kinproj::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.workers > 0) cfg.workers = args.workers;
    if (const char* ceiling = std::getenv("KINPROJ_COST_CEILING")) {
        char* end = nullptr;
        const long long v = std::strtoll(ceiling, &end, 10);
        if (end == ceiling || *end != '\0' || v < 1)
            throw kinproj::ConfigError("KINPROJ_COST_CEILING must be a positive integer");
        cfg.cost_ceiling = v;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"projective integration solver suite for kinetic equations"};
    app.require_subcommand(1);

    CommonArgs run_args, spectrum_args, stability_args, converge_args, suolson_args;
    CLI::App* run = app.add_subcommand("run", "single simulation (inner/projective/heat/reference/compare)");
    add_common(run, run_args);
    CLI::App* spectrum = app.add_subcommand("spectrum", "per-mode eigenvalues of the inner step");
    add_common(spectrum, spectrum_args);
    CLI::App* stability = app.add_subcommand("stability", "outer-step stability verdict per K");
    add_common(stability, stability_args);
    CLI::App* converge = app.add_subcommand("converge", "eps or dt_outer convergence sweep");
    add_common(converge, converge_args);
    CLI::App* suolson = app.add_subcommand("suolson", "Su-Olson benchmark runs");
    add_common(suolson, suolson_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) kinproj::cmd_run(load(run_args));
        else if (spectrum->parsed()) kinproj::cmd_spectrum(load(spectrum_args));
        else if (stability->parsed()) kinproj::cmd_stability(load(stability_args));
        else if (converge->parsed()) kinproj::cmd_converge(load(converge_args));
        else if (suolson->parsed()) kinproj::cmd_suolson(load(suolson_args));
    } catch (const kinproj::DivergenceError& e) {
        std::cerr << "error[divergence]: " << e.what() << '\n';
        return 3;
    } catch (const kinproj::ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error[io]: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
