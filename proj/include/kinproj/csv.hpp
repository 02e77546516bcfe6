#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinproj/diagnostics.hpp"
#include "kinproj/grid.hpp"
#include "kinproj/spectral.hpp"
#include "kinproj/state.hpp"

namespace kinproj {

// All CSV output: '.' decimal separator, '\n' line endings, 17 significant
// digits so round-trips are exact.
inline std::string format_float(double v) {
    if (v == 0.0) return "0";  // normalize negative zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Write-then-rename so concurrent sweep points never expose partial files.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string snapshot_csv(const Grid& grid, std::span<const double> rho,
                                std::span<const double> j,
                                std::span<const double> theta = {}) {
    std::string out = theta.empty() ? "x,rho,J\n" : "x,rho,J,theta\n";
    for (int i = 0; i < grid.n_cells(); ++i) {
        out += format_float(grid.center(i));
        out += ',';
        out += format_float(rho[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_float(j[static_cast<std::size_t>(i)]);
        if (!theta.empty()) {
            out += ',';
            out += format_float(theta[static_cast<std::size_t>(i)]);
        }
        out += '\n';
    }
    return out;
}

inline std::string distribution_csv(const Grid& grid, const VelocitySpace& vs,
                                    const KineticState& s) {
    std::string out = "x,v,f\n";
    for (int i = 0; i < s.n_cells; ++i)
        for (int k = 0; k < s.n_velocities; ++k) {
            out += format_float(grid.center(i));
            out += ',';
            out += format_float(vs.velocity(k));
            out += ',';
            out += format_float(s(i, k));
            out += '\n';
        }
    return out;
}

inline std::string spectrum_csv(const SpectralReport& rep) {
    std::string out = "zeta,re,im,is_dominant\n";
    for (const auto& mode : rep.modes)
        for (const auto& ev : mode.eigenvalues) {
            const bool dom = ev == mode.dominant;
            out += format_float(mode.zeta);
            out += ',';
            out += format_float(ev.real());
            out += ',';
            out += format_float(ev.imag());
            out += ',';
            out += dom ? '1' : '0';
            out += '\n';
        }
    return out;
}

inline std::string disks_csv(const SpectralReport& rep) {
    std::string out = "name,center_re,center_im,radius\n";
    for (const auto& d : rep.disks) {
        out += d.name;
        out += ',';
        out += format_float(d.center.real());
        out += ',';
        out += format_float(d.center.imag());
        out += ',';
        out += format_float(d.radius);
        out += '\n';
    }
    return out;
}

struct StabilityRow {
    int k = 0;
    bool stable = false;
    double worst_zeta = 0.0;
    double worst_amplification = 0.0;
};

inline std::string stability_csv(std::span<const StabilityRow> rows) {
    std::string out = "K,stable,worst_zeta,worst_amplification\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k);
        out += ',';
        out += r.stable ? '1' : '0';
        out += ',';
        out += format_float(r.worst_zeta);
        out += ',';
        out += format_float(r.worst_amplification);
        out += '\n';
    }
    return out;
}

inline std::string errors_csv(std::span<const ErrorRecord> records) {
    std::string out = "label,eps,dx,dt_outer,t,err_rho,err_flux\n";
    for (const auto& r : records) {
        out += r.label;
        out += ',';
        out += format_float(r.eps);
        out += ',';
        out += format_float(r.dx);
        out += ',';
        out += format_float(r.dt_outer);
        out += ',';
        out += format_float(r.t);
        out += ',';
        out += format_float(r.err_rho);
        out += ',';
        out += format_float(r.err_flux);
        out += '\n';
    }
    return out;
}

} // namespace kinproj
