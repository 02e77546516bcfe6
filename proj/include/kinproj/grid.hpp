#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinproj {

enum class BoundaryCondition { Periodic, NeumannHomogeneous };

// Uniform 1D cell mesh on [x_left, x_right] with cell centers
// x_i = x_left + (i + 1/2) dx. Immutable after construction.
class Grid {
public:
    Grid(double x_left, double x_right, int n_cells, BoundaryCondition bc)
        : x_left_(x_left), x_right_(x_right), n_cells_(n_cells), bc_(bc) {
        if (n_cells < 1)
            throw std::invalid_argument("grid requires n_cells >= 1, got " +
                                        std::to_string(n_cells));
        if (!(x_right > x_left))
            throw std::invalid_argument("grid requires x_right > x_left");
        dx_ = (x_right - x_left) / n_cells;
        centers_.resize(static_cast<std::size_t>(n_cells));
        for (int i = 0; i < n_cells; ++i)
            centers_[static_cast<std::size_t>(i)] = x_left + (i + 0.5) * dx_;
    }

    double x_left() const { return x_left_; }
    double x_right() const { return x_right_; }
    double length() const { return x_right_ - x_left_; }
    int n_cells() const { return n_cells_; }
    double dx() const { return dx_; }
    BoundaryCondition bc() const { return bc_; }
    double center(int i) const { return centers_[static_cast<std::size_t>(i)]; }
    std::span<const double> centers() const { return centers_; }

    // Cell edges x_{i-1/2} and x_{i+1/2}.
    double left_edge(int i) const { return x_left_ + i * dx_; }
    double right_edge(int i) const { return x_left_ + (i + 1) * dx_; }

    // bc-resolved neighbor indices for scalar (per-cell) fields. Periodic
    // wraps; homogeneous Neumann mirrors the boundary cell into the ghost
    // cell (zero gradient). Kinetic distributions use the specular ghost in
    // inner_scheme instead, which flips velocities at the wall.
    int left_index(int i) const {
        if (i > 0) return i - 1;
        return bc_ == BoundaryCondition::Periodic ? n_cells_ - 1 : 0;
    }
    int right_index(int i) const {
        if (i < n_cells_ - 1) return i + 1;
        return bc_ == BoundaryCondition::Periodic ? 0 : n_cells_ - 1;
    }

private:
    double x_left_;
    double x_right_;
    int n_cells_;
    BoundaryCondition bc_;
    double dx_ = 0.0;
    std::vector<double> centers_;
};

} // namespace kinproj
