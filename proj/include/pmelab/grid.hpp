#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pmelab/error.hpp"

namespace pmelab {

/// Point in R^n, n <= 2. Unused trailing components are zero.
using Point = std::array<double, 2>;

enum class BoundaryPolicy { zero_flux, dirichlet_zero };

inline std::string to_string(BoundaryPolicy b) {
    return b == BoundaryPolicy::zero_flux ? "zero_flux" : "dirichlet_zero";
}

/// Uniform cell-centred grid on [-L, L]^n.
class Grid {
   public:
    Grid(int dimension, double half_width, int cells_per_axis)
        : n_(dimension), half_width_(half_width), cells_(cells_per_axis) {
        if (n_ != 1 && n_ != 2) {
            throw ParameterError("grid dimension must be 1 or 2, got " + std::to_string(n_));
        }
        if (!(half_width_ > 0.0) || !std::isfinite(half_width_)) {
            throw ParameterError("grid half-width must be positive and finite");
        }
        if (cells_ < 1) {
            throw ParameterError("cells per axis must be positive");
        }
    }

    int dimension() const noexcept { return n_; }
    double half_width() const noexcept { return half_width_; }
    int cells_per_axis() const noexcept { return cells_; }
    double spacing() const noexcept { return 2.0 * half_width_ / cells_; }

    std::size_t cell_count() const noexcept {
        std::size_t c = static_cast<std::size_t>(cells_);
        return n_ == 1 ? c : c * c;
    }

    double cell_volume() const noexcept { return std::pow(spacing(), n_); }

    /// Total measure (2L)^n computed as a sum of cell volumes.
    double measure() const noexcept { return cell_volume() * static_cast<double>(cell_count()); }

    double center_coord(int i) const noexcept { return -half_width_ + (i + 0.5) * spacing(); }

    /// Lower face coordinate of cell i along an axis; face N is the right wall.
    double face_coord(int k) const noexcept { return -half_width_ + k * spacing(); }

    /// Cells are stored x-fastest: idx = i + N * j.
    Point center(std::size_t idx) const noexcept {
        const auto N = static_cast<std::size_t>(cells_);
        Point p{center_coord(static_cast<int>(idx % N)), 0.0};
        if (n_ == 2) p[1] = center_coord(static_cast<int>(idx / N));
        return p;
    }

    /// True when the cell touches the boundary of the box.
    bool is_outer(std::size_t idx) const noexcept {
        const auto N = static_cast<std::size_t>(cells_);
        const std::size_t i = idx % N;
        if (i == 0 || i == N - 1) return true;
        if (n_ == 2) {
            const std::size_t j = idx / N;
            return j == 0 || j == N - 1;
        }
        return false;
    }

    bool operator==(const Grid&) const = default;

   private:
    int n_;
    double half_width_;
    int cells_;
};

/// Snapshot of cell values at a time.
struct State {
    Grid grid;
    double time = 0.0;
    std::vector<double> values;

    State(Grid g, double t, std::vector<double> v) : grid(g), time(t), values(std::move(v)) {
        if (values.size() != grid.cell_count()) {
            throw ParameterError("state size " + std::to_string(values.size()) +
                                 " does not match grid cell count " +
                                 std::to_string(grid.cell_count()));
        }
    }

    static State zeros(const Grid& g, double t = 0.0) {
        return State(g, t, std::vector<double>(g.cell_count(), 0.0));
    }

    bool all_finite() const noexcept {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Discrete L^1 integral sum |u_i| dx^n.
inline double l1_mass(const State& s) {
    double acc = 0.0;
    for (double v : s.values) acc += std::abs(v);
    return acc * s.grid.cell_volume();
}

}  // namespace pmelab
