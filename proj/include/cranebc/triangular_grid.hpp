#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cranebc/errors.hpp"

namespace cranebc {

/// Uniform lattice on the triangle {0 <= xi <= x <= 1}: square grid of
/// spacing 1/n restricted to the lower-triangular nodes (x_i, xi_j), j <= i.
struct TriangularGrid {
    int n;
    double dx;

    explicit TriangularGrid(int intervals) : n(intervals), dx(1.0 / intervals) {
        if (intervals < 2) throw ValidationError("TriangularGrid: n must be >= 2");
    }

    std::size_t node_count() const {
        return static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 2) / 2;
    }

    /// Flat index of node (i, j) with 0 <= j <= i <= n.
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * (i + 1) / 2 + static_cast<std::size_t>(j);
    }

    double x(int i) const { return i * dx; }
    double xi(int j) const { return j * dx; }
};

/// Scalar function sampled on a TriangularGrid.
struct KernelField {
    TriangularGrid grid;
    std::vector<double> values;

    explicit KernelField(const TriangularGrid& g) : grid(g), values(g.node_count(), 0.0) {}

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }

    /// Interpolated value at an arbitrary point of the triangle. Cells cut by
    /// the diagonal use the three available corners; interior cells are
    /// bilinear. Exact at grid nodes.
    double value_at(double x, double xi) const {
        const int n = grid.n;
        double u = x / grid.dx;
        double v = xi / grid.dx;
        if (u < 0.0) u = 0.0;
        if (v < 0.0) v = 0.0;
        if (u > n) u = n;
        if (v > u) v = u;  // clip onto the triangle
        int i0 = std::min(static_cast<int>(std::floor(u)), n - 1);
        int j0 = std::min(static_cast<int>(std::floor(v)), i0);
        const double du = u - i0;
        const double dv = v - j0;
        if (j0 == i0) {
            // diagonal cell: corners (i0,j0), (i0+1,j0), (i0+1,j0+1)
            const double a = at(i0, j0);
            const double b = at(i0 + 1, j0);
            const double c = at(i0 + 1, j0 + 1);
            return a + du * (b - a) + dv * (c - b);
        }
        const double a = at(i0, j0);
        const double b = at(i0 + 1, j0);
        const double c = at(i0, j0 + 1);
        const double d = at(i0 + 1, j0 + 1);
        return (1.0 - du) * (1.0 - dv) * a + du * (1.0 - dv) * b +
               (1.0 - du) * dv * c + du * dv * d;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

}  // namespace cranebc
