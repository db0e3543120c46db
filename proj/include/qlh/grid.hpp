#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qlh {

inline constexpr double pi = 3.14159265358979323846;

struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Periodic Cartesian grid in 1-3 dimensions. Sample k on axis a sits at
/// origin[a] + k*spacing(a); everything wraps periodically.
class GridSpec {
public:
    GridSpec() = default;

    int dim() const { return dim_; }
    int points(int axis) const { return n_[axis]; }
    double extent(int axis) const { return extent_[axis]; }
    double origin(int axis) const { return origin_[axis]; }
    double spacing(int axis) const { return extent_[axis] / n_[axis]; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < 3; ++a) s *= static_cast<std::size_t>(n_[a]);
        return s;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= spacing(a);
        return v;
    }

    double coord(int axis, int k) const { return origin_[axis] + k * spacing(axis); }

    /// Fourier wavenumber of mode index j on an axis, FFT storage order:
    /// frequencies 0,1,...,N/2-1,-N/2,...,-1 scaled by 2*pi/L.
    double wavenumber(int axis, int j) const {
        const int n = n_[axis];
        const int f = (j < n / 2) ? j : j - n;
        return 2.0 * pi * f / extent_[axis];
    }

    bool is_nyquist(int axis, int j) const { return axis < dim_ && j == n_[axis] / 2; }

    /// Flat index, row-major with axis order x,y,z (z fastest). Unused axes
    /// have a single point so the same arithmetic covers dim 1-3.
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n_[1] + iy) * n_[2] + iz;
    }

    int wrap(int axis, int i) const {
        const int n = n_[axis];
        i %= n;
        return i < 0 ? i + n : i;
    }

    bool same_layout(const GridSpec& o) const {
        if (dim_ != o.dim_) return false;
        for (int a = 0; a < 3; ++a)
            if (n_[a] != o.n_[a] || extent_[a] != o.extent_[a] || origin_[a] != o.origin_[a])
                return false;
        return true;
    }

    friend GridSpec make_grid(int dim, const std::array<double, 3>& extents,
                              const std::array<int, 3>& points,
                              const std::array<double, 3>& origin);

private:
    int dim_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> extent_{1.0, 1.0, 1.0};
    std::array<double, 3> origin_{0.0, 0.0, 0.0};
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Validates and builds a grid. Point counts must be powers of two and >= 8;
/// extents must be positive. Entries beyond `dim` are ignored.
inline GridSpec make_grid(int dim, const std::array<double, 3>& extents,
                          const std::array<int, 3>& points,
                          const std::array<double, 3>& origin) {
    if (dim < 1 || dim > 3) throw GridError("grid dim must be 1, 2 or 3");
    GridSpec g;
    g.dim_ = dim;
    for (int a = 0; a < dim; ++a) {
        const int n = points[a];
        if (n < 8) throw GridError("axis " + std::to_string(a) + ": need at least 8 points, got " + std::to_string(n));
        if (n % 2 != 0) throw GridError("axis " + std::to_string(a) + ": odd point count " + std::to_string(n));
        if (!is_power_of_two(n))
            throw GridError("axis " + std::to_string(a) + ": point count " + std::to_string(n) + " is not a power of two");
        if (!(extents[a] > 0.0)) throw GridError("axis " + std::to_string(a) + ": extent must be positive");
        g.n_[a] = n;
        g.extent_[a] = extents[a];
        g.origin_[a] = origin[a];
    }
    return g;
}

inline GridSpec make_grid_1d(double extent, int points, double origin = 0.0) {
    return make_grid(1, {extent, 1, 1}, {points, 1, 1}, {origin, 0, 0});
}

}  // namespace qlh
