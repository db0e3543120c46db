#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qlh/grid.hpp"

namespace qlh {

using complexd = std::complex<double>;

/// Scalar sample array over a grid; T is double or complex<double>.
template <typename T>
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, T fill = T{})
        : grid_(grid), v_(grid.size(), fill) {}

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    T& operator[](std::size_t i) { return v_[i]; }
    const T& operator[](std::size_t i) const { return v_[i]; }

    T& at(int ix, int iy = 0, int iz = 0) { return v_[grid_.index(ix, iy, iz)]; }
    const T& at(int ix, int iy = 0, int iz = 0) const { return v_[grid_.index(ix, iy, iz)]; }

    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }

    /// Evaluates fn(x,y,z) at every sample point.
    template <typename F>
    void fill_from(F&& fn) {
        const auto& g = grid_;
        std::size_t i = 0;
        for (int ix = 0; ix < g.points(0); ++ix)
            for (int iy = 0; iy < g.points(1); ++iy)
                for (int iz = 0; iz < g.points(2); ++iz, ++i)
                    v_[i] = fn(g.coord(0, ix), g.coord(1, iy), g.coord(2, iz));
    }

    bool all_finite() const {
        for (const T& x : v_)
            if (!finite_value(x)) return false;
        return true;
    }

    ScalarField& operator+=(const ScalarField& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    ScalarField& operator*=(T s) {
        for (T& x : v_) x *= s;
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(T s, ScalarField a) { return a *= s; }

private:
    static bool finite_value(double x) { return std::isfinite(x); }
    static bool finite_value(const complexd& x) {
        return std::isfinite(x.real()) && std::isfinite(x.imag());
    }

    GridSpec grid_;
    std::vector<T> v_;
};

using RealField = ScalarField<double>;
using ComplexField = ScalarField<complexd>;

/// Mask over grid points (1 = asserted region).
class BoolField {
public:
    BoolField() = default;
    explicit BoolField(const GridSpec& grid, bool fill = false)
        : grid_(grid), v_(grid.size(), fill ? 1 : 0) {}

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    bool operator[](std::size_t i) const { return v_[i] != 0; }
    void set(std::size_t i, bool b) { v_[i] = b ? 1 : 0; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : v_) c += b;
        return c;
    }
    double fraction() const { return v_.empty() ? 0.0 : double(count()) / double(v_.size()); }

private:
    GridSpec grid_;
    std::vector<std::uint8_t> v_;
};

/// d real components per point, component-planar storage.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridSpec& grid) : grid_(grid) {
        comp_.assign(grid.dim(), RealField(grid));
    }

    const GridSpec& grid() const { return grid_; }
    int components() const { return static_cast<int>(comp_.size()); }
    RealField& comp(int a) { return comp_[a]; }
    const RealField& comp(int a) const { return comp_[a]; }

    bool all_finite() const {
        for (const auto& c : comp_)
            if (!c.all_finite()) return false;
        return true;
    }

    VectorField& operator+=(const VectorField& o) {
        for (int a = 0; a < components(); ++a) comp_[a] += o.comp_[a];
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        for (int a = 0; a < components(); ++a) comp_[a] -= o.comp_[a];
        return *this;
    }
    VectorField& operator*=(double s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<RealField> comp_;
};

inline int sym_component_count(int dim) { return dim * (dim + 1) / 2; }

/// Upper-triangle component slot for (i,j), i<=j, dim-dependent.
/// 1D: [xx]; 2D: [xx,xy,yy]; 3D: [xx,xy,xz,yy,yz,zz].
inline int sym_index(int dim, int i, int j) {
    if (i > j) std::swap(i, j);
    int s = 0;
    for (int r = 0; r < i; ++r) s += dim - r;
    return s + (j - i);
}

/// Symmetric rank-2 field storing the upper triangle only.
class SymTensorField {
public:
    SymTensorField() = default;
    explicit SymTensorField(const GridSpec& grid) : grid_(grid) {
        comp_.assign(sym_component_count(grid.dim()), RealField(grid));
    }

    const GridSpec& grid() const { return grid_; }
    int components() const { return static_cast<int>(comp_.size()); }

    RealField& comp(int i, int j) { return comp_[sym_index(grid_.dim(), i, j)]; }
    const RealField& comp(int i, int j) const { return comp_[sym_index(grid_.dim(), i, j)]; }
    RealField& comp_flat(int s) { return comp_[s]; }
    const RealField& comp_flat(int s) const { return comp_[s]; }

    bool all_finite() const {
        for (const auto& c : comp_)
            if (!c.all_finite()) return false;
        return true;
    }

    SymTensorField& operator+=(const SymTensorField& o) {
        for (int s = 0; s < components(); ++s) comp_[s] += o.comp_[s];
        return *this;
    }
    SymTensorField& operator-=(const SymTensorField& o) {
        for (int s = 0; s < components(); ++s) comp_[s] -= o.comp_[s];
        return *this;
    }
    SymTensorField& operator*=(double s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<RealField> comp_;
};

// ---- norms and reductions (fixed association order: flat index order) ----

inline double l2_norm(const RealField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
    return std::sqrt(s * f.grid().cell_volume());
}

inline double l2_norm(const ComplexField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i]);
    return std::sqrt(s * f.grid().cell_volume());
}

inline double linf_norm(const RealField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

inline double linf_norm(const ComplexField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

inline double max_value(const RealField& f) {
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, f[i]);
    return m;
}

inline double integral(const RealField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    return s * f.grid().cell_volume();
}

inline double masked_l2_norm(const RealField& f, const BoolField& mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (mask[i]) s += f[i] * f[i];
    return std::sqrt(s * f.grid().cell_volume());
}

inline double masked_linf_norm(const RealField& f, const BoolField& mask) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (mask[i]) m = std::max(m, std::abs(f[i]));
    return m;
}

/// Pointwise Euclidean magnitude of a vector field.
inline RealField magnitude(const VectorField& v) {
    RealField m(v.grid());
    for (std::size_t i = 0; i < m.size(); ++i) {
        double s = 0.0;
        for (int a = 0; a < v.components(); ++a) s += v.comp(a)[i] * v.comp(a)[i];
        m[i] = std::sqrt(s);
    }
    return m;
}

}  // namespace qlh
