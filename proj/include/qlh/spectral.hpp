#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qlh/fft.hpp"

namespace qlh {

inline ComplexField to_complex(const RealField& f) {
    ComplexField c(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
    return c;
}

inline RealField real_part(const ComplexField& f) {
    RealField r(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = f[i].real();
    return r;
}

namespace detail {

/// Multiplies the spectrum by fn(jx,jy,jz) -> complexd.
template <typename F>
void apply_spectral_multiplier(ComplexField& spec, F&& fn) {
    const GridSpec& g = spec.grid();
    std::size_t i = 0;
    for (int jx = 0; jx < g.points(0); ++jx)
        for (int jy = 0; jy < g.points(1); ++jy)
            for (int jz = 0; jz < g.points(2); ++jz, ++i) spec[i] *= fn(jx, jy, jz);
}

inline void check_axis(const GridSpec& g, int axis) {
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("axis out of range for grid dim");
}

/// First-derivative multiplier ik along one axis, Nyquist mode zeroed
/// (odd-derivative hygiene: the lone unpaired mode would otherwise inject
/// a spurious imaginary/asymmetric component).
inline void differentiate(ComplexField& spec, int axis) {
    const GridSpec& g = spec.grid();
    apply_spectral_multiplier(spec, [&](int jx, int jy, int jz) -> complexd {
        const int j[3] = {jx, jy, jz};
        if (g.is_nyquist(axis, j[axis])) return 0.0;
        return complexd(0.0, g.wavenumber(axis, j[axis]));
    });
}

}  // namespace detail

/// Exact derivative for band-limited periodic data along one axis.
inline ComplexField spectral_gradient(const ComplexField& f, int axis) {
    detail::check_axis(f.grid(), axis);
    ComplexField spec = f;
    Fft::forward(spec);
    detail::differentiate(spec, axis);
    Fft::backward(spec);
    return spec;
}

inline RealField spectral_gradient(const RealField& f, int axis) {
    return real_part(spectral_gradient(to_complex(f), axis));
}

/// Laplacian via the -|k|^2 multiplier (Nyquist kept: even derivative).
inline ComplexField spectral_laplacian(const ComplexField& f) {
    ComplexField spec = f;
    Fft::forward(spec);
    const GridSpec& g = f.grid();
    detail::apply_spectral_multiplier(spec, [&](int jx, int jy, int jz) -> complexd {
        const int j[3] = {jx, jy, jz};
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double k = g.wavenumber(a, j[a]);
            k2 += k * k;
        }
        return -k2;
    });
    Fft::backward(spec);
    return spec;
}

inline RealField spectral_laplacian(const RealField& f) {
    return real_part(spectral_laplacian(to_complex(f)));
}

/// All-axis gradient of a real field (one forward transform, d backward).
inline VectorField spectral_gradient_all(const RealField& f) {
    VectorField out(f.grid());
    ComplexField spec = to_complex(f);
    Fft::forward(spec);
    for (int a = 0; a < f.grid().dim(); ++a) {
        ComplexField d = spec;
        detail::differentiate(d, a);
        Fft::backward(d);
        out.comp(a) = real_part(d);
    }
    return out;
}

/// Divergence of a vector field.
inline RealField spectral_divergence(const VectorField& v) {
    RealField out(v.grid());
    for (int a = 0; a < v.components(); ++a) out += spectral_gradient(v.comp(a), a);
    return out;
}

/// d_i d_j T_ij with implied summation; off-diagonal components are counted
/// twice. Both derivative factors carry the odd-derivative Nyquist zeroing,
/// so on the diagonal this is gradient-of-gradient, not the -|k|^2 Laplacian.
inline RealField double_divergence(const SymTensorField& T) {
    const GridSpec& g = T.grid();
    ComplexField acc(g);
    for (int i = 0; i < g.dim(); ++i) {
        for (int j = i; j < g.dim(); ++j) {
            ComplexField spec = to_complex(T.comp(i, j));
            Fft::forward(spec);
            const double w = (i == j) ? 1.0 : 2.0;
            detail::apply_spectral_multiplier(spec, [&](int jx, int jy, int jz) -> complexd {
                const int jj[3] = {jx, jy, jz};
                const double ki = g.is_nyquist(i, jj[i]) ? 0.0 : g.wavenumber(i, jj[i]);
                const double kj = g.is_nyquist(j, jj[j]) ? 0.0 : g.wavenumber(j, jj[j]);
                return -w * ki * kj;
            });
            acc += spec;
        }
    }
    Fft::backward(acc);
    return real_part(acc);
}

/// Laplacian built from the same multiplier family as double_divergence
/// (Nyquist-zeroed per factor). Use this wherever a c0^2 lap(n) term must
/// cancel discretely against the c0^2 n delta_ij block inside a source
/// tensor fed to double_divergence.
inline RealField dd_laplacian(const RealField& f) {
    const GridSpec& g = f.grid();
    ComplexField spec = to_complex(f);
    Fft::forward(spec);
    detail::apply_spectral_multiplier(spec, [&](int jx, int jy, int jz) -> complexd {
        const int j[3] = {jx, jy, jz};
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double k = g.is_nyquist(a, j[a]) ? 0.0 : g.wavenumber(a, j[a]);
            k2 += k * k;
        }
        return -k2;
    });
    Fft::backward(spec);
    return real_part(spec);
}

// ---- temporal stencils on snapshot stacks ----

/// 4th-order central difference at the center of a >=5 slice stack.
/// order 1: df/dt, order 2: d2f/dt2. Exact for polynomials of degree <= 4.
inline RealField time_stencil(std::span<const RealField* const> stack, double dt, int order) {
    if (stack.size() < 5) throw std::invalid_argument("time_stencil: need at least 5 slices");
    if (order != 1 && order != 2) throw std::invalid_argument("time_stencil: order must be 1 or 2");
    if (!(dt > 0.0)) throw std::invalid_argument("time_stencil: dt must be positive");
    const std::size_t c = stack.size() / 2;
    const RealField& f0 = *stack[c];
    RealField out(f0.grid());
    const RealField& m2 = *stack[c - 2];
    const RealField& m1 = *stack[c - 1];
    const RealField& p1 = *stack[c + 1];
    const RealField& p2 = *stack[c + 2];
    if (order == 1) {
        const double w = 1.0 / (12.0 * dt);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) * w;
    } else {
        const double w = 1.0 / (12.0 * dt * dt);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (-m2[i] + 16.0 * m1[i] - 30.0 * f0[i] + 16.0 * p1[i] - p2[i]) * w;
    }
    return out;
}

inline RealField time_stencil(const std::vector<RealField>& stack, double dt, int order) {
    std::vector<const RealField*> p;
    p.reserve(stack.size());
    for (const auto& f : stack) p.push_back(&f);
    return time_stencil(std::span<const RealField* const>(p.data(), p.size()), dt, order);
}

}  // namespace qlh
