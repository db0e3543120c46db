#pragma once

#include <cmath>

#include "qlh/presets.hpp"

namespace qlh {
namespace analytic {

/// Closed-form density of a freely spreading (V = 0, g = 0) Gaussian packet:
/// per-axis variance sigma(t)^2 = sigma^2 + (hbar t / 2 m sigma)^2, center
/// advected by the boost velocity.
inline RealField free_gaussian_density(const GridSpec& g, const PresetSpec& ps,
                                       const PhysicsParams& p, double t) {
    const double s2 = ps.sigma * ps.sigma;
    const double spread = p.hbar * t / (2.0 * p.mass * ps.sigma);
    const double st2 = s2 + spread * spread;
    RealField n(g);
    n.fill_from([&](double x, double y, double z) {
        const double c[3] = {x, y, z};
        double val = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double v = p.hbar * (2.0 * pi * ps.modes[a] / g.extent(a)) / p.mass;
            const double d = periodic_delta(c[a], ps.center[a] + v * t, g.extent(a));
            val *= std::exp(-d * d / (2.0 * st2)) / std::sqrt(2.0 * pi * st2);
        }
        return val;
    });
    return n;
}

inline double free_gaussian_boost_velocity(const GridSpec& g, const PresetSpec& ps,
                                           const PhysicsParams& p, int axis) {
    return p.hbar * (2.0 * pi * ps.modes[axis] / g.extent(axis)) / p.mass;
}

/// Phase advance rate of a uniform state: -(V0 + g|A|^2)/hbar.
inline double uniform_phase_rate(double amplitude, double V0, const PhysicsParams& p) {
    return -(V0 + p.coupling * amplitude * amplitude) / p.hbar;
}

/// Phase advance rate of a plane wave under V = 0.
inline double plane_wave_phase_rate(const GridSpec& g, const PresetSpec& ps,
                                    const PhysicsParams& p) {
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double k = 2.0 * pi * ps.modes[a] / g.extent(a);
        k2 += k * k;
    }
    return -(p.hbar * k2 / (2.0 * p.mass) +
             p.coupling * ps.amplitude * ps.amplitude / p.hbar);
}

inline double harmonic_ground_energy(const PresetSpec& ps, const PhysicsParams& p, int dim) {
    double e = 0.0;
    for (int a = 0; a < dim; ++a) e += 0.5 * p.hbar * ps.omega[a];
    return e;
}

/// Bogoliubov excitation frequency on a uniform background of density n0:
/// omega^2 = (g n0 / m) k^2 + (hbar k^2 / 2m)^2.
inline double bogoliubov_omega(double k, double n0, const PhysicsParams& p) {
    const double kin = p.hbar * k * k / (2.0 * p.mass);
    return std::sqrt(p.coupling * n0 * k * k / p.mass + kin * kin);
}

inline double healing_length(double n0, const PhysicsParams& p) {
    return p.hbar / std::sqrt(p.mass * p.coupling * n0);
}

}  // namespace analytic
}  // namespace qlh
