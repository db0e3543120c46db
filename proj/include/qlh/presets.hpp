#pragma once

#include <array>
#include <cmath>
#include <string>

#include "qlh/physics.hpp"

namespace qlh {

enum class PresetKind {
    uniform,
    plane_wave,
    gaussian,
    harmonic_ground,
    dark_soliton,
    bright_soliton,
    vortex
};

struct PresetSpec {
    PresetKind kind = PresetKind::uniform;
    double amplitude = 1.0;              // uniform / plane_wave / bright_soliton peak
    std::array<int, 3> modes{0, 0, 0};   // plane_wave wavevector modes; gaussian boost modes
    double sigma = 1.0;                  // gaussian width (of |psi|, so density std = sigma)
    std::array<double, 3> center{0, 0, 0};
    std::array<double, 3> omega{1, 1, 1};  // harmonic_ground
    double n_inf = 1.0;                  // dark_soliton background / vortex background
    int charge = 1;                      // vortex winding
};

namespace detail {

/// Positions that land exactly on a grid node would put a wavefunction zero
/// on a sample point, where ratio quantities (v, Pi) lose their removable
/// singularity. Nudge such positions by half a cell.
inline double snap_off_grid(const GridSpec& g, int axis, double pos) {
    const double h = g.spacing(axis);
    const double f = (pos - g.origin(axis)) / h;
    if (std::abs(f - std::round(f)) < 1e-9) return pos + 0.5 * h;
    return pos;
}

/// Periodic kink-antikink profile: a tanh kink at u = 0 and the compensating
/// antikink half a box away (at the wrap seam u = +-2K). The two factors
/// join smoothly across the seam with matching slope; the stationary-state
/// defect of the pair is O(exp(-2K)).
inline double kink_pair(double u, double quarter_period) {
    return std::tanh(u) * std::tanh(2.0 * quarter_period - std::abs(u));
}

}  // namespace detail

/// Parameters of the periodic stationary kink pair used by the dark_soliton
/// preset: one dark kink at `position`, its partner at position + L/2,
/// both of healing-length width, phase rotating at mu = g n_inf.
struct DarkSolitonForm {
    double xi;  // healing length hbar/sqrt(m g n_inf)
    double quarter_period;
    double amplitude;
    double mu;
    double position;
};

inline DarkSolitonForm dark_soliton_form(const GridSpec& g, const PresetSpec& ps,
                                         const PhysicsParams& p) {
    if (!(p.coupling > 0.0)) throw ConfigError("dark_soliton requires g > 0");
    DarkSolitonForm f;
    f.xi = p.hbar / std::sqrt(p.mass * p.coupling * ps.n_inf);
    const double L = g.extent(0);
    if (L < 24.0 * f.xi)
        throw ConfigError("dark_soliton: box must span at least 24 healing lengths");
    f.quarter_period = L / (4.0 * f.xi);
    f.amplitude = std::sqrt(ps.n_inf);
    f.mu = p.coupling * ps.n_inf;
    f.position = detail::snap_off_grid(g, 0, ps.center[0]);
    return f;
}

struct BrightSolitonForm {
    double width;  // hbar/(A sqrt(m |g|))
    double mu;     // -|g| A^2 / 2
    double position;
};

inline BrightSolitonForm bright_soliton_form(const GridSpec& g, const PresetSpec& ps,
                                             const PhysicsParams& p) {
    if (!(p.coupling < 0.0)) throw ConfigError("bright_soliton requires g < 0");
    BrightSolitonForm f;
    f.width = p.hbar / (ps.amplitude * std::sqrt(p.mass * -p.coupling));
    f.mu = 0.5 * p.coupling * ps.amplitude * ps.amplitude;
    f.position = ps.center[0];
    const double L = g.extent(0);
    if (L < 30.0 * f.width)
        throw ConfigError("bright_soliton: box must span at least 30 soliton widths");
    return f;
}

inline double periodic_delta(double x, double p, double L) {
    double d = std::fmod(x - p, L);
    if (d < -0.5 * L) d += L;
    if (d >= 0.5 * L) d -= L;
    return d;
}

/// Builds a preset state sampled on the grid. Every preset here has a known
/// closed-form evolution (see analytic.hpp) usable as a test oracle.
inline ComplexField initialize_state(const GridSpec& g, const PresetSpec& ps,
                                     const PhysicsParams& p) {
    p.validate();
    ComplexField psi(g);
    switch (ps.kind) {
        case PresetKind::uniform: {
            for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = ps.amplitude;
            return psi;
        }
        case PresetKind::plane_wave: {
            psi.fill_from([&](double x, double y, double z) {
                const double c[3] = {x, y, z};
                double phase = 0.0;
                for (int a = 0; a < g.dim(); ++a)
                    phase += 2.0 * pi * ps.modes[a] * (c[a] - g.origin(a)) / g.extent(a);
                return ps.amplitude * std::polar(1.0, phase);
            });
            return psi;
        }
        case PresetKind::gaussian: {
            const double s2 = ps.sigma * ps.sigma;
            const double norm = std::pow(2.0 * pi * s2, -0.25 * g.dim());
            psi.fill_from([&](double x, double y, double z) {
                const double c[3] = {x, y, z};
                double arg = 0.0, phase = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double d = c[a] - ps.center[a];
                    arg += d * d;
                    phase += 2.0 * pi * ps.modes[a] * (c[a] - g.origin(a)) / g.extent(a);
                }
                return norm * std::exp(-arg / (4.0 * s2)) * std::polar(1.0, phase);
            });
            return psi;
        }
        case PresetKind::harmonic_ground: {
            psi.fill_from([&](double x, double y, double z) {
                const double c[3] = {x, y, z};
                double arg = 0.0, norm = 1.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double d = c[a] - ps.center[a];
                    arg += p.mass * ps.omega[a] * d * d / (2.0 * p.hbar);
                    norm *= std::pow(p.mass * ps.omega[a] / (pi * p.hbar), 0.25);
                }
                return norm * std::exp(-arg);
            });
            return psi;
        }
        case PresetKind::dark_soliton: {
            const DarkSolitonForm f = dark_soliton_form(g, ps, p);
            const double L = g.extent(0);
            psi.fill_from([&](double x, double, double) {
                const double u = periodic_delta(x, f.position, L) / f.xi;
                return f.amplitude * detail::kink_pair(u, f.quarter_period);
            });
            return psi;
        }
        case PresetKind::bright_soliton: {
            if (g.dim() != 1) throw ConfigError("bright_soliton preset is 1D");
            const BrightSolitonForm f = bright_soliton_form(g, ps, p);
            const double L = g.extent(0);
            psi.fill_from([&](double x, double, double) {
                const double u = periodic_delta(x, f.position, L) / f.width;
                return ps.amplitude / std::cosh(u);
            });
            return psi;
        }
        case PresetKind::vortex: {
            if (g.dim() < 2) throw ConfigError("vortex preset needs dim >= 2");
            const int l = ps.charge;
            const double cx = detail::snap_off_grid(g, 0, ps.center[0]);
            const double cy = detail::snap_off_grid(g, 1, ps.center[1]);
            const double a = std::sqrt(ps.n_inf);
            // band-limited winding carrier: sin u + i sin w vanishes with the
            // requested charge at the core and with opposite charge at the
            // three half-period partner points the torus topology demands
            psi.fill_from([&](double x, double y, double) {
                if (l == 0) return complexd(a, 0.0);
                const double u = 2.0 * pi * (x - cx) / g.extent(0);
                const double w = 2.0 * pi * (y - cy) / g.extent(1);
                complexd f(std::sin(u), std::sin(w));
                complexd r(1.0, 0.0);
                for (int q = 0; q < std::abs(l); ++q) r *= f;
                if (l < 0) r = std::conj(r);
                return a * r;
            });
            return psi;
        }
    }
    throw ConfigError("unknown preset");
}

inline PresetKind preset_from_name(const std::string& name) {
    if (name == "uniform") return PresetKind::uniform;
    if (name == "plane_wave") return PresetKind::plane_wave;
    if (name == "gaussian") return PresetKind::gaussian;
    if (name == "harmonic_ground") return PresetKind::harmonic_ground;
    if (name == "dark_soliton") return PresetKind::dark_soliton;
    if (name == "bright_soliton") return PresetKind::bright_soliton;
    if (name == "vortex") return PresetKind::vortex;
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace qlh
