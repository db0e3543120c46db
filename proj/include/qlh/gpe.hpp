#pragma once

#include <cmath>
#include <vector>

#include "qlh/presets.hpp"

namespace qlh {

struct Snapshot {
    double t;
    ComplexField psi;
};

struct ConservedDiagnostics {
    double t;
    double norm;    // integral of |psi|^2
    double energy;  // kinetic + potential + interaction
};

/// Uniform-dt stack of wavefunction snapshots with the physics that
/// produced them. dt is the snapshot spacing (stride * step dt).
struct Trajectory {
    PhysicsParams params;
    PotentialSpec potential;
    double dt = 0.0;
    std::vector<Snapshot> snapshots;
    std::vector<ConservedDiagnostics> diagnostics;

    const GridSpec& grid() const { return snapshots.front().psi.grid(); }
    int size() const { return static_cast<int>(snapshots.size()); }
};

inline double wave_norm(const ComplexField& psi) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += std::norm(psi[i]);
    return s * psi.grid().cell_volume();
}

/// Total energy: hbar^2|grad psi|^2/2m + V|psi|^2 + g|psi|^4/2 integrated
/// over the box; the kinetic part is summed in transform space (Parseval).
inline double total_energy(const ComplexField& psi, const RealField& V,
                           const PhysicsParams& p) {
    const GridSpec& g = psi.grid();
    ComplexField spec = psi;
    Fft::forward(spec);
    double kin = 0.0;
    std::size_t i = 0;
    for (int jx = 0; jx < g.points(0); ++jx)
        for (int jy = 0; jy < g.points(1); ++jy)
            for (int jz = 0; jz < g.points(2); ++jz, ++i) {
                const int j[3] = {jx, jy, jz};
                double k2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double k = g.wavenumber(a, j[a]);
                    k2 += k * k;
                }
                kin += k2 * std::norm(spec[i]);
            }
    kin *= p.hbar * p.hbar / (2.0 * p.mass) * g.cell_volume() / double(g.size());
    double pot = 0.0;
    for (std::size_t q = 0; q < psi.size(); ++q) {
        const double n = std::norm(psi[q]);
        pot += (V[q] + 0.5 * p.coupling * n) * n;
    }
    return kin + pot * g.cell_volume();
}

/// One Strang step: half potential+nonlinearity phase, full kinetic phase in
/// transform space, half potential+nonlinearity phase. Each factor is a pure
/// phase, so the discrete norm is preserved exactly. scale_first/scale_second
/// are the potential's scripted scale factors at the two sub-step midpoints.
inline void strang_step_inplace(ComplexField& psi, const RealField& V0, double scale_first,
                                double scale_second, const PhysicsParams& p, double dt) {
    const GridSpec& g = psi.grid();
    const double half = 0.5 * dt / p.hbar;

    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double v = scale_first * V0[i] + p.coupling * std::norm(psi[i]);
        psi[i] *= std::polar(1.0, -v * half);
    }

    Fft::forward(psi);
    const double kfac = p.hbar * dt / (2.0 * p.mass);
    std::size_t i = 0;
    for (int jx = 0; jx < g.points(0); ++jx)
        for (int jy = 0; jy < g.points(1); ++jy)
            for (int jz = 0; jz < g.points(2); ++jz, ++i) {
                const int j[3] = {jx, jy, jz};
                double k2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double k = g.wavenumber(a, j[a]);
                    k2 += k * k;
                }
                psi[i] *= std::polar(1.0, -kfac * k2);
            }
    Fft::backward(psi);

    for (std::size_t q = 0; q < psi.size(); ++q) {
        const double v = scale_second * V0[q] + p.coupling * std::norm(psi[q]);
        psi[q] *= std::polar(1.0, -v * half);
    }
}

inline ComplexField strang_step(const ComplexField& psi, const RealField& V0,
                                const PhysicsParams& p, double dt, double t0 = 0.0,
                                const PotentialSpec* pot = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("strang_step: dt must be positive");
    ComplexField out = psi;
    const double s1 = pot ? pot->scale(t0 + 0.25 * dt) : 1.0;
    const double s2 = pot ? pot->scale(t0 + 0.75 * dt) : 1.0;
    strang_step_inplace(out, V0, s1, s2, p, dt);
    return out;
}

/// Conservative step-size rule: dt = alpha / omega_max with omega_max the
/// fastest linear phase rate on the grid (kinetic band edge + potential +
/// interaction). Residual stacks sampled at this dt resolve every mode the
/// grid carries.
inline double preflight_dt(const GridSpec& g, const PotentialSpec& pot,
                           const PhysicsParams& p, double n_max, double alpha = 0.5) {
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double kmax = pi / g.spacing(a);
        k2 += kmax * kmax;
    }
    double w = p.hbar * k2 / (2.0 * p.mass);
    if (!pot.is_none()) w += linf_norm(pot.sample(g, p.mass)) / p.hbar;
    w += std::abs(p.coupling) * n_max / p.hbar;
    return alpha / w;
}

/// Integrates the wave equation from psi0, storing every stride-th step
/// (snapshot 0 included). Norm drift beyond 1e-8 relative or non-finite
/// values abort with the offending time.
inline Trajectory evolve(const ComplexField& psi0, const PotentialSpec& potential,
                         const PhysicsParams& params, double t_end, double dt,
                         int snapshot_stride = 1) {
    if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (snapshot_stride < 1) throw std::invalid_argument("evolve: stride must be >= 1");
    params.validate();

    const GridSpec& g = psi0.grid();
    const RealField V0 = potential.sample(g, params.mass);

    Trajectory traj;
    traj.params = params;
    traj.potential = potential;
    traj.dt = dt * snapshot_stride;

    const long nsteps = std::lround(t_end / dt);
    if (nsteps < 1) throw std::invalid_argument("evolve: t_end shorter than one step");

    ComplexField psi = psi0;
    const double norm0 = wave_norm(psi);

    auto record = [&](long step) {
        const double t = step * dt;
        traj.snapshots.push_back({t, psi});
        traj.diagnostics.push_back(
            {t, wave_norm(psi), total_energy(psi, V0, params)});
    };

    record(0);
    for (long s = 0; s < nsteps; ++s) {
        const double t = s * dt;
        strang_step_inplace(psi, V0, potential.scale(t + 0.25 * dt),
                            potential.scale(t + 0.75 * dt), params, dt);
        const double nrm = wave_norm(psi);
        if (!std::isfinite(nrm) || std::abs(nrm - norm0) > 1e-8 * norm0)
            throw NumericalAbort("evolve: norm drift or non-finite state", (s + 1) * dt);
        if ((s + 1) % snapshot_stride == 0) record(s + 1);
    }
    return traj;
}

inline std::vector<ConservedDiagnostics> conserved_diagnostics(const Trajectory& traj) {
    const RealField V0 = traj.potential.sample(traj.grid(), traj.params.mass);
    std::vector<ConservedDiagnostics> out;
    out.reserve(traj.snapshots.size());
    for (const auto& s : traj.snapshots)
        out.push_back({s.t, wave_norm(s.psi), total_energy(s.psi, V0, traj.params)});
    return out;
}

}  // namespace qlh
