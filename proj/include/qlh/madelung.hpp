#pragma once

#include <optional>
#include <queue>
#include <vector>

#include "qlh/gpe.hpp"
#include "qlh/residual.hpp"

namespace qlh {

/// Reporting mask: points with n > floor * max(n). Default floor for
/// asserting velocity/phase/Q values.
inline constexpr double kMaskFloor = 1e-8;

/// Much lower floor used only to guard pointwise divisions. Ratio terms like
/// grad(n) grad(n)/n stay regular through quadratic wavefunction nodes, so
/// division is safe essentially wherever n is nonzero in double precision.
inline constexpr double kDivFloor = 1e-13;

/// Steepest logarithmic slope a sampled density can genuinely carry. A
/// quadratic node puts |grad n / n| = 2/d at distance d, so samples half a
/// cell away reach 4/h; the factor 4 on the band limit pi/h keeps all such
/// genuine values untouched. Where the density is many orders below its
/// peak, transform roundoff in grad(n) divided by n fakes slopes orders of
/// magnitude beyond this bound; those are artifacts and get clamped.
inline double resolvable_log_slope(const GridSpec& g) {
    double h = HUGE_VAL;
    for (int a = 0; a < g.dim(); ++a) h = std::min(h, g.spacing(a));
    return 4.0 * pi / h;
}

/// Fastest representable flow speed (band-limit de Broglie velocity).
inline double resolvable_speed(const GridSpec& g, const PhysicsParams& p) {
    return p.hbar * resolvable_log_slope(g) / p.mass;
}

inline double clamp_magnitude(double v, double bound) {
    if (v > bound) return bound;
    if (v < -bound) return -bound;
    return v;
}

inline RealField density(const ComplexField& psi) {
    RealField n(psi.grid());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = std::norm(psi[i]);
    return n;
}

inline BoolField make_mask(const RealField& n, double floor = kMaskFloor) {
    BoolField m(n.grid());
    const double cut = floor * max_value(n);
    for (std::size_t i = 0; i < n.size(); ++i) m.set(i, n[i] > cut);
    return m;
}

/// Momentum density j = (hbar/m) Im(conj(psi) grad psi) = n v. Smooth even
/// through nodes; no division involved.
inline VectorField momentum_density(const ComplexField& psi, const PhysicsParams& p) {
    const GridSpec& g = psi.grid();
    VectorField j(g);
    const double f = p.hbar / p.mass;
    for (int a = 0; a < g.dim(); ++a) {
        ComplexField d = spectral_gradient(psi, a);
        for (std::size_t i = 0; i < d.size(); ++i)
            j.comp(a)[i] = f * std::imag(std::conj(psi[i]) * d[i]);
    }
    return j;
}

/// Velocity from the logarithmic-derivative formula,
/// v = (hbar/m) Im(grad psi / psi); zero (and flagged by the mask) where the
/// density is below the division floor.
inline VectorField velocity(const ComplexField& psi, const PhysicsParams& p,
                            double div_floor = kDivFloor) {
    const RealField n = density(psi);
    const double cut = div_floor * max_value(n);
    const double vmax = resolvable_speed(psi.grid(), p);
    VectorField v = momentum_density(psi, p);
    for (int a = 0; a < v.components(); ++a)
        for (std::size_t i = 0; i < n.size(); ++i)
            v.comp(a)[i] = n[i] > cut ? clamp_magnitude(v.comp(a)[i] / n[i], vmax) : 0.0;
    return v;
}

/// Velocity gradient d_b v_a assembled pointwise from wavefunction
/// derivatives: (hbar/m) Im[dd psi/psi - (d psi)(d psi)/psi^2]. Avoids
/// differentiating the masked v field, which is not spectrally smooth.
inline std::vector<VectorField> velocity_gradient(const ComplexField& psi,
                                                  const PhysicsParams& p,
                                                  double div_floor = kDivFloor) {
    const GridSpec& g = psi.grid();
    const int d = g.dim();
    const RealField n = density(psi);
    const double cut = div_floor * max_value(n);

    std::vector<ComplexField> d1;
    d1.reserve(d);
    for (int a = 0; a < d; ++a) d1.push_back(spectral_gradient(psi, a));

    const double f = p.hbar / p.mass;
    std::vector<VectorField> grad(d, VectorField(g));  // grad[a].comp(b) = d_b v_a
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            ComplexField dd = spectral_gradient(d1[a], b);
            for (std::size_t i = 0; i < n.size(); ++i) {
                double val = 0.0;
                if (n[i] > cut) {
                    const complexd ps = psi[i];
                    const complexd r = dd[i] / ps - (d1[a][i] * d1[b][i]) / (ps * ps);
                    val = f * std::imag(r);
                }
                grad[a].comp(b)[i] = val;
                if (b != a) grad[b].comp(a)[i] = val;  // d_b v_a = d_a v_b (v is a gradient flow)
            }
        }
    return grad;
}

/// Bohm quantum potential Q = -(hbar^2/2m) lap(sqrt n)/sqrt n, zero outside
/// the mask. Note sqrt(n) has a cusp at wavefunction nodes; there the
/// spectral route is unreliable (see stress_tensor for the node-safe form).
inline RealField quantum_potential(const RealField& n, const PhysicsParams& p,
                                   double mask_floor = kMaskFloor) {
    RealField r(n.grid());
    for (std::size_t i = 0; i < n.size(); ++i) r[i] = std::sqrt(std::max(n[i], 0.0));
    RealField lap = spectral_laplacian(r);
    const double cut = mask_floor * max_value(n);
    const double f = -p.hbar * p.hbar / (2.0 * p.mass);
    RealField q(n.grid());
    for (std::size_t i = 0; i < n.size(); ++i)
        q[i] = n[i] > cut ? f * lap[i] / r[i] : 0.0;
    return q;
}

// ---- phase extraction ----

struct PhaseRegion {
    int id = 0;
    std::size_t seed = 0;      // reference point; S(seed) = hbar * arg(psi(seed))
    std::size_t npoints = 0;
    bool multivalued = false;  // a loop in the region winds: no single-valued S
    double max_defect = 0.0;   // largest loop inconsistency, units of hbar
};

/// S = hbar * arg(psi), unwrapped by BFS along axis lines within each
/// connected masked region. Each region's S is defined up to one global
/// 2 pi hbar integer; regions enclosing a vortex are flagged multivalued.
struct PhaseExtraction {
    RealField S;               // zero outside the mask
    BoolField mask;
    std::vector<PhaseRegion> regions;
    bool any_multivalued = false;
};

inline PhaseExtraction phase_extract(const ComplexField& psi, const PhysicsParams& p,
                                     double mask_floor = kMaskFloor) {
    const GridSpec& g = psi.grid();
    const RealField n = density(psi);
    PhaseExtraction out;
    out.mask = make_mask(n, mask_floor);
    out.S = RealField(g, 0.0);

    std::vector<int> region_of(g.size(), -1);
    const double two_pi_h = 2.0 * pi * p.hbar;

    auto principal = [](double a) {
        while (a > pi) a -= 2.0 * pi;
        while (a <= -pi) a += 2.0 * pi;
        return a;
    };

    auto for_each_neighbor = [&](std::size_t i, auto&& fn) {
        const int nz = g.points(2), ny = g.points(1);
        const int iz = static_cast<int>(i % nz);
        const int iy = static_cast<int>((i / nz) % ny);
        const int ix = static_cast<int>(i / (static_cast<std::size_t>(ny) * nz));
        const int idx[3] = {ix, iy, iz};
        for (int a = 0; a < g.dim(); ++a)
            for (int s = -1; s <= 1; s += 2) {
                int q[3] = {idx[0], idx[1], idx[2]};
                q[a] = g.wrap(a, q[a] + s);
                fn(g.index(q[0], q[1], q[2]));
            }
    };

    int next_id = 0;
    for (std::size_t seed = 0; seed < g.size(); ++seed) {
        if (!out.mask[seed] || region_of[seed] >= 0) continue;
        PhaseRegion reg;
        reg.id = next_id++;
        reg.seed = seed;
        std::queue<std::size_t> q;
        q.push(seed);
        region_of[seed] = reg.id;
        out.S[seed] = p.hbar * std::arg(psi[seed]);
        while (!q.empty()) {
            const std::size_t i = q.front();
            q.pop();
            ++reg.npoints;
            for_each_neighbor(i, [&](std::size_t nb) {
                if (!out.mask[nb] || region_of[nb] >= 0) return;
                region_of[nb] = reg.id;
                const double step = principal(std::arg(psi[nb]) - std::arg(psi[i]));
                out.S[nb] = out.S[i] + p.hbar * step;
                q.push(nb);
            });
        }
        out.regions.push_back(reg);
    }

    // loop-consistency audit: every masked edge must close to the same branch
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!out.mask[i]) continue;
        for_each_neighbor(i, [&](std::size_t nb) {
            if (!out.mask[nb] || region_of[nb] != region_of[i]) return;
            const double step = principal(std::arg(psi[nb]) - std::arg(psi[i]));
            const double defect = std::abs(out.S[nb] - out.S[i] - p.hbar * step);
            PhaseRegion& reg = out.regions[region_of[i]];
            reg.max_defect = std::max(reg.max_defect, defect);
            if (defect > 0.25 * two_pi_h) reg.multivalued = true;
        });
    }
    for (const auto& r : out.regions) out.any_multivalued |= r.multivalued;
    return out;
}

// ---- bundle ----

/// Hydrodynamic picture of one snapshot. v, S, Q are only asserted on the
/// mask; n = |psi|^2 holds everywhere by construction.
struct HydroBundle {
    RealField n;
    VectorField v;
    RealField Q;
    std::optional<RealField> S;
    BoolField mask;
    double mask_floor = kMaskFloor;
};

inline HydroBundle make_bundle(const ComplexField& psi, const PhysicsParams& p,
                               double mask_floor = kMaskFloor, bool with_phase = false) {
    HydroBundle b;
    b.n = density(psi);
    b.mask = make_mask(b.n, mask_floor);
    b.v = velocity(psi, p);
    b.Q = quantum_potential(b.n, p, mask_floor);
    b.mask_floor = mask_floor;
    if (with_phase) b.S = phase_extract(psi, p, mask_floor).S;
    return b;
}

}  // namespace qlh
