#pragma once

#include <sstream>

#include "qlh/madelung.hpp"

namespace qlh {

enum class PotentialSourceForm { tensor_absorbed, dipole };

/// Sign bookkeeping for the momentum-flux equation
///   dt(n v_i) + d_j(n v_i v_j) = -(n/m) d_i V + s_pi d_j Pi_ij + s_g (g/2m) d_i n^2
/// and for how the external-potential source enters the density-wave
/// equation (absorbed into the delta_ij bracket vs. a separate dipole term).
struct SignConvention {
    int s_pi = +1;
    int s_g = -1;
    PotentialSourceForm potential_form = PotentialSourceForm::dipole;

    /// Convention validated by sign_audit: differentiating the two
    /// conservation laws forces +d_j Pi_ij and -(g/2m) d_i n^2 on the
    /// momentum RHS, and the dipole form (1/m) d_i(n d_i V) for V.
    static SignConvention audited() { return SignConvention{+1, -1, PotentialSourceForm::dipole}; }

    /// Momentum equation exactly as printed: -d_j Pi_ij, -(g/2m) d_i n^2.
    static SignConvention printed_momentum() {
        return SignConvention{-1, -1, PotentialSourceForm::tensor_absorbed};
    }

    /// Density-wave source bracket exactly as printed: +Pi_ij, -g n^2/2m,
    /// -n V/m delta_ij. (Note its g sign is opposite to what the printed
    /// momentum equation itself would produce.)
    static SignConvention printed_lighthill() {
        return SignConvention{-1, +1, PotentialSourceForm::tensor_absorbed};
    }

    std::string label() const {
        std::ostringstream os;
        os << "s_pi=" << (s_pi > 0 ? "+1" : "-1") << ",s_g=" << (s_g > 0 ? "+1" : "-1")
           << "," << (potential_form == PotentialSourceForm::dipole ? "dipole" : "tensor_absorbed");
        return os.str();
    }
};

/// Probability quantum stress tensor
///   Pi_ij = (hbar^2/4m^2)(d_i d_j n - d_i n d_j ln n),
/// a function of the density alone. The logarithmic term is evaluated as
/// d_i n d_j n / n, which stays regular through quadratic nodes.
inline SymTensorField stress_tensor(const RealField& n, const PhysicsParams& p,
                                    double div_floor = kDivFloor) {
    const GridSpec& g = n.grid();
    const int d = g.dim();
    SymTensorField Pi(g);
    const double cut = div_floor * max_value(n);
    const double slope_max = resolvable_log_slope(g);
    const double f = p.hbar * p.hbar / (4.0 * p.mass * p.mass);

    std::vector<RealField> dn;
    dn.reserve(d);
    for (int a = 0; a < d; ++a) dn.push_back(spectral_gradient(n, a));

    // the log term is n * (d_i ln n)(d_j ln n) with the log slopes clamped at
    // the band limit: far below the peak, roundoff in dn/n fakes huge slopes
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            RealField dd = spectral_gradient(dn[i], j);
            RealField& out = Pi.comp(i, j);
            for (std::size_t q = 0; q < n.size(); ++q) {
                double ratio = 0.0;
                if (n[q] > cut) {
                    const double li = clamp_magnitude(dn[i][q] / n[q], slope_max);
                    const double lj = clamp_magnitude(dn[j][q] / n[q], slope_max);
                    ratio = n[q] * li * lj;
                }
                out[q] = f * (dd[q] - ratio);
            }
        }
    return Pi;
}

/// d_j Pi_ij per row i.
inline VectorField tensor_divergence(const SymTensorField& T) {
    const GridSpec& g = T.grid();
    VectorField out(g);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j)
            out.comp(i) += spectral_gradient(T.comp(i, j), j);
    return out;
}

// ---- hydrodynamic snapshot history ----

/// Time window of (n, j) pairs at uniform spacing. Built either from a
/// wavefunction trajectory or synthetically (e.g. for superposition probes);
/// continuity holds for any (n, j) superposition since both are linear in
/// the underlying pair.
struct HydroHistory {
    PhysicsParams params;
    PotentialSpec potential;
    double dt = 0.0;
    std::vector<double> t;
    std::vector<RealField> n;
    std::vector<VectorField> j;

    int size() const { return static_cast<int>(n.size()); }
    const GridSpec& grid() const { return n.front().grid(); }

    VectorField velocity_at(int s, double div_floor = kDivFloor) const {
        VectorField v = j[s];
        const double cut = div_floor * max_value(n[s]);
        const double vmax = resolvable_speed(grid(), params);
        for (int a = 0; a < v.components(); ++a)
            for (std::size_t i = 0; i < v.comp(a).size(); ++i)
                v.comp(a)[i] =
                    n[s][i] > cut ? clamp_magnitude(v.comp(a)[i] / n[s][i], vmax) : 0.0;
        return v;
    }
};

inline HydroHistory hydro_history(const Trajectory& traj, int first = 0, int count = -1) {
    if (count < 0) count = traj.size() - first;
    if (first < 0 || first + count > traj.size())
        throw std::invalid_argument("hydro_history: window out of range");
    for (int s = first; s + 1 < first + count; ++s) {
        const double step = traj.snapshots[s + 1].t - traj.snapshots[s].t;
        if (std::abs(step - traj.dt) > 1e-9 * traj.dt)
            throw std::invalid_argument("hydro_history: non-uniform snapshot spacing");
    }
    HydroHistory h;
    h.params = traj.params;
    h.potential = traj.potential;
    h.dt = traj.dt;
    for (int s = first; s < first + count; ++s) {
        h.t.push_back(traj.snapshots[s].t);
        h.n.push_back(density(traj.snapshots[s].psi));
        h.j.push_back(momentum_density(traj.snapshots[s].psi, traj.params));
    }
    return h;
}

/// Pointwise sum of two histories: n = n1 + n2, j = j1 + j2.
inline HydroHistory superpose(const HydroHistory& a, const HydroHistory& b) {
    if (a.size() != b.size()) throw std::invalid_argument("superpose: size mismatch");
    HydroHistory h = a;
    for (int s = 0; s < h.size(); ++s) {
        h.n[s] += b.n[s];
        h.j[s] += b.j[s];
    }
    return h;
}

namespace detail {

inline void check_interior(const HydroHistory& h, int slice, const char* who) {
    if (slice < 2 || slice > h.size() - 3)
        throw std::invalid_argument(std::string(who) + ": slice needs 2 temporal neighbors each side");
}

inline std::vector<const RealField*> window5(const std::vector<RealField>& v, int c) {
    return {&v[c - 2], &v[c - 1], &v[c], &v[c + 1], &v[c + 2]};
}

}  // namespace detail

/// Pointwise dt n + d_j(n v_j); convention-independent.
inline ResidualReport continuity_residual(const HydroHistory& h, int slice,
                                          double mask_floor = kMaskFloor) {
    detail::check_interior(h, slice, "continuity_residual");
    ResidualReport r;
    r.check = "continuity";
    r.t = h.t[slice];
    r.slice = slice;
    r.dt = h.dt;
    r.h = 0.0;
    for (int a = 0; a < h.grid().dim(); ++a) r.h = std::max(r.h, h.grid().spacing(a));

    auto w = detail::window5(h.n, slice);
    RealField dndt = time_stencil(std::span<const RealField* const>(w.data(), w.size()), h.dt, 1);
    RealField divj = spectral_divergence(h.j[slice]);

    const BoolField mask = make_mask(h.n[slice], mask_floor);
    r.field = dndt;
    r.field += divj;
    r.term_l2["dt_n"] = masked_l2_norm(dndt, mask);
    r.term_l2["div_j"] = masked_l2_norm(divj, mask);
    r.denom_masked = std::max(r.term_l2["dt_n"], r.term_l2["div_j"]);
    r.denom_unmasked = std::max(l2_norm(dndt), l2_norm(divj));
    detail::finalize_scalar_report(r, mask);
    return r;
}

inline ResidualReport continuity_residual(const Trajectory& traj, int slice,
                                          double mask_floor = kMaskFloor) {
    return continuity_residual(hydro_history(traj), slice, mask_floor);
}

/// Momentum-flux residual under a sign convention:
///   dt j_i + d_j(j_i j_j / n) + (n/m) d_i V - s_pi d_j Pi_ij - s_g (g/2m) d_i n^2.
inline ResidualReport momentum_flux_residual(const HydroHistory& h, int slice,
                                             const SignConvention& conv,
                                             double mask_floor = kMaskFloor) {
    detail::check_interior(h, slice, "momentum_flux_residual");
    const GridSpec& g = h.grid();
    const int d = g.dim();
    const PhysicsParams& p = h.params;
    const RealField& n = h.n[slice];

    ResidualReport r;
    r.check = "momentum";
    r.convention = conv.label();
    r.t = h.t[slice];
    r.slice = slice;
    r.dt = h.dt;
    for (int a = 0; a < d; ++a) r.h = std::max(r.h, g.spacing(a));

    // dt j
    VectorField djdt(g);
    {
        std::vector<RealField> comp(5, RealField(g));
        for (int a = 0; a < d; ++a) {
            for (int s = 0; s < 5; ++s) comp[s] = h.j[slice - 2 + s].comp(a);
            djdt.comp(a) = time_stencil(comp, h.dt, 1);
        }
    }

    // d_j (n v_i v_j) with band-limit-clamped v = j/n
    const VectorField vel = h.velocity_at(slice);
    SymTensorField flux(g);
    for (int i = 0; i < d; ++i)
        for (int jx = i; jx < d; ++jx) {
            RealField& f = flux.comp(i, jx);
            for (std::size_t q = 0; q < n.size(); ++q)
                f[q] = n[q] * vel.comp(i)[q] * vel.comp(jx)[q];
        }
    VectorField divflux = tensor_divergence(flux);

    // forces
    const double tscale = h.potential.scale(h.t[slice]);
    VectorField gradV = h.potential.sample_gradient(g, p.mass);
    VectorField vforce(g);
    for (int a = 0; a < d; ++a)
        for (std::size_t q = 0; q < n.size(); ++q)
            vforce.comp(a)[q] = n[q] * tscale * gradV.comp(a)[q] / p.mass;

    VectorField divPi = tensor_divergence(stress_tensor(n, p));

    RealField n2(g);
    for (std::size_t q = 0; q < n.size(); ++q) n2[q] = n[q] * n[q];
    VectorField gn2 = spectral_gradient_all(n2);
    gn2 *= p.coupling / (2.0 * p.mass);

    VectorField res = djdt;
    res += divflux;
    res += vforce;
    VectorField spi = divPi;
    spi *= static_cast<double>(conv.s_pi);
    res -= spi;
    VectorField sg = gn2;
    sg *= static_cast<double>(conv.s_g);
    res -= sg;

    const BoolField mask = make_mask(n, mask_floor);
    r.vector_field = res;
    r.field = magnitude(res);
    r.term_l2["dt_j"] = masked_l2_norm(magnitude(djdt), mask);
    r.term_l2["div_flux"] = masked_l2_norm(magnitude(divflux), mask);
    r.term_l2["V_force"] = masked_l2_norm(magnitude(vforce), mask);
    r.term_l2["div_Pi"] = masked_l2_norm(magnitude(divPi), mask);
    r.term_l2["g_force"] = masked_l2_norm(magnitude(gn2), mask);
    double dm = 0.0, du = 0.0;
    for (auto& [k, v] : r.term_l2) dm = std::max(dm, v);
    du = std::max({l2_norm(magnitude(djdt)), l2_norm(magnitude(divflux)),
                   l2_norm(magnitude(vforce)), l2_norm(magnitude(divPi)),
                   l2_norm(magnitude(gn2))});
    r.denom_masked = dm;
    r.denom_unmasked = du;
    detail::finalize_scalar_report(r, mask);
    return r;
}

inline ResidualReport momentum_flux_residual(const Trajectory& traj, int slice,
                                             const SignConvention& conv,
                                             double mask_floor = kMaskFloor) {
    return momentum_flux_residual(hydro_history(traj), slice, conv, mask_floor);
}

/// Euler (gradient-form Hamilton-Jacobi) residual
///   m(dt v + (v.grad)v) + grad(V + Q + g n).
/// grad Q is evaluated through the identity -(n/m) grad Q = div Pi so that no
/// spectral operator ever touches a masked field; the convective term uses
/// pointwise wavefunction-ratio derivatives for the same reason.
inline ResidualReport euler_residual(const Trajectory& traj, int slice,
                                     double mask_floor = kMaskFloor) {
    if (slice < 2 || slice > traj.size() - 3)
        throw std::invalid_argument("euler_residual: slice needs 2 temporal neighbors each side");
    const GridSpec& g = traj.grid();
    const int d = g.dim();
    const PhysicsParams& p = traj.params;

    ResidualReport r;
    r.check = "euler";
    r.t = traj.snapshots[slice].t;
    r.slice = slice;
    r.dt = traj.dt;
    for (int a = 0; a < d; ++a) r.h = std::max(r.h, g.spacing(a));

    // dt v from the five-slice window
    std::vector<VectorField> vs;
    vs.reserve(5);
    for (int s = slice - 2; s <= slice + 2; ++s)
        vs.push_back(velocity(traj.snapshots[s].psi, p));
    VectorField dvdt(g);
    {
        std::vector<RealField> comp(5, RealField(g));
        for (int a = 0; a < d; ++a) {
            for (int s = 0; s < 5; ++s) comp[s] = vs[s].comp(a);
            dvdt.comp(a) = time_stencil(comp, traj.dt, 1);
        }
    }

    const ComplexField& psi = traj.snapshots[slice].psi;
    const RealField n = density(psi);
    const VectorField& v = vs[2];
    const auto dv = velocity_gradient(psi, p);

    VectorField conv(g);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (std::size_t q = 0; q < n.size(); ++q)
                conv.comp(a)[q] += v.comp(b)[q] * dv[a].comp(b)[q];

    const double tscale = traj.potential.scale(r.t);
    VectorField gradV = traj.potential.sample_gradient(g, p.mass);
    gradV *= tscale;

    VectorField divPi = tensor_divergence(stress_tensor(n, p));
    const double cut = kDivFloor * max_value(n);
    VectorField gradQ(g);
    for (int a = 0; a < d; ++a)
        for (std::size_t q = 0; q < n.size(); ++q)
            gradQ.comp(a)[q] = n[q] > cut ? -p.mass * divPi.comp(a)[q] / n[q] : 0.0;

    VectorField gradgn = spectral_gradient_all(n);
    gradgn *= p.coupling;

    VectorField res = dvdt;
    res += conv;
    res *= p.mass;
    res += gradV;
    res += gradQ;
    res += gradgn;

    const BoolField mask = make_mask(n, mask_floor);
    r.vector_field = res;
    r.field = magnitude(res);
    VectorField inert = dvdt;
    inert += conv;
    inert *= p.mass;
    r.term_l2["m_dt_v_conv"] = masked_l2_norm(magnitude(inert), mask);
    r.term_l2["grad_V"] = masked_l2_norm(magnitude(gradV), mask);
    r.term_l2["grad_Q"] = masked_l2_norm(magnitude(gradQ), mask);
    r.term_l2["g_grad_n"] = masked_l2_norm(magnitude(gradgn), mask);
    double dm = 0.0;
    for (auto& [k, val] : r.term_l2) dm = std::max(dm, val);
    r.denom_masked = dm;
    r.denom_unmasked = std::max({l2_norm(magnitude(inert)), l2_norm(magnitude(gradV)),
                                 l2_norm(magnitude(gradQ)), l2_norm(magnitude(gradgn))});
    detail::finalize_scalar_report(r, mask);
    return r;
}

// ---- sign audit ----

struct AuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuditCase {
    std::string name;
    Trajectory coarse;
    Trajectory fine;
};

struct AuditRow {
    std::string scenario;
    int s_pi, s_g;
    double rel_coarse, rel_fine;
    bool decays;
};

struct AuditResult {
    SignConvention convention;
    bool s_g_determined = true;
    std::vector<AuditRow> rows;
    std::string note;  // human-readable derivation note
};

/// Determines (s_pi, s_g) by demanding that the momentum-flux residual decay
/// under refinement on every supplied scenario. Scenarios come in
/// coarse/fine pairs; a convention whose residual is O(1) on either member
/// of any pair is rejected. Fails hard if no convention (or every
/// convention) survives -- a suite that cannot discriminate is an error.
inline AuditResult sign_audit(const std::vector<AuditCase>& suite,
                              double mask_floor = kMaskFloor) {
    if (suite.size() < 3)
        throw AuditError("sign_audit: need at least 3 scenarios");

    constexpr double kFloorNorm = 1e-9;  // relative residuals below this count as floor
    AuditResult out;

    double max_pi_rel = 0.0, max_g_rel = 0.0;
    std::map<std::pair<int, int>, bool> all_decay;
    std::map<std::pair<int, int>, double> worst_fine;
    for (int spi : {+1, -1})
        for (int sg : {+1, -1}) {
            all_decay[{spi, sg}] = true;
            worst_fine[{spi, sg}] = 0.0;
        }

    for (const auto& c : suite) {
        const int mid_c = c.coarse.size() / 2;
        const int mid_f = c.fine.size() / 2;
        for (int spi : {+1, -1})
            for (int sg : {+1, -1}) {
                SignConvention conv{spi, sg, PotentialSourceForm::dipole};
                auto rc = momentum_flux_residual(c.coarse, mid_c, conv, mask_floor);
                auto rf = momentum_flux_residual(c.fine, mid_f, conv, mask_floor);
                if (spi == +1 && sg == -1) {
                    const double den = std::max(rf.denom_masked, 1e-300);
                    max_pi_rel = std::max(max_pi_rel, rf.term_l2["div_Pi"] / den);
                    max_g_rel = std::max(max_g_rel, rf.term_l2["g_force"] / den);
                }
                const bool decays = (rf.masked.rel < kFloorNorm) ||
                                    (rf.masked.rel <= 0.6 * rc.masked.rel);
                out.rows.push_back({c.name, spi, sg, rc.masked.rel, rf.masked.rel, decays});
                all_decay[{spi, sg}] = all_decay[{spi, sg}] && decays;
                worst_fine[{spi, sg}] = std::max(worst_fine[{spi, sg}], rf.masked.rel);
            }
    }

    if (max_pi_rel < 1e-6)
        throw AuditError("sign_audit: ambiguous -- no scenario exercises the quantum force "
                         "(all residual terms vanish identically)");
    out.s_g_determined = max_g_rel >= 1e-6;

    int n_decaying = 0;
    std::pair<int, int> winner{0, 0};
    double winner_norm = HUGE_VAL;
    for (auto& [key, dec] : all_decay) {
        if (!out.s_g_determined && key.second != -1) continue;  // collapse the inert axis
        if (dec) {
            ++n_decaying;
            if (worst_fine[key] < winner_norm) {
                winner_norm = worst_fine[key];
                winner = key;
            }
        }
    }
    if (n_decaying == 0)
        throw AuditError("sign_audit: ambiguous -- no convention decays under refinement");
    if (n_decaying > 1)
        throw AuditError("sign_audit: ambiguous -- multiple conventions decay; "
                         "suite does not discriminate");

    out.convention = SignConvention{winner.first, winner.second,
                                    PotentialSourceForm::dipole};

    std::ostringstream os;
    os << "sign audit of the momentum-flux equation\n"
       << "========================================\n\n"
       << "Parameterization:\n"
       << "  dt(n v_i) + d_j(n v_i v_j) = -(n/m) d_i V + s_pi d_j Pi_ij + s_g (g/2m) d_i n^2\n\n"
       << "Why a unique answer exists: with Pi_ij = (hbar^2/4m^2)(d_i d_j n - d_i n d_j ln n),\n"
       << "the pointwise identity -(n/m) d_i Q = +d_j Pi_ij fixes s_pi = +1, and\n"
       << "-(n/m) d_i (g n) = -(g/2m) d_i n^2 fixes s_g = -1. The audit below demonstrates\n"
       << "this numerically instead of assuming it: only one sign pair lets the residual\n"
       << "decay under grid/time refinement; the others leave an O(1) defect.\n\n"
       << "Evidence (masked relative L2 residual, coarse -> fine):\n";
    for (const auto& row : out.rows) {
        os << "  " << row.scenario << "  s_pi=" << (row.s_pi > 0 ? "+1" : "-1")
           << " s_g=" << (row.s_g > 0 ? "+1" : "-1") << "  " << row.rel_coarse << " -> "
           << row.rel_fine << (row.decays ? "  (decays)" : "  (stuck)") << "\n";
    }
    os << "\nResult: s_pi=" << (out.convention.s_pi > 0 ? "+1" : "-1");
    if (out.s_g_determined)
        os << ", s_g=" << (out.convention.s_g > 0 ? "+1" : "-1") << "\n";
    else
        os << ", s_g undetermined (no scenario with g != 0 in the suite)\n";
    os << "\nConsequences for the density-wave source bracket: the audited bracket is\n"
       << "  T_ij = n v_i v_j - c0^2 n delta_ij - Pi_ij + (g/2m) n^2 delta_ij\n"
       << "with the external potential entering as a separate dipole source\n"
       << "  (1/m) d_i(n d_i V),\n"
       << "not as -(nV/m) delta_ij inside the bracket (the product rule leaves a\n"
       << "(1/m) d_i(V d_i n) remainder that the absorbed form drops).\n";
    out.note = os.str();
    return out;
}

}  // namespace qlh
