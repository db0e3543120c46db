#pragma once

#include <array>
#include <mutex>
#include <thread>

#include "qlh/hydro.hpp"

namespace qlh {

enum class KernelKind { retarded, advanced, mixed };

struct LighthillConfig {
    double c0 = 1.0;  // arbitrary reference speed
    SignConvention convention = SignConvention::audited();
    double density_floor = kMaskFloor;
    KernelKind kernel = KernelKind::retarded;
    double lambda = 1.0;  // mixed kernel weight on the retarded branch

    void validate() const {
        if (!(c0 > 0.0)) throw ConfigError("lighthill: c0 must be positive");
        if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lighthill: lambda must be in [0,1]");
    }
};

/// Source tensor of the density-wave equation plus, in the audited
/// convention, the separate external-potential dipole term.
struct SourceTensorField {
    SymTensorField T;
    std::optional<RealField> dipole;
};

namespace detail {

/// T_ij = nvv_ij - c0^2 n delta_ij - s_pi Pi_ij - s_g (g/2m) n^2 delta_ij,
/// with the potential either absorbed (-nV/m on the diagonal) or emitted as
/// the dipole source (1/m) d_i(n d_i V).
inline SourceTensorField build_source(const RealField& n, const SymTensorField& nvv,
                                      const PotentialSpec& pot, double tscale,
                                      const PhysicsParams& p, const LighthillConfig& cfg) {
    const GridSpec& g = n.grid();
    const int d = g.dim();
    SourceTensorField out;
    out.T = nvv;
    const SymTensorField Pi = stress_tensor(n, p);
    const double gfac = cfg.convention.s_g * p.coupling / (2.0 * p.mass);

    RealField Vs;
    const bool absorbed = cfg.convention.potential_form == PotentialSourceForm::tensor_absorbed;
    if (absorbed && !pot.is_none()) {
        Vs = pot.sample(g, p.mass);
        Vs *= tscale;
    }

    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            RealField& t = out.T.comp(i, j);
            const RealField& pij = Pi.comp(i, j);
            for (std::size_t q = 0; q < n.size(); ++q) {
                double v = t[q] - cfg.convention.s_pi * pij[q];
                if (i == j) {
                    v -= cfg.c0 * cfg.c0 * n[q] + gfac * n[q] * n[q];
                    if (absorbed && !pot.is_none()) v -= n[q] * Vs[q] / p.mass;
                }
                t[q] = v;
            }
        }

    if (!absorbed && !pot.is_none()) {
        const VectorField gradV = pot.sample_gradient(g, p.mass);
        RealField dip(g, 0.0);
        for (int a = 0; a < d; ++a) {
            RealField prod(g);
            for (std::size_t q = 0; q < n.size(); ++q)
                prod[q] = n[q] * tscale * gradV.comp(a)[q];
            dip += spectral_gradient(prod, a);
        }
        dip *= 1.0 / p.mass;
        out.dipole = std::move(dip);
    }
    return out;
}

}  // namespace detail

/// Source tensor from a hydrodynamic snapshot (n v_i v_j built from the
/// bundle's velocity).
inline SourceTensorField assemble_source_tensor(const HydroBundle& b, const PotentialSpec& pot,
                                                const PhysicsParams& p,
                                                const LighthillConfig& cfg, double t = 0.0) {
    cfg.validate();
    const GridSpec& g = b.n.grid();
    SymTensorField nvv(g);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = i; j < g.dim(); ++j) {
            RealField& f = nvv.comp(i, j);
            for (std::size_t q = 0; q < b.n.size(); ++q)
                f[q] = b.n[q] * b.v.comp(i)[q] * b.v.comp(j)[q];
        }
    return detail::build_source(b.n, nvv, pot, pot.scale(t), p, cfg);
}

/// Pointwise d2n/dt2 - c0^2 lap n - d_i d_j T_ij (- dipole term when the
/// convention separates the potential). The c0^2 lap n term uses the same
/// discrete operator as the diagonal of double_divergence, so the two c0
/// contributions cancel to rounding for any c0.
inline ResidualReport lighthill_residual(const HydroHistory& h, int slice,
                                         const LighthillConfig& cfg) {
    cfg.validate();
    detail::check_interior(h, slice, "lighthill_residual");
    const GridSpec& g = h.grid();
    const int d = g.dim();
    const PhysicsParams& p = h.params;
    const RealField& n = h.n[slice];

    ResidualReport r;
    r.check = "lighthill";
    r.convention = cfg.convention.label();
    r.c0 = cfg.c0;
    r.t = h.t[slice];
    r.slice = slice;
    r.dt = h.dt;
    for (int a = 0; a < d; ++a) r.h = std::max(r.h, g.spacing(a));

    auto w = detail::window5(h.n, slice);
    RealField d2n = time_stencil(std::span<const RealField* const>(w.data(), w.size()), h.dt, 2);

    RealField lap = dd_laplacian(n);
    lap *= cfg.c0 * cfg.c0;

    const VectorField vel = h.velocity_at(slice);
    SymTensorField nvv(g);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            RealField& f = nvv.comp(i, j);
            for (std::size_t q = 0; q < n.size(); ++q)
                f[q] = n[q] * vel.comp(i)[q] * vel.comp(j)[q];
        }
    SourceTensorField src =
        detail::build_source(n, nvv, h.potential, h.potential.scale(r.t), p, cfg);
    RealField ddT = double_divergence(src.T);

    RealField res = d2n;
    res -= lap;
    res -= ddT;
    if (src.dipole) res -= *src.dipole;

    const BoolField mask = make_mask(n, cfg.density_floor);
    r.field = res;
    r.term_l2["d2t_n"] = masked_l2_norm(d2n, mask);
    r.term_l2["c0_lap_n"] = masked_l2_norm(lap, mask);
    r.term_l2["dd_T"] = masked_l2_norm(ddT, mask);
    if (src.dipole) r.term_l2["dipole"] = masked_l2_norm(*src.dipole, mask);
    double dm = 0.0;
    for (auto& [k, v] : r.term_l2) dm = std::max(dm, v);
    r.denom_masked = dm;
    r.denom_unmasked = std::max({l2_norm(d2n), l2_norm(lap), l2_norm(ddT),
                                 src.dipole ? l2_norm(*src.dipole) : 0.0});
    detail::finalize_scalar_report(r, mask);
    return r;
}

inline ResidualReport lighthill_residual(const Trajectory& traj, int slice,
                                         const LighthillConfig& cfg) {
    return lighthill_residual(hydro_history(traj), slice, cfg);
}

struct C0IndependenceReport {
    std::vector<ResidualReport> reports;
    double max_pointwise_difference = 0.0;
};

/// The residual field must be identical for every c0: the -c0^2 lap n terms
/// on the two sides cancel exactly when the same discrete operator is used
/// on both. Both contributions are still computed in full -- the check
/// observes the cancellation rather than eliding the terms.
inline C0IndependenceReport c0_independence_check(const HydroHistory& h, int slice,
                                                  const std::vector<double>& c0_list,
                                                  LighthillConfig cfg) {
    if (c0_list.size() < 2)
        throw std::invalid_argument("c0_independence_check: need at least 2 c0 values");
    C0IndependenceReport out;
    for (double c0 : c0_list) {
        cfg.c0 = c0;
        out.reports.push_back(lighthill_residual(h, slice, cfg));
    }
    const RealField& ref = out.reports.front().field;
    for (std::size_t r = 1; r < out.reports.size(); ++r)
        for (std::size_t i = 0; i < ref.size(); ++i)
            out.max_pointwise_difference = std::max(
                out.max_pointwise_difference, std::abs(out.reports[r].field[i] - ref[i]));
    return out;
}

// ---- integral solution (3D retarded/advanced kernel) ----

/// Uniform-dt stack of source tensors covering the emission window.
struct SourceHistory {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<SymTensorField> T;

    int size() const { return static_cast<int>(T.size()); }
    const GridSpec& grid() const { return T.front().grid(); }
};

struct IntegralConfig {
    double c0 = 1.0;
    KernelKind kernel = KernelKind::retarded;
    double lambda = 1.0;       // mixed weight on retarded
    bool near_field = false;       // allow evaluation next to / inside the support
    bool zero_prehistory = false;  // treat emission times before the history as T = 0
    bool zero_posthistory = false; // treat emission times after the history as T = 0
};

/// Checks that the source is compactly supported inside the box margins
/// (boundary shell amplitude below 1e-10 of the global maximum).
inline void validate_source_history(const SourceHistory& sh) {
    if (sh.grid().dim() != 3)
        throw std::invalid_argument("integral solution is 3D-only (1/4 pi r kernel)");
    if (sh.size() < 3) throw std::invalid_argument("source history needs >= 3 slices");
    const GridSpec& g = sh.grid();
    double global = 0.0, shell = 0.0;
    for (const auto& T : sh.T)
        for (int s = 0; s < T.components(); ++s) {
            global = std::max(global, linf_norm(T.comp_flat(s)));
            for (int ix = 0; ix < g.points(0); ++ix)
                for (int iy = 0; iy < g.points(1); ++iy)
                    for (int iz = 0; iz < g.points(2); ++iz) {
                        const bool on_shell = ix == 0 || iy == 0 || iz == 0 ||
                                              ix == g.points(0) - 1 || iy == g.points(1) - 1 ||
                                              iz == g.points(2) - 1;
                        if (on_shell)
                            shell = std::max(shell,
                                             std::abs(T.comp_flat(s).at(ix, iy, iz)));
                    }
        }
    if (shell > 1e-10 * global)
        throw std::invalid_argument(
            "source history is not compactly supported inside the box margins");
}

namespace detail {

struct SourceDerivatives {
    std::vector<SymTensorField> d1, d2;  // slices 1..K-2
    BoolField support;                   // nodes where |T| is ever non-negligible
};

inline SourceDerivatives source_time_derivatives(const SourceHistory& sh) {
    SourceDerivatives out;
    const int K = sh.size();
    for (int k = 1; k + 1 < K; ++k) {
        SymTensorField d1(sh.grid()), d2(sh.grid());
        for (int s = 0; s < d1.components(); ++s) {
            const RealField& m = sh.T[k - 1].comp_flat(s);
            const RealField& c = sh.T[k].comp_flat(s);
            const RealField& p = sh.T[k + 1].comp_flat(s);
            for (std::size_t q = 0; q < c.size(); ++q) {
                d1.comp_flat(s)[q] = (p[q] - m[q]) / (2.0 * sh.dt);
                d2.comp_flat(s)[q] = (p[q] - 2.0 * c[q] + m[q]) / (sh.dt * sh.dt);
            }
        }
        out.d1.push_back(std::move(d1));
        out.d2.push_back(std::move(d2));
    }
    out.support = BoolField(sh.grid());
    double gmax = 0.0;
    for (const auto& T : sh.T)
        for (int s = 0; s < T.components(); ++s) gmax = std::max(gmax, linf_norm(T.comp_flat(s)));
    // nodes carrying less than 1e-6 of the peak amplitude contribute below
    // quadrature accuracy even from one cell away and do not count as support
    const double cut = 1e-6 * gmax;
    for (const auto& T : sh.T)
        for (int s = 0; s < T.components(); ++s)
            for (std::size_t q = 0; q < T.comp_flat(s).size(); ++q)
                if (std::abs(T.comp_flat(s)[q]) > cut) out.support.set(q, true);
    return out;
}

/// One kernel evaluation (retarded sign = -1, advanced = +1). The reception
/// derivatives d_i d_j are applied analytically through the kernel:
///   d_i d_j [T(tau)/r] = rr_i rr_j T''/(c0^2 r)
///                      + (3 rr_i rr_j - delta_ij)(T'/(c0 r^2) + T/r^3).
inline double integral_eval(const SourceHistory& sh, const SourceDerivatives& der,
                            const std::array<double, 3>& x, double t, double sign,
                            const IntegralConfig& cfg) {
    const GridSpec& g = sh.grid();
    const int K = sh.size();
    const double tlo = sh.t0 + sh.dt;            // derivatives defined on [1, K-2]
    const double thi = sh.t0 + (K - 2) * sh.dt;
    const double rskip = 0.5 * g.spacing(0);
    const double rguard = 1.01 * g.spacing(0);

    double acc = 0.0;
    for (int ix = 0; ix < g.points(0); ++ix)
        for (int iy = 0; iy < g.points(1); ++iy)
            for (int iz = 0; iz < g.points(2); ++iz) {
                const double dx = x[0] - g.coord(0, ix);
                const double dy = x[1] - g.coord(1, iy);
                const double dz = x[2] - g.coord(2, iz);
                const double r2 = dx * dx + dy * dy + dz * dz;
                const double r = std::sqrt(r2);
                if (!der.support[g.index(ix, iy, iz)]) continue;
                if (r < rguard && !cfg.near_field)
                    throw std::invalid_argument(
                        "integral_solution: reception point inside (or grazing) the source "
                        "support (enable near_field)");
                if (r < rskip) continue;  // excluded cell in near-field mode
                const double tau = t + sign * r / cfg.c0;
                if (tau < tlo) {
                    if (cfg.zero_prehistory) continue;
                    throw std::invalid_argument("integral_solution: cone not covered by history (early)");
                }
                if (tau > thi) {
                    if (cfg.zero_posthistory) continue;
                    throw std::invalid_argument("integral_solution: cone not covered by history (late)");
                }

                const double s = (tau - sh.t0) / sh.dt;  // in [1, K-2]
                int k = static_cast<int>(std::floor(s));
                if (k >= K - 2) k = K - 3;
                const double w = s - k;
                const int kd = k - 1;  // derivative stacks start at slice 1

                const double rx = dx / r, ry = dy / r, rz = dz / r;
                const double rr[3] = {rx, ry, rz};

                double A0 = 0, A1 = 0, A2 = 0;  // rr_i rr_j contractions of T, T', T''
                double B0 = 0, B1 = 0, B2 = 0;  // traces
                for (int i = 0; i < 3; ++i)
                    for (int jj = i; jj < 3; ++jj) {
                        const int sidx = sym_index(3, i, jj);
                        const std::size_t q = g.index(ix, iy, iz);
                        const double T0 = (1 - w) * sh.T[k].comp_flat(sidx)[q] +
                                          w * sh.T[k + 1].comp_flat(sidx)[q];
                        const double T1 = (1 - w) * der.d1[kd].comp_flat(sidx)[q] +
                                          w * der.d1[kd + 1].comp_flat(sidx)[q];
                        const double T2 = (1 - w) * der.d2[kd].comp_flat(sidx)[q] +
                                          w * der.d2[kd + 1].comp_flat(sidx)[q];
                        const double geom = rr[i] * rr[jj] * (i == jj ? 1.0 : 2.0);
                        A0 += geom * T0;
                        A1 += geom * T1;
                        A2 += geom * T2;
                        if (i == jj) {
                            B0 += T0;
                            B1 += T1;
                            B2 += T2;
                        }
                    }
                acc += A2 / (cfg.c0 * cfg.c0 * r) +
                       (3.0 * A1 - B1) / (cfg.c0 * r2) + (3.0 * A0 - B0) / (r2 * r);
            }
    const double h3 = g.spacing(0) * g.spacing(1) * g.spacing(2);
    return acc * h3 / (4.0 * pi * cfg.c0 * cfg.c0);
}

}  // namespace detail

/// Density value at (x, t) from the free-space integral solution with
/// trapezoidal spatial weights and linear interpolation in emission time.
/// Precompute the derivative stacks once per history when evaluating many
/// reception points (see integral_solution_batch).
inline double integral_solution(const SourceHistory& sh, const std::array<double, 3>& x,
                                double t, const IntegralConfig& cfg) {
    if (sh.grid().dim() != 3)
        throw std::invalid_argument("integral solution is 3D-only (1/4 pi r kernel)");
    const auto der = detail::source_time_derivatives(sh);
    switch (cfg.kernel) {
        case KernelKind::retarded:
            return detail::integral_eval(sh, der, x, t, -1.0, cfg);
        case KernelKind::advanced:
            return detail::integral_eval(sh, der, x, t, +1.0, cfg);
        case KernelKind::mixed:
            return cfg.lambda * detail::integral_eval(sh, der, x, t, -1.0, cfg) +
                   (1.0 - cfg.lambda) * detail::integral_eval(sh, der, x, t, +1.0, cfg);
    }
    return 0.0;
}

/// Batch evaluation, parallel over reception points; results are written
/// into per-point slots so the output is independent of thread count.
inline std::vector<double> integral_solution_batch(
    const SourceHistory& sh, const std::vector<std::array<double, 3>>& pts,
    const std::vector<double>& times, const IntegralConfig& cfg, int threads = 1) {
    if (pts.size() != times.size())
        throw std::invalid_argument("integral_solution_batch: points/times size mismatch");
    const auto der = detail::source_time_derivatives(sh);
    std::vector<double> out(pts.size(), 0.0);
    std::exception_ptr first_error = nullptr;
    std::mutex err_mtx;
    auto work = [&](std::size_t lo, std::size_t hi) {
        try {
        for (std::size_t i = lo; i < hi; ++i) {
            switch (cfg.kernel) {
                case KernelKind::retarded:
                    out[i] = detail::integral_eval(sh, der, pts[i], times[i], -1.0, cfg);
                    break;
                case KernelKind::advanced:
                    out[i] = detail::integral_eval(sh, der, pts[i], times[i], +1.0, cfg);
                    break;
                case KernelKind::mixed:
                    out[i] = cfg.lambda *
                                 detail::integral_eval(sh, der, pts[i], times[i], -1.0, cfg) +
                             (1.0 - cfg.lambda) *
                                 detail::integral_eval(sh, der, pts[i], times[i], +1.0, cfg);
                    break;
            }
        }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mtx);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (threads <= 1) {
        work(0, pts.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (pts.size() + threads - 1) / threads;
        for (int tdx = 0; tdx < threads; ++tdx) {
            const std::size_t lo = tdx * chunk;
            const std::size_t hi = std::min(pts.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

// ---- circulation ----

struct CirculationResult {
    double value = 0.0;        // loop integral of v . dl
    long winding = 0;          // nearest integer multiple of 2 pi hbar / m
    double deviation = 0.0;    // value - winding * quantum
    double quantum = 0.0;      // 2 pi hbar / m
};

namespace detail {

/// Multilinear (bi/tri-linear) periodic interpolation of a real field.
inline double interpolate(const RealField& f, const std::array<double, 3>& x) {
    const GridSpec& g = f.grid();
    const int d = g.dim();
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double u = (x[a] - g.origin(a)) / g.spacing(a);
        const double fl = std::floor(u);
        base[a] = g.wrap(a, static_cast<int>(fl));
        frac[a] = u - fl;
    }
    double acc = 0.0;
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        int idx[3] = {base[0], base[1], base[2]};
        for (int a = 0; a < d; ++a) {
            const int bit = (c >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            if (bit) idx[a] = g.wrap(a, idx[a] + 1);
        }
        acc += w * f.at(idx[0], idx[1], idx[2]);
    }
    return acc;
}

inline void check_loop_clearance(const BoolField& mask, const std::array<double, 3>& x) {
    const GridSpec& g = mask.grid();
    const int d = g.dim();
    int base[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a)
        base[a] = static_cast<int>(std::floor((x[a] - g.origin(a)) / g.spacing(a)));
    // require the enclosing cell plus one cell of margin to be fully masked
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        lo[a] = base[a] - 1;
        hi[a] = base[a] + 2;
    }
    for (int ix = lo[0]; ix <= hi[0]; ++ix)
        for (int iy = (d > 1 ? lo[1] : 0); iy <= (d > 1 ? hi[1] : 0); ++iy)
            for (int iz = (d > 2 ? lo[2] : 0); iz <= (d > 2 ? hi[2] : 0); ++iz) {
                const std::size_t q =
                    g.index(g.wrap(0, ix), d > 1 ? g.wrap(1, iy) : 0, d > 2 ? g.wrap(2, iz) : 0);
                if (!mask[q])
                    throw std::invalid_argument(
                        "circulation: loop intersects (or grazes) the masked-out region");
            }
}

}  // namespace detail

/// Loop integral of the bilinearly interpolated velocity along a closed
/// polyline, with the nearest circulation quantum reported alongside.
inline CirculationResult circulation(const ComplexField& psi,
                                     const std::vector<std::array<double, 3>>& loop,
                                     const PhysicsParams& p, double mask_floor = kMaskFloor) {
    if (loop.size() < 3) throw std::invalid_argument("circulation: loop needs >= 3 vertices");
    const VectorField v = velocity(psi, p);
    const BoolField mask = make_mask(density(psi), mask_floor);
    const GridSpec& g = psi.grid();
    const int d = g.dim();

    for (const auto& pt : loop) detail::check_loop_clearance(mask, pt);

    double acc = 0.0;
    for (std::size_t s = 0; s < loop.size(); ++s) {
        const auto& a = loop[s];
        const auto& b = loop[(s + 1) % loop.size()];
        for (int ax = 0; ax < d; ++ax) {
            const double va = detail::interpolate(v.comp(ax), a);
            const double vb = detail::interpolate(v.comp(ax), b);
            acc += 0.5 * (va + vb) * (b[ax] - a[ax]);
        }
    }

    CirculationResult r;
    r.value = acc;
    r.quantum = 2.0 * pi * p.hbar / p.mass;
    r.winding = std::lround(acc / r.quantum);
    r.deviation = acc - r.winding * r.quantum;
    return r;
}

}  // namespace qlh
