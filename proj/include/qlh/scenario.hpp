#pragma once

#include <filesystem>

#include "qlh/analytic.hpp"
#include "qlh/config.hpp"
#include "qlh/io.hpp"

namespace qlh {

struct CheckOutcome {
    std::string check;
    bool passed = false;
    double measured = 0.0;
    double tol = 0.0;
    std::string detail;
};

struct RunSummary {
    std::string scenario;
    std::vector<CheckOutcome> outcomes;
    bool all_passed() const {
        for (const auto& o : outcomes)
            if (!o.passed) return false;
        return !outcomes.empty();
    }
};

namespace detail {

/// Independent verification solver for the integral check: leapfrog in time,
/// 4th-order centred finite differences in space, on a 2x padded periodic
/// box. Deliberately shares nothing with the spectral machinery.
class FdWaveOracle {
public:
    FdWaveOracle(const GridSpec& g, double c0, double dt)
        : g_(g), c0_(c0), dt_(dt), um_(g.size(), 0.0), uc_(g.size(), 0.0), un_(g.size(), 0.0) {}

    void step(const std::vector<double>& source) {
        const int N = g_.points(0);
        const double w = 1.0 / (12.0 * g_.spacing(0) * g_.spacing(0));
        auto at = [&](int i, int j, int k) {
            return uc_[(static_cast<std::size_t>((i + N) % N) * N + (j + N) % N) * N +
                       (k + N) % N];
        };
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                    double lap = -at(i + 2, j, k) + 16 * at(i + 1, j, k) + 16 * at(i - 1, j, k) -
                                 at(i - 2, j, k) - at(i, j + 2, k) + 16 * at(i, j + 1, k) +
                                 16 * at(i, j - 1, k) - at(i, j - 2, k) - at(i, j, k + 2) +
                                 16 * at(i, j, k + 1) + 16 * at(i, j, k - 1) - at(i, j, k - 2) -
                                 90 * at(i, j, k);
                    lap *= w;
                    const std::size_t q = (static_cast<std::size_t>(i) * N + j) * N + k;
                    un_[q] = 2 * uc_[q] - um_[q] + dt_ * dt_ * (c0_ * c0_ * lap + source[q]);
                }
        std::swap(um_, uc_);
        std::swap(uc_, un_);
    }

    double value(int i, int j, int k) const {
        const int N = g_.points(0);
        return uc_[(static_cast<std::size_t>(i) * N + j) * N + k];
    }

private:
    GridSpec g_;
    double c0_, dt_;
    std::vector<double> um_, uc_, un_;
};

inline std::vector<int> report_slices(int nslices) {
    std::vector<int> out;
    if (nslices < 5) return out;
    const int lo = 2, hi = nslices - 3;
    const int count = std::min(13, hi - lo + 1);
    for (int i = 0; i < count; ++i)
        out.push_back(lo + (hi - lo) * i / std::max(1, count - 1));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace detail

/// Pre-flight dt for a configured scenario (used when run.dt = auto).
inline double scenario_dt(const ScenarioConfig& cfg, const ComplexField& psi0) {
    if (cfg.dt > 0.0) return cfg.dt;
    return preflight_dt(cfg.grid, cfg.potential, cfg.physics, max_value(density(psi0)),
                        cfg.cfl_alpha);
}

/// Runs every configured check, writing reports/<check>.csv plus a
/// deterministic summary.txt under out_dir. Returns the outcomes; artifact
/// bytes depend only on the configuration and thread count.
inline RunSummary run_scenario(const ScenarioConfig& cfg,
                               const std::filesystem::path& out_dir, int threads = 1,
                               unsigned seed = 12345) {
    namespace fs = std::filesystem;
    RunSummary summary;
    summary.scenario = cfg.name;
    fs::create_directories(out_dir / "reports");
    if (cfg.emit_fields) fs::create_directories(out_dir / "fields");

    ComplexField psi0 = initialize_state(cfg.grid, cfg.initial, cfg.physics);

    Trajectory traj;
    bool have_traj = false;
    if (cfg.has_residual_check()) {
        const double dt = scenario_dt(cfg, psi0);
        const long nsteps = std::lround(cfg.t_end / dt);
        if (nsteps / cfg.snapshot_stride < 4)
            throw ConfigError("run window too short: residual stencils need at least 5 "
                              "snapshots (t_end / (dt * stride) >= 4), got dt = " +
                              std::to_string(dt));
        traj = evolve(psi0, cfg.potential, cfg.physics, cfg.t_end, dt, cfg.snapshot_stride);
        have_traj = true;

        if (cfg.emit_fields) {
            char name[32];
            for (int s = 0; s < traj.size(); ++s) {
                std::snprintf(name, sizeof(name), "snap_%06d.qlh", s);
                write_field(out_dir / "fields" / name, traj.snapshots[s].psi,
                            traj.snapshots[s].t);
            }
        }
    }

    auto residual_series = [&](const std::string& check) {
        std::vector<ResidualReport> series;
        for (int s : detail::report_slices(traj.size())) {
            if (check == "continuity")
                series.push_back(continuity_residual(traj, s, cfg.mask_floor));
            else if (check == "euler")
                series.push_back(euler_residual(traj, s, cfg.mask_floor));
            else if (check == "momentum")
                series.push_back(momentum_flux_residual(traj, s, cfg.lighthill.convention,
                                                        cfg.mask_floor));
            else if (check == "lighthill")
                series.push_back(lighthill_residual(traj, s, cfg.lighthill));
        }
        return series;
    };

    auto center_rel = [&](const std::vector<ResidualReport>& series) {
        // the slice closest to the window center
        const double tc = 0.5 * (traj.snapshots.front().t + traj.snapshots.back().t);
        double best = HUGE_VAL, rel = 0.0;
        for (const auto& r : series)
            if (std::abs(r.t - tc) < best) {
                best = std::abs(r.t - tc);
                rel = r.masked.rel;
            }
        return rel;
    };

    for (const std::string& check : cfg.checks) {
        CheckOutcome oc;
        oc.check = check;

        if (check == "continuity" || check == "euler" || check == "momentum" ||
            check == "lighthill") {
            auto series = residual_series(check);
            write_text(out_dir / "reports" / (check + ".csv"), residual_reports_csv(series));
            oc.measured = center_rel(series);
            oc.tol = check == "continuity"  ? cfg.tol_continuity
                     : check == "euler"     ? cfg.tol_euler
                     : check == "momentum"  ? cfg.tol_momentum
                                            : cfg.tol_lighthill;
            oc.passed = oc.measured < oc.tol;
            oc.detail = "masked relative L2 at the window center";
        } else if (check == "lighthill_comparison") {
            LighthillConfig audited = cfg.lighthill;
            audited.convention = SignConvention::audited();
            LighthillConfig printed = cfg.lighthill;
            printed.convention = SignConvention::printed_lighthill();
            std::vector<ResidualReport> aud, pri;
            for (int s : detail::report_slices(traj.size())) {
                aud.push_back(lighthill_residual(traj, s, audited));
                pri.push_back(lighthill_residual(traj, s, printed));
            }
            write_text(out_dir / "reports" / "lighthill_audited.csv",
                       residual_reports_csv(aud));
            write_text(out_dir / "reports" / "lighthill_printed.csv",
                       residual_reports_csv(pri));
            const double a = center_rel(aud), p = center_rel(pri);
            oc.measured = a;
            oc.tol = cfg.tol_lighthill;
            oc.passed = a < cfg.tol_lighthill && p > cfg.comparison_min_printed;
            std::ostringstream os;
            os << "audited rel " << csv_number(a) << " (tol " << cfg.tol_lighthill
               << "), printed rel " << csv_number(p) << " (must exceed "
               << cfg.comparison_min_printed << ")";
            oc.detail = os.str();
        } else if (check == "dispersion") {
            const double n0 = cfg.initial.amplitude * cfg.initial.amplitude;
            Background bg = uniform_background(cfg.grid, n0, cfg.physics);
            LinearConfig lc;
            lc.seed = seed;
            std::vector<DispersionPoint> pts;
            double worst = 0.0;
            for (int mode : cfg.dispersion_modes) {
                pts.push_back(measure_dispersion_mode(bg, mode, cfg.dispersion_periods, lc));
                worst = std::max(worst, pts.back().rel_error);
            }
            write_text(out_dir / "reports" / "dispersion.csv", dispersion_csv(pts));
            oc.measured = worst;
            oc.tol = cfg.tol_dispersion;
            oc.passed = worst < cfg.tol_dispersion;
            oc.detail = "worst |omega_measured/omega_analytic - 1| over the mode list";
        } else if (check == "circulation") {
            const double hx = cfg.grid.spacing(0), hy = cfg.grid.spacing(1);
            std::array<double, 3> c{cfg.initial.center[0], cfg.initial.center[1], 0};
            // the preset nudges on-node centers by half a cell; mirror that
            ComplexField probe = psi0;
            auto snapped = [&](int axis, double pos) {
                const double f = (pos - cfg.grid.origin(axis)) / cfg.grid.spacing(axis);
                return std::abs(f - std::round(f)) < 1e-9
                           ? pos + 0.5 * cfg.grid.spacing(axis)
                           : pos;
            };
            c[0] = snapped(0, c[0]);
            c[1] = snapped(1, c[1]);
            (void)hx;
            (void)hy;
            std::vector<std::array<double, 3>> loop;
            for (int s = 0; s < cfg.circulation_points; ++s) {
                const double th = 2.0 * pi * s / cfg.circulation_points;
                loop.push_back({c[0] + cfg.circulation_radius * std::cos(th),
                                c[1] + cfg.circulation_radius * std::sin(th), 0});
            }
            CirculationResult res = circulation(probe, loop, cfg.physics, cfg.mask_floor);
            const double quantum = res.quantum * cfg.initial.charge;
            std::ostringstream csv;
            csv << "charge,radius,value,expected,winding,deviation\n"
                << cfg.initial.charge << ',' << csv_number(cfg.circulation_radius) << ','
                << csv_number(res.value) << ',' << csv_number(quantum) << ',' << res.winding
                << ',' << csv_number(res.deviation) << '\n';
            write_text(out_dir / "reports" / "circulation.csv", csv.str());
            if (cfg.initial.charge == 0) {
                oc.measured = std::abs(res.value);
                oc.tol = cfg.tol_circulation_abs;
            } else {
                oc.measured = std::abs(res.value - quantum) / std::abs(quantum);
                oc.tol = cfg.tol_circulation_rel;
            }
            oc.passed = oc.measured < oc.tol && res.winding == cfg.initial.charge;
            oc.detail = cfg.initial.charge == 0 ? "absolute loop integral"
                                                : "relative deviation from 2 pi hbar l / m";
        } else if (check == "integral") {
            oc = [&] {
                CheckOutcome o;
                o.check = "integral";
                o.tol = cfg.integral.tol;
                if (cfg.grid.dim() != 3)
                    throw ConfigError("integral check requires a 3D grid");
                const auto& ic = cfg.integral;
                const double c0 = cfg.lighthill.c0;
                const double cs =
                    cfg.grid.origin(0) + 0.5 * (cfg.grid.extent(0) - cfg.grid.spacing(0));
                auto f_t = [&](double t) {
                    return std::exp(-(t - ic.pulse_center) * (t - ic.pulse_center) /
                                    (2 * ic.pulse_width * ic.pulse_width));
                };
                auto envelope = [&](double x, double y, double z) {
                    const double xs = x - cs, ys = y - cs, zs = z - cs;
                    return std::exp(-(xs * xs + ys * ys + zs * zs) / (ic.sigma * ic.sigma));
                };
                SourceHistory sh;
                sh.t0 = 0.0;
                sh.dt = ic.dt;
                for (int k = 0; k < ic.slices; ++k) {
                    SymTensorField T(cfg.grid);
                    const double fv = f_t(sh.t0 + k * sh.dt);
                    for (int a = 0; a < 3; ++a)
                        T.comp(a, a).fill_from([&](double x, double y, double z) {
                            return fv * envelope(x, y, z);
                        });
                    sh.T.push_back(std::move(T));
                }
                validate_source_history(sh);

                // padded oracle box, same spacing, doubled extent
                const double h = cfg.grid.spacing(0);
                const int Np = 2 * cfg.grid.points(0);
                GridSpec go = make_grid(
                    3, {2 * cfg.grid.extent(0), 2 * cfg.grid.extent(1), 2 * cfg.grid.extent(2)},
                    {Np, Np, Np},
                    {cfg.grid.origin(0) - cfg.grid.extent(0) / 2,
                     cfg.grid.origin(1) - cfg.grid.extent(1) / 2,
                     cfg.grid.origin(2) - cfg.grid.extent(2) / 2});
                RealField lapG(go);
                lapG.fill_from([&](double x, double y, double z) {
                    const double xs = x - cs, ys = y - cs, zs = z - cs;
                    const double r2 = xs * xs + ys * ys + zs * zs;
                    const double s2 = ic.sigma * ic.sigma;
                    return (4 * r2 / (s2 * s2) - 6 / s2) * std::exp(-r2 / s2);
                });

                const double r_obs = 13 * h;  // outside the support, inside the light cone
                std::vector<std::array<double, 3>> pts = {
                    {cs + r_obs, cs + h, cs - h},
                    {cs + h, cs + r_obs, cs + h},
                    {cs - h, cs + h, cs + r_obs},
                    {cs - r_obs, cs - h, cs + h},
                    {cs + 7 * h, cs + 7 * h, cs + 7 * h}};
                std::vector<std::array<int, 3>> pidx;
                for (auto& pt : pts)
                    pidx.push_back({int(std::lround((pt[0] - go.origin(0)) / h)),
                                    int(std::lround((pt[1] - go.origin(1)) / h)),
                                    int(std::lround((pt[2] - go.origin(2)) / h))});

                std::vector<double> t_obs;
                const double t_lo = ic.pulse_center + r_obs / c0 - 1.5 * ic.pulse_width;
                const double t_hi = ic.pulse_center + r_obs / c0 + 2.5 * ic.pulse_width;
                for (double t = t_lo; t <= t_hi; t += 0.1) t_obs.push_back(t);

                const double dt_or = 0.2 * h / c0;
                detail::FdWaveOracle wave(go, c0, dt_or);
                std::vector<double> S(go.size());
                std::vector<std::vector<double>> u_or(pts.size(),
                                                      std::vector<double>(t_obs.size(), 0.0));
                const int nsteps = static_cast<int>(t_hi / dt_or) + 1;
                for (int n = 0; n < nsteps; ++n) {
                    const double t = n * dt_or;
                    const double fv = f_t(t);
                    for (std::size_t q = 0; q < S.size(); ++q) S[q] = fv * lapG[q];
                    wave.step(S);
                    const double tn = (n + 1) * dt_or;
                    for (std::size_t io = 0; io < t_obs.size(); ++io)
                        if (std::abs(tn - t_obs[io]) < dt_or / 2)
                            for (std::size_t ip = 0; ip < pts.size(); ++ip)
                                u_or[ip][io] = wave.value(pidx[ip][0], pidx[ip][1], pidx[ip][2]);
                }

                IntegralConfig icfg;
                icfg.c0 = c0;
                icfg.kernel = cfg.lighthill.kernel;
                icfg.lambda = cfg.lighthill.lambda;
                icfg.zero_prehistory = true;
                std::vector<std::array<double, 3>> all_pts;
                std::vector<double> all_t;
                for (std::size_t ip = 0; ip < pts.size(); ++ip)
                    for (std::size_t io = 0; io < t_obs.size(); ++io) {
                        all_pts.push_back(pts[ip]);
                        all_t.push_back(t_obs[io]);
                    }
                auto vals = integral_solution_batch(sh, all_pts, all_t, icfg, threads);

                std::ostringstream csv;
                csv << "point,t,integral,oracle\n";
                double num = 0, den = 0;
                std::size_t q = 0;
                for (std::size_t ip = 0; ip < pts.size(); ++ip)
                    for (std::size_t io = 0; io < t_obs.size(); ++io, ++q) {
                        num += (vals[q] - u_or[ip][io]) * (vals[q] - u_or[ip][io]);
                        den += u_or[ip][io] * u_or[ip][io];
                        csv << ip << ',' << csv_number(t_obs[io]) << ',' << csv_number(vals[q])
                            << ',' << csv_number(u_or[ip][io]) << '\n';
                    }
                write_text(out_dir / "reports" / "integral.csv", csv.str());

                // advanced kernel against the time-mirrored history
                SourceHistory mir;
                mir.t0 = 0.0;
                mir.dt = sh.dt;
                for (int k = sh.size() - 1; k >= 0; --k) mir.T.push_back(sh.T[k]);
                const double ttot = (sh.size() - 1) * sh.dt;
                IntegralConfig adv = icfg;
                adv.kernel = KernelKind::advanced;
                adv.zero_prehistory = false;
                adv.zero_posthistory = true;
                double mirror_num = 0.0, mirror_den = 0.0;
                for (std::size_t ip = 0; ip < pts.size(); ++ip) {
                    const double t = t_obs[t_obs.size() / 2];
                    const double a = integral_solution(sh, pts[ip], t, icfg);
                    const double b = integral_solution(mir, pts[ip], ttot - t, adv);
                    mirror_num += (a - b) * (a - b);
                    mirror_den += a * a;
                }
                const double rel = std::sqrt(num / den);
                const double mirror_rel =
                    mirror_den > 0 ? std::sqrt(mirror_num / mirror_den) : 0.0;
                o.measured = std::max(rel, mirror_rel);
                o.passed = rel < o.tol && mirror_rel < o.tol;
                std::ostringstream os;
                os << "retarded vs leapfrog oracle rel L2 " << csv_number(rel)
                   << "; advanced-mirror rel " << csv_number(mirror_rel);
                o.detail = os.str();
                return o;
            }();
        } else if (check == "two_time") {
            const double n0 = cfg.initial.amplitude * cfg.initial.amplitude;
            Background bg = uniform_background(cfg.grid, n0, cfg.physics);
            LinearConfig lc;
            lc.seed = seed;
            RealField dn(cfg.grid);
            const auto& tt = cfg.two_time;
            dn.fill_from([&](double x, double, double) {
                double v = 0.0;
                for (std::size_t m = 0; m < tt.modes.size(); ++m)
                    v += tt.amplitude / double(m + 1) *
                         std::cos(2.0 * pi * tt.modes[m] * (x - cfg.grid.origin(0)) /
                                  cfg.grid.extent(0));
                return v;
            });
            PerturbationState s0{dn, RealField(cfg.grid, 0.0), 0.0};
            auto ivp = evolve_ivp(bg, s0, tt.steps * tt.dt, tt.dt, lc);
            TwoTimeReport rep;
            auto bvp = solve_two_time(bg, ivp.front().delta_n, ivp.back().delta_n, tt.steps,
                                      0.0, tt.steps * tt.dt, lc, &rep);
            double worst = 0.0;
            std::ostringstream csv;
            csv << "slice,t,l2_gap\n";
            for (int m = 1; m < tt.steps; ++m) {
                RealField d = bvp[m].delta_n;
                d -= ivp[m].delta_n;
                const double gap = l2_norm(d) / l2_norm(dn);
                worst = std::max(worst, gap);
                csv << m << ',' << csv_number(bvp[m].t) << ',' << csv_number(gap) << '\n';
            }
            write_text(out_dir / "reports" / "two_time.csv", csv.str());
            oc.measured = worst;
            oc.tol = tt.tol;
            oc.passed = rep.converged && worst < tt.tol;
            std::ostringstream os;
            os << "worst interior L2 gap (relative); solver iterations " << rep.iterations;
            oc.detail = os.str();
        } else {
            throw ConfigError("unknown check '" + check + "'");
        }

        summary.outcomes.push_back(oc);
    }

    // deterministic summary (recomputable from the CSVs)
    std::ostringstream os;
    os << "scenario=" << cfg.name << "\n";
    if (have_traj)
        os << "dt=" << csv_number(traj.dt) << " snapshots=" << traj.size()
           << " t_end=" << csv_number(cfg.t_end) << "\n";
    for (const auto& o : summary.outcomes)
        os << "check=" << o.check << " measured=" << csv_number(o.measured)
           << " tol=" << csv_number(o.tol) << " verdict=" << (o.passed ? "PASS" : "FAIL")
           << " detail=\"" << o.detail << "\"\n";
    os << "result=" << (summary.all_passed() ? "PASS" : "FAIL") << "\n";
    write_text(out_dir / "summary.txt", os.str());
    return summary;
}

// ---- convergence studies ----

struct ConvergenceRow {
    std::string check;
    int points = 0;
    double h = 0.0, dt = 0.0, rel = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::map<std::string, double> fitted_order;  // per check; NaN encodes "floor"
    std::map<std::string, std::string> order_label;
};

inline constexpr double kFloorRel = 1e-8;

/// Reruns the scenario's residual checks over a ladder of resolutions with
/// dt following the pre-flight rule (dt proportional to h^2 when kinetic
/// phases dominate) and least-squares fits log(rel) against log(dt).
/// Residuals already below 1e-8 everywhere report "floor" instead of an
/// order: there is nothing left to converge.
inline ConvergenceReport convergence_report(const ScenarioConfig& base,
                                            const std::vector<int>& ladder,
                                            const std::filesystem::path& out_dir) {
    if (ladder.size() < 3) throw ConfigError("convergence ladder needs at least 3 resolutions");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i] <= ladder[i - 1])
            throw ConfigError("convergence ladder must be strictly increasing");

    std::filesystem::create_directories(out_dir);
    ConvergenceReport rep;
    std::map<std::string, std::vector<std::pair<double, double>>> samples;  // check -> (dt, rel)

    for (int N : ladder) {
        ScenarioConfig cfg = base;
        std::array<int, 3> pts{1, 1, 1};
        std::array<double, 3> ext{1, 1, 1}, org{0, 0, 0};
        for (int a = 0; a < base.grid.dim(); ++a) {
            pts[a] = N;
            ext[a] = base.grid.extent(a);
            org[a] = base.grid.origin(a);
        }
        cfg.grid = make_grid(base.grid.dim(), ext, pts, org);
        if (base.dt > 0.0) {
            const double scale = double(base.grid.points(0)) / N;
            cfg.dt = base.dt * scale * scale;
        }
        ComplexField psi0 = initialize_state(cfg.grid, cfg.initial, cfg.physics);
        const double dt = scenario_dt(cfg, psi0);
        Trajectory traj =
            evolve(psi0, cfg.potential, cfg.physics, cfg.t_end, dt, cfg.snapshot_stride);
        const int mid = traj.size() / 2;
        for (const std::string& check : cfg.checks) {
            double rel = -1.0;
            if (check == "continuity")
                rel = continuity_residual(traj, mid, cfg.mask_floor).masked.rel;
            else if (check == "euler")
                rel = euler_residual(traj, mid, cfg.mask_floor).masked.rel;
            else if (check == "momentum")
                rel = momentum_flux_residual(traj, mid, cfg.lighthill.convention, cfg.mask_floor)
                          .masked.rel;
            else if (check == "lighthill")
                rel = lighthill_residual(traj, mid, cfg.lighthill).masked.rel;
            if (rel < 0.0) continue;
            double hmax = 0.0;
            for (int a = 0; a < cfg.grid.dim(); ++a)
                hmax = std::max(hmax, cfg.grid.spacing(a));
            rep.rows.push_back({check, N, hmax, traj.dt, rel});
            samples[check].push_back({traj.dt, rel});
        }
    }

    std::ostringstream csv;
    csv << "check,points,h,dt,L2_rel\n";
    for (const auto& row : rep.rows)
        csv << row.check << ',' << row.points << ',' << csv_number(row.h) << ','
            << csv_number(row.dt) << ',' << csv_number(row.rel) << '\n';

    for (auto& [check, pts] : samples) {
        double worst = 0.0;
        for (auto& [dt, rel] : pts) worst = std::max(worst, rel);
        if (worst < kFloorRel) {
            rep.fitted_order[check] = std::numeric_limits<double>::quiet_NaN();
            rep.order_label[check] = "floor";
            continue;
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& [dt, rel] : pts) {
            const double x = std::log(dt), y = std::log(std::max(rel, 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = double(pts.size());
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        rep.fitted_order[check] = slope;
        std::ostringstream lbl;
        lbl << std::setprecision(3) << slope;
        rep.order_label[check] = lbl.str();
    }
    for (auto& [check, label] : rep.order_label)
        csv << "# fitted_order_vs_dt," << check << ',' << label << '\n';
    write_text(out_dir / "convergence.csv", csv.str());
    return rep;
}

// ---- plot data ----

/// Turns an emitted CSV report into a gnuplot-ready .dat file plus a plain
/// script; no rendering happens here.
inline void emit_plot_data(const std::filesystem::path& report_csv,
                           const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string text = read_text(report_csv);
    std::istringstream is(text);
    std::string header;
    std::getline(is, header);

    const std::string stem = report_csv.stem().string();
    std::ostringstream dat;
    std::string line;
    std::vector<std::string> comments;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            comments.push_back(line);
            continue;
        }
        for (char& c : line)
            if (c == ',') c = ' ';
        dat << line << '\n';
    }

    std::ostringstream gp;
    std::string datname = stem + ".dat";
    std::ostringstream dathdr;
    dathdr << "# columns: " << header << '\n';
    for (const auto& c : comments) dathdr << c << '\n';

    if (header.rfind("t,L2_abs", 0) == 0) {
        gp << "set logscale y\nset xlabel 't'\nset ylabel 'residual L2'\n"
           << "plot '" << datname << "' using 1:2 with linespoints title 'masked L2', \\\n"
           << "     '" << datname << "' using 1:4 with linespoints title 'relative L2'\n";
    } else if (header.rfind("k,omega_measured", 0) == 0) {
        gp << "set xlabel 'k'\nset ylabel 'omega'\n"
           << "plot '" << datname << "' using 1:2 with points title 'measured', \\\n"
           << "     '" << datname << "' using 1:3 with lines title 'analytic'\n";
    } else if (header.rfind("check,points", 0) == 0) {
        gp << "set logscale xy\nset xlabel 'dt'\nset ylabel 'relative residual'\n"
           << "# fitted orders are recorded in the .dat header comments\n"
           << "plot '" << datname << "' using 4:5 with points title 'ladder'\n";
    } else {
        gp << "# no plotting recipe for this report type; raw columns follow the header\n"
           << "plot '" << datname << "' using 1:2 with linespoints\n";
    }

    write_text(out_dir / datname, dathdr.str() + dat.str());
    write_text(out_dir / (stem + ".gp"), gp.str());
}

// ---- the standard sign audit ----

/// Builds the canonical three-scenario suite at two resolutions and runs the
/// sign audit, writing the evidence table and derivation note.
inline AuditResult run_standard_audit(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto run_case = [&](PresetKind kind, double g_coupling, bool trap, int N) {
        PhysicsParams p;
        p.coupling = g_coupling;
        GridSpec g = make_grid_1d(40.0, N, -20.0);
        PresetSpec ps;
        ps.kind = kind;
        if (kind == PresetKind::gaussian) {
            ps.sigma = 2.0;
            ps.modes = {1, 0, 0};
        }
        if (kind == PresetKind::harmonic_ground) ps.omega = {1.0, 0, 0};
        PotentialSpec pot = trap ? PotentialSpec::harmonic({1.0, 0, 0}) : PotentialSpec::none();
        ComplexField psi0 = initialize_state(g, ps, p);
        const double dt = preflight_dt(g, pot, p, max_value(density(psi0)), 0.25);
        return evolve(psi0, pot, p, 12 * dt, dt, 1);
    };

    std::vector<AuditCase> suite;
    suite.push_back({"gaussian_free", run_case(PresetKind::gaussian, 0.0, false, 64),
                     run_case(PresetKind::gaussian, 0.0, false, 128)});
    suite.push_back({"dark_soliton", run_case(PresetKind::dark_soliton, 1.0, false, 64),
                     run_case(PresetKind::dark_soliton, 1.0, false, 128)});
    suite.push_back({"harmonic_ground", run_case(PresetKind::harmonic_ground, 0.0, true, 64),
                     run_case(PresetKind::harmonic_ground, 0.0, true, 128)});

    AuditResult res = sign_audit(suite);

    std::ostringstream csv;
    csv << "scenario,s_pi,s_g,rel_coarse,rel_fine,decays\n";
    for (const auto& row : res.rows)
        csv << row.scenario << ',' << row.s_pi << ',' << row.s_g << ','
            << csv_number(row.rel_coarse) << ',' << csv_number(row.rel_fine) << ','
            << (row.decays ? 1 : 0) << '\n';
    write_text(out_dir / "audit.csv", csv.str());
    write_text(out_dir / "derivation_note.txt", res.note);
    return res;
}

// ---- bundled scenario library ----

inline const std::map<std::string, std::string>& bundled_scenarios();

inline ScenarioConfig load_scenario(const std::string& config_arg) {
    namespace fs = std::filesystem;
    if (fs::exists(config_arg)) {
        return parse_scenario_config(read_text(config_arg), fs::path(config_arg).stem().string());
    }
    std::string key = config_arg;
    const auto dot = key.rfind(".cfg");
    if (dot != std::string::npos && dot == key.size() - 4) key.erase(dot);
    const auto& lib = bundled_scenarios();
    auto it = lib.find(key);
    if (it == lib.end())
        throw ConfigError("config '" + config_arg +
                          "' is neither a file nor a bundled scenario name");
    return parse_scenario_config(it->second, key);
}

inline const std::map<std::string, std::string>& bundled_scenarios() {
    static const std::map<std::string, std::string> lib = {
        {"plane_wave", R"(# traveling plane wave: every residual vanishes identically
[grid]
dim = 1
points = 64
extent = 6.283185307179586
origin = 0
[physics]
hbar = 1
mass = 1
g = 0
[initial]
preset = plane_wave
modes = 2
[run]
t_end = 0.12
dt = 0.01
[checks]
list = continuity euler momentum lighthill
tol_continuity = 1e-9
tol_euler = 1e-9
tol_momentum = 1e-9
tol_lighthill = 1e-9
)"},
        {"gaussian_free", R"(# boosted free packet against the closed-form spreading law
[grid]
dim = 1
points = 256
extent = 40
origin = -20
[physics]
hbar = 1
mass = 1
g = 0
[initial]
preset = gaussian
sigma = 2
modes = 1
[run]
t_end = 0.04
[checks]
list = continuity euler momentum lighthill
tol_euler = 1e-4
)"},
        {"harmonic_ground", R"(# trap ground state: stationary balance of V, Q and nothing else
[grid]
dim = 1
points = 256
extent = 40
origin = -20
[physics]
hbar = 1
mass = 1
g = 0
[potential]
kind = harmonic
omega = 1
[initial]
preset = harmonic_ground
omega = 1
[run]
t_end = 0.02
[checks]
list = continuity euler momentum lighthill
tol_euler = 1e-4
)"},
        {"dark_soliton", R"(# periodic kink pair on a repulsive background
[grid]
dim = 1
points = 256
extent = 40
origin = -20
[physics]
hbar = 1
mass = 1
g = 1
[initial]
preset = dark_soliton
n_inf = 1
[run]
t_end = 0.04
[checks]
list = continuity momentum lighthill
)"},
        {"bright_soliton", R"(# attractive self-bound packet
[grid]
dim = 1
points = 256
extent = 40
origin = -20
[physics]
hbar = 1
mass = 1
g = -1
[initial]
preset = bright_soliton
amplitude = 1
[run]
t_end = 0.04
[checks]
list = continuity lighthill
)"},
        {"vortex2d", R"(# singly quantized vortex; circulation quantization probe
[grid]
dim = 2
points = 1024
extent = 6.283185307179586
origin = 0
[physics]
hbar = 1
mass = 1
g = 0
[initial]
preset = vortex
charge = 1
n_inf = 1
center = 3.141592653589793 3.141592653589793
[checks]
list = circulation
[circulation]
radius = 1.8
points = 8192
)"},
        {"bogoliubov_uniform", R"(# uniform interacting background; collective-mode dispersion
[grid]
dim = 1
points = 256
extent = 62.83185307179586
origin = 0
[physics]
hbar = 1
mass = 1
g = 1
[initial]
preset = uniform
amplitude = 1
[checks]
list = dispersion
[dispersion]
modes = 1 3 6 10 15 20
periods = 5
tol = 0.005
)"},
        {"manufactured_source_3d", R"(# pulsed isotropic source vs an independent wave-equation solve
[grid]
dim = 3
points = 32
extent = 10
origin = -5
[physics]
hbar = 1
mass = 1
g = 0
[initial]
preset = uniform
amplitude = 1
[checks]
list = integral
[integral]
sigma = 0.95
pulse_width = 0.8
pulse_center = 3.2
dt = 0.08
slices = 84
tol = 0.05
)"},
        {"two_time_demo", R"(# boundary-value reconstruction of an initial-value run
[grid]
dim = 1
points = 128
extent = 62.83185307179586
origin = 0
[physics]
hbar = 1
mass = 1
g = 1
[initial]
preset = uniform
amplitude = 1
[checks]
list = two_time
[two_time]
steps = 256
dt = 0.02
tol = 1e-6
modes = 2 3
amplitude = 0.01
)"},
        {"paper_convention_comparison", R"(# audited bracket converges; the printed bracket cannot
[grid]
dim = 1
points = 256
extent = 40
origin = -20
[physics]
hbar = 1
mass = 1
g = 0
[initial]
preset = gaussian
sigma = 2
modes = 1
[run]
t_end = 0.04
[checks]
list = lighthill_comparison
)"},
    };
    return lib;
}

}  // namespace qlh
