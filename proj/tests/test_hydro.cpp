#include <catch2/catch_amalgamated.hpp>

#include "qlh/hydro.hpp"

using namespace qlh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory short_run(const ComplexField& psi0, const PotentialSpec& pot,
                     const PhysicsParams& p, int steps = 12) {
    const double nmax = max_value(density(psi0));
    const double dt = preflight_dt(psi0.grid(), pot, p, nmax);
    return evolve(psi0, pot, p, steps * dt, dt, 1);
}

}  // namespace

TEST_CASE("continuity residual") {
    PhysicsParams p;

    SECTION("plane wave vanishes to machine precision") {
        GridSpec g = make_grid_1d(2 * pi, 64);
        PresetSpec pw;
        pw.kind = PresetKind::plane_wave;
        pw.modes = {2, 0, 0};
        Trajectory tr = short_run(initialize_state(g, pw, p), PotentialSpec::none(), p);
        CHECK(continuity_residual(tr, 6).masked.l2 < 1e-12);
    }
    SECTION("harmonic ground: both terms vanish") {
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec hg;
        hg.kind = PresetKind::harmonic_ground;
        hg.omega = {1.0, 0, 0};
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        Trajectory tr = short_run(initialize_state(g, hg, p), pot, p);
        CHECK(continuity_residual(tr, 6).masked.l2 < 1e-10);
    }
    SECTION("free gaussian: small and 4th-order in dt") {
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec gs;
        gs.kind = PresetKind::gaussian;
        gs.sigma = 2.0;
        gs.modes = {5, 0, 0};  // fast transport so the stencil term dominates
        ComplexField psi0 = initialize_state(g, gs, p);
        auto l2_at = [&](double dt) {
            Trajectory tr = evolve(psi0, PotentialSpec::none(), p, 12 * dt, dt, 1);
            return continuity_residual(tr, 6).masked.l2;
        };
        const double c = l2_at(4e-2), f = l2_at(2e-2);
        CHECK(c < 1e-7);
        CHECK(c / f > 11.0);  // 4th-order stencil: ratio ~16
        CHECK(c / f < 22.0);
    }
    SECTION("needs two neighbors each side") {
        GridSpec g = make_grid_1d(2 * pi, 64);
        PresetSpec pw;
        pw.kind = PresetKind::plane_wave;
        pw.modes = {1, 0, 0};
        Trajectory tr = short_run(initialize_state(g, pw, p), PotentialSpec::none(), p);
        CHECK_THROWS_AS(continuity_residual(tr, 0), std::invalid_argument);
        CHECK_THROWS_AS(continuity_residual(tr, tr.size() - 1), std::invalid_argument);
    }
}

TEST_CASE("stress tensor") {
    PhysicsParams p;

    SECTION("constant density annihilates") {
        GridSpec g = make_grid_1d(2 * pi, 64);
        SymTensorField Pi = stress_tensor(RealField(g, 3.0), p);
        CHECK(linf_norm(Pi.comp(0, 0)) < 1e-12);
    }
    SECTION("1D gaussian density: Pi_xx = -(1/2) e^{-x^2}") {
        GridSpec g = make_grid_1d(30.0, 256, -15.0);
        RealField n(g);
        n.fill_from([](double x, double, double) { return std::exp(-x * x); });
        SymTensorField Pi = stress_tensor(n, p);
        double err = 0.0;
        for (int i = 0; i < 256; ++i)
            err = std::max(err, std::abs(Pi.comp(0, 0).at(i) + 0.5 * n.at(i)));
        CHECK(err < 1e-10);
    }
    SECTION("2D separable gaussian: zero off-diagonal, 1D diagonals") {
        GridSpec g = make_grid(2, {20, 20, 1}, {128, 128, 1}, {-10, -10, 0});
        RealField n(g);
        n.fill_from([](double x, double y, double) { return std::exp(-x * x - y * y); });
        SymTensorField Pi = stress_tensor(n, p);
        CHECK(linf_norm(Pi.comp(0, 1)) < 1e-11);
        double err = 0.0;
        for (int ix = 0; ix < 128; ix += 7)
            for (int iy = 0; iy < 128; iy += 7)
                err = std::max(err, std::abs(Pi.comp(0, 0).at(ix, iy) + 0.5 * n.at(ix, iy)));
        CHECK(err < 1e-10);
    }
    SECTION("homogeneous of degree one in n") {
        GridSpec g = make_grid_1d(30.0, 128, -15.0);
        RealField n(g);
        n.fill_from([](double x, double, double) { return std::exp(-x * x / 4) * (2 + std::sin(x)); });
        RealField n4 = n;
        n4 *= 4.0;
        SymTensorField a = stress_tensor(n, p), b = stress_tensor(n4, p);
        RealField d = a.comp(0, 0);
        d *= 4.0;
        d -= b.comp(0, 0);
        CHECK(linf_norm(d) < 1e-12 * linf_norm(b.comp(0, 0)));
    }
    SECTION("identity: -(n/m) grad Q = + div Pi") {
        GridSpec g = make_grid_1d(2 * pi, 128);
        PhysicsParams pm;
        pm.hbar = 0.8;
        pm.mass = 1.3;
        RealField n(g);
        n.fill_from([](double x, double, double) { return 1.4 + std::cos(x) + 0.25 * std::sin(2 * x); });
        RealField Q = quantum_potential(n, pm);
        RealField gradQ = spectral_gradient(Q, 0);
        VectorField divPi = tensor_divergence(stress_tensor(n, pm));
        double err = 0.0, scale = linf_norm(divPi.comp(0));
        for (std::size_t i = 0; i < n.size(); ++i)
            err = std::max(err, std::abs(-(n[i] / pm.mass) * gradQ[i] - divPi.comp(0)[i]));
        CHECK(err < 1e-6 * scale);
    }
}

TEST_CASE("momentum flux residual") {
    PhysicsParams p;

    SECTION("plane wave vanishes under either convention") {
        GridSpec g = make_grid_1d(2 * pi, 64);
        PresetSpec pw;
        pw.kind = PresetKind::plane_wave;
        pw.modes = {2, 0, 0};
        Trajectory tr = short_run(initialize_state(g, pw, p), PotentialSpec::none(), p);
        CHECK(momentum_flux_residual(tr, 6, SignConvention::audited()).masked.l2 < 1e-11);
        CHECK(momentum_flux_residual(tr, 6, SignConvention::printed_momentum()).masked.l2 < 1e-10);
    }
    SECTION("free gaussian: audited decays, printed sign stays O(1)") {
        PresetSpec gs;
        gs.kind = PresetKind::gaussian;
        gs.sigma = 2.0;
        gs.modes = {1, 0, 0};
        auto rel_at = [&](int N, const SignConvention& conv) {
            GridSpec g = make_grid_1d(40.0, N, -20.0);
            Trajectory tr = short_run(initialize_state(g, gs, p), PotentialSpec::none(), p);
            return momentum_flux_residual(tr, 6, conv).masked.rel;
        };
        const double a64 = rel_at(64, SignConvention::audited());
        const double a128 = rel_at(128, SignConvention::audited());
        const double p64 = rel_at(64, SignConvention::printed_momentum());
        const double p128 = rel_at(128, SignConvention::printed_momentum());
        CHECK(a128 < 0.3 * a64);
        CHECK(p64 > 0.1);
        CHECK(p128 > 0.1);
        CHECK(p128 > 0.5 * p64);  // non-decaying
    }
    SECTION("uniform interacting state vanishes for both g signs") {
        GridSpec g = make_grid_1d(2 * pi, 64);
        PhysicsParams pg = p;
        pg.coupling = 1.0;
        PresetSpec u;
        u.kind = PresetKind::uniform;
        u.amplitude = 1.2;
        Trajectory tr = short_run(initialize_state(g, u, pg), PotentialSpec::none(), pg);
        for (int sg : {+1, -1}) {
            SignConvention conv{+1, sg, PotentialSourceForm::dipole};
            CHECK(momentum_flux_residual(tr, 6, conv).masked.l2 < 1e-10);
        }
    }
}

TEST_CASE("sign audit") {
    PhysicsParams p;

    auto gaussian_case = [&](int N) {
        GridSpec g = make_grid_1d(40.0, N, -20.0);
        PresetSpec gs;
        gs.kind = PresetKind::gaussian;
        gs.sigma = 2.0;
        gs.modes = {1, 0, 0};
        return short_run(initialize_state(g, gs, p), PotentialSpec::none(), p);
    };
    auto soliton_case = [&](int N) {
        PhysicsParams pg = p;
        pg.coupling = 1.0;
        GridSpec g = make_grid_1d(40.0, N, -20.0);
        PresetSpec ds;
        ds.kind = PresetKind::dark_soliton;
        return short_run(initialize_state(g, ds, pg), PotentialSpec::none(), pg);
    };
    auto ground_case = [&](int N) {
        GridSpec g = make_grid_1d(40.0, N, -20.0);
        PresetSpec hg;
        hg.kind = PresetKind::harmonic_ground;
        hg.omega = {1.0, 0, 0};
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        return short_run(initialize_state(g, hg, p), pot, p);
    };

    SECTION("standard suite reproduces (+1, -1)") {
        std::vector<AuditCase> suite;
        suite.push_back({"gaussian_free", gaussian_case(64), gaussian_case(128)});
        suite.push_back({"dark_soliton", soliton_case(64), soliton_case(128)});
        suite.push_back({"harmonic_ground", ground_case(64), ground_case(128)});
        AuditResult res = sign_audit(suite);
        CHECK(res.convention.s_pi == +1);
        CHECK(res.convention.s_g == -1);
        CHECK(res.s_g_determined);
        CHECK(res.note.find("s_pi=+1") != std::string::npos);
    }
    SECTION("plane-wave-only suite is rejected as ambiguous") {
        std::vector<AuditCase> suite;
        for (int m : {1, 2, 3}) {
            PresetSpec pw;
            pw.kind = PresetKind::plane_wave;
            pw.modes = {m, 0, 0};
            GridSpec c = make_grid_1d(2 * pi, 64);
            GridSpec f = make_grid_1d(2 * pi, 128);
            suite.push_back({"plane_wave_" + std::to_string(m),
                             short_run(initialize_state(c, pw, p), PotentialSpec::none(), p),
                             short_run(initialize_state(f, pw, p), PotentialSpec::none(), p)});
        }
        CHECK_THROWS_AS(sign_audit(suite), AuditError);
    }
    SECTION("g = 0 suite leaves s_g undetermined") {
        std::vector<AuditCase> suite;
        suite.push_back({"gaussian_free", gaussian_case(64), gaussian_case(128)});
        suite.push_back({"harmonic_ground", ground_case(64), ground_case(128)});
        PresetSpec gb;
        gb.kind = PresetKind::gaussian;
        gb.sigma = 1.5;
        gb.modes = {2, 0, 0};
        auto boosted = [&](int N) {
            GridSpec g = make_grid_1d(40.0, N, -20.0);
            return short_run(initialize_state(g, gb, p), PotentialSpec::none(), p);
        };
        suite.push_back({"gaussian_boosted", boosted(64), boosted(128)});
        AuditResult res = sign_audit(suite);
        CHECK(res.convention.s_pi == +1);
        CHECK_FALSE(res.s_g_determined);
        CHECK(res.note.find("undetermined") != std::string::npos);
    }
    SECTION("small suites are refused") {
        std::vector<AuditCase> suite;
        suite.push_back({"gaussian_free", gaussian_case(64), gaussian_case(128)});
        CHECK_THROWS_AS(sign_audit(suite), AuditError);
    }
}

TEST_CASE("superposed histories still satisfy continuity") {
    PhysicsParams p;
    GridSpec g = make_grid_1d(40.0, 128, -20.0);
    PresetSpec a, b;
    a.kind = b.kind = PresetKind::gaussian;
    a.sigma = b.sigma = 1.5;
    a.center = {-3.0, 0, 0};
    b.center = {+3.0, 0, 0};
    a.modes = {1, 0, 0};
    b.modes = {-1, 0, 0};
    Trajectory ta = short_run(initialize_state(g, a, p), PotentialSpec::none(), p);
    Trajectory tb = short_run(initialize_state(g, b, p), PotentialSpec::none(), p);
    HydroHistory sum = superpose(hydro_history(ta), hydro_history(tb));
    // continuity is linear in (n, j)
    CHECK(continuity_residual(sum, 6).masked.rel < 1e-6);
}
