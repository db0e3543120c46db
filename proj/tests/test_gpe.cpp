#include <catch2/catch_amalgamated.hpp>

#include "qlh/analytic.hpp"
#include "qlh/madelung.hpp"

using namespace qlh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double max_density_diff(const ComplexField& psi, const RealField& n_ref) {
    double err = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
        err = std::max(err, std::abs(std::norm(psi[i]) - n_ref[i]));
    return err;
}

}  // namespace

TEST_CASE("presets") {
    GridSpec g = make_grid_1d(40.0, 128, -20.0);
    PhysicsParams p;

    SECTION("uniform amplitude 2 has density 4") {
        PresetSpec ps;
        ps.kind = PresetKind::uniform;
        ps.amplitude = 2.0;
        ComplexField psi = initialize_state(g, ps, p);
        CHECK_THAT(std::norm(psi.at(17)), WithinRel(4.0, 1e-15));
    }
    SECTION("plane wave has unit density") {
        PresetSpec ps;
        ps.kind = PresetKind::plane_wave;
        ps.modes = {3, 0, 0};
        ComplexField psi = initialize_state(g, ps, p);
        for (int i = 0; i < 128; i += 17) CHECK_THAT(std::norm(psi.at(i)), WithinRel(1.0, 1e-13));
    }
    SECTION("harmonic ground is the sigma^2 = hbar/(m omega) Gaussian") {
        PresetSpec ps;
        ps.kind = PresetKind::harmonic_ground;
        ps.omega = {1.0, 0, 0};
        ComplexField psi = initialize_state(g, ps, p);
        // |psi(x)| proportional to exp(-x^2 / (2 sigma^2))
        const double s2 = p.hbar / (p.mass * 1.0);
        const double r = std::abs(psi.at(70)) / std::abs(psi.at(64));
        const double x0 = g.coord(0, 64), x1 = g.coord(0, 70);
        CHECK_THAT(std::log(r), WithinRel((x0 * x0 - x1 * x1) / (2 * s2), 1e-10));
    }
    SECTION("preset validation") {
        PresetSpec v;
        v.kind = PresetKind::vortex;
        CHECK_THROWS_AS(initialize_state(g, v, p), ConfigError);

        PresetSpec d;
        d.kind = PresetKind::dark_soliton;
        CHECK_THROWS_AS(initialize_state(g, d, p), ConfigError);  // g = 0

        PhysicsParams attract;
        attract.coupling = -1.0;
        PresetSpec b;
        b.kind = PresetKind::bright_soliton;
        PhysicsParams repel;
        repel.coupling = 1.0;
        CHECK_THROWS_AS(initialize_state(g, b, repel), ConfigError);
        CHECK_NOTHROW(initialize_state(g, b, attract));
    }
}

TEST_CASE("strang step analytic checks") {
    GridSpec g = make_grid_1d(2.0 * pi, 64);
    PhysicsParams p;
    RealField V0(g, 0.0);

    SECTION("plane wave phase advance") {
        PresetSpec ps;
        ps.kind = PresetKind::plane_wave;
        ps.modes = {2, 0, 0};
        ComplexField psi = initialize_state(g, ps, p);
        const double dt = 0.01, k = 2.0;
        ComplexField out = strang_step(psi, V0, p, dt);
        const complexd expect = std::polar(1.0, -p.hbar * k * k * dt / (2 * p.mass));
        for (int i = 0; i < 64; i += 9) {
            CHECK_THAT(std::abs(out.at(i) / psi.at(i) - expect), WithinAbs(0.0, 1e-13));
            CHECK_THAT(std::norm(out.at(i)), WithinRel(1.0, 1e-13));
        }
    }
    SECTION("uniform self-phase rotation with g > 0") {
        PhysicsParams pg = p;
        pg.coupling = 0.7;
        PresetSpec ps;
        ps.kind = PresetKind::uniform;
        ps.amplitude = 1.5;
        ComplexField psi = initialize_state(g, ps, pg);
        const double dt = 0.02;
        ComplexField out = psi;
        for (int s = 0; s < 50; ++s) out = strang_step(out, V0, pg, dt);
        const double t = 50 * dt;
        const complexd expect =
            1.5 * std::polar(1.0, -pg.coupling * 1.5 * 1.5 * t / pg.hbar);
        CHECK_THAT(std::abs(out.at(11) - expect), WithinAbs(0.0, 1e-12));
    }
    SECTION("dt -> 0 continuity") {
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 0.5;
        ps.center = {pi, 0, 0};
        ComplexField psi = initialize_state(g, ps, p);
        double prev = HUGE_VAL;
        for (double dt : {1e-2, 1e-3, 1e-4}) {
            ComplexField out = strang_step(psi, V0, p, dt);
            out -= psi;
            const double d = l2_norm(out);
            CHECK(d < prev);
            prev = d;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("evolve oracles") {
    PhysicsParams p;

    SECTION("harmonic ground density is stationary over a period") {
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec ps;
        ps.kind = PresetKind::harmonic_ground;
        ps.omega = {1.0, 0, 0};
        ComplexField psi0 = initialize_state(g, ps, p);
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        Trajectory tr = evolve(psi0, pot, p, 2.0 * pi, 1e-3, 400);
        const RealField n0 = density(tr.snapshots.front().psi);
        const RealField nT = density(tr.snapshots.back().psi);
        double err = 0.0;
        for (std::size_t i = 0; i < n0.size(); ++i) err = std::max(err, std::abs(nT[i] - n0[i]));
        CHECK(err < 1e-8 * max_value(n0));
    }

    SECTION("free gaussian follows the analytic spreading law") {
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 1.5;
        ps.modes = {2, 0, 0};  // boost to exercise transport too
        ComplexField psi0 = initialize_state(g, ps, p);
        Trajectory tr = evolve(psi0, PotentialSpec::none(), p, 1.0, 5e-4, 500);
        for (const auto& snap : tr.snapshots) {
            RealField ref = analytic::free_gaussian_density(g, ps, p, snap.t);
            CHECK(max_density_diff(snap.psi, ref) < 1e-9 * max_value(ref));
        }
    }

    SECTION("dark soliton dip is stationary") {
        PhysicsParams pg = p;
        pg.coupling = 1.0;
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec ps;
        ps.kind = PresetKind::dark_soliton;
        ps.n_inf = 1.0;
        ps.center = {0.0, 0, 0};
        ComplexField psi0 = initialize_state(g, ps, pg);
        Trajectory tr = evolve(psi0, PotentialSpec::none(), pg, 1.0, 1e-3, 1000);
        const RealField n0 = density(tr.snapshots.front().psi);
        const RealField nT = density(tr.snapshots.back().psi);
        double err = 0.0;
        for (std::size_t i = 0; i < n0.size(); ++i) err = std::max(err, std::abs(nT[i] - n0[i]));
        CHECK(err < 1e-6 * ps.n_inf);
    }

    SECTION("bright soliton density is stationary") {
        PhysicsParams pg = p;
        pg.coupling = -1.0;
        GridSpec g = make_grid_1d(40.0, 256, -20.0);
        PresetSpec ps;
        ps.kind = PresetKind::bright_soliton;
        ps.amplitude = 1.0;  // width = 1
        ComplexField psi0 = initialize_state(g, ps, pg);
        Trajectory tr = evolve(psi0, PotentialSpec::none(), pg, 1.0, 1e-3, 1000);
        const RealField n0 = density(tr.snapshots.front().psi);
        const RealField nT = density(tr.snapshots.back().psi);
        double err = 0.0;
        for (std::size_t i = 0; i < n0.size(); ++i) err = std::max(err, std::abs(nT[i] - n0[i]));
        CHECK(err < 1e-6);
    }

    SECTION("blow-up detection aborts") {
        GridSpec g = make_grid_1d(10.0, 64, -5.0);
        ComplexField bad(g, complexd(1.0, 0.0));
        bad.at(3) = complexd(HUGE_VAL, 0.0);
        CHECK_THROWS_AS(evolve(bad, PotentialSpec::none(), p, 0.1, 0.01), NumericalAbort);
    }
}

TEST_CASE("conserved diagnostics") {
    PhysicsParams p;
    GridSpec g = make_grid_1d(40.0, 256, -20.0);

    SECTION("norm is conserved to machine precision") {
        PhysicsParams pg = p;
        pg.coupling = 1.0;
        PresetSpec ps;
        ps.kind = PresetKind::dark_soliton;
        ComplexField psi0 = initialize_state(g, ps, pg);
        Trajectory tr = evolve(psi0, PotentialSpec::none(), pg, 1.0, 1e-3, 1000);
        const double n0 = tr.diagnostics.front().norm;
        for (const auto& d : tr.diagnostics)
            CHECK_THAT(d.norm, WithinRel(n0, 1e-12));
    }

    SECTION("harmonic ground energy equals hbar omega / 2 per unit norm") {
        PresetSpec ps;
        ps.kind = PresetKind::harmonic_ground;
        ps.omega = {1.0, 0, 0};
        ComplexField psi0 = initialize_state(g, ps, p);
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        Trajectory tr = evolve(psi0, pot, p, 0.01, 1e-3, 10);
        const auto d = conserved_diagnostics(tr).front();
        CHECK_THAT(d.energy / d.norm, WithinRel(0.5 * p.hbar * 1.0, 1e-8));
    }

    SECTION("free packet energy is constant") {
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 1.5;
        ps.modes = {3, 0, 0};
        ComplexField psi0 = initialize_state(g, ps, p);
        Trajectory tr = evolve(psi0, PotentialSpec::none(), p, 1.0, 1e-3, 250);
        const double e0 = tr.diagnostics.front().energy;
        for (const auto& d : tr.diagnostics) CHECK_THAT(d.energy, WithinRel(e0, 1e-8));
    }
}

TEST_CASE("scheme properties") {
    PhysicsParams p;
    GridSpec g = make_grid_1d(20.0, 128, -10.0);

    SECTION("second-order temporal convergence") {
        // gaussian in a trap: kinetic and potential flows do not commute
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 0.8;
        ComplexField psi0 = initialize_state(g, ps, p);
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        const double T = 0.5;
        auto terminal = [&](double dt) {
            return evolve(psi0, pot, p, T, dt, std::lround(T / dt)).snapshots.back().psi;
        };
        ComplexField ref = terminal(T / 4096);
        auto err = [&](double dt) {
            ComplexField e = terminal(dt);
            e -= ref;
            return l2_norm(e);
        };
        const double e1 = err(T / 64), e2 = err(T / 128);
        CHECK(e1 / e2 > 3.4);
        CHECK(e1 / e2 < 4.6);
    }

    SECTION("homogeneity at g = 0") {
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 1.0;
        ps.modes = {1, 0, 0};
        ComplexField psi0 = initialize_state(g, ps, p);
        const complexd w = 2.0 * std::polar(1.0, pi / 3.0);
        ComplexField wpsi0 = psi0;
        wpsi0 *= w;
        PotentialSpec pot = PotentialSpec::harmonic({0.7, 0, 0});
        Trajectory a = evolve(psi0, pot, p, 0.2, 1e-3, 200);
        Trajectory b = evolve(wpsi0, pot, p, 0.2, 1e-3, 200);
        ComplexField scaled = a.snapshots.back().psi;
        scaled *= w;
        scaled -= b.snapshots.back().psi;
        CHECK(l2_norm(scaled) < 1e-12 * l2_norm(b.snapshots.back().psi));
    }

    SECTION("time reversal via conjugation") {
        PhysicsParams pg = p;
        pg.coupling = 0.5;
        PresetSpec ps;
        ps.kind = PresetKind::gaussian;
        ps.sigma = 0.9;
        ComplexField psi0 = initialize_state(g, ps, pg);
        PotentialSpec pot = PotentialSpec::harmonic({1.0, 0, 0});
        Trajectory fwd = evolve(psi0, pot, pg, 0.3, 1e-3, 300);
        ComplexField conj_end = fwd.snapshots.back().psi;
        for (std::size_t i = 0; i < conj_end.size(); ++i) conj_end[i] = std::conj(conj_end[i]);
        Trajectory back = evolve(conj_end, pot, pg, 0.3, 1e-3, 300);
        ComplexField roundtrip = back.snapshots.back().psi;
        for (std::size_t i = 0; i < roundtrip.size(); ++i)
            roundtrip[i] = std::conj(roundtrip[i]);
        roundtrip -= psi0;
        CHECK(l2_norm(roundtrip) < 1e-11 * l2_norm(psi0));
    }
}
