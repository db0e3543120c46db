#include <catch2/catch_amalgamated.hpp>

#include "qlh/spectral.hpp"

using namespace qlh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("make_grid validates and exposes spacing") {
    GridSpec g = make_grid_1d(2.0 * pi, 64);
    CHECK_THAT(g.spacing(0), WithinRel(2.0 * pi / 64, 1e-15));
    CHECK_THAT(g.coord(0, 3), WithinRel(3.0 * 2.0 * pi / 64, 1e-15));

    GridSpec g3 = make_grid(3, {10, 10, 10}, {32, 32, 32}, {-5, -5, -5});
    CHECK(g3.size() == 32u * 32u * 32u);
    CHECK_THAT(g3.coord(1, 0), WithinAbs(-5.0, 1e-15));

    CHECK_THROWS_AS(make_grid(1, {1, 1, 1}, {7, 1, 1}, {0, 0, 0}), GridError);
    CHECK_THROWS_AS(make_grid(1, {1, 1, 1}, {4, 1, 1}, {0, 0, 0}), GridError);
    CHECK_THROWS_AS(make_grid(1, {1, 1, 1}, {48, 1, 1}, {0, 0, 0}), GridError);
    CHECK_THROWS_AS(make_grid(1, {-1, 1, 1}, {64, 1, 1}, {0, 0, 0}), GridError);
    CHECK_THROWS_AS(make_grid(4, {1, 1, 1}, {64, 1, 1}, {0, 0, 0}), GridError);
}

TEST_CASE("spectral gradient is exact on band-limited data") {
    GridSpec g = make_grid_1d(2.0 * pi, 64);
    RealField f(g);
    f.fill_from([](double x, double, double) { return std::sin(x); });
    RealField df = spectral_gradient(f, 0);
    double err = 0.0;
    for (int i = 0; i < 64; ++i)
        err = std::max(err, std::abs(df.at(i) - std::cos(g.coord(0, i))));
    CHECK(err < 1e-12);

    RealField c(g, 3.5);
    CHECK(linf_norm(spectral_gradient(c, 0)) < 1e-13);

    ComplexField e(g);
    e.fill_from([](double x, double, double) { return std::polar(1.0, 3.0 * x); });
    ComplexField de = spectral_gradient(e, 0);
    double cerr = 0.0;
    for (int i = 0; i < 64; ++i)
        cerr = std::max(cerr, std::abs(de.at(i) - complexd(0, 3) * e.at(i)));
    CHECK(cerr < 1e-12);

    CHECK_THROWS_AS(spectral_gradient(f, 1), std::invalid_argument);
}

TEST_CASE("spectral laplacian") {
    GridSpec g = make_grid_1d(2.0 * pi, 64);
    RealField f(g);
    f.fill_from([](double x, double, double) { return std::sin(2.0 * x); });
    RealField lf = spectral_laplacian(f);
    double err = 0.0;
    for (int i = 0; i < 64; ++i) err = std::max(err, std::abs(lf.at(i) + 4.0 * f.at(i)));
    CHECK(err < 1e-11);

    CHECK(linf_norm(spectral_laplacian(RealField(g, 2.0))) < 1e-12);

    GridSpec g2 = make_grid(2, {2 * pi, 2 * pi, 1}, {32, 32, 1}, {0, 0, 0});
    ComplexField e(g2);
    e.fill_from([](double x, double y, double) { return std::polar(1.0, 3.0 * x + 4.0 * y); });
    ComplexField le = spectral_laplacian(e);
    double cerr = 0.0;
    for (std::size_t i = 0; i < le.size(); ++i)
        cerr = std::max(cerr, std::abs(le[i] + 25.0 * e[i]));
    CHECK(cerr < 1e-10);
}

TEST_CASE("double divergence") {
    SECTION("constant isotropic tensor annihilates") {
        GridSpec g = make_grid(2, {2 * pi, 2 * pi, 1}, {32, 32, 1}, {0, 0, 0});
        SymTensorField T(g);
        for (int i = 0; i < 2; ++i) T.comp(i, i) = RealField(g, 4.2);
        CHECK(linf_norm(double_divergence(T)) < 1e-12);
    }
    SECTION("1D T_xx = sin x") {
        GridSpec g = make_grid_1d(2.0 * pi, 64);
        SymTensorField T(g);
        T.comp(0, 0).fill_from([](double x, double, double) { return std::sin(x); });
        RealField r = double_divergence(T);
        double err = 0.0;
        for (int i = 0; i < 64; ++i)
            err = std::max(err, std::abs(r.at(i) + std::sin(g.coord(0, i))));
        CHECK(err < 1e-12);
    }
    SECTION("2D off-diagonal counted twice") {
        GridSpec g = make_grid(2, {2 * pi, 2 * pi, 1}, {64, 64, 1}, {0, 0, 0});
        SymTensorField T(g);
        T.comp(0, 1).fill_from(
            [](double x, double y, double) { return std::sin(x) * std::sin(y); });
        RealField r = double_divergence(T);
        double err = 0.0;
        for (int ix = 0; ix < 64; ++ix)
            for (int iy = 0; iy < 64; ++iy)
                err = std::max(err, std::abs(r.at(ix, iy) - 2.0 * std::cos(g.coord(0, ix)) *
                                                                std::cos(g.coord(1, iy))));
        CHECK(err < 1e-11);
    }
}

TEST_CASE("time stencil") {
    GridSpec g = make_grid_1d(1.0, 8);
    const double dt = 0.1;

    SECTION("exact on quadratics") {
        std::vector<RealField> stack;
        for (int s = 0; s < 5; ++s) {
            const double t = s * dt;
            stack.emplace_back(g, t * t);
        }
        RealField d2 = time_stencil(stack, dt, 2);
        CHECK_THAT(d2.at(0), WithinRel(2.0, 1e-12));
        RealField d1 = time_stencil(stack, dt, 1);
        CHECK_THAT(d1.at(0), WithinRel(2.0 * 2.0 * dt, 1e-10));  // f' at center t = 2 dt
    }
    SECTION("constant stack has zero first derivative") {
        std::vector<RealField> stack(5, RealField(g, 7.0));
        CHECK(linf_norm(time_stencil(stack, dt, 1)) < 1e-12);
    }
    SECTION("sinusoid second derivative at 4th order") {
        const double om = 2.0, step = 0.005;  // om * dt = 0.01
        std::vector<RealField> stack;
        for (int s = -2; s <= 2; ++s) stack.emplace_back(g, std::sin(om * s * step));
        RealField d2 = time_stencil(stack, step, 2);
        CHECK_THAT(d2.at(0), WithinAbs(-om * om * std::sin(0.0), 1e-8));
        // shifted center
        stack.clear();
        for (int s = -2; s <= 2; ++s) stack.emplace_back(g, std::sin(om * (1.0 + s * step)));
        d2 = time_stencil(stack, step, 2);
        CHECK_THAT(d2.at(0), WithinRel(-om * om * std::sin(om * 1.0), 1e-8));
    }
    SECTION("validation") {
        std::vector<RealField> stack(4, RealField(g, 0.0));
        CHECK_THROWS_AS(time_stencil(stack, dt, 2), std::invalid_argument);
        std::vector<RealField> ok(5, RealField(g, 0.0));
        CHECK_THROWS_AS(time_stencil(ok, dt, 3), std::invalid_argument);
        CHECK_THROWS_AS(time_stencil(ok, -dt, 1), std::invalid_argument);
    }
}

TEST_CASE("operator properties") {
    GridSpec g = make_grid_1d(2.0 * pi, 128);
    RealField f(g), h(g);
    f.fill_from([](double x, double, double) { return std::sin(3 * x) + 0.3 * std::cos(7 * x); });
    h.fill_from([](double x, double, double) { return std::cos(2 * x) - 0.1 * std::sin(11 * x); });

    SECTION("linearity to machine precision") {
        const double a = 1.7, b = -0.43;
        RealField combo = f;
        combo *= a;
        RealField hb = h;
        hb *= b;
        combo += hb;
        RealField lhs = spectral_gradient(combo, 0);
        RealField rhs = spectral_gradient(f, 0);
        rhs *= a;
        RealField rh = spectral_gradient(h, 0);
        rh *= b;
        rhs += rh;
        lhs -= rhs;
        CHECK(linf_norm(lhs) < 1e-12);
    }

    SECTION("Parseval consistency") {
        ComplexField c = to_complex(f);
        Fft::forward(c);
        double spec = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) spec += std::norm(c[i]);
        spec = std::sqrt(spec / double(g.size()) * g.cell_volume());
        CHECK_THAT(spec, WithinRel(l2_norm(f), 1e-12));
    }

    SECTION("gradient twice matches laplacian on band-limited data") {
        RealField gg = spectral_gradient(spectral_gradient(f, 0), 0);
        RealField lap = spectral_laplacian(f);
        gg -= lap;
        CHECK(l2_norm(gg) < 1e-10 * l2_norm(lap));
    }

    SECTION("double divergence of a_i a_j f equals (a.grad)^2 f") {
        GridSpec g2 = make_grid(2, {2 * pi, 2 * pi, 1}, {64, 64, 1}, {0, 0, 0});
        RealField f2(g2);
        f2.fill_from([](double x, double y, double) { return std::sin(2 * x) * std::cos(3 * y); });
        const double ax = 0.8, ay = -1.3;
        SymTensorField T(g2);
        auto put = [&](int i, int j, double w) {
            RealField c = f2;
            c *= w;
            T.comp(i, j) = c;
        };
        put(0, 0, ax * ax);
        put(0, 1, ax * ay);
        put(1, 1, ay * ay);
        RealField lhs = double_divergence(T);
        // (a.grad)^2 f
        RealField gx = spectral_gradient(f2, 0), gy = spectral_gradient(f2, 1);
        RealField adotgrad = gx;
        adotgrad *= ax;
        RealField gyw = gy;
        gyw *= ay;
        adotgrad += gyw;
        RealField gxx = spectral_gradient(adotgrad, 0), gyy = spectral_gradient(adotgrad, 1);
        gxx *= ax;
        gyy *= ay;
        RealField rhs = gxx;
        rhs += gyy;
        lhs -= rhs;
        CHECK(l2_norm(lhs) < 1e-10 * l2_norm(rhs));
    }
}
