#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sdelab/models.hpp"
#include "sdelab/sde_model.hpp"

using namespace sdelab;

namespace {

SdeSystem scalar_system(std::function<double(double)> mu,
                        std::function<double(double)> sigma) {
    SdeSystem s;
    s.dim = 1;
    s.noise_dim = 1;
    s.drift = [mu](const Vec& x) { return Vec{mu(x[0])}; };
    s.diffusion = [sigma](const Vec& x) { return Mat{sigma(x[0])}; };
    s.domain = Box{{-1e9}, {1e9}};
    return s;
}

VectorField scalar_field(std::function<double(double)> f) {
    VectorField y;
    y.dim = 1;
    y.value = [f](const Vec& x) { return Vec{f(x[0])}; };
    return y;
}

Diffeomorphism identity_map(std::size_t n) {
    Diffeomorphism phi;
    phi.dim = n;
    phi.forward = [](const Vec& x) { return x; };
    phi.inverse = [](const Vec& x) { return x; };
    phi.source_domain = Box{Vec(n, -1e9), Vec(n, 1e9)};
    phi.target_domain = phi.source_domain;
    return phi;
}

Diffeomorphism inverted(const Diffeomorphism& phi) {
    Diffeomorphism inv;
    inv.dim = phi.dim;
    inv.forward = phi.inverse;
    inv.inverse = phi.forward;
    inv.source_domain = phi.target_domain;
    inv.target_domain = phi.source_domain;
    return inv;
}

}  // namespace

TEST_CASE("generator on closed-form inputs") {
    ScalarField f2;
    f2.value = [](const Vec& x) { return x[0] * x[0]; };
    SdeSystem unit = scalar_system([](double) { return 0.0; }, [](double) { return 1.0; });
    CHECK(generator_apply(unit, f2, {0.3}) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(generator_apply(unit, f2, {-2.0}) == doctest::Approx(1.0).epsilon(1e-8));

    ScalarField flin;
    flin.value = [](const Vec& x) { return 3.0 * x[0] + 1.0; };
    SdeSystem any =
        scalar_system([](double x) { return x * x + 2.0; }, [](double x) { return x; });
    CHECK(generator_apply(any, flin, {1.5}) ==
          doctest::Approx(3.0 * (1.5 * 1.5 + 2.0)).epsilon(1e-7));

    SdeSystem lin = make_linear_system({-2.0, 10.0, 10.0, 10.0});
    ScalarField fx;
    fx.value = [](const Vec& x) { return x[0]; };
    CHECK(generator_apply(lin, fx, {1.0}) == doctest::Approx(8.0).epsilon(1e-8));
    CHECK_THROWS_AS(
        generator_apply(scalar_system([](double) { return 0.0; },
                                      [](double) { return 1.0; }),
                        fx, {2e9}),
        ChartExitError);
}

TEST_CASE("ito_transform under the identity is the identity") {
    SdeSystem lin = make_linear_system({-2.0, 10.0, 10.0, 10.0});
    SdeSystem same = ito_transform(lin, identity_map(1));
    for (double x : {-3.0, 0.0, 1.7}) {
        CHECK(same.drift({x})[0] == doctest::Approx(lin.drift({x})[0]).epsilon(1e-9));
        CHECK(same.diffusion({x})[0] ==
              doctest::Approx(lin.diffusion({x})[0]).epsilon(1e-9));
    }
}

TEST_CASE("log sinh chart turns the tanh model into constant coefficients") {
    double a = 1.3, b = 0.7;
    SdeSystem sys = make_tanh_system(a, b);
    SdeSystem img = ito_transform(sys, make_log_sinh_chart());
    for (double x : {0.1, 0.5, 1.0, 2.0, 3.0}) {
        Vec xp = make_log_sinh_chart().forward({x});
        CHECK(img.drift(xp)[0] == doctest::Approx(a - 0.5 * b * b).epsilon(1e-9));
        CHECK(img.diffusion(xp)[0] == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("adapted chart maps the augmented system to the closed-form image") {
    LinearSdeParams p{-2.0, 10.0, 10.0, 10.0};
    for (double k : {0.0, -1.0}) {
        SdeSystem aug = make_augmented_linear_system(p);
        Diffeomorphism phi = make_adapted_chart(k);
        SdeSystem img = ito_transform(aug, phi);
        SdeSystem closed = make_transformed_linear_system(p, k);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> ux(-3.0, 3.0), uz(0.2, 3.0);
        for (int i = 0; i < 50; ++i) {
            Vec x{ux(rng), uz(rng)};
            Vec xp = phi.forward(x);
            Vec d1 = img.drift(xp), d2 = closed.drift(xp);
            Mat s1 = img.diffusion(xp), s2 = closed.diffusion(xp);
            for (int j = 0; j < 2; ++j) {
                CHECK(d1[j] == doctest::Approx(d2[j]).epsilon(1e-9));
                CHECK(s1[j] == doctest::Approx(s2[j]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("ito_transform round-trips through the inverse chart") {
    LinearSdeParams p{-2.0, 10.0, 10.0, 10.0};
    SdeSystem aug = make_augmented_linear_system(p);
    Diffeomorphism phi = make_adapted_chart(0.0);
    SdeSystem back = ito_transform(ito_transform(aug, phi), inverted(phi));
    for (Vec x : {Vec{1.0, 2.0}, Vec{-0.5, 0.7}, Vec{3.0, 1.1}}) {
        Vec d1 = back.drift(x), d2 = aug.drift(x);
        Mat s1 = back.diffusion(x), s2 = aug.diffusion(x);
        for (int j = 0; j < 2; ++j) {
            CHECK(d1[j] == doctest::Approx(d2[j]).epsilon(1e-6));
            CHECK(s1[j] == doctest::Approx(s2[j]).epsilon(1e-6));
        }
    }
}

TEST_CASE("lie_bracket closed values") {
    VectorField y = scalar_field([](double) { return 1.0; });
    VectorField z = scalar_field([](double x) { return x; });
    VectorField z2 = scalar_field([](double x) { return x * x; });
    CHECK(lie_bracket(z, z, {1.7})[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(lie_bracket(y, z, {0.9})[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(lie_bracket(z, z2, {2.0})[0] == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("pushforward closed values") {
    VectorField y = make_tanh_symmetry();

    SUBCASE("identity keeps the field") {
        VectorField same = pushforward(identity_map(1), y);
        for (double x : {0.3, 1.0, 2.5}) {
            CHECK(same.value({x})[0] == doctest::Approx(y.value({x})[0]).epsilon(1e-9));
        }
    }
    SUBCASE("log sinh chart straightens the field to 1") {
        VectorField img = pushforward(make_log_sinh_chart(), y);
        for (double x : {0.3, 1.0, 2.5}) {
            Vec xp = make_log_sinh_chart().forward({x});
            CHECK(img.value(xp)[0] == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("sinh chart makes the field linear") {
        VectorField img = pushforward(make_sinh_chart(), y);
        for (double x : {0.3, 1.0, 2.5}) {
            double xp = std::sinh(x);
            CHECK(img.value({xp})[0] == doctest::Approx(xp).epsilon(1e-9));
        }
    }
}

TEST_CASE("pushforward commutes with the bracket") {
    VectorField y = scalar_field([](double x) { return std::tanh(x); });
    VectorField z = scalar_field([](double x) { return x; });
    Diffeomorphism phi = make_sinh_chart();
    VectorField py = pushforward(phi, y), pz = pushforward(phi, z);
    for (double x : {0.4, 1.0, 1.8}) {
        Vec xp = phi.forward({x});
        double lhs = lie_bracket(py, pz, xp)[0];
        // push the bracket itself forward
        VectorField br = scalar_field([&](double u) {
            return lie_bracket(y, z, {u})[0];
        });
        double rhs = pushforward(phi, br).value(xp)[0];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
    }
}

TEST_CASE("determining residual identifies the known symmetries") {
    LinearSdeParams p{-2.0, 10.0, 10.0, 10.0};
    SdeSystem aug = make_augmented_linear_system(p);
    for (int which : {1, 2}) {
        DeterminingResidual r =
            determining_residual(aug, make_augmented_symmetry(which), {1.0, 2.0});
        for (double v : r.r1) CHECK(std::abs(v) < 1e-10);
        for (double v : r.r2) CHECK(std::abs(v) < 1e-10);
    }

    SdeSystem th = make_tanh_system(1.0, 0.7);
    DeterminingResidual rt = determining_residual(th, make_tanh_symmetry(), {0.7});
    CHECK(std::abs(rt.r1[0]) < 1e-10);
    CHECK(std::abs(rt.r2[0]) < 1e-10);
}

TEST_CASE("determining residual of a translation on a multiplicative model") {
    // mu = x, sigma = x; Y = d/dx: Y(mu) - L(Y) = 1, [Y, sigma] = 1
    SdeSystem gbm = make_gbm_system(1.0, 1.0);
    VectorField y = scalar_field([](double) { return 1.0; });
    DeterminingResidual r = determining_residual(gbm, y, {1.0});
    CHECK(r.r1[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.r2[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("determining residual is linear in the field") {
    SdeSystem th = make_tanh_system(0.8, 0.5);
    VectorField y = scalar_field([](double x) { return std::sin(x); });
    VectorField z = scalar_field([](double x) { return x * x + 1.0; });
    VectorField comb = scalar_field(
        [](double x) { return 2.0 * std::sin(x) - 3.0 * (x * x + 1.0); });
    Vec x{0.9};
    DeterminingResidual ry = determining_residual(th, y, x);
    DeterminingResidual rz = determining_residual(th, z, x);
    DeterminingResidual rc = determining_residual(th, comb, x);
    CHECK(rc.r1[0] == doctest::Approx(2.0 * ry.r1[0] - 3.0 * rz.r1[0]).epsilon(1e-6));
    CHECK(rc.r2[0] == doctest::Approx(2.0 * ry.r2[0] - 3.0 * rz.r2[0]).epsilon(1e-6));
}

TEST_CASE("structural checks") {
    std::vector<Vec> pts1;
    for (double x : {-2.0, -1.0, -0.5, 0.3, 0.9, 1.6, 2.0}) pts1.push_back({x});

    SUBCASE("affine detection") {
        VectorField aff;
        aff.dim = 2;
        aff.value = [](const Vec& x) { return Vec{x[1], 0.0}; };
        std::vector<Vec> pts2;
        for (double x : {-1.0, 0.0, 1.0}) {
            for (double z : {0.5, 1.0, 2.0}) pts2.push_back({x, z});
        }
        CHECK(is_affine(aff, pts2, 1e-6));
        CHECK(is_affine(scalar_field([](double) { return 4.2; }), pts1, 1e-6));
        CHECK_FALSE(is_affine(make_tanh_symmetry(), pts1, 1e-6));
        CHECK_THROWS_AS(is_affine(aff, {}, 1e-6), std::invalid_argument);
    }

    SUBCASE("triangular split") {
        LinearSdeParams p{-2.0, 10.0, 10.0, 10.0};
        SdeSystem img = make_transformed_linear_system(p, 0.0);
        std::vector<Vec> pts;
        for (double x : {-1.0, 0.5, 2.0}) {
            for (double z : {-0.5, 0.3, 1.0}) pts.push_back({x, z});
        }
        CHECK(is_triangular(img, 1, pts, 1e-5));

        // first block feeding on itself and the second depending on the first
        SdeSystem bad;
        bad.dim = 2;
        bad.noise_dim = 1;
        bad.drift = [](const Vec& x) { return Vec{x[0] * x[1], x[0]}; };
        bad.diffusion = [](const Vec& x) { return Mat{x[0], x[0]}; };
        bad.domain = Box{{-10.0, -10.0}, {10.0, 10.0}};
        CHECK_FALSE(is_triangular(bad, 1, pts, 1e-5));

        SdeSystem flat = make_linear_system({0.0, 1.0, 0.0, 1.0});
        CHECK(is_triangular(flat, 1, pts1, 1e-5));
    }

    SUBCASE("canonical form") {
        VectorField e1, e2;
        e1.dim = e2.dim = 2;
        e1.value = [](const Vec&) { return Vec{1.0, 0.0}; };
        e2.value = [](const Vec&) { return Vec{0.0, 1.0}; };
        std::vector<Vec> pts2{{0.1, 0.2}, {1.0, -1.0}};
        CHECK(is_canonical_form({e1, e2}, pts2, {1, 1}, 1e-8));

        // straightened pair from the adapted chart: (1, 0) and (-x', 1)
        VectorField y2;
        y2.dim = 2;
        y2.value = [](const Vec& x) { return Vec{-x[0], 1.0}; };
        CHECK(is_canonical_form({e1, y2}, pts2, {1, 1}, 1e-8));

        VectorField xf = scalar_field([](double x) { return x; });
        VectorField one = scalar_field([](double) { return 1.0; });
        CHECK_FALSE(is_canonical_form({xf}, {{0.3}, {0.9}}, {1}, 1e-8));
        CHECK(is_canonical_form({one}, {{0.3}, {0.9}}, {1}, 1e-8));
    }
}

TEST_CASE("analytic jacobians agree with finite differences") {
    validate_derivatives(make_linear_system({-2.0, 10.0, 10.0, 10.0},
                                            Box{{-5.0}, {5.0}}));
    validate_derivatives(make_augmented_linear_system({-2.0, 10.0, 10.0, 10.0},
                                                      Box{{-5.0, 0.5}, {5.0, 2.0}}));
    validate_derivatives(make_tanh_system(1.0, 0.7, Box{{0.2}, {2.5}}));
    validate_derivatives(make_transformed_linear_system({-2.0, 10.0, 10.0, 10.0}, -1.0,
                                                        Box{{-2.0, -1.0}, {2.0, 1.0}}));
}

TEST_CASE("diffeomorphism inverse consistency") {
    for (double k : {0.0, -1.0}) {
        Diffeomorphism phi = make_adapted_chart(k);
        for (Vec x : {Vec{1.0, 2.0}, Vec{-4.0, 0.3}, Vec{0.0, 5.0}}) {
            Vec back = phi.inverse(phi.forward(x));
            CHECK(back[0] == doctest::Approx(x[0]).epsilon(1e-9));
            CHECK(back[1] == doctest::Approx(x[1]).epsilon(1e-9));
        }
    }
    Diffeomorphism ls = make_log_sinh_chart();
    for (double x : {0.1, 0.9, 3.0}) {
        CHECK(ls.inverse(ls.forward({x}))[0] == doctest::Approx(x).epsilon(1e-9));
    }
}
