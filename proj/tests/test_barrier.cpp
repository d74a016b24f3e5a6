#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mcflab/barrier.hpp"
#include "mcflab/scenario.hpp"

using namespace mcflab;

namespace {

Vec pt2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

struct Setup {
    ChartPtr chart;
    DiscreteImmersion sigma;
    SquaredDistanceField field;
};

Setup scenario_setup(const std::string& name, int N) {
    const Scenario& s = get_scenario(name);
    Setup out{s.make_chart(), {}, SquaredDistanceField::analytic(nullptr, nullptr)};
    out.sigma = s.make_sigma(out.chart, N);
    out.field = s.make_field(out.chart, out.sigma);
    return out;
}

}  // namespace

TEST_CASE("squared distance closed forms") {
    const Setup circle = scenario_setup("flat-circle", 64);
    CHECK(circle.field.psi(circle.sigma.samples[7]) < 1e-12);
    CHECK(circle.field.grad_covariant(circle.sigma.samples[7]).norm() < 1e-10);
    CHECK(circle.field.psi(pt2(1.5, 0.0)) == Catch::Approx(0.25).margin(1e-12));

    const Setup neck = scenario_setup("cosh-neck", 64);
    CHECK(neck.field.psi(pt2(0.4, 1.0)) == Catch::Approx(0.16).margin(1e-12));
}

TEST_CASE("projection distance agrees with closed forms") {
    // Planar unit circle.
    {
        const Setup s = scenario_setup("flat-circle", 256);
        const SquaredDistanceField proj = SquaredDistanceField::projection(s.sigma);
        for (const Vec& p : {pt2(1.5, 0.3), pt2(0.7, -0.2), pt2(-0.9, 0.8)}) {
            const double exact = s.field.psi(p);
            CHECK(proj.psi(p) == Catch::Approx(exact).margin(1e-6));
        }
        // On the reference itself.
        CHECK(proj.psi(s.sigma.samples[11]) < 1e-10);
    }
    // Neck of the cosh surface: psi = r^2 in the chart.
    {
        const Setup s = scenario_setup("cosh-neck", 256);
        const SquaredDistanceField proj = SquaredDistanceField::projection(s.sigma);
        for (const Vec& p : {pt2(0.4, 1.0), pt2(-0.3, 2.5), pt2(0.25, 5.9)})
            CHECK(proj.psi(p) == Catch::Approx(s.field.psi(p)).margin(1e-6));
    }
}

TEST_CASE("covariant hessian of psi") {
    // Flat plane, reference line {y=0}: psi = y^2 has eigenvalues {0, 2}.
    {
        auto chart = make_flat_chart(2);
        const SquaredDistanceField field = SquaredDistanceField::analytic(
            chart, [](const AmbientChart&, const Vec& p) { return p[1] * p[1]; },
            [](const AmbientChart&, const Vec& p) { return Vec(pt2(0.0, 2.0 * p[1])); });
        const HessianPsi hp = hessian_psi(field, pt2(0.3, 0.7));
        CHECK(hp.eigenvalues[0] == Catch::Approx(0.0).margin(1e-8));
        CHECK(hp.eigenvalues[1] == Catch::Approx(2.0).margin(1e-8));
        CHECK(hp.asymmetry < 1e-6);
    }
    // Cosh surface at r = 0.5: eigenvalues {2 r tanh r, 2} = {0.46212, 2}.
    {
        const Setup s = scenario_setup("cosh-neck", 64);
        const HessianPsi hp = hessian_psi(s.field, pt2(0.5, 1.3));
        CHECK(hp.eigenvalues[0] == Catch::Approx(2.0 * 0.5 * std::tanh(0.5)).margin(1e-6));
        CHECK(hp.eigenvalues[0] == Catch::Approx(0.46212).margin(1e-4));
        CHECK(hp.eigenvalues[1] == Catch::Approx(2.0).margin(1e-6));
        CHECK(hp.asymmetry < 1e-6);
    }
    // Unit sphere, reference equator, theta = pi/2 - 0.3: the tangential
    // eigenvalue is 2 (theta - pi/2) cot(theta) = -0.185602.
    {
        const Setup s = scenario_setup("sphere-equator", 64);
        const double theta = M_PI / 2.0 - 0.3;
        const HessianPsi hp = hessian_psi(s.field, pt2(theta, 2.0));
        const double expected = 2.0 * (theta - M_PI / 2.0) * std::cos(theta) / std::sin(theta);
        CHECK(expected == Catch::Approx(-0.185602).margin(1e-6));
        CHECK(hp.eigenvalues[0] == Catch::Approx(expected).margin(1e-4));
        CHECK(hp.eigenvalues[1] == Catch::Approx(2.0).margin(1e-6));
    }
}

TEST_CASE("tr_n of sorted eigenvalues") {
    Vec two(2);
    two << 0.46212, 2.0;
    CHECK(tr_n_smallest(two, 1) == Catch::Approx(0.46212));
    two << 0.5, 2.0;
    CHECK(tr_n_smallest(two, 2) == Catch::Approx(2.5));
    Vec three(3);
    three << -0.3, 0.1, 2.0;
    CHECK(tr_n_smallest(three, 1) == Catch::Approx(-0.3));
    CHECK_THROWS_AS(tr_n_smallest(three, 4), ValidationError);
    CHECK_THROWS_AS(tr_n_smallest(three, 0), ValidationError);
}

TEST_CASE("tubular region construction invariants") {
    const Setup s = scenario_setup("cosh-neck", 64);
    const TubularRegion region = build_tubular_region(s.sigma, 0.5, s.field);
    CHECK(region.radial_levels >= 8);
    CHECK(region.angular_count == 2);  // m = 1: both sides of the curve
    for (const TubePoint& tp : region.grid) {
        CHECK(s.field.psi(tp.point) <= 0.25 * (1.0 + 1e-6) + 1e-12);
        // Normal geodesics of the r-coordinate: shooting radius r gives psi = r^2.
        CHECK(s.field.psi(tp.point) == Catch::Approx(tp.radius * tp.radius).margin(1e-8));
    }

    const Setup w = scenario_setup("warped3d-neck", 64);
    const TubularRegion wregion = build_tubular_region(w.sigma, 0.5, w.field);
    CHECK(wregion.angular_count >= 8);

    // Region-scoped distance rejects far points.
    CHECK_THROWS_AS(squared_distance(region, s.field, pt2(1.3, 0.0)), DistanceError);
    const auto [psi, grad] = squared_distance(region, s.field, pt2(0.3, 0.0));
    CHECK(psi == Catch::Approx(0.09).margin(1e-12));
    CHECK(grad[0] == Catch::Approx(0.6).margin(1e-10));
}

TEST_CASE("analytic gradients agree with finite differences of psi") {
    for (const char* name : {"cosh-neck", "warped3d-neck", "flat-circle"}) {
        const Setup s = scenario_setup(name, 64);
        const SquaredDistanceField fd_only =
            SquaredDistanceField::analytic(s.chart, get_scenario(name).psi, nullptr);
        const TubularRegion region =
            build_tubular_region(s.sigma, get_scenario(name).default_eps1, s.field, 4, 8, 4);
        for (const TubePoint& tp : region.grid) {
            const Vec analytic = s.field.grad_covariant(tp.point);
            const Vec numeric = fd_only.grad_covariant(tp.point);
            CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-5);
        }
    }
}

TEST_CASE("certification aborts when a grid point cannot be evaluated") {
    const Setup s = scenario_setup("cosh-neck", 64);
    const SquaredDistanceField broken = SquaredDistanceField::analytic(
        s.chart,
        [](const AmbientChart&, const Vec& p) {
            if (std::abs(p[0]) > 0.3) throw DistanceError("distance model breaks down");
            return p[0] * p[0];
        },
        nullptr);
    // The outermost radial level sits at 0.3, so the Hessian stencil crosses
    // the breakdown radius there.
    const TubularRegion region = build_tubular_region(s.sigma, 0.3, s.field);
    CHECK_THROWS_AS(certify_barrier(region, broken, 1), CertificationError);
}

TEST_CASE("gradient bound on the tube") {
    // |grad psi|_g^2 <= 4 psi up to discretization.
    for (const char* name : {"cosh-neck", "warped3d-neck", "sphere-equator"}) {
        const Setup s = scenario_setup(name, 64);
        const TubularRegion region =
            build_tubular_region(s.sigma, get_scenario(name).default_eps1, s.field);
        for (const TubePoint& tp : region.grid) {
            const double psi = s.field.psi(tp.point);
            const Vec grad_cov = s.field.grad_covariant(tp.point);
            const Mat g = s.chart->metric_raw(tp.point);
            const double grad2 = grad_cov.dot(g.ldlt().solve(grad_cov));
            CHECK(grad2 <= 4.0 * psi + 1e-8);
        }
    }
}

TEST_CASE("barrier certification on the cosh neck") {
    const Setup s = scenario_setup("cosh-neck", 64);
    const BarrierCertificate cert =
        certify_barrier_refined(s.sigma, 0.5, s.field, 1, -1.0, 0.05, "cosh-neck");
    // Infimum of 2 tanh(r)/r over the tube, attained at r = eps1.
    CHECK(cert.min_ratio == Catch::Approx(4.0 * std::tanh(0.5)).margin(1e-2));
    CHECK(cert.min_ratio == Catch::Approx(1.84847).margin(1e-2));
    CHECK(cert.c1 == Catch::Approx(cert.min_ratio * 0.95).margin(1e-12));
    CHECK(cert.c1 <= cert.min_ratio);
    CHECK(cert.verdict);
    CHECK(cert.psi_floor == Catch::Approx(std::pow(1e-3 * 0.5, 2)).margin(1e-18));

    // Monotone refinement: shrinking eps1 never decreases the certified c1.
    const BarrierCertificate c04 = certify_barrier_refined(s.sigma, 0.4, s.field, 1);
    const BarrierCertificate c03 = certify_barrier_refined(s.sigma, 0.3, s.field, 1);
    CHECK(cert.c1 <= c04.c1 + 1e-12);
    CHECK(c04.c1 <= c03.c1 + 1e-12);

    // The ratio 2 tanh(r)/r tends to 2 as the tube shrinks.
    const BarrierCertificate small = certify_barrier_refined(s.sigma, 0.05, s.field, 1);
    CHECK(small.min_ratio == Catch::Approx(2.0 * std::tanh(0.05) / 0.05).margin(1e-4));
}

TEST_CASE("barrier certification fails on the sphere equator") {
    const Setup s = scenario_setup("sphere-equator", 64);
    for (double eps1 : {0.1, 0.2, 0.3}) {
        const BarrierCertificate cert =
            certify_barrier_refined(s.sigma, eps1, s.field, 1, -1.0, 0.05, "sphere-equator");
        CHECK(!cert.verdict);
        CHECK(cert.min_ratio < 0.0);
        CHECK(cert.c1 <= cert.min_ratio);  // safety factor keeps c1 below the infimum
    }
}

TEST_CASE("barrier certification is marginal on the flat torus geodesic") {
    const Setup s = scenario_setup("flat-torus-geodesic", 64);
    const BarrierCertificate cert = certify_barrier_refined(s.sigma, 0.5, s.field, 1);
    CHECK(std::abs(cert.min_ratio) < 1e-6);
    CHECK(!cert.verdict);
}

TEST_CASE("codimension-two certification matches the on-axis closed form") {
    const Setup s = scenario_setup("warped3d-neck", 64);
    const BarrierCertificate cert =
        certify_barrier_refined(s.sigma, 0.5, s.field, 1, -1.0, 0.05, "warped3d-neck");
    // min over the normal disc of 2(x tanh x + y tanh y)/rho^2 sits on the axes.
    CHECK(cert.min_ratio == Catch::Approx(4.0 * std::tanh(0.5)).margin(1e-2));
    CHECK(cert.verdict);
}

TEST_CASE("hessian of the projected distance stays usable") {
    // The generic projection path reproduces the closed-form certification at
    // reduced accuracy (the Gauss-Newton tolerance enters the stencil).
    const Setup s = scenario_setup("cosh-neck", 256);
    const SquaredDistanceField proj = SquaredDistanceField::projection(s.sigma);
    const HessianPsi hp = hessian_psi(proj, pt2(0.35, 2.1));
    CHECK(hp.eigenvalues[0] == Catch::Approx(2.0 * 0.35 * std::tanh(0.35)).margin(2e-2));
    CHECK(hp.eigenvalues[1] == Catch::Approx(2.0).margin(2e-2));
}
