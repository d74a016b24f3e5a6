#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "mcflab/eguchi_hanson.hpp"
#include "mcflab/scenario.hpp"
#include "mcflab/stability.hpp"

using namespace mcflab;

namespace {

Vec pt2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

DiscreteImmersion scenario_sigma(const std::string& name, int N) {
    const Scenario& s = get_scenario(name);
    return s.make_sigma(s.make_chart(), N);
}

nlohmann::json load_reference() {
    std::ifstream in(std::string(MCFLAB_TEST_DATA_DIR) + "/eguchi_hanson_reference.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("partial Ricci operator oracles") {
    // Flat chart: everything vanishes.
    {
        const DiscreteImmersion imm = scenario_sigma("flat-circle", 32);
        const FrameField ff = frames_at(imm);
        const auto cd = imm.chart->riemann_at(imm.samples[0]);
        CHECK(partial_ricci(cd, ff.tangent[0], ff.normal[0]).cwiseAbs().maxCoeff() < 1e-10);
    }
    // Neck of the cosh surface, codimension 1: the single contraction is the
    // Gauss curvature -1.
    {
        const DiscreteImmersion imm = scenario_sigma("cosh-neck", 32);
        const FrameField ff = frames_at(imm);
        const auto cd = imm.chart->riemann_at(imm.samples[3]);
        const Mat r = partial_ricci(cd, ff.tangent[3], ff.normal[3]);
        CHECK(r(0, 0) == Catch::Approx(-1.0).margin(1e-6));
    }
    // Warped-3d neck, codimension 2: diag(-1, -1) with vanishing mixed term.
    {
        const DiscreteImmersion imm = scenario_sigma("warped3d-neck", 32);
        const FrameField ff = frames_at(imm);
        const auto cd = imm.chart->riemann_at(imm.samples[5]);
        const Mat r = partial_ricci(cd, ff.tangent[5], ff.normal[5]);
        CHECK(r(0, 0) == Catch::Approx(-1.0).margin(1e-6));
        CHECK(r(1, 1) == Catch::Approx(-1.0).margin(1e-6));
        CHECK(std::abs(r(0, 1)) < 1e-6);
    }
}

TEST_CASE("shape quadratic oracles") {
    // Geodesic: h vanishes, so does A.
    {
        const DiscreteImmersion imm = scenario_sigma("cosh-neck", 64);
        FrameField ff = frames_at(imm);
        second_fundamental_form(imm, ff);
        CHECK(shape_quadratic(ff.h[0]).cwiseAbs().maxCoeff() < 1e-10);
    }
    // Latitude circle at pi/4: A = cot^2(pi/4) = 1.
    {
        auto chart = make_round_sphere_chart();
        std::vector<Vec> pts;
        for (int k = 0; k < 128; ++k) pts.push_back(pt2(M_PI / 4.0, 2.0 * M_PI * k / 128));
        const DiscreteImmersion imm = make_curve(chart, pts);
        FrameField ff = frames_at(imm);
        second_fundamental_form(imm, ff);
        CHECK(shape_quadratic(ff.h[0])(0, 0) == Catch::Approx(1.0).margin(1e-4));
    }
    // Planar circle of radius 2: A = 1/4.
    {
        const Scenario& s = get_scenario("flat-circle");
        auto chart = s.make_chart();
        std::vector<Vec> pts;
        for (int k = 0; k < 128; ++k) {
            const double t = 2.0 * M_PI * k / 128;
            pts.push_back(pt2(2.0 * std::cos(t), 2.0 * std::sin(t)));
        }
        const DiscreteImmersion imm = make_curve(chart, pts);
        FrameField ff = frames_at(imm);
        second_fundamental_form(imm, ff);
        CHECK(shape_quadratic(ff.h[0])(0, 0) == Catch::Approx(0.25).margin(1e-5));
    }
}

TEST_CASE("strong stability certificates on curve scenarios") {
    const StabilityCertificate neck =
        certify_strong_stability(scenario_sigma("cosh-neck", 64), 1e-4, "cosh-neck");
    CHECK(neck.c0 == Catch::Approx(1.0).margin(1e-3));
    CHECK(neck.strongly_stable);

    const StabilityCertificate equator =
        certify_strong_stability(scenario_sigma("sphere-equator", 64), 1e-4, "sphere-equator");
    CHECK(equator.c0 == Catch::Approx(-1.0).margin(1e-3));
    CHECK(!equator.strongly_stable);

    const StabilityCertificate torus = certify_strong_stability(
        scenario_sigma("flat-torus-geodesic", 64), 1e-4, "flat-torus-geodesic");
    CHECK(torus.c0 == Catch::Approx(0.0).margin(1e-6));
    CHECK(!torus.strongly_stable);

    const StabilityCertificate warped =
        certify_strong_stability(scenario_sigma("warped3d-neck", 64), 1e-4, "warped3d-neck");
    CHECK(warped.c0 == Catch::Approx(1.0).margin(1e-2));
    CHECK(warped.strongly_stable);

    // c0 is exactly the minimum of the recorded eigenvalues.
    double mn = std::numeric_limits<double>::infinity();
    for (const Vec& e : warped.eigenvalues) mn = std::min(mn, e[0]);
    CHECK(warped.c0 == mn);
}

TEST_CASE("verdict is monotone in the margin") {
    const DiscreteImmersion imm = scenario_sigma("cosh-neck", 48);
    const StabilityCertificate loose = certify_strong_stability(imm, 1e-6);
    const StabilityCertificate tight = certify_strong_stability(imm, 0.5);
    const StabilityCertificate over = certify_strong_stability(imm, 1.5);
    CHECK(loose.strongly_stable);
    CHECK(tight.strongly_stable);
    CHECK(!over.strongly_stable);  // raising the margin can only flip pass -> fail
}

TEST_CASE("shape quadratic is positive semidefinite everywhere") {
    for (const char* name : {"flat-circle", "sphere-latitude", "cosh-neck", "warped3d-neck"}) {
        const DiscreteImmersion imm = scenario_sigma(name, 48);
        FrameField ff = frames_at(imm);
        second_fundamental_form(imm, ff);
        for (int k = 0; k < imm.count(); ++k) {
            Eigen::SelfAdjointEigenSolver<Mat> es(shape_quadratic(ff.h[k]));
            CHECK(es.eigenvalues()[0] >= -1e-10);
        }
    }
}

TEST_CASE("eigenvalues are invariant under normal frame rotation") {
    const DiscreteImmersion imm = scenario_sigma("warped3d-neck", 32);
    const StabilityCertificate cert = certify_strong_stability(imm, 1e-4);

    std::mt19937_64 rng(99);
    FrameField ff = frames_at(imm);
    for (int k = 0; k < imm.count(); ++k) {
        const double ang = 2.0 * M_PI * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const Vec n0 = ff.normal[k].col(0), n1 = ff.normal[k].col(1);
        ff.normal[k].col(0) = std::cos(ang) * n0 + std::sin(ang) * n1;
        ff.normal[k].col(1) = -std::sin(ang) * n0 + std::cos(ang) * n1;
    }
    second_fundamental_form(imm, ff);  // h recomputed in the rotated frame
    for (int k = 0; k < imm.count(); ++k) {
        const auto cd = imm.chart->riemann_at(imm.samples[k]);
        Mat S = -partial_ricci(cd, ff.tangent[k], ff.normal[k]) - shape_quadratic(ff.h[k]);
        S = 0.5 * (S + S.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        for (int a = 0; a < ff.m; ++a)
            CHECK(std::abs(es.eigenvalues()[a] - cert.eigenvalues[k][a]) < 1e-8);
    }
}

TEST_CASE("strong stability bounds the second variation quadratic form") {
    const DiscreteImmersion imm = scenario_sigma("cosh-neck", 64);
    const StabilityCertificate cert = certify_strong_stability(imm, 1e-4);
    REQUIRE(cert.strongly_stable);
    const FrameField ff = frames_at(imm);

    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec> comp(imm.count(), Vec::Zero(1));
        for (int k = 0; k < imm.count(); ++k)
            comp[k][0] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        double norm2 = 0.0;
        const double q = second_variation_quadratic(imm, ff, cert, comp, &norm2);
        CHECK(q >= cert.c0 * norm2 - 1e-9);
    }
}

TEST_CASE("certification aborts with the failing sample location") {
    // A curve running up to the edge of the chart makes the curvature stencil
    // leave the domain only when the chart itself rejects the point; fake it
    // with a chart whose metric evaluator throws off a half-plane.
    auto chart = std::make_shared<AmbientChart>(
        "custom", std::vector<AxisSpec>{{-5, 5, false}, {0.0, 2.0 * M_PI, true}},
        [](const Vec& x) {
            if (x[0] > 0.9) throw DomainError("metric undefined");
            return Mat(Mat::Identity(2, 2));
        });
    std::vector<Vec> pts;
    for (int k = 0; k < 16; ++k)
        pts.push_back(pt2(0.8995 * std::sin(2.0 * M_PI * k / 16), 2.0 * M_PI * k / 16));
    const DiscreteImmersion imm = make_curve(ChartPtr(chart), pts);
    CHECK_THROWS_AS(certify_strong_stability(imm, 1e-4), CertificationError);
}

TEST_CASE("eguchi-hanson zero section matches the offline reference") {
    const nlohmann::json ref = load_reference();
    auto chart = make_eguchi_hanson_chart(ref["a"].get<double>());

    // Riemann spots: the finite-difference tensor against the 50-digit table.
    for (const auto& spot : ref["riemann_spots"]) {
        Vec p(4);
        for (int a = 0; a < 4; ++a) p[a] = spot["point"][a].get<double>();
        const Tensor4 R = chart->riemann_at(p).riemann;
        const auto& comp = spot["components"];
        double scale = 0.0;
        for (int i = 0; i < 256; ++i) scale = std::max(scale, std::abs(comp[i].get<double>()));
        for (int i = 0; i < 256; ++i)
            CHECK(std::abs(R.v[i] - comp[i].get<double>()) < 1e-6 * scale);
    }

    // Stability certification over both chart passes: every certified sample
    // reproduces the tabulated bolt eigenvalues.
    const Scenario& scn = get_scenario("eguchi-hanson-zero-section");
    const double ref_eig = ref["bolt"][0]["eigenvalues"][0].get<double>();
    for (const auto& b : ref["bolt"])
        for (const auto& e : b["eigenvalues"])
            CHECK(e.get<double>() == Catch::Approx(ref_eig).margin(1e-12));

    int certified = 0;
    for (const DiscreteImmersion& grid : scn.cert_grids(chart)) {
        const StabilityCertificate cert = certify_strong_stability(grid, 1e-4);
        CHECK(cert.strongly_stable);
        CHECK(cert.c0 == Catch::Approx(ref_eig).margin(1e-3));
        for (const Vec& eig : cert.eigenvalues) {
            ++certified;
            CHECK(eig[0] > 0.0);
            for (int a = 0; a < eig.size(); ++a)
                CHECK(eig[a] == Catch::Approx(ref_eig).margin(1e-3));
        }
    }
    CHECK(certified >= 32 * 64);
}
