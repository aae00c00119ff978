#include <doctest.h>

#include <cmath>

#include "hkflow/geometry.hpp"
#include "hkflow/geometry_build.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace hkflow;

namespace {

const double kPi = std::acos(-1.0);

ChartSample spheroid_chart(double a, double c, double u, double phi) {
    double s = std::sin(u), cu = std::cos(u);
    double sp = std::sin(phi), cp = std::cos(phi);
    ChartSample cs;
    cs.position = {a * s * cp, a * s * sp, c * cu};
    cs.d_u = {a * cu * cp, a * cu * sp, -c * s};
    cs.d_phi = {-a * s * sp, a * s * cp, 0.0};
    cs.dd_uu = {-a * s * cp, -a * s * sp, -c * cu};
    cs.dd_uphi = {-a * cu * sp, a * cu * cp, 0.0};
    cs.dd_phiphi = {-a * s * cp, -a * s * sp, 0.0};
    return cs;
}

MetricDerivs spheroid_metric_derivs(double a, double c, double u) {
    double s = std::sin(u), cu = std::cos(u);
    MetricDerivs d;
    d.dg_du.uu = 2.0 * (a * a - c * c) * s * cu;  // d/du (a^2 cos^2 + c^2 sin^2)
    d.dg_du.phiphi = 2.0 * a * a * s * cu;        // d/du (a^2 sin^2)
    d.dg_du.uphi = 0.0;
    return d;
}

} // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("metric_from_chart: unit sphere values") {
    auto cs = spheroid_chart(1.0, 1.0, kPi / 2.0, 0.3);
    MetricData m = metric_from_chart(cs, spheroid_metric_derivs(1.0, 1.0, kPi / 2.0));
    CHECK(m.g.uu == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.g.phiphi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(m.g.uphi) < 1e-14);

    auto cs2 = spheroid_chart(1.0, 1.0, kPi / 3.0, 0.0);
    MetricData m2 = metric_from_chart(cs2, spheroid_metric_derivs(1.0, 1.0, kPi / 3.0));
    CHECK(m2.g.uu == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m2.g.phiphi == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("metric_from_chart: spheroid equator vs finite-difference oracle") {
    double u = kPi / 2.0;
    auto cs = spheroid_chart(1.0, 2.0, u, 0.0);
    MetricData m = metric_from_chart(cs, spheroid_metric_derivs(1.0, 2.0, u));
    CHECK(m.g.uu == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(m.g.phiphi == doctest::Approx(1.0).epsilon(1e-14));

    auto F = [](double uu, double pp) {
        return Vec3{std::sin(uu) * std::cos(pp), std::sin(uu) * std::sin(pp), 2.0 * std::cos(uu)};
    };
    auto o = oracle::chart_oracle(F, u, 0.0);
    CHECK(m.g.uu == doctest::Approx(o.g_uu).epsilon(1e-8));
    CHECK(m.g.phiphi == doctest::Approx(o.g_phiphi).epsilon(1e-8));
}

TEST_CASE("metric_from_chart: g * g_inv = id, Christoffel symmetry") {
    for (double u : {0.3, 1.0, 2.0, 2.8}) {
        auto cs = spheroid_chart(1.0, 2.0, u, 0.7);
        MetricData m = metric_from_chart(cs, spheroid_metric_derivs(1.0, 2.0, u));
        double i11 = m.g.uu * m.g_inv.uu + m.g.uphi * m.g_inv.uphi;
        double i12 = m.g.uu * m.g_inv.uphi + m.g.uphi * m.g_inv.phiphi;
        double i22 = m.g.uphi * m.g_inv.uphi + m.g.phiphi * m.g_inv.phiphi;
        CHECK(std::fabs(i11 - 1.0) < 1e-12);
        CHECK(std::fabs(i12) < 1e-12);
        CHECK(std::fabs(i22 - 1.0) < 1e-12);
        CHECK(m.sqrt_det_g > 0.0);
        for (int mm = 0; mm < 2; ++mm)
            CHECK(m.christoffel[mm][0][1] == doctest::Approx(m.christoffel[mm][1][0]));
        // exact values for the surface of revolution
        double s = std::sin(u), cu = std::cos(u);
        double w2 = cu * cu + 4.0 * s * s;
        CHECK(m.christoffel[0][1][1] == doctest::Approx(-s * cu / w2).epsilon(1e-12));
        CHECK(m.christoffel[1][0][1] == doctest::Approx(cu / s).epsilon(1e-12));
    }
}

TEST_CASE("metric_from_chart: degenerate chart error names the node") {
    ChartSample cs;
    cs.d_u = {1.0, 0.0, 0.0};
    cs.d_phi = {2.0, 0.0, 0.0};  // parallel: Gram determinant 0
    CHECK(testutil::throws_containing([&] { metric_from_chart(cs, {}, 17); },
                                      "degenerate chart at node 17"));
}

TEST_CASE("shape_from_chart: spheres give H = n/R with outer normal") {
    for (double R : {1.0, 0.5}) {
        auto cs = spheroid_chart(R, R, 1.1, 0.4);
        MetricData m = metric_from_chart(cs, spheroid_metric_derivs(R, R, 1.1));
        ShapeData sd = shape_from_chart(cs, m);
        CHECK(sd.H == doctest::Approx(2.0 / R).epsilon(1e-12));
        CHECK(sd.A_norm_sq == doctest::Approx(2.0 / (R * R)).epsilon(1e-12));
        CHECK(sd.kappa1 == doctest::Approx(1.0 / R).epsilon(1e-12));
        CHECK(sd.kappa2 == doctest::Approx(1.0 / R).epsilon(1e-12));
        CHECK(std::fabs(norm(sd.nu) - 1.0) < 1e-12);
        // outer: nu points along the position vector on a sphere
        CHECK(dot(sd.nu, cs.position) == doctest::Approx(R).epsilon(1e-12));
    }
}

TEST_CASE("shape_from_chart: spheroid pole/equator against the curvature oracle") {
    // equator: kappa1 (meridian) = 0.25, kappa2 (parallel) = 1
    auto cs = spheroid_chart(1.0, 2.0, kPi / 2.0, 0.0);
    MetricData m = metric_from_chart(cs, spheroid_metric_derivs(1.0, 2.0, kPi / 2.0));
    ShapeData sd = shape_from_chart(cs, m);
    CHECK(sd.kappa1 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sd.kappa2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sd.H == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(sd.A_norm_sq == doctest::Approx(1.0625).epsilon(1e-12));

    auto F = [](double uu, double pp) {
        return Vec3{std::sin(uu) * std::cos(pp), std::sin(uu) * std::sin(pp), 2.0 * std::cos(uu)};
    };
    auto o = oracle::chart_oracle(F, kPi / 2.0, 0.0);
    CHECK(sd.H == doctest::Approx(o.H).epsilon(1e-8));
    CHECK(sd.A_norm_sq == doctest::Approx(o.A2).epsilon(1e-8));

    // near-pole limit of the oracle approaches kappa1 = kappa2 = 2 (H = 4)
    auto o_pole = oracle::chart_oracle(F, 1e-3, 0.0);
    CHECK(o_pole.H == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("shape invariants on random convex profiles: H = k1+k2, |A|^2 = k1^2+k2^2 >= H^2/2") {
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
        ProfileSurface s = oracle::random_convex_profile(seed, 256);
        GeometryFields g = build_geometry(s);
        for (size_t j = 0; j < g.H.size(); ++j) {
            CHECK(g.H[j] ==
                  doctest::Approx(g.kappa1[j] + g.kappa2[j]).epsilon(1e-10));
            CHECK(g.A2[j] ==
                  doctest::Approx(g.kappa1[j] * g.kappa1[j] + g.kappa2[j] * g.kappa2[j])
                      .epsilon(1e-10));
            CHECK(g.A2[j] >= 0.5 * g.H[j] * g.H[j] * (1.0 - 1e-12));
            double nr = g.nu_r[j] * g.nu_r[j] + g.nu_z[j] * g.nu_z[j];
            CHECK(std::fabs(nr - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("covariant_grad_A: zero on the round sphere, Kato bound everywhere") {
    GeometryFields g = build_geometry(sphere_profile(1.0, 400));
    for (size_t j = 0; j < g.H.size(); ++j)
        CHECK(std::fabs(g.grad_A.norm_sq[j]) < 1e-8);

    for (unsigned seed : {5u, 6u}) {
        GeometryFields gp = build_geometry(oracle::random_convex_profile(seed, 256));
        for (size_t j = 2; j + 2 < gp.H.size(); ++j) {
            CHECK(gp.grad_A.norm_sq[j] >= 0.0);
            // |grad H|^2 <= n |grad A|^2 up to discretization slack
            CHECK(gp.grad_H_sq[j] <= 2.0 * gp.grad_A.norm_sq[j] + 1e-8);
        }
    }
}

TEST_CASE("covariant_grad_A: spheroid against the analytic-derivative oracle") {
    const int N = 800;
    GeometryFields g = build_geometry(spheroid_profile(1.0, 2.0, N));
    oracle::SpheroidOracle o;
    const double du = kPi / N;

    // equator value (vanishes by symmetry)
    CHECK(std::fabs(g.grad_A.norm_sq[N / 2] - o.grad_A_sq(kPi / 2.0)) < 1e-6);

    // interior agreement relative to the field scale
    double scale = 0.0, err = 0.0;
    for (int j = 2; j <= N - 2; ++j) {
        scale = std::max(scale, std::fabs(o.grad_A_sq(du * j)));
        err = std::max(err, std::fabs(g.grad_A.norm_sq[j] - o.grad_A_sq(du * j)));
    }
    CHECK(err < 1e-3 * scale);

    // Codazzi symmetry: nabla_u h_pp == nabla_phi h_up up to O(h^2)
    double cod = 0.0;
    for (int j = 2; j <= N - 2; ++j)
        cod = std::max(cod,
                       std::fabs(g.grad_A.nabla_u_hpp[j] - g.grad_A.nabla_phi_hup[j]));
    CHECK(cod < 1e-4);
}

TEST_CASE("laplace_beltrami: constant, eigenfunction, conservation") {
    const int N = 400;
    GeometryFields g = build_geometry(sphere_profile(1.0, N));
    const double du = kPi / N;
    const size_t n = g.H.size();

    std::vector<double> c(n, 3.7);
    auto lap_c = laplace_beltrami(g.grid, c);
    for (double v : lap_c) CHECK(std::fabs(v) < 1e-12);

    std::vector<double> f(n);
    for (size_t j = 0; j < n; ++j) f[j] = std::cos(du * j);
    auto lap = laplace_beltrami(g.grid, f);
    double maxerr = 0.0;
    for (size_t j = 0; j < n; ++j) maxerr = std::max(maxerr, std::fabs(lap[j] + 2.0 * f[j]));
    CHECK(maxerr < 1e-4);

    // conservation on sphere and spheroid for several fields
    GeometryFields gs = build_geometry(spheroid_profile(1.0, 2.0, N));
    for (const GeometryFields* gg : {&g, &gs}) {
        for (int which : {0, 1}) {
            std::vector<double> field(n);
            for (size_t j = 0; j < n; ++j) {
                double u = du * j;
                field[j] = which == 0 ? std::cos(u) : std::exp(std::sin(u) * std::sin(u));
            }
            auto lp = laplace_beltrami(gg->grid, field);
            double integral = gg->grid.integrate(lp);
            double scale = gg->grid.integrate(std::vector<double>(n, 1.0));
            CHECK(std::fabs(integral) < 1e-8 * scale);
        }
    }
}

TEST_CASE("laplace_beltrami: spheroid H field against the complex-step oracle") {
    const int N = 800;
    GeometryFields g = build_geometry(spheroid_profile(1.0, 2.0, N));
    oracle::SpheroidOracle o;
    const double du = kPi / N;
    double scale = 0.0, err = 0.0;
    for (int j = 2; j <= N - 2; ++j) {
        scale = std::max(scale, std::fabs(o.lap_H(du * j)));
        err = std::max(err, std::fabs(g.lap_H[j] - o.lap_H(du * j)));
    }
    CHECK(err < 2e-3 * scale);
}

TEST_CASE("surface_gradient_norm_sq: analytic value and exact bilinearity") {
    const int N = 400;
    GeometryFields g = build_geometry(sphere_profile(1.0, N));
    const double du = kPi / N;
    const size_t n = g.H.size();

    std::vector<double> c(n, -2.0);
    for (double v : surface_gradient_norm_sq(g.grid, c)) CHECK(v == 0.0);

    std::vector<double> f(n), f2(n);
    for (size_t j = 0; j < n; ++j) {
        f[j] = std::cos(du * j);
        f2[j] = 2.0 * f[j];
    }
    auto gf = surface_gradient_norm_sq(g.grid, f);
    double maxerr = 0.0;
    for (size_t j = 0; j < n; ++j) {
        double s = std::sin(du * j);
        maxerr = std::max(maxerr, std::fabs(gf[j] - s * s));
    }
    CHECK(maxerr < 1e-6);

    auto gf2 = surface_gradient_norm_sq(g.grid, f2);
    for (size_t j = 0; j < n; ++j) CHECK(gf2[j] == 4.0 * gf[j]);
}

TEST_CASE("round-sphere exactness with O(h^2) convergence of the error") {
    auto worst = [](const GeometryFields& g) {
        double m = 0.0;
        for (size_t j = 0; j < g.H.size(); ++j) {
            m = std::max(m, std::fabs(g.H[j] - 2.0));
            m = std::max(m, std::fabs(g.A2[j] - 2.0));
            m = std::max(m, std::fabs(g.grad_A.norm_sq[j]));
            m = std::max(m, std::fabs(g.lap_H[j]));
        }
        return m;
    };
    double e1 = worst(build_geometry(sphere_profile(1.0, 200)));
    double e2 = worst(build_geometry(sphere_profile(1.0, 400)));
    CHECK(e1 < 1e-3);
    double ratio = e1 / e2;
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("spheroid fields converge at order >= 1.8") {
    oracle::SpheroidOracle o;
    auto worst = [&](int N) {
        GeometryFields g = build_geometry(spheroid_profile(1.0, 2.0, N));
        const double du = kPi / N;
        double m = 0.0;
        for (int j = 2; j <= N - 2; ++j) {
            double u = du * j;
            m = std::max(m, std::fabs(g.H[j] - o.H(u)));
            m = std::max(m, std::fabs(g.A2[j] - o.A2(u)));
            m = std::max(m, std::fabs(g.grad_A.norm_sq[j] - o.grad_A_sq(u)));
            m = std::max(m, std::fabs(g.lap_H[j] - o.lap_H(u)));
            m = std::max(m, std::fabs(g.grad_H_sq[j] - o.grad_H_sq(u)));
        }
        return m;
    };
    double e200 = worst(200), e400 = worst(400), e800 = worst(800);
    double p1 = std::log2(e200 / e400);
    double p2 = std::log2(e400 / e800);
    CHECK(p1 > 1.8);
    CHECK(p2 > 1.8);
}

TEST_SUITE_END();
