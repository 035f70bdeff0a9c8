#include <catch2/catch_amalgamated.hpp>
#include <spherevortex/sphere_geom.hpp>

#include <random>

using namespace spherevortex;

TEST_CASE("to_cartesian maps reference points") {
    Vec3 x = to_cartesian({PI / 2, 0.0});
    REQUIRE(x.isApprox(Vec3(1, 0, 0), 1e-15));
    Vec3 y = to_cartesian({PI / 2, PI / 2});
    REQUIRE(y.isApprox(Vec3(0, 1, 0), 1e-15));
    Vec3 np = to_cartesian({1e-9, 0.3});
    REQUIRE(np.z() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("to_cartesian returns unit vectors, from_cartesian inverts") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uth(0.05, PI - 0.05), uph(-PI, PI);
    for (int i = 0; i < 200; ++i) {
        SpherePoint p{uth(rng), uph(rng)};
        Vec3 x = to_cartesian(p);
        REQUIRE(std::abs(x.norm() - 1.0) < 1e-15);
        SpherePoint q = from_cartesian(x);
        REQUIRE(q.theta == Catch::Approx(p.theta).margin(1e-13));
        REQUIRE(wrap_angle(q.phi - p.phi) == Catch::Approx(0.0).margin(1e-13));
    }
}

TEST_CASE("wrap_angle reduces to (-pi, pi]") {
    REQUIRE(wrap_angle(3 * PI) == Catch::Approx(PI).margin(1e-14));
    REQUIRE(wrap_angle(-3 * PI) == Catch::Approx(PI).margin(1e-14));
    REQUIRE(wrap_angle(0.3) == Catch::Approx(0.3));
    for (double a : {-10.0, -1.0, 0.0, 2.5, 40.0}) {
        double w = wrap_angle(a);
        REQUIRE(w > -PI - 1e-15);
        REQUIRE(w <= PI + 1e-15);
        REQUIRE(std::abs(std::remainder(w - a, 2 * PI)) < 1e-12);
    }
}

TEST_CASE("geodesic_distance reference values and symmetry") {
    REQUIRE(geodesic_distance({PI / 2, 0}, {PI / 2, PI}) == Catch::Approx(PI).margin(1e-14));
    REQUIRE(geodesic_distance({0.7, 0.2}, {0.7, 0.2}) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(geodesic_distance({PI / 2, 0}, {PI / 2, PI / 2}) ==
            Catch::Approx(PI / 2).margin(1e-14));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uth(0.05, PI - 0.05), uph(-PI, PI);
    for (int i = 0; i < 1000; ++i) {
        SpherePoint a{uth(rng), uph(rng)}, b{uth(rng), uph(rng)};
        double d = geodesic_distance(a, b);
        REQUIRE(d == Catch::Approx(geodesic_distance(b, a)).margin(1e-14));
        // chordal consistency: cos d equals the dot product of the embeddings
        REQUIRE(std::cos(d) ==
                Catch::Approx(to_cartesian(a).dot(to_cartesian(b))).margin(1e-14));
    }
}

TEST_CASE("one_minus_cos_dist is the stable chordal form") {
    SpherePoint a{0.3, 0.1}, b{0.3 + 1e-8, 0.1};
    // tiny separations keep full relative accuracy (no cancellation)
    double D = one_minus_cos_dist(a, b);
    REQUIRE(D == Catch::Approx(0.5e-16).epsilon(1e-6));
    REQUIRE(one_minus_cos_dist({PI / 2, 0}, {PI / 2, PI}) == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("tangent_offset conventions") {
    const double h = 1e-3;
    auto eq = tangent_offset({PI / 2, 0.4}, {PI / 2, 0.4 + h}, SineMode::at_center);
    REQUIRE(eq.y1 == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(eq.y2 == Catch::Approx(h).margin(1e-15));

    auto mid = tangent_offset({PI / 3, 0.4}, {PI / 3, 0.4 + h}, SineMode::at_center);
    REQUIRE(mid.y2 == Catch::Approx(h * std::sin(PI / 3)).margin(1e-15));

    auto zero = tangent_offset({PI / 3, 0.4}, {PI / 3, 0.4}, SineMode::at_center);
    REQUIRE(zero.norm() == Catch::Approx(0.0).margin(1e-15));

    // at_point uses the moving point's sine factor
    auto ap = tangent_offset({PI / 3, 0.4}, {PI / 3 + 0.01, 0.4 + h}, SineMode::at_point);
    REQUIRE(ap.y2 == Catch::Approx(h * std::sin(PI / 3 + 0.01)).margin(1e-15));
}

TEST_CASE("tangent_offset norm approaches geodesic distance") {
    SpherePoint c{0.9, -0.7};
    for (double d : {1e-2, 1e-3, 1e-4}) {
        // pure meridional offset: the chart is exact in theta
        SpherePoint pm{c.theta + d, c.phi};
        REQUIRE(tangent_offset(c, pm, SineMode::at_center).norm() /
                    geodesic_distance(c, pm) ==
                Catch::Approx(1.0).margin(1e-12));
        // pure zonal offset: quadratic agreement
        SpherePoint pz{c.theta, c.phi + d / std::sin(c.theta)};
        double rz = tangent_offset(c, pz, SineMode::at_center).norm() /
                    geodesic_distance(c, pz);
        REQUIRE(std::abs(rz - 1.0) < d * d + 1e-12);
        // mixed offset: the single-sine chart picks up a cot(theta) cross term,
        // linear in d with a small constant
        SpherePoint p{c.theta + d * 0.6, c.phi + d * 0.8 / std::sin(c.theta)};
        double ratio = tangent_offset(c, p, SineMode::at_center).norm() /
                       geodesic_distance(c, p);
        REQUIRE(std::abs(ratio - 1.0) < 0.5 * d + 1e-12);
    }
}

TEST_CASE("cap_quadrature weight sum and symmetry") {
    const double r = 1e-3;
    QuadratureGrid g = cap_quadrature({PI / 2, 0.0}, r, 12, 32);
    double sum = 0.0;
    for (double w : g.weights) {
        REQUIRE(w > 0.0);
        sum += w;
    }
    REQUIRE(std::abs(sum - PI * r * r) / (PI * r * r) < 1e-6);

    // integrand odd in the colatitude offset integrates to zero
    double odd = 0.0;
    for (size_t i = 0; i < g.points.size(); ++i)
        odd += g.weights[i] * (g.points[i].theta - PI / 2);
    REQUIRE(std::abs(odd) < 1e-14);

    REQUIRE_THROWS(cap_quadrature({PI / 2, 0.0}, r, 0, 8));
    REQUIRE_THROWS(cap_quadrature({PI / 2, 0.0}, r, 8, 0));
}

TEST_CASE("cap_quadrature converges under refinement") {
    // smooth radial integrand: refined rule reproduces the coarse value
    auto integral = [](int n_r, int n_a) {
        QuadratureGrid g = cap_quadrature({0.8, 0.3}, 1e-2, n_r, n_a);
        double s = 0.0;
        for (size_t i = 0; i < g.points.size(); ++i) {
            double d = geodesic_distance({0.8, 0.3}, g.points[i]);
            s += g.weights[i] * std::exp(-d * d * 1e4);
        }
        return s;
    };
    REQUIRE(std::abs(integral(8, 32) - integral(16, 64)) /
                std::abs(integral(16, 64)) < 1e-8);
}
