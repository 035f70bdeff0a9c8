#include <catch2/catch_amalgamated.hpp>
#include <spherevortex/greens.hpp>

#include <random>

using namespace spherevortex;

TEST_CASE("green_G reference values") {
    // antipodal: the log argument is 2, cancelling the additive constant
    REQUIRE(green_G({PI / 2, 0}, {PI / 2, PI}) == Catch::Approx(0.0).margin(1e-15));
    // quarter turn: log argument 1
    REQUIRE(green_G({PI / 2, 0}, {PI / 2, PI / 2}) ==
            Catch::Approx(LN2 / (4 * PI)).margin(1e-15));
}

TEST_CASE("green_G is symmetric and distance-only") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uth(0.05, PI - 0.05), uph(-PI, PI);
    for (int i = 0; i < 200; ++i) {
        SpherePoint a{uth(rng), uph(rng)}, b{uth(rng), uph(rng)};
        REQUIRE(green_G(a, b) == Catch::Approx(green_G(b, a)).margin(1e-15));
        // invariance under rotation about the polar axis
        double shift = uph(rng);
        SpherePoint ar{a.theta, a.phi + shift}, br{b.theta, b.phi + shift};
        REQUIRE(green_G(ar, br) == Catch::Approx(green_G(a, b)).margin(1e-13));
    }
}

TEST_CASE("green_G derivatives match finite differences") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uth(0.3, PI - 0.3), uph(-PI, PI);
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
        SpherePoint a{uth(rng), uph(rng)}, b{uth(rng), uph(rng)};
        if (geodesic_distance(a, b) < 0.1) continue;
        double fd_th = (green_G({a.theta + h, a.phi}, b) - green_G({a.theta - h, a.phi}, b)) /
                       (2 * h);
        double fd_ph = (green_G({a.theta, a.phi + h}, b) - green_G({a.theta, a.phi - h}, b)) /
                       (2 * h);
        REQUIRE(green_G_dtheta(a, b) == Catch::Approx(fd_th).epsilon(1e-8).margin(1e-10));
        REQUIRE(green_G_dphi(a, b) == Catch::Approx(fd_ph).epsilon(1e-8).margin(1e-10));
    }
}

TEST_CASE("gamma_local logarithm of the chart distance") {
    const double h = 1e-4;
    // pure colatitude offset
    REQUIRE(gamma_local({0.8 + h, 0.3}, {0.8, 0.3}) ==
            Catch::Approx(-std::log(h) / (2 * PI)).epsilon(1e-12));
    // pure longitude offset on the equator
    REQUIRE(gamma_local({PI / 2, 0.3 + h}, {PI / 2, 0.3}) ==
            Catch::Approx(-std::log(h) / (2 * PI)).epsilon(1e-12));
    // the chart factor uses the first argument's sine, so swapping arguments
    // changes the value off the equator
    double ab = gamma_local({PI / 3, 0.0}, {PI / 4, 0.1});
    double ba = gamma_local({PI / 4, 0.1}, {PI / 3, 0.0});
    REQUIRE(std::abs(ab - ba) > 1e-4);
}

TEST_CASE("regular_H diagonal value and limit") {
    REQUIRE(regular_H_diagonal() == Catch::Approx(LN2 / (2 * PI)).margin(1e-16));
    // the diagonal is the limit of G - Gamma, independent of approach direction
    SpherePoint c{PI / 3, 1.0};
    for (double d : {1e-3, 1e-4}) {
        REQUIRE(regular_H({c.theta + d, c.phi}, c) ==
                Catch::Approx(regular_H_diagonal()).margin(5 * d));
        REQUIRE(regular_H({c.theta, c.phi + d / std::sin(c.theta)}, c) ==
                Catch::Approx(regular_H_diagonal()).margin(5 * d));
    }
    REQUIRE(regular_H(c, c) == Catch::Approx(regular_H_diagonal()).margin(1e-15));
}

TEST_CASE("regular_H equals G minus the local log away from the diagonal") {
    SpherePoint a{PI / 2 + 1e-4, 0.0}, b{PI / 2, 0.0};
    REQUIRE(regular_H(a, b) == Catch::Approx(green_G(a, b) - gamma_local(a, b)).margin(1e-14));
    REQUIRE(std::isfinite(regular_H(a, b)));
}

TEST_CASE("robin_theta_derivative symmetry and limit formula") {
    RobinData eq = robin_theta_derivative({PI / 2, 0.4}, 1e-3);
    REQUIRE(eq.converged);
    REQUIRE(std::abs(eq.d_theta_avg) < 1e-8);

    RobinData n4 = robin_theta_derivative({PI / 4, 0.0}, 1e-3);
    RobinData n4b = robin_theta_derivative({PI / 4, 0.0}, 1e-2);
    REQUIRE(std::abs(n4.d_theta_avg - n4b.d_theta_avg) < 1e-5);

    RobinData s4 = robin_theta_derivative({3 * PI / 4, 0.0}, 1e-3);
    REQUIRE(s4.d_theta_avg == Catch::Approx(-n4.d_theta_avg).margin(1e-6));

    // closed-form small-disk limit
    REQUIRE(n4.d_theta_avg ==
            Catch::Approx(robin_theta_derivative_limit(PI / 4)).margin(1e-6));
    REQUIRE(robin_theta_derivative_limit(PI / 2) == Catch::Approx(0.0).margin(1e-16));
    REQUIRE(robin_theta_derivative_limit(PI / 4) ==
            Catch::Approx(1.0 / (std::tan(PI / 4) * 16 * PI)).margin(1e-16));
}

TEST_CASE("laplace_beltrami_fd reproduces eigenfunction and Green identities") {
    const double h = 1e-3;
    SpherePoint p{0.9, 0.4};
    auto coslat = [](const SpherePoint& z) { return std::cos(z.theta); };
    REQUIRE(laplace_beltrami_fd(coslat, p, h) ==
            Catch::Approx(-2 * std::cos(p.theta)).margin(1e-5));

    auto constant = [](const SpherePoint&) { return 3.7; };
    REQUIRE(laplace_beltrami_fd(constant, p, h) == Catch::Approx(0.0).margin(1e-10));

    // off the source, G solves Delta G = 1/(4 pi) (mean-zero normalization)
    SpherePoint src{2.0, -1.0};
    auto Gf = [&](const SpherePoint& z) { return green_G(z, src); };
    REQUIRE(laplace_beltrami_fd(Gf, p, h) == Catch::Approx(1.0 / (4 * PI)).margin(1e-5));
}
