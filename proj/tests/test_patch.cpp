#include <catch2/catch_amalgamated.hpp>
#include <spherevortex/patch.hpp>

using namespace spherevortex;

TEST_CASE("rankine_profile values and C1 matching") {
    REQUIRE(rankine_profile(0.0) == Catch::Approx(0.25).margin(1e-16));
    REQUIRE(rankine_profile(1.0) == Catch::Approx(0.0).margin(1e-16));
    REQUIRE(rankine_profile(std::exp(1.0)) == Catch::Approx(-0.5).margin(1e-15));
    // radial derivative -1/2 from both sides of the interface
    const double h = 1e-7;
    double inner = (rankine_profile(1.0) - rankine_profile(1.0 - h)) / h;
    double outer = (rankine_profile(1.0 + h) - rankine_profile(1.0)) / h;
    REQUIRE(inner == Catch::Approx(-0.5).margin(1e-6));
    REQUIRE(outer == Catch::Approx(-0.5).margin(1e-6));
}

TEST_CASE("solve_core_radius identity at kappa = pi") {
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
        REQUIRE(std::abs(solve_core_radius(PI, eps) - eps) / eps < 1e-12);
}

TEST_CASE("solve_core_radius satisfies the defining relation") {
    for (double kappa : {0.5, 1.0, 2.0}) {
        for (double eps : {1e-2, 1e-4, 1e-6}) {
            double s = solve_core_radius(kappa, eps);
            double lhs = s * s * std::abs(std::log(s));
            double rhs = (kappa / PI) * eps * eps * std::abs(std::log(eps));
            REQUIRE(std::abs(lhs - rhs) / rhs < 1e-12);
        }
    }
}

TEST_CASE("core radius ratio tends to sqrt(kappa/pi)") {
    for (double kappa : {0.5, 1.0, 2.0}) {
        double target = std::sqrt(kappa / PI);
        double e3 = std::abs(solve_core_radius(kappa, 1e-3) / 1e-3 - target);
        double e6 = std::abs(solve_core_radius(kappa, 1e-6) / 1e-6 - target);
        REQUIRE(e6 < e3);
        REQUIRE(e6 / target < 0.05);
    }
}

TEST_CASE("solve_core_radius rejects out-of-range scales") {
    REQUIRE_THROWS(solve_core_radius(1.0, 1.0));
    REQUIRE_THROWS(solve_core_radius(1.0, 0.0));
}

TEST_CASE("beta_eps definition") {
    REQUIRE(beta_eps(0.01, 0.02) == Catch::Approx(0.01 / (2 * 0.02 * 0.02)).margin(1e-16));
}

TEST_CASE("boundary curve mirroring") {
    BoundaryCurve b(4);
    b.cos_coefs[2] = 0.3;
    b.sin_coefs[3] = 0.1;
    BoundaryCurve m = b;
    m.mirrored = true;
    for (double xi : {0.0, 0.7, 2.1, 5.0})
        REQUIRE(m.t(xi) == Catch::Approx(b.t(PI - xi)).margin(1e-15));
}

TEST_CASE("street solve reproduces the frozen traveling speed") {
    StreetSpec spec;  // k=2, theta0=pi/4, kappa=1, type1
    PatchSystem sys = steady_patch_solve_karman(spec, 0.02);
    REQUIRE(sys.converged);
    REQUIRE(sys.residual_norm < 1e-11);
    REQUIRE(sys.contraction_ratio < 1.0);
    // reproducible only to the residual tolerance (1e-11), not to full precision
    REQUIRE(sys.frame == Catch::Approx(0.19304686643595134).epsilon(1e-9));
    REQUIRE(sys.patches.size() == 4);
    REQUIRE(sys.boundaries.size() == 4);
}

TEST_CASE("street solve flux constants share one magnitude") {
    StreetSpec spec;
    PatchSystem sys = steady_patch_solve_karman(spec, 0.02);
    for (size_t i = 1; i < sys.patches.size(); ++i) {
        REQUIRE(std::abs(sys.patches[i].flux) ==
                Catch::Approx(std::abs(sys.patches[0].flux)).margin(1e-15));
        REQUIRE(sys.patches[i].flux * sys.patches[i].sign > 0.0);
    }
    // the discrete balance has the same mirror antisymmetry
    double mu0 = flux_constant(sys.patches, 0, sys.frame);
    for (size_t i = 1; i < sys.patches.size(); ++i) {
        double mui = flux_constant(sys.patches, static_cast<int>(i), sys.frame);
        REQUIRE(std::abs(mui) == Catch::Approx(std::abs(mu0)).margin(1e-12));
        REQUIRE(mui * sys.patches[i].sign > 0.0);
    }
}

TEST_CASE("converged boundaries are convex") {
    StreetSpec spec;
    PatchSystem sys = steady_patch_solve_karman(spec, 0.02);
    const int n = 256;
    for (const auto& b : sys.boundaries) {
        for (int j = 0; j < n; ++j) {
            const double xi = 2 * PI * j / n, h = 1e-4;
            const double r = 1.0 + b.t(xi);
            const double rp = (b.t(xi + h) - b.t(xi - h)) / (2 * h);
            const double rpp = (b.t(xi + h) - 2 * b.t(xi) + b.t(xi - h)) / (h * h);
            // polar curvature numerator of r(xi)
            REQUIRE(r * r + 2 * rp * rp - r * rpp > 0.0);
        }
    }
}

TEST_CASE("patch circulation of the frozen street solution") {
    StreetSpec spec;
    PatchSystem sys = steady_patch_solve_karman(spec, 0.02);
    double circ = patch_circulation(sys.patches[0], sys.boundaries[0]);
    REQUIRE(circ == Catch::Approx(0.8576729211).margin(1e-8));
    // signed circulations balance over the full system
    double total = 0.0;
    for (size_t i = 0; i < sys.patches.size(); ++i)
        total += sys.patches[i].sign * patch_circulation(sys.patches[i], sys.boundaries[i]);
    REQUIRE(std::abs(total) < 1e-10);
}

TEST_CASE("exact-disk circulation at kappa = pi") {
    // with kappa = pi the core radius equals eps, so a circular patch encloses
    // area pi s^2 (1 + O(s^2)) and circulation pi (1 + O(s^2))
    PatchSpec p;
    p.kappa = PI;
    p.eps = 0.01;
    p.core_radius = solve_core_radius(PI, p.eps);
    BoundaryCurve b(8);
    double circ = patch_circulation(p, b);
    REQUIRE(std::abs(circ / PI - 1.0) < p.core_radius * p.core_radius);
}

TEST_CASE("first-order boundary vanishes for an isolated equatorial patch") {
    PatchSpec p;
    p.center = {PI / 2, 0.0};
    p.eps = 0.02;
    p.core_radius = solve_core_radius(p.kappa, p.eps);
    FirstOrderBoundary fo = boundary_first_order({p}, 0, 0.0);
    REQUIRE(fo.t_full.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("first-order street boundary splits into mode 1 plus the chart term") {
    StreetSpec spec;
    PatchSystem sys = steady_patch_solve_karman(spec, 0.01);
    FirstOrderBoundary fo = boundary_first_order(sys.patches, 0, 0.0);
    const int n = static_cast<int>(fo.xi.size());
    // without a frame the patch drifts, so the display curve is nonzero mode 1
    double c1 = 0.0, c1_full = 0.0;
    for (int j = 0; j < n; ++j) {
        c1 += fo.t_display[j] * std::cos(fo.xi[j]) * 2.0 / n;
        c1_full += fo.t_full[j] * std::cos(fo.xi[j]) * 2.0 / n;
    }
    REQUIRE(std::abs(c1) > 0.0);
    REQUIRE(std::abs(c1_full) < 1e-14);
    // the corrected curve is only the chart curvature mode
    const double s = sys.patches[0].core_radius;
    const double chart = s / (8.0 * std::tan(sys.patches[0].center.theta));
    for (int j = 0; j < n; ++j)
        REQUIRE(fo.t_full[j] ==
                Catch::Approx(chart * std::cos(3.0 * fo.xi[j])).margin(1e-14));
}

TEST_CASE("general-mode solve holds an antipodal dipole in place") {
    VortexConfig dipole;
    dipole.vortices.push_back({{PI / 2, 0.0}, 1.0, +1.0});
    dipole.vortices.push_back({{PI / 2, PI}, 1.0, -1.0});
    std::vector<PatchSpec> init;
    for (const auto& v : dipole.vortices) {
        PatchSpec p;
        p.center = v.z;
        p.kappa = v.kappa;
        p.sign = v.sign;
        p.eps = 0.04;
        init.push_back(p);
    }
    PatchSystem sys = steady_patch_solve_general(init, 0.0, 0.04);
    REQUIRE(sys.converged);
    REQUIRE(sys.residual_norm < 1e-10);
    REQUIRE(sys.center_displacement < 1e-6);
}

TEST_CASE("sample_boundary_t evaluates the series on the uniform grid") {
    BoundaryCurve b(6);
    b.cos_coefs[3] = 0.2;
    VectorXd t = sample_boundary_t(b, 32);
    for (int j = 0; j < 32; ++j)
        REQUIRE(t[j] == Catch::Approx(b.t(2 * PI * j / 32)).margin(1e-15));
}
