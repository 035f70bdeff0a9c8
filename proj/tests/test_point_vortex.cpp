#include <catch2/catch_amalgamated.hpp>
#include <spherevortex/point_vortex.hpp>

#include <random>

using namespace spherevortex;

namespace {

VortexConfig random_balanced_config(unsigned seed, int pairs = 2) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uth(0.5, PI - 0.5), uph(-PI, PI);
    VortexConfig c;
    for (int i = 0; i < pairs; ++i) {
        c.vortices.push_back({{uth(rng), uph(rng)}, 1.0, +1.0});
        c.vortices.push_back({{uth(rng), uph(rng)}, 1.0, -1.0});
    }
    validate_config(c, 0.1);
    return c;
}

Vec3 moment(const VortexConfig& c) {
    Vec3 m = Vec3::Zero();
    for (const auto& v : c.vortices) m += v.sign * v.kappa * to_cartesian(v.z);
    return m;
}

}  // namespace

TEST_CASE("validate_config rejects bad strengths and collisions") {
    VortexConfig c;
    c.vortices.push_back({{1.0, 0.0}, 1.0, +1.0});
    c.vortices.push_back({{1.0, 0.0}, 1.0, -1.0});
    REQUIRE_THROWS(validate_config(c, 1e-4));
    c.vortices[1].z.phi = 1.0;
    REQUIRE_NOTHROW(validate_config(c, 1e-4));
    c.vortices[0].kappa = -1.0;
    REQUIRE_THROWS(validate_config(c, 1e-4));
}

TEST_CASE("kirchhoff_routh is invariant under longitude shifts") {
    VortexConfig c = random_balanced_config(17);
    double k0 = kirchhoff_routh(c);
    VortexConfig shifted = c;
    for (auto& v : shifted.vortices) v.z.phi += 0.37;
    REQUIRE(kirchhoff_routh(shifted) == Catch::Approx(k0).margin(1e-13));
}

TEST_CASE("kirchhoff_routh frame term is the signed cosine sum") {
    VortexConfig c = random_balanced_config(29, 1);
    VortexConfig cg = c;
    cg.gamma = 1.0;
    double expected = 0.0;
    for (const auto& v : c.vortices) expected -= v.sign * v.kappa * std::cos(v.z.theta);
    REQUIRE(kirchhoff_routh(cg) - kirchhoff_routh(c) == Catch::Approx(expected).margin(1e-13));
}

TEST_CASE("grad_kirchhoff_routh matches central differences") {
    VortexConfig c = random_balanced_config(41, 3);
    c.gamma = 0.2;
    Eigen::VectorXd g = grad_kirchhoff_routh(c);
    const double h = 1e-5;
    for (size_t i = 0; i < c.vortices.size(); ++i) {
        for (int d = 0; d < 2; ++d) {
            VortexConfig cp = c, cm = c;
            (d == 0 ? cp.vortices[i].z.theta : cp.vortices[i].z.phi) += h;
            (d == 0 ? cm.vortices[i].z.theta : cm.vortices[i].z.phi) -= h;
            double fd = (kirchhoff_routh(cp) - kirchhoff_routh(cm)) / (2 * h);
            REQUIRE(g[2 * i + d] == Catch::Approx(fd).epsilon(1e-6).margin(1e-9));
        }
    }
    // longitude-shift invariance means the phi components sum to zero
    double sphi = 0.0;
    for (size_t i = 0; i < c.vortices.size(); ++i) sphi += g[2 * i + 1];
    REQUIRE(std::abs(sphi) < 1e-10);
}

TEST_CASE("hessian is symmetric with a longitude-shift null mode") {
    VortexConfig c = random_balanced_config(53);
    Eigen::MatrixXd H = hessian_kirchhoff_routh(c);
    REQUIRE((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    // the uniform-phi direction is annihilated
    Eigen::VectorXd u = Eigen::VectorXd::Zero(H.rows());
    for (int i = 0; i < H.rows() / 2; ++i) u[2 * i + 1] = 1.0;
    REQUIRE((H * u).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("antipodal pair rotates rigidly") {
    VortexConfig c;
    c.vortices.push_back({{PI / 3, 0.7}, 1.0, +1.0});
    c.vortices.push_back({{PI - PI / 3, 0.7}, 1.0, -1.0});
    Eigen::VectorXd v = vortex_velocities(c);
    REQUIRE(std::abs(v[0]) < 1e-12);           // dtheta/dt
    REQUIRE(std::abs(v[2]) < 1e-12);
    REQUIRE(v[1] == Catch::Approx(v[3]).margin(1e-12));  // common dphi/dt
}

TEST_CASE("frame_shift composes and shifts the rotation rate") {
    VortexConfig c = random_balanced_config(61);
    VortexConfig same = frame_shift(frame_shift(c, 0.4), -0.4);
    REQUIRE(same.gamma == Catch::Approx(c.gamma).margin(1e-16));
    REQUIRE(frame_shift(c, 0.0).gamma == Catch::Approx(c.gamma).margin(1e-16));

    Eigen::VectorXd v0 = vortex_velocities(c);
    Eigen::VectorXd v1 = vortex_velocities(frame_shift(c, 0.4));
    for (size_t i = 0; i < c.vortices.size(); ++i) {
        REQUIRE(v1[2 * i] == Catch::Approx(v0[2 * i]).margin(1e-13));
        REQUIRE(v1[2 * i + 1] == Catch::Approx(v0[2 * i + 1] - 0.4).margin(1e-13));
    }
}

TEST_CASE("velocities scale linearly in the strengths at gamma zero") {
    VortexConfig c = random_balanced_config(71);
    VortexConfig c2 = c;
    for (auto& v : c2.vortices) v.kappa *= 3.0;
    Eigen::VectorXd v1 = vortex_velocities(c), v2 = vortex_velocities(c2);
    REQUIRE((v2 - 3.0 * v1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("integrate conserves energy and moment") {
    VortexConfig c = random_balanced_config(83);
    const double K0 = kirchhoff_routh(c, false);
    const Vec3 m0 = moment(c);
    IntegrationResult r = integrate(c, 2.0, 1e-3, Scheme::rk4, false);
    REQUIRE(r.completed);
    REQUIRE(r.steps_taken == 2000);
    REQUIRE(std::abs(kirchhoff_routh(r.final_state, false) - K0) <
            1e-10 * std::max(1.0, std::abs(K0)));
    REQUIRE((moment(r.final_state) - m0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("integrate with zero horizon returns the input") {
    VortexConfig c = random_balanced_config(97);
    IntegrationResult r = integrate(c, 0.0, 1e-3);
    REQUIRE(r.completed);
    REQUIRE(r.steps_taken == 0);
    for (size_t i = 0; i < c.vortices.size(); ++i) {
        REQUIRE(r.final_state.vortices[i].z.theta == c.vortices[i].z.theta);
        REQUIRE(r.final_state.vortices[i].z.phi == c.vortices[i].z.phi);
    }
}

TEST_CASE("integrate aborts on close approach with a diagnostic") {
    VortexConfig c;
    // co-rotating same-sign pair started close: the guard must fire, not NaN
    c.vortices.push_back({{PI / 2, 0.0}, 1.0, +1.0});
    c.vortices.push_back({{PI / 2, 2e-4}, 1.0, +1.0});
    c.vortices.push_back({{PI / 4, 1.0}, 2.0, -1.0});
    IntegrationResult r = integrate(c, 1.0, 1e-3, Scheme::rk4, true, 1e-3);
    REQUIRE_FALSE(r.completed);
    REQUIRE_FALSE(r.message.empty());
}
