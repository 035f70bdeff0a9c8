#ifndef SPHEREVORTEX_GREENS_HPP
#define SPHEREVORTEX_GREENS_HPP

// Green's function of -Laplace on the unit sphere, its coordinate-logarithmic
// local part, and the regular remainder with Robin-type diagonal data.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "sphere_geom.hpp"

namespace spherevortex {

// G(z,z') = -(1/4pi) ln(1 - cos d) + ln2/(4pi); vanishes at antipodes.
inline double green_G(const SpherePoint& a, const SpherePoint& b) {
    return -std::log(one_minus_cos_dist(a, b)) / (4.0 * PI) + LN2 / (4.0 * PI);
}

// first-slot derivatives of G
inline double green_G_dtheta(const SpherePoint& a, const SpherePoint& b) {
    const double D = one_minus_cos_dist(a, b);
    const double dD = std::sin(a.theta) * std::cos(b.theta) -
                      std::cos(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi);
    return -dD / (4.0 * PI * D);
}

inline double green_G_dphi(const SpherePoint& a, const SpherePoint& b) {
    const double D = one_minus_cos_dist(a, b);
    const double dD = std::sin(a.theta) * std::sin(b.theta) * std::sin(a.phi - b.phi);
    return -dD / (4.0 * PI * D);
}

// local parametrix Gamma = -(1/4pi) ln rho^2 with the chart metric of the
// FIRST argument: rho^2 = (dtheta)^2 + (dphi)^2 sin^2(theta_a). Not symmetric.
inline double local_rho2(const SpherePoint& a, const SpherePoint& b) {
    const double dt = a.theta - b.theta;
    const double dp = wrap_angle(a.phi - b.phi) * std::sin(a.theta);
    return dt * dt + dp * dp;
}

inline double gamma_local(const SpherePoint& a, const SpherePoint& b) {
    const double r2 = local_rho2(a, b);
    if (r2 == 0.0) throw std::invalid_argument("gamma_local: coincident points");
    return -std::log(r2) / (4.0 * PI);
}

// regular part H = G - Gamma, evaluated through the ratio form inside the
// locality radius so the diagonal is finite: H = -(1/4pi) ln(D/rho^2) + ln2/(4pi).
inline constexpr double H_LOCALITY_RADIUS = 0.3;

inline double regular_H_diagonal() { return LN2 / (2.0 * PI); }

inline double regular_H(const SpherePoint& a, const SpherePoint& b) {
    if (geodesic_distance(a, b) < H_LOCALITY_RADIUS) {
        const double r2 = local_rho2(a, b);
        if (r2 == 0.0) return regular_H_diagonal();
        const double ratio = one_minus_cos_dist(a, b) / r2;  // -> 1/2 on the diagonal
        return -std::log(ratio) / (4.0 * PI) + LN2 / (4.0 * PI);
    }
    return green_G(a, b) - gamma_local(a, b);
}

struct RobinData {
    double d_theta_avg;   // radius->0 extrapolated theta-derivative of the disk average
    double diagonal;      // H on the diagonal
    double error_estimate;
    bool converged;
};

namespace detail {
inline double disk_avg_H_dtheta(const SpherePoint& center, double r, double fd) {
    // first-slot theta-derivative of H averaged over a FIXED tangent disk; only
    // the evaluation point moves, matching how H enters the core integrals
    const QuadratureGrid grid = cap_quadrature(center, r, 40, 128);
    double val[2];
    for (int s = 0; s < 2; ++s) {
        const double dth = (s == 0 ? fd : -fd);
        const SpherePoint c{center.theta + dth, center.phi};
        double tot = 0.0, wtot = 0.0;
        for (size_t i = 0; i < grid.points.size(); ++i) {
            tot += grid.weights[i] * regular_H(c, grid.points[i]);
            wtot += grid.weights[i];
        }
        val[s] = tot / wtot;
    }
    return (val[0] - val[1]) / (2.0 * fd);
}
}  // namespace detail

inline RobinData robin_theta_derivative(const SpherePoint& center, double disk_radius) {
    if (center.theta - 2.0 * disk_radius <= 0.0 || center.theta + 2.0 * disk_radius >= PI)
        throw std::invalid_argument("robin_theta_derivative: disk too close to a pole");
    // the finite-difference step must scale with the disk radius: the averaged
    // field varies on the scale of the disk, and the centered-difference error
    // grows like (fd / radius)^2 if fd is held fixed
    const double fd = 1e-3 * disk_radius;
    const double v1 = detail::disk_avg_H_dtheta(center, disk_radius, fd);
    const double v2 = detail::disk_avg_H_dtheta(center, 0.5 * disk_radius, 0.5 * fd);
    const double rich = (4.0 * v2 - v1) / 3.0;  // O(r^2) extrapolation
    const double err = std::abs(v2 - v1) / 3.0;
    const double scale = std::max(std::abs(rich), 1e-6);
    return {rich, regular_H_diagonal(), err, err < 1e-3 * scale + 1e-9};
}

// closed form of the radius->0 limit, used as a field term elsewhere
inline double robin_theta_derivative_limit(double theta) {
    return 1.0 / (std::tan(theta) * 16.0 * PI);
}

// finite-difference Laplace-Beltrami of a scalar field at p
inline double laplace_beltrami_fd(const std::function<double(const SpherePoint&)>& f,
                                  const SpherePoint& p, double h) {
    const double f0 = f(p);
    const double ftp = f({p.theta + h, p.phi});
    const double ftm = f({p.theta - h, p.phi});
    const double fpp = f({p.theta, p.phi + h});
    const double fpm = f({p.theta, p.phi - h});
    const double st = std::sin(p.theta);
    return (ftp - 2.0 * f0 + ftm) / (h * h) +
           (ftp - ftm) / (2.0 * h) * std::cos(p.theta) / st +
           (fpp - 2.0 * f0 + fpm) / (h * h * st * st);
}

}  // namespace spherevortex

#endif
