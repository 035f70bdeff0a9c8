#ifndef SPHEREVORTEX_SPHERE_GEOM_HPP
#define SPHEREVORTEX_SPHERE_GEOM_HPP

// Geometry primitives on the unit sphere: points, tangent charts, cap quadrature.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace spherevortex {

using Vec3 = Eigen::Vector3d;

constexpr double PI = 3.14159265358979323846;
constexpr double LN2 = 0.69314718055994530942;

struct SpherePoint {
    double theta = 0.5 * PI;  // colatitude, (0, pi) away from poles for chart work
    double phi = 0.0;         // longitude
};

inline Vec3 to_cartesian(const SpherePoint& p) {
    const double st = std::sin(p.theta);
    return {st * std::cos(p.phi), st * std::sin(p.phi), std::cos(p.theta)};
}

inline SpherePoint from_cartesian(const Vec3& x) {
    const Vec3 u = x.normalized();
    return {std::acos(std::max(-1.0, std::min(1.0, u.z()))), std::atan2(u.y(), u.x())};
}

// wrap an angle difference into (-pi, pi]
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * PI);
    if (a <= -PI) a += 2.0 * PI;
    if (a > PI) a -= 2.0 * PI;
    return a;
}

// 1 - cos(distance), in the half-angle form that stays accurate for nearby points
inline double one_minus_cos_dist(const SpherePoint& a, const SpherePoint& b) {
    const double sdt = std::sin(0.5 * (a.theta - b.theta));
    const double sdp = std::sin(0.5 * (a.phi - b.phi));
    return 2.0 * (sdt * sdt + std::sin(a.theta) * std::sin(b.theta) * sdp * sdp);
}

inline double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
    const double h = 0.5 * one_minus_cos_dist(a, b);  // sin^2(d/2)
    return 2.0 * std::asin(std::min(1.0, std::sqrt(std::max(0.0, h))));
}

enum class SineMode { at_center, at_point };

struct TangentOffset {
    double y1;  // colatitude offset
    double y2;  // longitude offset scaled by the chosen sine factor
    double norm() const { return std::hypot(y1, y2); }
};

inline TangentOffset tangent_offset(const SpherePoint& center, const SpherePoint& p,
                                    SineMode mode) {
    const double s = std::sin(mode == SineMode::at_center ? center.theta : p.theta);
    return {p.theta - center.theta, wrap_angle(p.phi - center.phi) * s};
}

struct QuadratureGrid {
    std::vector<SpherePoint> points;
    std::vector<double> weights;  // spherical area weights
};

// nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(PI * (i + 0.75) / (n + 0.5));
        double p1 = t, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// Polar quadrature over the at-center tangent-chart disk of the given radius.
// Radial direction: n_r-point Gauss-Legendre on [0, radius] (exact for radial
// polynomials up to degree 2 n_r - 1); angular: trapezoid. Weights carry the
// exact chart jacobian sin(theta)/sin(theta_c).
inline QuadratureGrid cap_quadrature(const SpherePoint& center, double radius_tangent,
                                     int n_r, int n_a) {
    if (n_r < 1 || n_a < 4) throw std::invalid_argument("cap_quadrature: counts too small");
    if (radius_tangent <= 0.0) throw std::invalid_argument("cap_quadrature: radius <= 0");
    if (center.theta - radius_tangent <= 0.0 || center.theta + radius_tangent >= PI)
        throw std::invalid_argument("cap_quadrature: disk touches a pole");
    const double stc = std::sin(center.theta);
    std::vector<double> gx, gw;
    gauss_legendre(n_r, gx, gw);
    QuadratureGrid grid;
    grid.points.reserve(static_cast<size_t>(n_r) * n_a);
    grid.weights.reserve(static_cast<size_t>(n_r) * n_a);
    const double wa = 2.0 * PI / n_a;
    for (int i = 0; i < n_r; ++i) {
        const double r = 0.5 * radius_tangent * (gx[i] + 1.0);
        const double wr = 0.5 * radius_tangent * gw[i];
        for (int j = 0; j < n_a; ++j) {
            const double alpha = wa * j;
            const double th = center.theta + r * std::cos(alpha);
            const double ph = center.phi + r * std::sin(alpha) / stc;
            grid.points.push_back({th, ph});
            grid.weights.push_back(wr * wa * r * std::sin(th) / stc);
        }
    }
    return grid;
}

}  // namespace spherevortex

#endif
