#ifndef SPHEREVORTEX_EQUILIBRIA_HPP
#define SPHEREVORTEX_EQUILIBRIA_HPP

// Vortex street constructors, their traveling speed, and a projected Newton
// solver for general critical points of the Kirchhoff-Routh function.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "point_vortex.hpp"

namespace spherevortex {

enum class StreetType { type1, type2 };

struct StreetSpec {
    int k = 2;
    double theta0 = PI / 4.0;
    double kappa = 1.0;
    StreetType variant = StreetType::type1;
};

// 2k alternating vortices, k at colatitude theta0 and k mirrored; type 1 has
// aligned longitudes, type 2 is staggered by pi/k.
inline VortexConfig karman_positions(const StreetSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("street needs k >= 1");
    if (spec.theta0 <= 0.0 || spec.theta0 > PI / 2.0)
        throw std::invalid_argument("street colatitude must lie in (0, pi/2]");
    if (spec.variant == StreetType::type1 && spec.theta0 == PI / 2.0)
        throw std::invalid_argument(
            "aligned street is degenerate on the equator (coincident pairs)");
    VortexConfig c;
    for (int i = 1; i <= spec.k; ++i) {
        double pp, pn;
        if (spec.variant == StreetType::type1) {
            pp = 2.0 * PI * i / spec.k - PI / spec.k;
            pn = pp;
        } else {
            pp = 2.0 * PI * i / spec.k - 3.0 * PI / (2.0 * spec.k);
            pn = 2.0 * PI * i / spec.k - PI / (2.0 * spec.k);
        }
        c.vortices.push_back({{spec.theta0, pp}, spec.kappa, +1.0});
        c.vortices.push_back({{PI - spec.theta0, pn}, spec.kappa, -1.0});
    }
    validate_config(c);
    return c;
}

// traveling drift rate dphi/dt of the street as a relative equilibrium
inline double karman_speed(const StreetSpec& spec) {
    const VortexConfig c = karman_positions(spec);
    const SpherePoint z1 = c.vortices[0].z;  // first positive vortex
    double sum = robin_theta_derivative_limit(spec.theta0);
    for (size_t i = 1; i < c.vortices.size(); ++i) {
        const auto& v = c.vortices[i];
        sum += v.sign * green_G_dtheta(z1, v.z);
    }
    return -spec.kappa * sum / std::sin(spec.theta0);
}

// max over vortices of |theta_dot| + |phi_dot - W|
inline double relative_equilibrium_residual(const VortexConfig& c, double W) {
    const Eigen::VectorXd vel = vortex_velocities(c, true);
    double r = 0.0;
    for (int i = 0; i < static_cast<int>(c.vortices.size()); ++i)
        r = std::max(r, std::abs(vel[2 * i]) + std::abs(vel[2 * i + 1] - W));
    return r;
}

struct CriticalPointOptions {
    double tol = 1e-10;
    int max_iterations = 100;
    double nondegeneracy_ratio = 1e-6;  // min|lambda| > ratio * max|lambda| off the symmetry mode
};

struct CriticalPoint {
    VortexConfig config;
    double gradient_norm = 0.0;
    bool converged = false;
    bool nondegenerate = false;
    int iterations = 0;
    Eigen::VectorXd eigenvalues;  // Hessian spectrum including the symmetry mode
    std::string message;
};

// Newton iteration on grad K with the global-longitude zero mode projected out
// of the Hessian inverse, backtracking line search on |grad|^2, and a post-hoc
// longitude gauge pinning the first vortex to its initial longitude.
inline CriticalPoint find_critical_point(const VortexConfig& initial,
                                         const CriticalPointOptions& opts = {}) {
    CriticalPoint out;
    out.config = initial;
    const int n = static_cast<int>(initial.vortices.size());
    const int dim = 2 * n;
    Eigen::VectorXd lon = Eigen::VectorXd::Zero(dim);  // uniform longitude shift
    for (int i = 0; i < n; ++i) lon[2 * i + 1] = 1.0;
    lon.normalize();

    auto step_config = [&](const VortexConfig& c, const Eigen::VectorXd& d) {
        VortexConfig s = c;
        for (int i = 0; i < n; ++i) {
            s.vortices[i].z.theta += d[2 * i];
            s.vortices[i].z.phi += d[2 * i + 1];
        }
        return s;
    };

    VortexConfig c = initial;
    Eigen::VectorXd g;
    try {
        g = grad_kirchhoff_routh(c);
    } catch (const std::exception& e) {
        out.message = e.what();
        return out;
    }
    for (int it = 0; it < opts.max_iterations; ++it) {
        out.iterations = it;
        out.gradient_norm = g.norm();
        if (out.gradient_norm < opts.tol) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd H = hessian_kirchhoff_routh(c);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        const Eigen::VectorXd lam = eig.eigenvalues();
        const Eigen::MatrixXd V = eig.eigenvectors();
        const double lmax = lam.cwiseAbs().maxCoeff();
        // pseudo-inverse excluding the longitude mode and anything numerically null
        Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
        for (int m = 0; m < dim; ++m) {
            const double align = std::abs(V.col(m).dot(lon));
            if (align > 0.9 || std::abs(lam[m]) < 1e-12 * lmax) continue;
            d -= V.col(m) * (V.col(m).dot(g) / lam[m]);
        }
        double alpha = 1.0;
        const double g2 = g.squaredNorm();
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            VortexConfig trial = step_config(c, alpha * d);
            try {
                const Eigen::VectorXd gt = grad_kirchhoff_routh(trial);
                if (gt.squaredNorm() < g2) {
                    c = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            } catch (const std::exception&) {
                // invalid trial state (pole crossing, collision); shrink
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.message = "line search stalled";
            break;
        }
    }
    out.gradient_norm = g.norm();
    out.converged = out.gradient_norm < opts.tol;

    // longitude gauge: rotate back so the first vortex keeps its initial longitude
    const double shift = wrap_angle(initial.vortices[0].z.phi - c.vortices[0].z.phi);
    for (auto& v : c.vortices) v.z.phi += shift;
    out.config = c;

    const Eigen::MatrixXd H = hessian_kirchhoff_routh(c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    out.eigenvalues = eig.eigenvalues();
    // nondegeneracy on the complement of the longitude mode
    double min_off = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    int null_count = 0;
    for (int m = 0; m < dim; ++m) {
        const double align = std::abs(eig.eigenvectors().col(m).dot(lon));
        max_abs = std::max(max_abs, std::abs(out.eigenvalues[m]));
        if (align > 0.9) {
            ++null_count;
            continue;
        }
        min_off = std::min(min_off, std::abs(out.eigenvalues[m]));
    }
    out.nondegenerate =
        out.converged && null_count == 1 && min_off > opts.nondegeneracy_ratio * max_abs;
    return out;
}

}  // namespace spherevortex

#endif
