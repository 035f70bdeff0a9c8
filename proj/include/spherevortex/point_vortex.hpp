#ifndef SPHEREVORTEX_POINT_VORTEX_HPP
#define SPHEREVORTEX_POINT_VORTEX_HPP

// Point-vortex Hamiltonian on the sphere: the Kirchhoff-Routh function, its
// derivatives, the induced vortex motion, and a conservative integrator.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "greens.hpp"

namespace spherevortex {

struct Vortex {
    SpherePoint z;
    double kappa;  // strength magnitude, > 0
    double sign;   // +1 or -1
};

struct VortexConfig {
    std::vector<Vortex> vortices;
    double gamma = 0.0;  // rotating-frame rate about the polar axis
};

inline void validate_config(const VortexConfig& c, double min_sep = 0.0) {
    for (const auto& v : c.vortices) {
        if (v.kappa <= 0.0) throw std::invalid_argument("vortex strength must be > 0");
        if (v.z.theta <= 0.0 || v.z.theta >= PI)
            throw std::invalid_argument("vortex colatitude must lie strictly inside (0, pi)");
    }
    for (size_t i = 0; i < c.vortices.size(); ++i)
        for (size_t j = i + 1; j < c.vortices.size(); ++j)
            if (geodesic_distance(c.vortices[i].z, c.vortices[j].z) <= min_sep)
                throw std::invalid_argument("vortices coincide or violate separation guard");
}

// self-interaction energy density; derivative is twice the disk-averaged
// Robin theta-derivative, making the velocity field the exact gradient flow
inline double self_energy_h(double theta) {
    return LN2 / (2.0 * PI) + std::log(std::sin(theta)) / (8.0 * PI);
}

inline double self_energy_h_prime(double theta) {
    return 1.0 / (std::tan(theta) * 8.0 * PI);
}

inline double kirchhoff_routh(const VortexConfig& c, bool include_self_term = true) {
    validate_config(c);
    const auto& v = c.vortices;
    double K = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        for (size_t j = i + 1; j < v.size(); ++j)
            K += v[i].sign * v[i].kappa * v[j].sign * v[j].kappa * green_G(v[i].z, v[j].z);
        if (include_self_term) K += 0.5 * v[i].kappa * v[i].kappa * self_energy_h(v[i].z.theta);
        K -= c.gamma * v[i].sign * v[i].kappa * std::cos(v[i].z.theta);
    }
    return K;
}

// per-vortex (d/dtheta, d/dphi) of the Kirchhoff-Routh function
inline Eigen::VectorXd grad_kirchhoff_routh(const VortexConfig& c,
                                            bool include_self_term = true) {
    validate_config(c);
    const auto& v = c.vortices;
    const int n = static_cast<int>(v.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        const double ki = v[i].sign * v[i].kappa;
        double gt = 0.0, gp = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double kj = v[j].sign * v[j].kappa;
            gt += ki * kj * green_G_dtheta(v[i].z, v[j].z);
            gp += ki * kj * green_G_dphi(v[i].z, v[j].z);
        }
        if (include_self_term)
            gt += 0.5 * v[i].kappa * v[i].kappa * self_energy_h_prime(v[i].z.theta);
        gt += c.gamma * ki * std::sin(v[i].z.theta);
        g[2 * i] = gt;
        g[2 * i + 1] = gp;
    }
    return g;
}

inline Eigen::MatrixXd hessian_kirchhoff_routh(const VortexConfig& c,
                                               bool include_self_term = true,
                                               double h = 1e-4) {
    const int n = static_cast<int>(c.vortices.size());
    Eigen::MatrixXd H(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
        VortexConfig cp = c, cm = c;
        auto& zp = (j % 2 == 0) ? cp.vortices[j / 2].z.theta : cp.vortices[j / 2].z.phi;
        auto& zm = (j % 2 == 0) ? cm.vortices[j / 2].z.theta : cm.vortices[j / 2].z.phi;
        zp += h;
        zm -= h;
        H.col(j) = (grad_kirchhoff_routh(cp, include_self_term) -
                    grad_kirchhoff_routh(cm, include_self_term)) /
                   (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

// equations of motion: kappa_i theta_dot = dK/dphi_i / sin(theta_i),
//                      kappa_i sin(theta_i) phi_dot = -dK/dtheta_i
inline Eigen::VectorXd vortex_velocities(const VortexConfig& c,
                                         bool include_self_term = true) {
    const auto& v = c.vortices;
    const int n = static_cast<int>(v.size());
    const Eigen::VectorXd g = grad_kirchhoff_routh(c, include_self_term);
    Eigen::VectorXd vel(2 * n);  // (theta_dot, phi_dot) per vortex
    for (int i = 0; i < n; ++i) {
        const double ki = v[i].sign * v[i].kappa;
        const double st = std::sin(v[i].z.theta);
        vel[2 * i] = g[2 * i + 1] / (ki * st);
        vel[2 * i + 1] = -g[2 * i] / (ki * st);
    }
    return vel;
}

// move into a frame rotating delta faster about the polar axis
inline VortexConfig frame_shift(const VortexConfig& c, double delta) {
    VortexConfig out = c;
    out.gamma += delta;
    return out;
}

enum class Scheme { rk4, midpoint };

struct IntegrationResult {
    VortexConfig final_state;
    bool completed;
    std::string message;
    int steps_taken;
};

inline IntegrationResult integrate(const VortexConfig& c0, double T, double dt,
                                   Scheme scheme = Scheme::rk4,
                                   bool include_self_term = true,
                                   double close_approach = 1e-4) {
    VortexConfig c = c0;
    const int n = static_cast<int>(c.vortices.size());
    const int nsteps = static_cast<int>(std::llround(T / dt));
    auto pack = [&](const VortexConfig& s) {
        Eigen::VectorXd y(2 * n);
        for (int i = 0; i < n; ++i) {
            y[2 * i] = s.vortices[i].z.theta;
            y[2 * i + 1] = s.vortices[i].z.phi;
        }
        return y;
    };
    auto unpack = [&](const Eigen::VectorXd& y, VortexConfig& s) {
        for (int i = 0; i < n; ++i) {
            s.vortices[i].z.theta = y[2 * i];
            s.vortices[i].z.phi = y[2 * i + 1];
        }
    };
    auto f = [&](const Eigen::VectorXd& y) {
        VortexConfig s = c;
        unpack(y, s);
        return vortex_velocities(s, include_self_term);
    };
    auto too_close = [&](const VortexConfig& s) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (geodesic_distance(s.vortices[i].z, s.vortices[j].z) < close_approach)
                    return true;
        return false;
    };
    if (nsteps > 0 && too_close(c)) return {c, false, "close approach guard tripped", 0};
    Eigen::VectorXd y = pack(c);
    for (int step = 0; step < nsteps; ++step) {
        const Eigen::VectorXd k1 = f(y);
        if (dt * k1.cwiseAbs().maxCoeff() > 0.1)
            return {c, false, "step guard tripped: dt * max|velocity| > 0.1 rad", step};
        if (scheme == Scheme::rk4) {
            const Eigen::VectorXd k2 = f(y + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = f(y + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = f(y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            y += dt * f(y + 0.5 * dt * k1);
        }
        unpack(y, c);
        if (too_close(c)) return {c, false, "close approach guard tripped", step + 1};
    }
    return {c, true, "", nsteps};
}

}  // namespace spherevortex

#endif
