#ifndef SPHEREVORTEX_PATCH_HPP
#define SPHEREVORTEX_PATCH_HPP

// Vortex-patch construction: core radius matching, flux constants, the
// first-order boundary law, and the steady-boundary Newton solver for
// traveling streets and general rotating configurations.

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equilibria.hpp"

namespace spherevortex {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// normalized Rankine stream profile: quadratic inside, logarithmic outside
inline double rankine_profile(double y) {
    const double r = std::abs(y);
    return r <= 1.0 ? 0.25 * (1.0 - r * r) : 0.5 * std::log(1.0 / r);
}

// core radius from the C1 matching relation s^2 |ln s| = (kappa/pi) eps^2 |ln eps|
inline double solve_core_radius(double kappa, double eps) {
    if (eps <= 0.0 || eps >= 0.5) throw std::invalid_argument("solve_core_radius: bad eps");
    const double rhs = kappa / PI * eps * eps * std::abs(std::log(eps));
    auto f = [&](double s) { return s * s * std::abs(std::log(s)) - rhs; };
    double a = eps * eps * eps, b = std::sqrt(eps);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        if (f(a) * f(m) <= 0.0)
            b = m;
        else
            a = m;
    }
    return 0.5 * (a + b);
}

inline double beta_eps(double s, double eps) { return s / (2.0 * eps * eps); }

// ---------------------------------------------------------------------------
// boundary representation and quadrature helpers

struct BoundaryCurve {
    int M = 16;          // highest retained mode
    VectorXd cos_coefs;  // a_0..a_M of t(xi)
    VectorXd sin_coefs;  // b_0..b_M (b_0, b_1 unused)
    bool mirrored = false;

    BoundaryCurve() {}
    explicit BoundaryCurve(int M_) : M(M_) {
        cos_coefs = VectorXd::Zero(M + 1);
        sin_coefs = VectorXd::Zero(M + 1);
    }

    // radial offset t(xi); the mirrored curve is t(pi - xi)
    double t(double xi) const {
        double v = 0.0;
        const double x = mirrored ? PI - xi : xi;
        for (int m = 0; m <= M; ++m)
            v += cos_coefs[m] * std::cos(m * x) + sin_coefs[m] * std::sin(m * x);
        return v;
    }
};

struct PatchSpec {
    SpherePoint center;
    double kappa = 1.0;
    double sign = +1.0;
    double eps = 0.02;
    double core_radius = 0.0;  // s_eps
    double flux = 0.0;         // mu
};

enum class PatchFrameMode { karman, general };

struct PatchSystem {
    PatchFrameMode mode = PatchFrameMode::karman;
    std::vector<PatchSpec> patches;
    std::vector<BoundaryCurve> boundaries;
    double frame = 0.0;  // W (karman) or gamma (general)
    double residual_norm = 0.0;
    double contraction_ratio = 0.0;  // max successive-residual ratio before convergence
    bool converged = false;
    int iterations = 0;
    double center_displacement = 0.0;  // general mode: max move from the initial centers
    std::string message;
};

namespace detail {

inline std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}

// equispaced-grid spectral differentiation matrix (even n)
inline const MatrixXd& spectral_deriv_matrix(int n) {
    static std::map<int, MatrixXd> cache;
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) {
                const int d = i - j;
                D(i, j) = 0.5 * ((d % 2 == 0) ? 1.0 : -1.0) / std::tan(d * PI / n);
            }
    return cache.emplace(n, std::move(D)).first->second;
}

// Kress weights for the periodic log kernel ln(4 sin^2((xi-xi')/2)), by offset
inline const VectorXd& kress_weights(int n) {
    static std::map<int, VectorXd> cache;
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    VectorXd R = VectorXd::Zero(n);
    for (int l = 0; l < n; ++l) {
        const double ang = 2.0 * PI * l / n;
        double acc = 0.0;
        for (int m = 1; m < n / 2; ++m) acc += std::cos(m * ang) / m;
        R[l] = -(4.0 * PI / n) * acc - (2.0 * PI / (n * n)) * std::cos((n / 2) * ang);
    }
    return cache.emplace(n, std::move(R)).first->second;
}

struct BoundaryNodes {
    MatrixXd X;      // n x 3 cartesian nodes
    VectorXd theta;  // colatitudes
    MatrixXd dX;     // spectral derivative d gamma / d xi
};

inline BoundaryNodes boundary_nodes(const SpherePoint& center, double s,
                                    const BoundaryCurve& bc, int n) {
    BoundaryNodes out;
    out.X.resize(n, 3);
    out.theta.resize(n);
    const double stc = std::sin(center.theta);
    for (int j = 0; j < n; ++j) {
        const double xi = 2.0 * PI * j / n;
        const double r = s * (1.0 + bc.t(xi));
        const double th = center.theta + r * std::cos(xi);
        const double ph = center.phi + r * std::sin(xi) / stc;
        out.theta[j] = th;
        out.X(j, 0) = std::sin(th) * std::cos(ph);
        out.X(j, 1) = std::sin(th) * std::sin(ph);
        out.X(j, 2) = std::cos(th);
    }
    out.dX = spectral_deriv_matrix(n) * out.X;
    return out;
}

inline double patch_area(const SpherePoint& center, double s, const BoundaryCurve& bc,
                         int n = 256, int ngl = 12) {
    static const auto gl = [] {
        // 12-point Gauss-Legendre on [-1, 1]
        Eigen::Matrix<double, 12, 2> g;
        const double x[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                             0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
        const double w[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                             0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
        for (int i = 0; i < 6; ++i) {
            g(2 * i, 0) = -x[i];
            g(2 * i, 1) = w[i];
            g(2 * i + 1, 0) = x[i];
            g(2 * i + 1, 1) = w[i];
        }
        return g;
    }();
    const double stc = std::sin(center.theta);
    double A = 0.0;
    for (int j = 0; j < n; ++j) {
        const double xi = 2.0 * PI * j / n;
        const double R = s * (1.0 + bc.t(xi));
        for (int q = 0; q < 12; ++q) {
            const double rho = (gl(q, 0) + 1.0) * 0.5 * R;
            const double w = gl(q, 1) * 0.5 * R;
            A += w * rho * std::sin(center.theta + rho * std::cos(xi)) / stc * (2.0 * PI / n);
        }
    }
    return A;
}

// stream of one uniform patch evaluated at target nodes, via the exact contour
// identity psi = (omega/4pi) oint g(u) (x cross x') . dl' + omega ln2/(4pi) Area,
// g(u) = (1 - ln(1-u))/(1+u), with a Kress log-split when targets are the
// source grid itself and a u=-1-regular branch for near-antipodal patches.
inline void add_boundary_stream(VectorXd& psi, const MatrixXd& Xt, const BoundaryNodes& src,
                                double omega, double area, bool self_block) {
    const int nt = static_cast<int>(Xt.rows());
    const int n = static_cast<int>(src.X.rows());
    const MatrixXd U = Xt * src.X.transpose();
    // CD(t, j) = (x_t cross x'_j) . dX_j
    MatrixXd CD(nt, n);
    for (int t = 0; t < nt; ++t)
        for (int j = 0; j < n; ++j) {
            const Vec3 a = Xt.row(t), b = src.X.row(j), d = src.dX.row(j);
            CD(t, j) = a.cross(b).dot(d);
        }
    const double pref = omega / (4.0 * PI);
    if (self_block) {
        const VectorXd& R = kress_weights(n);
        VectorXd gp2(n);
        for (int j = 0; j < n; ++j) gp2[j] = src.dX.row(j).squaredNorm();
        for (int t = 0; t < nt; ++t) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const int off = ((j - t) % n + n) % n;
                double Mrat;
                if (j == t)
                    Mrat = gp2[j];
                else {
                    const double sh = std::sin((t - j) * PI / n);
                    Mrat = 2.0 * (1.0 - U(t, j)) / (4.0 * sh * sh);
                }
                const double k1 = -CD(t, j) / (1.0 + U(t, j));
                const double k2 = (1.0 - std::log(0.5 * Mrat)) * CD(t, j) / (1.0 + U(t, j));
                if (j != t) acc += k2 * (2.0 * PI / n) + R[off] * k1;
            }
            psi[t] += pref * acc + omega * LN2 / (4.0 * PI) * area;
        }
    } else {
        const double min_one_plus = (1.0 + U.array()).minCoeff();
        const double min_one_minus = (1.0 - U.array()).minCoeff();
        if (min_one_plus < min_one_minus) {
            // near-antipodal: g2(u) = ((1-u)ln(1-u) + u + 1 - 2 ln2)/(u^2 - 1)
            for (int t = 0; t < nt; ++t) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double u = U(t, j);
                    double g;
                    if (std::abs(1.0 + u) > 1e-9)
                        g = ((1.0 - u) * std::log(1.0 - u) + u + 1.0 - 2.0 * LN2) /
                            (u * u - 1.0);
                    else
                        g = 0.5 * LN2;
                    acc += g * CD(t, j);
                }
                psi[t] += pref * acc * (2.0 * PI / n) + omega * LN2 / (4.0 * PI) * area;
            }
        } else {
            for (int t = 0; t < nt; ++t) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double u = U(t, j);
                    acc += (1.0 - std::log(1.0 - u)) / (1.0 + u) * CD(t, j);
                }
                psi[t] += pref * acc * (2.0 * PI / n) + omega * LN2 / (4.0 * PI) * area;
            }
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// flux constant and the asymptotic stream

// discrete balance: mu_i = sigma_i kappa [(1/2pi) ln(1/s) + ln2/(2pi)]
//                        + sum_{j != i} sigma_j kappa_j G(z_i, z_j) - frame cos(theta_i)
inline double flux_constant(const std::vector<PatchSpec>& patches, int i, double frame) {
    const PatchSpec& p = patches[i];
    const double s = p.core_radius > 0.0 ? p.core_radius : solve_core_radius(p.kappa, p.eps);
    double mu = p.sign * p.kappa * (std::log(1.0 / s) / (2.0 * PI) + LN2 / (2.0 * PI));
    for (int j = 0; j < static_cast<int>(patches.size()); ++j)
        if (j != i) mu += patches[j].sign * patches[j].kappa * green_G(p.center, patches[j].center);
    mu -= frame * std::cos(p.center.theta);
    return mu;
}

// leading-order stream of the desingularized system: scaled Rankine core V plus
// the regular remainder R per patch
inline double approx_stream(const SpherePoint& z, const std::vector<PatchSpec>& patches) {
    double psi = 0.0;
    for (const auto& p : patches) {
        const double s = p.core_radius > 0.0 ? p.core_radius : solve_core_radius(p.kappa, p.eps);
        const double L = std::abs(std::log(p.eps)) / std::abs(std::log(s));
        const double A = tangent_offset(p.center, z, SineMode::at_center).norm();
        double V;
        if (A >= s)
            V = p.kappa / (2.0 * PI) * L * std::log(1.0 / A);
        else
            V = p.kappa / (2.0 * PI) * L *
                (std::log(1.0 / s) + 0.5 * (1.0 - A * A / (s * s)));
        const double R = p.kappa * regular_H(z, p.center);
        psi += p.sign * (V + R);
    }
    return psi;
}

// ---------------------------------------------------------------------------
// first-order boundary law

struct FirstOrderBoundary {
    VectorXd xi;         // grid
    VectorXd t_display;  // inner product of the net local field with the offset, / (s beta)
    VectorXd t_full;     // kernel-projected display plus the chart curvature term
};

// The net local field at patch i combines the other vortices' Green gradients,
// the disk-averaged Robin derivative, and the frame term; its inner product
// with the unit offset (cos xi, sin xi) gives the leading boundary shift.
// The full curve adds the tangent-chart curvature mode (s cot(theta_c)/8) cos 3xi
// and removes the translation-kernel (mode-1) component, which the solvability
// trade makes zero by construction.
inline FirstOrderBoundary boundary_first_order(const std::vector<PatchSpec>& patches, int i,
                                               double frame, int n = 256) {
    const PatchSpec& p = patches[i];
    const double s = p.core_radius > 0.0 ? p.core_radius : solve_core_radius(p.kappa, p.eps);
    const double beta = beta_eps(s, p.eps);
    const double st = std::sin(p.center.theta);
    double Ft = p.sign * p.kappa * robin_theta_derivative_limit(p.center.theta) +
                frame * st;
    double Fp = 0.0;
    for (int j = 0; j < static_cast<int>(patches.size()); ++j) {
        if (j == i) continue;
        Ft += patches[j].sign * patches[j].kappa * green_G_dtheta(p.center, patches[j].center);
        Fp += patches[j].sign * patches[j].kappa * green_G_dphi(p.center, patches[j].center) / st;
    }
    FirstOrderBoundary out;
    out.xi.resize(n);
    out.t_display.resize(n);
    out.t_full.resize(n);
    const double denom = p.sign * beta;
    for (int j = 0; j < n; ++j) {
        const double xi = 2.0 * PI * j / n;
        out.xi[j] = xi;
        out.t_display[j] = (Ft * std::cos(xi) + Fp * std::sin(xi)) / denom;
    }
    // project out mode 1, then add the chart term
    double c1 = 0.0, s1 = 0.0;
    for (int j = 0; j < n; ++j) {
        c1 += out.t_display[j] * std::cos(out.xi[j]);
        s1 += out.t_display[j] * std::sin(out.xi[j]);
    }
    c1 *= 2.0 / n;
    s1 *= 2.0 / n;
    const double chart = s / (std::tan(p.center.theta) * 8.0);
    for (int j = 0; j < n; ++j)
        out.t_full[j] = out.t_display[j] - c1 * std::cos(out.xi[j]) - s1 * std::sin(out.xi[j]) +
                        chart * std::cos(3.0 * out.xi[j]);
    return out;
}

// ---------------------------------------------------------------------------
// steady boundary solver

struct PatchSolveOptions {
    int M = 16;
    int collocation = 128;   // boundary nodes = collocation points
    double residual_tol = 1e-11;
    double step_tol = 1e-12;
    int max_iterations = 30;
    // Jacobian forward-difference step; too small a step lets roundoff noise in
    // the Jacobian leak into the near-null center directions of the SVD solve
    double fd_step = 1e-5;
    double eps0 = 0.1;  // contraction guard threshold on eps
};

namespace detail {

struct StreetLayout {
    StreetSpec spec;
    std::vector<SpherePoint> centers;  // positives then negatives
    std::vector<double> signs;
    std::vector<bool> mirrored;
};

inline StreetLayout street_layout(const StreetSpec& spec) {
    StreetLayout L;
    L.spec = spec;
    const VortexConfig c = karman_positions(spec);
    for (const auto& v : c.vortices)
        if (v.sign > 0) {
            L.centers.push_back(v.z);
            L.signs.push_back(+1.0);
            L.mirrored.push_back(false);
        }
    for (const auto& v : c.vortices)
        if (v.sign < 0) {
            L.centers.push_back(v.z);
            L.signs.push_back(-1.0);
            L.mirrored.push_back(true);
        }
    return L;
}

// street residual: stream on the first positive boundary minus W cos(theta) - mu,
// with every patch sharing one shape (mirrored on the negative hemisphere)
inline VectorXd street_residual(const StreetLayout& L, double s, double eps,
                                const VectorXd& x, int M, int nq) {
    BoundaryCurve bc(M);
    for (int m = 2; m <= M; ++m) bc.cos_coefs[m] = x[m - 2];
    const double mu = x[M - 1], W = x[M];
    const BoundaryNodes target = boundary_nodes(L.centers[0], s, bc, nq);
    VectorXd psi = VectorXd::Zero(nq);
    for (size_t p = 0; p < L.centers.size(); ++p) {
        BoundaryCurve bp = bc;
        bp.mirrored = L.mirrored[p];
        const double omega = L.signs[p] / (eps * eps);
        const double area = patch_area(L.centers[p], s, bp);
        const bool self_block = (p == 0);
        const BoundaryNodes src =
            self_block ? target : boundary_nodes(L.centers[p], s, bp, nq);
        add_boundary_stream(psi, target.X, src, omega, area, self_block);
    }
    VectorXd r(nq);
    for (int t = 0; t < nq; ++t) r[t] = psi[t] - W * std::cos(target.theta[t]) - mu;
    return r;
}

inline VectorXd lstsq(const MatrixXd& A, const VectorXd& b) {
    Eigen::BDCSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    return svd.solve(b);
}

}  // namespace detail

inline PatchSystem steady_patch_solve_karman(const StreetSpec& spec, double eps,
                                             const PatchSolveOptions& opts = {}) {
    PatchSystem sys;
    sys.mode = PatchFrameMode::karman;
    if (eps > opts.eps0) {
        sys.message = "eps above the contraction guard threshold";
        return sys;
    }
    const detail::StreetLayout L = detail::street_layout(spec);
    const double s = solve_core_radius(spec.kappa, eps);
    // disjointness guard: nearest center pair vs patch extent
    double minsep = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < L.centers.size(); ++i)
        for (size_t j = i + 1; j < L.centers.size(); ++j)
            minsep = std::min(minsep, geodesic_distance(L.centers[i], L.centers[j]));
    if (minsep < 6.0 * s) {
        sys.message = "patches overlap or nearly overlap at this eps";
        return sys;
    }
    const int M = opts.M, nq = opts.collocation;
    VectorXd x = VectorXd::Zero(M + 1);
    x[M] = karman_speed(spec);
    {
        const VectorXd r0 = detail::street_residual(L, s, eps, x, M, nq);
        x[M - 1] = r0.mean();
    }
    double prev_rn = std::numeric_limits<double>::infinity();
    // residual is reported relative to the flux-constant scale
    auto mu_scale = [&] { return std::max(1.0, std::abs(x[M - 1])); };
    for (int it = 0; it < opts.max_iterations; ++it) {
        sys.iterations = it;
        const VectorXd r = detail::street_residual(L, s, eps, x, M, nq);
        const double rn = r.cwiseAbs().maxCoeff() / mu_scale();
        if (std::isfinite(prev_rn) && prev_rn > opts.residual_tol)
            sys.contraction_ratio = std::max(sys.contraction_ratio, rn / prev_rn);
        prev_rn = rn;
        sys.residual_norm = rn;
        if (rn < opts.residual_tol) {
            sys.converged = true;
            break;
        }
        MatrixXd J(nq, M + 1);
        for (int c = 0; c <= M; ++c) {
            VectorXd xp = x;
            xp[c] += opts.fd_step;
            J.col(c) = (detail::street_residual(L, s, eps, xp, M, nq) - r) / opts.fd_step;
        }
        const VectorXd dx = detail::lstsq(J, -r);
        x += dx;
        if (dx.cwiseAbs().maxCoeff() < opts.step_tol) {
            const VectorXd rf = detail::street_residual(L, s, eps, x, M, nq);
            sys.residual_norm = rf.cwiseAbs().maxCoeff() / mu_scale();
            sys.converged = sys.residual_norm < 10.0 * opts.residual_tol;
            break;
        }
    }
    sys.frame = x[M];
    BoundaryCurve bc(M);
    for (int m = 2; m <= M; ++m) bc.cos_coefs[m] = x[m - 2];
    for (size_t p = 0; p < L.centers.size(); ++p) {
        PatchSpec ps;
        ps.center = L.centers[p];
        ps.kappa = spec.kappa;
        ps.sign = L.signs[p];
        ps.eps = eps;
        ps.core_radius = s;
        ps.flux = L.signs[p] > 0 ? x[M - 1] : -x[M - 1];
        sys.patches.push_back(ps);
        BoundaryCurve bp = bc;
        bp.mirrored = L.mirrored[p];
        sys.boundaries.push_back(bp);
    }
    if (!sys.converged && sys.message.empty()) sys.message = "no convergence";
    return sys;
}

// general rotating-frame mode: every patch carries its own shape modes and flux
// constant; the translation (mode-1) coefficients are traded for the center
// coordinates, which become unknowns.
inline PatchSystem steady_patch_solve_general(const std::vector<PatchSpec>& initial,
                                              double gamma, double eps,
                                              const PatchSolveOptions& opts = {}) {
    PatchSystem sys;
    sys.mode = PatchFrameMode::general;
    sys.frame = gamma;
    if (eps > opts.eps0) {
        sys.message = "eps above the contraction guard threshold";
        return sys;
    }
    const int P = static_cast<int>(initial.size());
    const int M = opts.M, nq = opts.collocation;
    const int per = 2 * (M - 1) + 1;  // a2..aM, b2..bM, mu
    const int nun = P * per + 2 * P;  // plus (theta, phi) per patch
    std::vector<double> srad(P);
    for (int p = 0; p < P; ++p) srad[p] = solve_core_radius(initial[p].kappa, eps);

    auto unpack = [&](const VectorXd& x, std::vector<BoundaryCurve>& bcs,
                      std::vector<SpherePoint>& centers, std::vector<double>& mus) {
        bcs.assign(P, BoundaryCurve(M));
        centers.resize(P);
        mus.resize(P);
        for (int p = 0; p < P; ++p) {
            for (int m = 2; m <= M; ++m) {
                bcs[p].cos_coefs[m] = x[p * per + (m - 2)];
                bcs[p].sin_coefs[m] = x[p * per + (M - 1) + (m - 2)];
            }
            mus[p] = x[p * per + 2 * (M - 1)];
            centers[p] = {initial[p].center.theta + x[P * per + 2 * p],
                          initial[p].center.phi + x[P * per + 2 * p + 1]};
        }
    };

    auto residual = [&](const VectorXd& x) {
        std::vector<BoundaryCurve> bcs;
        std::vector<SpherePoint> centers;
        std::vector<double> mus;
        unpack(x, bcs, centers, mus);
        std::vector<detail::BoundaryNodes> nodes(P);
        std::vector<double> areas(P), omegas(P);
        for (int p = 0; p < P; ++p) {
            nodes[p] = detail::boundary_nodes(centers[p], srad[p], bcs[p], nq);
            areas[p] = detail::patch_area(centers[p], srad[p], bcs[p]);
            omegas[p] = initial[p].sign / (eps * eps);
        }
        VectorXd r(P * nq);
        for (int t = 0; t < P; ++t) {
            VectorXd psi = VectorXd::Zero(nq);
            for (int p = 0; p < P; ++p)
                detail::add_boundary_stream(psi, nodes[t].X, nodes[p], omegas[p], areas[p],
                                            p == t);
            for (int j = 0; j < nq; ++j)
                r[t * nq + j] =
                    psi[j] - gamma * std::cos(nodes[t].theta[j]) - mus[t];
        }
        return r;
    };

    VectorXd x = VectorXd::Zero(nun);
    for (int p = 0; p < P; ++p)
        x[p * per + 2 * (M - 1)] = flux_constant(initial, p, gamma);
    double prev_rn = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iterations; ++it) {
        sys.iterations = it;
        const VectorXd r = residual(x);
        const double rn = r.cwiseAbs().maxCoeff();
        if (std::isfinite(prev_rn) && prev_rn > opts.residual_tol)
            sys.contraction_ratio = std::max(sys.contraction_ratio, rn / prev_rn);
        prev_rn = rn;
        sys.residual_norm = rn;
        if (rn < opts.residual_tol) {
            sys.converged = true;
            break;
        }
        MatrixXd J(P * nq, nun);
        for (int c = 0; c < nun; ++c) {
            // centered differences: forward-difference truncation error projects
            // onto the near-null center directions of the SVD solve and shows up
            // as a spurious O(1e-6) center drift at exact equilibria
            VectorXd xp = x, xm = x;
            xp[c] += opts.fd_step;
            xm[c] -= opts.fd_step;
            J.col(c) = (residual(xp) - residual(xm)) / (2.0 * opts.fd_step);
        }
        Eigen::BDCSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-8);  // drops the longitude gauge / family null directions
        const VectorXd dx = svd.solve(-r);
        x += dx;
        if (dx.cwiseAbs().maxCoeff() < opts.step_tol) break;
    }
    {
        const VectorXd rf = residual(x);
        sys.residual_norm = rf.cwiseAbs().maxCoeff();
        sys.converged = sys.residual_norm < 10.0 * opts.residual_tol;
    }
    std::vector<BoundaryCurve> bcs;
    std::vector<SpherePoint> centers;
    std::vector<double> mus;
    unpack(x, bcs, centers, mus);
    for (int p = 0; p < P; ++p) {
        PatchSpec ps = initial[p];
        ps.eps = eps;
        ps.core_radius = srad[p];
        ps.center = centers[p];
        ps.flux = mus[p];
        sys.patches.push_back(ps);
        sys.boundaries.push_back(bcs[p]);
        sys.center_displacement = std::max(
            sys.center_displacement, geodesic_distance(centers[p], initial[p].center));
    }
    if (!sys.converged && sys.message.empty()) sys.message = "no convergence";
    return sys;
}

inline double patch_circulation(const PatchSpec& p, const BoundaryCurve& b) {
    const double s = p.core_radius > 0.0 ? p.core_radius : solve_core_radius(p.kappa, p.eps);
    return detail::patch_area(p.center, s, b) / (p.eps * p.eps);
}

// sampled radial offsets of a solved boundary (helper for norms and tests)
inline VectorXd sample_boundary_t(const BoundaryCurve& bc, int n) {
    VectorXd t(n);
    for (int j = 0; j < n; ++j) t[j] = bc.t(2.0 * PI * j / n);
    return t;
}

}  // namespace spherevortex

#endif
