#ifndef SPHEREVORTEX_CONTOUR_DYNAMICS_HPP
#define SPHEREVORTEX_CONTOUR_DYNAMICS_HPP

// Contour dynamics for uniform vortex patches on the sphere: boundary-integral
// node velocities, normal-only RK4 evolution, spectral re-noding, and run
// diagnostics.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "patch.hpp"

namespace spherevortex {

// worker cap: min(hardware, SPHEREVORTEX_THREADS if set)
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SPHEREVORTEX_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

inline void parallel_for(int n, const std::function<void(int)>& body) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

struct PatchContour {
    MatrixXd nodes;  // n x 3 unit vectors, positively oriented
    double omega = 0.0;
    double area_target = 0.0;  // enclosed area restored at each renode when set
};

struct ContourState {
    std::vector<PatchContour> patches;
    double gamma = 0.0;  // frame rotation in the stream, -gamma cos(theta)
    double time = 0.0;
    long step_count = 0;
};

// signed spherical polygon area about the normalized centroid
inline double spherical_polygon_area(const MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    Vec3 C = X.colwise().mean();
    C.normalize();
    double A = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 a = X.row(i), b = X.row((i + 1) % n);
        A += 2.0 * std::atan2(C.dot(a.cross(b)), 1.0 + C.dot(a) + C.dot(b) + a.dot(b));
    }
    return A;
}

namespace detail {

// circulant correction for the Kress log split on the self block:
// C(t,j) = R[off] - (2pi/n) ln(4 sin^2(pi off / n)), diagonal R[0]
inline const MatrixXd& kress_circulant(int n) {
    static std::map<int, MatrixXd> cache;
    const VectorXd& R = kress_weights(n);
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    VectorXd row(n);
    row[0] = R[0];
    for (int l = 1; l < n; ++l) {
        const double sh = std::sin(PI * l / n);
        row[l] = R[l] - (2.0 * PI / n) * std::log(4.0 * sh * sh);
    }
    MatrixXd C(n, n);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < n; ++j) C(t, j) = row[((j - t) % n + n) % n];
    return cache.emplace(n, std::move(C)).first->second;
}

// cartesian boundary-integral velocity: v(x) = -(omega/4pi) oint ln(1-x.x') dl',
// Kress split on the self block; the split writes the kernel as
// (2pi/n) ln(1-u) with the diagonal replaced by ln(|gamma'|^2 / 2), plus the
// circulant above, keeping everything in vectorized matrix products.
inline MatrixXd contour_velocity_block(const MatrixXd& Xt, const MatrixXd& Xs,
                                       const MatrixXd& dXs, double omega, bool self_block) {
    const int nt = static_cast<int>(Xt.rows());
    const int n = static_cast<int>(Xs.rows());
    const double pref = -omega / (4.0 * PI);
    MatrixXd L = (1.0 - (Xt * Xs.transpose()).array()).log().matrix();
    if (!self_block) return pref * (2.0 * PI / n) * (L * dXs);
    for (int j = 0; j < nt; ++j) L(j, j) = std::log(0.5 * dXs.row(j).squaredNorm());
    L *= 2.0 * PI / n;
    L += kress_circulant(n);
    return pref * (L * dXs);
}

}  // namespace detail

namespace detail {

// band-limited interpolation matrix from m equispaced samples to n >= m points
inline const MatrixXd& trig_upsample_matrix(int n, int m) {
    static std::map<std::pair<int, int>, MatrixXd> cache;
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache.find({n, m});
    if (it != cache.end()) return it->second;
    MatrixXd Pm(n, m);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k) {
            const double d = 2.0 * PI * j / n - 2.0 * PI * k / m;
            double v = 1.0 / m;
            for (int q = 1; q < m / 2; ++q) v += (2.0 / m) * std::cos(q * d);
            v += (1.0 / m) * std::cos((m / 2) * d);
            Pm(j, k) = v;
        }
    return cache.emplace(std::make_pair(n, m), std::move(Pm)).first->second;
}

}  // namespace detail

// node velocities of every patch boundary under the full system plus the frame.
// Self blocks use the full Kress rule; smooth cross-patch interactions use
// 2x-coarsened source and target grids with spectral upsampling (the kernel is
// analytic at cross-patch separations, so the coarsening error is negligible),
// keeping the dominant log evaluations in single vectorized passes.
inline std::vector<MatrixXd> contour_velocities(const ContourState& st) {
    const int P = static_cast<int>(st.patches.size());
    bool coarsen = P > 1;
    for (int p = 0; p < P; ++p) {
        const int n = static_cast<int>(st.patches[p].nodes.rows());
        if (n < 64 || n % 2 != 0) coarsen = false;
    }
    const int c = coarsen ? 2 : 1;

    std::vector<int> off(P + 1, 0);
    for (int p = 0; p < P; ++p)
        off[p + 1] = off[p] + static_cast<int>(st.patches[p].nodes.rows()) / c;
    const int Nc = off[P];
    MatrixXd Xc(Nc, 3);   // coarsened nodes, all patches
    MatrixXd dXc(Nc, 3);  // coarsened derivative rows scaled by -omega/(4pi) * (2pi/m)
    std::vector<MatrixXd> dX(P);
    for (int p = 0; p < P; ++p) {
        const int n = static_cast<int>(st.patches[p].nodes.rows());
        const int m = n / c;
        dX[p] = detail::spectral_deriv_matrix(n) * st.patches[p].nodes;
        const double w = (-st.patches[p].omega / (4.0 * PI)) * (2.0 * PI / m);
        for (int k = 0; k < m; ++k) {
            Xc.row(off[p] + k) = st.patches[p].nodes.row(k * c);
            dXc.row(off[p] + k) = w * dX[p].row(k * c);
        }
    }

    // cross-patch kernel on the coarse grids, self blocks zeroed
    MatrixXd L(Nc, Nc);
    L.noalias() = Xc * Xc.transpose();
    L = (1.0 - L.array()).log().matrix();
    for (int p = 0; p < P; ++p)
        L.block(off[p], off[p], off[p + 1] - off[p], off[p + 1] - off[p]).setZero();
    MatrixXd Vc(Nc, 3);
    Vc.noalias() = L * dXc;

    std::vector<MatrixXd> vel(P);
    parallel_for(P, [&](int p) {
        const MatrixXd& X = st.patches[p].nodes;
        const int n = static_cast<int>(X.rows());
        const int m = n / c;
        // cross part upsampled to the full grid
        MatrixXd v;
        if (c == 1)
            v = Vc.middleRows(off[p], n);
        else
            v = detail::trig_upsample_matrix(n, m) * Vc.middleRows(off[p], m);
        // self block: full Kress rule
        MatrixXd Ls(n, n);
        Ls.noalias() = X * X.transpose();
        Ls = (1.0 - Ls.array()).log().matrix();
        for (int j = 0; j < n; ++j) Ls(j, j) = std::log(0.5 * dX[p].row(j).squaredNorm());
        const double pref = -st.patches[p].omega / (4.0 * PI);
        v.noalias() += pref * (2.0 * PI / n) * (Ls * dX[p]);
        v.noalias() += pref * (detail::kress_circulant(n) * dX[p]);
        // frame: rigid rotation -gamma about the z axis
        for (int j = 0; j < n; ++j) {
            const Vec3 x = X.row(j);
            v.row(j) += -st.gamma * Vec3(0, 0, 1).cross(x).transpose();
        }
        vel[p] = v;
    });
    return vel;
}

struct TangentVelocity {
    double v_theta = 0.0;
    double v_phi = 0.0;
};

inline Vec3 tangent_to_cartesian(const SpherePoint& z, const TangentVelocity& v) {
    const Vec3 eth(std::cos(z.theta) * std::cos(z.phi), std::cos(z.theta) * std::sin(z.phi),
                   -std::sin(z.theta));
    const Vec3 eph(-std::sin(z.phi), std::cos(z.phi), 0.0);
    return v.v_theta * eth + v.v_phi * eph;
}

// reference velocity by area quadrature over the patch interiors; slow, used
// for cross-checks. The region is the tangent-chart cone q * y_b(tau).
inline TangentVelocity induced_velocity(const ContourState& st, const SpherePoint& z,
                                        int n_q = 32) {
    // Gauss-Legendre nodes on (0,1) by Newton iteration on P_n
    std::vector<double> qn(n_q), qw(n_q);
    for (int i = 0; i < n_q; ++i) {
        double x = std::cos(PI * (i + 0.75) / (n_q + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n_q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n_q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n_q; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n_q * (x * p1 - p0) / (x * x - 1.0);
        qn[i] = 0.5 * (1.0 - x);  // map to (0,1), reversed order is harmless
        qw[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    double vth = 0.0, vph = 0.0;
    const double stz = std::sin(z.theta);
    for (const auto& pc : st.patches) {
        const int n = static_cast<int>(pc.nodes.rows());
        Vec3 Cv = pc.nodes.colwise().mean();
        Cv.normalize();
        const SpherePoint C = from_cartesian(Cv);
        VectorXd y1(n), y2(n);
        for (int j = 0; j < n; ++j) {
            const TangentOffset y =
                tangent_offset(C, from_cartesian(Vec3(pc.nodes.row(j))), SineMode::at_center);
            y1[j] = y.y1;
            y2[j] = y.y2;
        }
        const MatrixXd& D = detail::spectral_deriv_matrix(n);
        const VectorXd dy1 = D * y1, dy2 = D * y2;
        const double stc = std::sin(C.theta);
        for (int j = 0; j < n; ++j) {
            const double jac_t = y1[j] * dy2[j] - y2[j] * dy1[j];
            for (int q = 0; q < n_q; ++q) {
                const SpherePoint src{C.theta + qn[q] * y1[j],
                                      C.phi + qn[q] * y2[j] / stc};
                const double dsigma = qn[q] * jac_t * std::sin(src.theta) / stc *
                                      (2.0 * PI / n) * qw[q];
                vth += pc.omega * green_G_dphi(z, src) / stz * dsigma;
                vph -= pc.omega * green_G_dtheta(z, src) * dsigma;
            }
        }
    }
    vph += -st.gamma * stz;
    return {vth, vph};
}

// fast path: boundary integral evaluated at an off-contour point
inline TangentVelocity induced_velocity_fast(const ContourState& st, const SpherePoint& z) {
    Eigen::Matrix<double, 1, 3> Xt;
    Xt = to_cartesian(z).transpose();
    Vec3 v = Vec3::Zero();
    for (const auto& pc : st.patches) {
        const MatrixXd dX =
            detail::spectral_deriv_matrix(static_cast<int>(pc.nodes.rows())) * pc.nodes;
        v += detail::contour_velocity_block(Xt, pc.nodes, dX, pc.omega, false)
                 .row(0)
                 .transpose();
    }
    const Vec3 eth(std::cos(z.theta) * std::cos(z.phi), std::cos(z.theta) * std::sin(z.phi),
                   -std::sin(z.theta));
    const Vec3 eph(-std::sin(z.phi), std::cos(z.phi), 0.0);
    TangentVelocity out{v.dot(eth), v.dot(eph)};
    out.v_phi += -st.gamma * std::sin(z.theta);
    return out;
}

namespace detail {

// normal-only projection: keep (v . n) n with n = x cross tangent (inward for
// positive orientation); tangential slip only re-parametrizes the curve
inline MatrixXd normal_only(const MatrixXd& X, const MatrixXd& V) {
    const int n = static_cast<int>(X.rows());
    const MatrixXd dX = spectral_deriv_matrix(n) * X;
    MatrixXd out(n, 3);
    for (int j = 0; j < n; ++j) {
        const Vec3 x = X.row(j);
        Vec3 tau = dX.row(j);
        tau.normalize();
        const Vec3 nh = x.cross(tau);
        out.row(j) = (V.row(j).dot(nh)) * nh.transpose();
    }
    return out;
}

inline void renormalize(MatrixXd& X) {
    for (int j = 0; j < X.rows(); ++j) X.row(j).normalize();
}

// trigonometric interpolant of grid samples, coefficients computed once (even n)
struct TrigSeries {
    int n = 0;
    double a0 = 0.0;
    VectorXd a, b;  // modes 1..n/2; the Nyquist sine is zero on the grid

    explicit TrigSeries(const VectorXd& f) {
        n = static_cast<int>(f.size());
        const int half = n / 2;
        a0 = f.mean();
        a = VectorXd::Zero(half + 1);
        b = VectorXd::Zero(half + 1);
        for (int m = 1; m <= half; ++m) {
            double am = 0.0, bm = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = 2.0 * PI * j / n;
                am += f[j] * std::cos(m * x);
                bm += f[j] * std::sin(m * x);
            }
            const double scale = (m == half) ? 1.0 / n : 2.0 / n;
            a[m] = am * scale;
            b[m] = (m == half) ? 0.0 : bm * scale;
        }
    }

    double eval(double xi) const {
        double v = a0;
        for (int m = 1; m <= n / 2; ++m)
            v += a[m] * std::cos(m * xi) + b[m] * std::sin(m * xi);
        return v;
    }
};

// circulant matrix that smoothly damps the top of a grid function's mode
// spectrum, sigma(m) = exp(-36 (m / half)^36); cached per n
inline const MatrixXd& mode_filter_matrix(int n) {
    std::lock_guard<std::mutex> lock(cache_mutex());
    static std::map<int, MatrixXd> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const int half = n / 2;
    MatrixXd F(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const double d = 2.0 * PI * (j - k) / n;
            double v = 1.0;
            for (int m = 1; m <= half; ++m) {
                const double sigma = std::exp(-36.0 * std::pow(double(m) / half, 36));
                v += (m == half ? 1.0 : 2.0) * sigma * std::cos(m * d);
            }
            F(j, k) = v / n;
        }
    return cache.emplace(n, std::move(F)).first->second;
}

// smooth spectral damping of the top of a velocity field's mode spectrum along
// the curve parameter. Marginally resolved modes corrupt the spectral tangent,
// which projects any bulk normal motion into a spurious short-wave normal
// velocity growing at rate |v_n| m / s; damping those modes each step removes
// the feedback while leaving resolved modes untouched (sigma - 1 = O(1e-4) at
// three quarters of the Nyquist mode and drops super-exponentially below)
inline void damp_high_modes(MatrixXd& V) {
    V = mode_filter_matrix(static_cast<int>(V.rows())) * V;
}

// per-mode linear stability of the filtered RK4 step: the mode-m boundary wave
// rotates at |omega| (m - 1) / 2, the RK4 amplification on the imaginary axis
// is |R(iy)| with R the quartic stability polynomial, and the per-step filter
// contributes sigma(m); every mode must satisfy |R(i y_m)| sigma(m) <= 1
inline bool boundary_wave_stable(double omega, int n, double dt) {
    const int half = n / 2;
    for (int m = 2; m <= half; ++m) {
        const double y = dt * std::abs(omega) * (m - 1) / 2.0;
        const std::complex<double> iy(0.0, y);
        const std::complex<double> R =
            1.0 + iy * (1.0 + iy * (0.5 + iy * (1.0 / 6.0 + iy / 24.0)));
        const double sigma = std::exp(-36.0 * std::pow(double(m) / half, 36));
        if (std::abs(R) * sigma > 1.0 + 1e-12) return false;
    }
    return true;
}

}  // namespace detail

// equal-arclength re-noding via the spectral arclength integral and a trig
// interpolant of the coordinates
inline void renode(PatchContour& pc) {
    const int n = static_cast<int>(pc.nodes.rows());
    const MatrixXd& D = detail::spectral_deriv_matrix(n);
    const MatrixXd dX = D * pc.nodes;
    VectorXd speed(n);
    for (int j = 0; j < n; ++j) speed[j] = dX.row(j).norm();
    // Fourier modes of the speed, for the exact arclength antiderivative
    const int half = n / 2;
    const double c0 = speed.mean();
    VectorXd am = VectorXd::Zero(half + 1), bm = VectorXd::Zero(half + 1);
    for (int m = 1; m <= half; ++m) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * PI * j / n;
            a += speed[j] * std::cos(m * x);
            b += speed[j] * std::sin(m * x);
        }
        const double scale = (m == half) ? 1.0 / n : 2.0 / n;
        am[m] = a * scale;
        bm[m] = b * scale;
    }
    auto arclen = [&](double xi) {
        double s = c0 * xi;
        for (int m = 1; m <= half; ++m)
            s += am[m] * std::sin(m * xi) / m + bm[m] * (1.0 - std::cos(m * xi)) / m;
        return s;
    };
    auto speed_at = [&](double xi) {
        double s = c0;
        for (int m = 1; m <= half; ++m)
            s += am[m] * std::cos(m * xi) + bm[m] * std::sin(m * xi);
        return s;
    };
    const double L = c0 * 2.0 * PI;
    detail::TrigSeries sx(pc.nodes.col(0)), sy(pc.nodes.col(1)), sz(pc.nodes.col(2));
    MatrixXd Y(n, 3);
    for (int k = 0; k < n; ++k) {
        const double target = L * k / n;
        double xi = 2.0 * PI * k / n;
        for (int it = 0; it < 8; ++it) xi -= (arclen(xi) - target) / speed_at(xi);
        Y(k, 0) = sx.eval(xi);
        Y(k, 1) = sy.eval(xi);
        Y(k, 2) = sz.eval(xi);
    }
    detail::renormalize(Y);
    // interpolation does not conserve the enclosed area exactly; restore it by
    // a uniform normal push, sized by a secant step on the measured response
    if (pc.area_target != 0.0) {
        const double A0 = spherical_polygon_area(Y);
        const MatrixXd dY = D * Y;
        double Lt = 0.0;
        for (int j = 0; j < n; ++j) Lt += dY.row(j).norm() * (2.0 * PI / n);
        MatrixXd nrm(n, 3);
        for (int j = 0; j < n; ++j) {
            const Vec3 x = Y.row(j);
            Vec3 tau = dY.row(j);
            tau.normalize();
            nrm.row(j) = x.cross(tau).transpose();
        }
        const double c1 = (pc.area_target - A0) / Lt;
        MatrixXd Y1 = Y + c1 * nrm;
        detail::renormalize(Y1);
        const double A1 = spherical_polygon_area(Y1);
        if (std::abs(A1 - A0) > 0.0) {
            const double c = c1 * (pc.area_target - A0) / (A1 - A0);
            Y += c * nrm;
            detail::renormalize(Y);
        }
    }
    pc.nodes = Y;
}

struct StepOptions {
    double dt = 5e-5;
    int renode_every = 20;
    double spacing_low = 0.2;   // min node spacing / mean, abort below
    double spacing_high = 5.0;  // max node spacing / mean, abort above
    double cfl = 0.8;           // dt * max |v| must stay below cfl * min spacing
};

// one RK4 step of normal-only node motion; throws on CFL or spacing violations
inline void contour_step(ContourState& st, const StepOptions& opts = {}) {
    const int P = static_cast<int>(st.patches.size());
    const double dt = opts.dt;

    auto rhs = [&](const ContourState& s) {
        std::vector<MatrixXd> v = contour_velocities(s);
        for (int p = 0; p < P; ++p) {
            v[p] = detail::normal_only(s.patches[p].nodes, v[p]);
            detail::damp_high_modes(v[p]);
        }
        return v;
    };

    for (int p = 0; p < P; ++p) {
        const int n = static_cast<int>(st.patches[p].nodes.rows());
        if (!detail::boundary_wave_stable(st.patches[p].omega, n, dt))
            throw std::runtime_error(
                "contour_step: dt exceeds the boundary-wave stability limit, reduce dt");
    }

    // spacing guard: a tripped invariant triggers a renode; a repeat trip aborts
    for (int p = 0; p < P; ++p) {
        auto spacing_bad = [&](const MatrixXd& X) {
            const int n = static_cast<int>(X.rows());
            double mn = std::numeric_limits<double>::infinity(), mx = 0.0, mean = 0.0;
            for (int j = 0; j < n; ++j) {
                const double d = (X.row(j) - X.row((j + 1) % n)).norm();
                mn = std::min(mn, d);
                mx = std::max(mx, d);
                mean += d / n;
            }
            return mn < opts.spacing_low * mean || mx > opts.spacing_high * mean;
        };
        if (spacing_bad(st.patches[p].nodes)) {
            renode(st.patches[p]);
            if (spacing_bad(st.patches[p].nodes))
                throw std::runtime_error("contour_step: node spacing invariant violated");
        }
    }

    const std::vector<MatrixXd> k1 = rhs(st);
    double vmax = 0.0;
    for (const auto& v : k1) vmax = std::max(vmax, v.rowwise().norm().maxCoeff());
    for (int p = 0; p < P; ++p) {
        const MatrixXd& X = st.patches[p].nodes;
        const int n = static_cast<int>(X.rows());
        double mn = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            mn = std::min(mn, (X.row(j) - X.row((j + 1) % n)).norm());
        if (dt * vmax > opts.cfl * mn)
            throw std::runtime_error("contour_step: CFL guard tripped, reduce dt");
    }

    ContourState s2 = st, s3 = st, s4 = st;
    for (int p = 0; p < P; ++p) {
        s2.patches[p].nodes = st.patches[p].nodes + 0.5 * dt * k1[p];
        detail::renormalize(s2.patches[p].nodes);
    }
    const std::vector<MatrixXd> k2 = rhs(s2);
    for (int p = 0; p < P; ++p) {
        s3.patches[p].nodes = st.patches[p].nodes + 0.5 * dt * k2[p];
        detail::renormalize(s3.patches[p].nodes);
    }
    const std::vector<MatrixXd> k3 = rhs(s3);
    for (int p = 0; p < P; ++p) {
        s4.patches[p].nodes = st.patches[p].nodes + dt * k3[p];
        detail::renormalize(s4.patches[p].nodes);
    }
    const std::vector<MatrixXd> k4 = rhs(s4);
    for (int p = 0; p < P; ++p) {
        st.patches[p].nodes +=
            (dt / 6.0) * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
        detail::renormalize(st.patches[p].nodes);
    }
    st.time += dt;
    ++st.step_count;
    if (st.step_count % opts.renode_every == 0) {
        for (auto& pc : st.patches) {
            renode(pc);
            // non-adjacent close approach means the curve is about to self-intersect
            const MatrixXd& X = pc.nodes;
            const int n = static_cast<int>(X.rows());
            double mn = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j)
                mn = std::min(mn, (X.row(j) - X.row((j + 1) % n)).norm());
            for (int j = 0; j < n; ++j)
                for (int k = j + 2; k < n; ++k) {
                    if (j == 0 && k == n - 1) continue;
                    if ((X.row(j) - X.row(k)).norm() < 0.5 * mn)
                        throw std::runtime_error("contour_step: boundary self-intersection");
                }
        }
    }
}

struct ContourDiagnostics {
    std::vector<double> times;
    std::vector<std::vector<double>> areas;        // per patch
    std::vector<std::vector<double>> circulations; // omega * area
    std::vector<std::vector<double>> colats;       // centroid colatitude
    std::vector<std::vector<double>> lons;         // centroid longitude, unwrapped
    double area_drift_max = 0.0;                   // max relative change of any patch area
    std::vector<double> lon_drift_rate;            // lstsq slope of longitude vs time
    double colat_range_max = 0.0;
};

inline void record_diagnostics(const ContourState& st, ContourDiagnostics& d) {
    const int P = static_cast<int>(st.patches.size());
    if (d.areas.empty()) {
        d.areas.resize(P);
        d.circulations.resize(P);
        d.colats.resize(P);
        d.lons.resize(P);
    }
    d.times.push_back(st.time);
    for (int p = 0; p < P; ++p) {
        const double A = spherical_polygon_area(st.patches[p].nodes);
        d.areas[p].push_back(A);
        d.circulations[p].push_back(st.patches[p].omega * A);
        Vec3 C = st.patches[p].nodes.colwise().mean();
        C.normalize();
        const SpherePoint c = from_cartesian(C);
        d.colats[p].push_back(c.theta);
        double lon = c.phi;
        if (!d.lons[p].empty()) {
            // unwrap
            while (lon - d.lons[p].back() > PI) lon -= 2.0 * PI;
            while (lon - d.lons[p].back() < -PI) lon += 2.0 * PI;
        }
        d.lons[p].push_back(lon);
    }
}

inline void finalize_diagnostics(ContourDiagnostics& d) {
    const int P = static_cast<int>(d.areas.size());
    d.lon_drift_rate.assign(P, 0.0);
    for (int p = 0; p < P; ++p) {
        const auto& A = d.areas[p];
        double amin = A[0], amax = A[0];
        for (double a : A) {
            amin = std::min(amin, a);
            amax = std::max(amax, a);
        }
        d.area_drift_max = std::max(d.area_drift_max, (amax - amin) / std::abs(A[0]));
        const auto& th = d.colats[p];
        double tmin = th[0], tmax = th[0];
        for (double t : th) {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        d.colat_range_max = std::max(d.colat_range_max, tmax - tmin);
        // least-squares slope of longitude vs time
        const auto& L = d.lons[p];
        const auto& T = d.times;
        const int m = static_cast<int>(T.size());
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (int j = 0; j < m; ++j) {
            st += T[j];
            sl += L[j];
            stt += T[j] * T[j];
            stl += T[j] * L[j];
        }
        const double den = m * stt - st * st;
        d.lon_drift_rate[p] = den != 0.0 ? (m * stl - st * sl) / den : 0.0;
    }
}

// seed a contour state from a solved steady patch system
inline ContourState contour_from_system(const PatchSystem& sys, int nodes_per_patch) {
    ContourState st;
    st.gamma = 0.0;  // the solved frame speed is observed, not imposed
    for (size_t p = 0; p < sys.patches.size(); ++p) {
        PatchContour pc;
        const auto bn = detail::boundary_nodes(sys.patches[p].center,
                                               sys.patches[p].core_radius,
                                               sys.boundaries[p], nodes_per_patch);
        pc.nodes = bn.X;
        pc.omega = sys.patches[p].sign / (sys.patches[p].eps * sys.patches[p].eps);
        pc.area_target = spherical_polygon_area(pc.nodes);
        st.patches.push_back(pc);
    }
    return st;
}

inline ContourDiagnostics run_and_measure(ContourState& st, double T,
                                          const StepOptions& opts = {},
                                          int sample_every = 200) {
    ContourDiagnostics d;
    record_diagnostics(st, d);
    const long nsteps = static_cast<long>(std::llround(T / opts.dt));
    for (long k = 0; k < nsteps; ++k) {
        contour_step(st, opts);
        if ((k + 1) % sample_every == 0 || k + 1 == nsteps) record_diagnostics(st, d);
    }
    finalize_diagnostics(d);
    return d;
}

}  // namespace spherevortex

#endif
