#ifndef SPHEREVORTEX_CLI_IO_HPP
#define SPHEREVORTEX_CLI_IO_HPP

// Experiment configuration, deterministic serialization, and the command
// implementations behind the CLI verbs. Numbers are written with 17
// significant digits so every double round-trips exactly.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contour_dynamics.hpp"
#include "point_vortex.hpp"

namespace spherevortex {

using nlohmann::json;

// exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// JSON dump with every floating-point number at 17 significant digits
inline void dump17(const json& j, std::ostream& os, int indent = 0) {
    const std::string pad(indent, ' ');
    const std::string pad2(indent + 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                os << pad2 << json(it.key()).dump() << ": ";
                dump17(it.value(), os, indent + 2);
                if (k + 1 < j.size()) os << ",";
                os << "\n";
            }
            os << pad << "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[";
            for (size_t k = 0; k < j.size(); ++k) {
                dump17(j[k], os, indent + 2);
                if (k + 1 < j.size()) os << ", ";
            }
            os << "]";
            return;
        }
        case json::value_t::number_float:
            os << fmt17(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

inline std::string dump17(const json& j) {
    std::ostringstream os;
    dump17(j, os);
    os << "\n";
    return os.str();
}

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline const char* VERSION = "1.0.0";

inline json provenance(const json& config, bool with_timestamp = true) {
    json p;
    p["version"] = VERSION;
    p["config_hash"] = fnv1a(config.dump());
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        p["timestamp"] = buf;
    }
    return p;
}

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed on " + path);
}

// delimited table: '#' comment lines, then a header row, then rows
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string render() const {
        std::ostringstream os;
        for (const auto& c : comments) os << "# " << c << "\n";
        for (size_t k = 0; k < header.size(); ++k)
            os << header[k] << (k + 1 < header.size() ? "\t" : "\n");
        for (const auto& r : rows)
            for (size_t k = 0; k < r.size(); ++k)
                os << r[k] << (k + 1 < r.size() ? "\t" : "\n");
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// config <-> domain types

inline double angle_field(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ValidationError("missing field '" + key + "'");
    if (!j[key].is_number()) throw ValidationError("field '" + key + "' must be a number (radians)");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw ValidationError("field '" + key + "' is not finite");
    return v;
}

constexpr double POLE_GUARD = 1e-6;

inline void check_colatitude(double theta, const std::string& what) {
    if (theta < POLE_GUARD || theta > PI - POLE_GUARD)
        throw ValidationError(what + ": colatitude outside the pole guard band");
}

inline VortexConfig parse_vortex_config(const json& j) {
    reject_unknown_keys(j, {"gamma", "vortices"}, "vortex config");
    VortexConfig c;
    c.gamma = j.value("gamma", 0.0);
    if (!j.contains("vortices") || !j["vortices"].is_array())
        throw ValidationError("vortex config needs a 'vortices' array");
    for (const auto& v : j["vortices"]) {
        if (!v.is_array() || v.size() != 4)
            throw ValidationError("each vortex is [theta, phi, kappa, sign]");
        Vortex vx;
        vx.z = {v[0].get<double>(), v[1].get<double>()};
        vx.kappa = v[2].get<double>();
        vx.sign = v[3].get<double>();
        check_colatitude(vx.z.theta, "vortex");
        if (vx.kappa <= 0.0) throw ValidationError("vortex strength must be positive");
        if (vx.sign != 1.0 && vx.sign != -1.0) throw ValidationError("vortex sign must be +-1");
        c.vortices.push_back(vx);
    }
    return c;
}

inline json vortex_config_json(const VortexConfig& c) {
    json j;
    j["gamma"] = c.gamma;
    j["vortices"] = json::array();
    for (const auto& v : c.vortices)
        j["vortices"].push_back({v.z.theta, v.z.phi, v.kappa, v.sign});
    return j;
}

inline StreetSpec parse_street_spec(const json& j) {
    reject_unknown_keys(j, {"k", "theta0", "kappa", "variant"}, "street spec");
    StreetSpec s;
    if (j.contains("k")) s.k = j["k"].get<int>();
    if (j.contains("theta0")) s.theta0 = angle_field(j, "theta0");
    if (j.contains("kappa")) s.kappa = j["kappa"].get<double>();
    if (j.contains("variant")) {
        const std::string v = j["variant"].get<std::string>();
        if (v == "type1")
            s.variant = StreetType::type1;
        else if (v == "type2")
            s.variant = StreetType::type2;
        else
            throw ValidationError("variant must be type1 or type2");
    }
    if (s.k < 1) throw ValidationError("k must be >= 1");
    if (s.kappa <= 0.0) throw ValidationError("kappa must be positive");
    if (!(s.theta0 > 0.0) || s.theta0 > PI / 2.0)
        throw ValidationError("theta0 must lie in (0, pi/2]");
    return s;
}

inline json patch_system_json(const PatchSystem& sys) {
    json j;
    j["mode"] = sys.mode == PatchFrameMode::karman ? "karman" : "general";
    j["frame"] = sys.frame;
    j["residual_norm"] = sys.residual_norm;
    j["converged"] = sys.converged;
    j["patches"] = json::array();
    for (size_t p = 0; p < sys.patches.size(); ++p) {
        const PatchSpec& ps = sys.patches[p];
        const BoundaryCurve& bc = sys.boundaries[p];
        json pj;
        pj["theta"] = ps.center.theta;
        pj["phi"] = ps.center.phi;
        pj["kappa"] = ps.kappa;
        pj["sign"] = ps.sign;
        pj["eps"] = ps.eps;
        pj["core_radius"] = ps.core_radius;
        pj["flux"] = ps.flux;
        pj["mirrored"] = bc.mirrored;
        pj["cos_coefs"] = std::vector<double>(bc.cos_coefs.data(),
                                              bc.cos_coefs.data() + bc.cos_coefs.size());
        pj["sin_coefs"] = std::vector<double>(bc.sin_coefs.data(),
                                              bc.sin_coefs.data() + bc.sin_coefs.size());
        j["patches"].push_back(pj);
    }
    return j;
}

inline PatchSystem parse_patch_system(const json& j) {
    PatchSystem sys;
    sys.mode = j.value("mode", "karman") == std::string("karman") ? PatchFrameMode::karman
                                                                  : PatchFrameMode::general;
    sys.frame = j.value("frame", 0.0);
    sys.residual_norm = j.value("residual_norm", 0.0);
    sys.converged = j.value("converged", false);
    for (const auto& pj : j.at("patches")) {
        PatchSpec ps;
        ps.center = {pj.at("theta").get<double>(), pj.at("phi").get<double>()};
        ps.kappa = pj.at("kappa").get<double>();
        ps.sign = pj.at("sign").get<double>();
        ps.eps = pj.at("eps").get<double>();
        ps.core_radius = pj.at("core_radius").get<double>();
        ps.flux = pj.value("flux", 0.0);
        const auto ca = pj.at("cos_coefs").get<std::vector<double>>();
        BoundaryCurve bc(static_cast<int>(ca.size()) - 1);
        for (size_t m = 0; m < ca.size(); ++m) bc.cos_coefs[m] = ca[m];
        if (pj.contains("sin_coefs")) {
            const auto sa = pj.at("sin_coefs").get<std::vector<double>>();
            for (size_t m = 0; m < sa.size() && m < ca.size(); ++m) bc.sin_coefs[m] = sa[m];
        }
        bc.mirrored = pj.value("mirrored", false);
        sys.patches.push_back(ps);
        sys.boundaries.push_back(bc);
    }
    return sys;
}

inline json contour_state_json(const ContourState& st) {
    json j;
    j["gamma"] = st.gamma;
    j["time"] = st.time;
    j["step_count"] = st.step_count;
    j["patches"] = json::array();
    for (const auto& pc : st.patches) {
        json pj;
        pj["omega"] = pc.omega;
        pj["area_target"] = pc.area_target;
        pj["nodes"] = json::array();
        for (int k = 0; k < pc.nodes.rows(); ++k)
            pj["nodes"].push_back({pc.nodes(k, 0), pc.nodes(k, 1), pc.nodes(k, 2)});
        j["patches"].push_back(pj);
    }
    return j;
}

inline ContourState parse_contour_state(const json& j) {
    ContourState st;
    st.gamma = j.value("gamma", 0.0);
    st.time = j.value("time", 0.0);
    st.step_count = j.value("step_count", 0l);
    for (const auto& pj : j.at("patches")) {
        PatchContour pc;
        pc.omega = pj.at("omega").get<double>();
        pc.area_target = pj.value("area_target", 0.0);
        const auto& nodes = pj.at("nodes");
        pc.nodes.resize(static_cast<int>(nodes.size()), 3);
        for (size_t k = 0; k < nodes.size(); ++k)
            for (int c = 0; c < 3; ++c) pc.nodes(static_cast<int>(k), c) = nodes[k][c].get<double>();
        st.patches.push_back(pc);
    }
    return st;
}

// ---------------------------------------------------------------------------
// commands; each returns the rendered primary output and writes files

inline std::string out_path(const json& cfg, const std::string& fallback) {
    return cfg.value("out", fallback);
}

inline int cmd_green(const json& cfg) {
    reject_unknown_keys(cfg, {"pairs", "grid", "out"}, "green config");
    Table tab;
    tab.comments.push_back(std::string("spherevortex ") + VERSION + " green");
    tab.comments.push_back("config_hash " + std::to_string(fnv1a(cfg.dump())));
    tab.header = {"theta1", "phi1", "theta2", "phi2", "G", "Gamma", "H"};
    auto add_row = [&](const SpherePoint& a, const SpherePoint& b) {
        check_colatitude(a.theta, "point");
        check_colatitude(b.theta, "point");
        const double G = green_G(a, b);
        double Gam = std::numeric_limits<double>::quiet_NaN();
        double H = std::numeric_limits<double>::quiet_NaN();
        if (geodesic_distance(a, b) < H_LOCALITY_RADIUS) {
            Gam = gamma_local(a, b);
            H = regular_H(a, b);
        }
        tab.rows.push_back({fmt17(a.theta), fmt17(a.phi), fmt17(b.theta), fmt17(b.phi),
                            fmt17(G), fmt17(Gam), fmt17(H)});
    };
    bool any = false;
    if (cfg.contains("pairs")) {
        for (const auto& p : cfg["pairs"]) {
            if (!p.is_array() || p.size() != 4)
                throw ValidationError("each pair is [theta1, phi1, theta2, phi2]");
            add_row({p[0].get<double>(), p[1].get<double>()},
                    {p[2].get<double>(), p[3].get<double>()});
            any = true;
        }
    }
    if (cfg.contains("grid")) {
        const json& g = cfg["grid"];
        reject_unknown_keys(g, {"source", "theta", "phi"}, "green grid");
        const SpherePoint src{g.at("source")[0].get<double>(), g.at("source")[1].get<double>()};
        const auto th = g.at("theta").get<std::vector<double>>();  // [min, max, n]
        const auto ph = g.at("phi").get<std::vector<double>>();
        if (th.size() != 3 || ph.size() != 3)
            throw ValidationError("grid ranges are [min, max, count]");
        check_colatitude(th[0], "grid");
        check_colatitude(th[1], "grid");
        const int nt = static_cast<int>(th[2]), np = static_cast<int>(ph[2]);
        if (nt < 1 || np < 1) throw ValidationError("grid counts must be positive");
        for (int i = 0; i < nt; ++i)
            for (int k = 0; k < np; ++k) {
                const double t = nt == 1 ? th[0] : th[0] + (th[1] - th[0]) * i / (nt - 1);
                const double p = np == 1 ? ph[0] : ph[0] + (ph[1] - ph[0]) * k / (np - 1);
                add_row({t, p}, src);
                any = true;
            }
    }
    if (!any) throw ValidationError("green: provide 'pairs' and/or 'grid'");
    write_file(out_path(cfg, "green.tsv"), tab.render());
    return 0;
}

inline int cmd_street(const json& cfg) {
    reject_unknown_keys(cfg, {"k", "theta0", "kappa", "variant", "out"}, "street config");
    json spec_cfg = cfg;
    spec_cfg.erase("out");
    const StreetSpec spec = parse_street_spec(spec_cfg);
    VortexConfig c;
    double W;
    try {
        c = karman_positions(spec);
        W = karman_speed(spec);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    json rec;
    rec["inputs"] = spec_cfg;
    rec["positions"] = vortex_config_json(c);
    rec["W"] = W;
    rec["residual"] = relative_equilibrium_residual(c, W);
    rec["provenance"] = provenance(cfg);
    write_file(out_path(cfg, "street.json"), dump17(rec));
    return 0;
}

inline int cmd_equilibrium(const json& cfg) {
    reject_unknown_keys(cfg, {"initial", "tol", "max_iterations", "out"}, "equilibrium config");
    const VortexConfig initial = parse_vortex_config(cfg.at("initial"));
    CriticalPointOptions opts;
    opts.tol = cfg.value("tol", opts.tol);
    opts.max_iterations = cfg.value("max_iterations", opts.max_iterations);
    const CriticalPoint cp = find_critical_point(initial, opts);
    json rec;
    rec["inputs"] = cfg;
    rec["config"] = vortex_config_json(cp.config);
    rec["gradient_norm"] = cp.gradient_norm;
    rec["hessian_spectrum"] =
        std::vector<double>(cp.eigenvalues.data(), cp.eigenvalues.data() + cp.eigenvalues.size());
    rec["nondegenerate"] = cp.nondegenerate;
    rec["converged"] = cp.converged;
    rec["iterations"] = cp.iterations;
    rec["message"] = cp.message;
    rec["provenance"] = provenance(cfg);
    write_file(out_path(cfg, "equilibrium.json"), dump17(rec));
    if (!cp.converged) throw NumericalError("critical point search did not converge");
    return 0;
}

inline int cmd_desingularize(const json& cfg) {
    reject_unknown_keys(cfg,
                        {"mode", "street", "initial", "gamma", "eps", "M", "collocation",
                         "out", "system_out_prefix"},
                        "desingularize config");
    const std::string mode = cfg.value("mode", "karman");
    std::vector<double> eps_list = cfg.at("eps").get<std::vector<double>>();
    if (eps_list.empty()) throw ValidationError("eps list is empty");
    for (double e : eps_list)
        if (!(e > 0.0) || e >= 0.5) throw ValidationError("eps values must lie in (0, 0.5)");
    PatchSolveOptions opts;
    opts.M = cfg.value("M", opts.M);
    opts.collocation = cfg.value("collocation", opts.collocation);
    Table tab;
    tab.comments.push_back(std::string("spherevortex ") + VERSION + " desingularize");
    tab.comments.push_back("config_hash " + std::to_string(fnv1a(cfg.dump())));
    std::vector<PatchSystem> systems(eps_list.size());
    if (mode == "karman") {
        const StreetSpec spec = parse_street_spec(cfg.at("street"));
        tab.header = {"eps", "core_radius", "W_solved", "residual", "iterations"};
        parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
            systems[i] = steady_patch_solve_karman(spec, eps_list[i], opts);
        });
        for (size_t i = 0; i < eps_list.size(); ++i) {
            const PatchSystem& sys = systems[i];
            const double s = sys.patches.empty() ? solve_core_radius(spec.kappa, eps_list[i])
                                                 : sys.patches[0].core_radius;
            tab.rows.push_back({fmt17(eps_list[i]), fmt17(s), fmt17(sys.frame),
                                fmt17(sys.residual_norm), std::to_string(sys.iterations)});
        }
    } else if (mode == "general") {
        const VortexConfig init = parse_vortex_config(cfg.at("initial"));
        const double gamma = cfg.value("gamma", init.gamma);
        std::vector<PatchSpec> seeds;
        for (const auto& v : init.vortices) {
            PatchSpec ps;
            ps.center = v.z;
            ps.kappa = v.kappa;
            ps.sign = v.sign;
            seeds.push_back(ps);
        }
        tab.header = {"eps", "center_displacement", "residual", "iterations"};
        parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
            std::vector<PatchSpec> sd = seeds;
            for (auto& ps : sd) ps.eps = eps_list[i];
            systems[i] = steady_patch_solve_general(sd, gamma, eps_list[i], opts);
        });
        for (size_t i = 0; i < eps_list.size(); ++i)
            tab.rows.push_back({fmt17(eps_list[i]), fmt17(systems[i].center_displacement),
                                fmt17(systems[i].residual_norm),
                                std::to_string(systems[i].iterations)});
    } else {
        throw ValidationError("mode must be karman or general");
    }
    write_file(out_path(cfg, "desingularize.tsv"), tab.render());
    if (cfg.contains("system_out_prefix")) {
        const std::string prefix = cfg["system_out_prefix"].get<std::string>();
        for (size_t i = 0; i < eps_list.size(); ++i) {
            json rec = patch_system_json(systems[i]);
            rec["inputs"] = cfg;
            rec["provenance"] = provenance(cfg);
            write_file(prefix + fmt17(eps_list[i]) + ".json", dump17(rec));
        }
    }
    for (const auto& sys : systems)
        if (!sys.converged)
            throw NumericalError("patch solve failed: " +
                                 (sys.message.empty() ? "no convergence" : sys.message));
    return 0;
}

inline int cmd_evolve(const json& cfg) {
    reject_unknown_keys(cfg,
                        {"system", "resume", "T", "dt", "nodes", "renode_every",
                         "sample_every", "gamma", "out", "drift_out", "checkpoint_out",
                         "checkpoint_every"},
                        "evolve config");
    StepOptions opts;
    opts.dt = cfg.value("dt", opts.dt);
    if (!(opts.dt > 0.0)) throw ValidationError("dt must be positive");
    opts.renode_every = cfg.value("renode_every", opts.renode_every);
    const double T = cfg.at("T").get<double>();
    if (!(T > 0.0)) throw ValidationError("T must be positive");
    const int sample_every = cfg.value("sample_every", 200);

    ContourState st;
    if (cfg.contains("resume")) {
        st = parse_contour_state(load_json(cfg["resume"].get<std::string>()));
    } else if (cfg.contains("system")) {
        const PatchSystem sys = parse_patch_system(load_json(cfg["system"].get<std::string>()));
        st = contour_from_system(sys, cfg.value("nodes", 64));
        st.gamma = cfg.value("gamma", 0.0);
    } else {
        throw ValidationError("evolve: provide 'system' or 'resume'");
    }

    // CFL pre-check is a validation concern, before any stepping
    {
        // the nodes only move with the filtered normal velocity, so the guard
        // must measure that, as contour_step does
        auto vel = contour_velocities(st);
        double vmax = 0.0;
        for (size_t p = 0; p < vel.size(); ++p) {
            vel[p] = detail::normal_only(st.patches[p].nodes, vel[p]);
            detail::damp_high_modes(vel[p]);
            vmax = std::max(vmax, vel[p].rowwise().norm().maxCoeff());
        }
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& pc : st.patches) {
            const int n = static_cast<int>(pc.nodes.rows());
            for (int j = 0; j < n; ++j)
                mn = std::min(mn, (pc.nodes.row(j) - pc.nodes.row((j + 1) % n)).norm());
        }
        if (opts.dt * vmax > opts.cfl * mn)
            throw ValidationError("dt fails the CFL guard for this state");
        for (const auto& pc : st.patches) {
            const int n = static_cast<int>(pc.nodes.rows());
            if (!detail::boundary_wave_stable(pc.omega, n, opts.dt))
                throw ValidationError("dt exceeds the boundary-wave stability limit");
        }
    }

    const long checkpoint_every = cfg.value("checkpoint_every", 0l);
    const std::string checkpoint_out = cfg.value("checkpoint_out", std::string());
    ContourDiagnostics diag;
    record_diagnostics(st, diag);
    const long nsteps = static_cast<long>(std::llround(T / opts.dt));
    try {
        for (long k = 0; k < nsteps; ++k) {
            contour_step(st, opts);
            if ((k + 1) % sample_every == 0 || k + 1 == nsteps) record_diagnostics(st, diag);
            if (checkpoint_every > 0 && !checkpoint_out.empty() &&
                st.step_count % checkpoint_every == 0)
                write_file(checkpoint_out, dump17(contour_state_json(st)));
        }
    } catch (const std::runtime_error& e) {
        json fail;
        fail["failed"] = true;
        fail["error"] = e.what();
        fail["state"] = contour_state_json(st);
        write_file(out_path(cfg, "evolve.tsv") + ".fail.json", dump17(fail));
        throw NumericalError(e.what());
    }
    finalize_diagnostics(diag);

    Table tab;
    tab.comments.push_back(std::string("spherevortex ") + VERSION + " evolve");
    tab.comments.push_back("config_hash " + std::to_string(fnv1a(cfg.dump())));
    tab.header = {"time"};
    const int P = static_cast<int>(st.patches.size());
    for (int p = 0; p < P; ++p) {
        const std::string s = std::to_string(p);
        tab.header.push_back("area_" + s);
        tab.header.push_back("circulation_" + s);
        tab.header.push_back("colat_" + s);
        tab.header.push_back("lon_" + s);
    }
    for (size_t k = 0; k < diag.times.size(); ++k) {
        std::vector<std::string> row{fmt17(diag.times[k])};
        for (int p = 0; p < P; ++p) {
            row.push_back(fmt17(diag.areas[p][k]));
            row.push_back(fmt17(diag.circulations[p][k]));
            row.push_back(fmt17(diag.colats[p][k]));
            row.push_back(fmt17(diag.lons[p][k]));
        }
        tab.rows.push_back(row);
    }
    write_file(out_path(cfg, "evolve.tsv"), tab.render());

    json rec;
    rec["inputs"] = cfg;
    rec["lon_drift_rate"] = diag.lon_drift_rate;
    rec["area_drift_max"] = diag.area_drift_max;
    rec["colat_range_max"] = diag.colat_range_max;
    rec["final_time"] = st.time;
    rec["steps"] = st.step_count;
    rec["provenance"] = provenance(cfg);
    write_file(cfg.value("drift_out", out_path(cfg, "evolve.tsv") + ".drift.json"), dump17(rec));
    return 0;
}

inline int cmd_verify(const json& cfg) {
    reject_unknown_keys(cfg, {"system", "eps", "out", "points"}, "verify config");
    // default scenario: one circular patch at (pi/3, 0.7)
    ContourState st;
    double s;
    if (cfg.contains("system")) {
        const PatchSystem sys = parse_patch_system(load_json(cfg["system"].get<std::string>()));
        st = contour_from_system(sys, 64);
        s = sys.patches[0].core_radius;
    } else {
        const double eps = cfg.value("eps", 0.02);
        const double kappa = 1.0;
        s = solve_core_radius(kappa, eps);
        PatchSystem sys;
        PatchSpec ps;
        ps.center = {PI / 3.0, 0.7};
        ps.kappa = kappa;
        ps.sign = 1.0;
        ps.eps = eps;
        ps.core_radius = s;
        ps.flux = 0.0;
        sys.patches.push_back(ps);
        sys.boundaries.push_back(BoundaryCurve(16));
        st = contour_from_system(sys, 64);
    }
    const int npts = cfg.value("points", 50);
    const SpherePoint c0 = from_cartesian(Vec3(st.patches[0].nodes.colwise().mean()).normalized());
    const double circ = st.patches[0].omega * spherical_polygon_area(st.patches[0].nodes);

    Table tab;
    tab.comments.push_back(std::string("spherevortex ") + VERSION + " verify");
    tab.comments.push_back("config_hash " + std::to_string(fnv1a(cfg.dump())));
    tab.header = {"check", "max_error", "tolerance", "pass"};

    // far field vs equivalent point vortex at distance 10 s
    double far_err = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double ang = 2.0 * PI * k / 8;
        const SpherePoint z{c0.theta + 10.0 * s * std::cos(ang),
                            c0.phi + 10.0 * s * std::sin(ang) / std::sin(c0.theta)};
        const TangentVelocity va = induced_velocity(st, z);
        const double vth = circ * green_G_dphi(z, c0) / std::sin(z.theta);
        const double vph = -circ * green_G_dtheta(z, c0) - st.gamma * std::sin(z.theta);
        const double mag = std::hypot(vth, vph);
        far_err = std::max(far_err,
                           std::hypot(va.v_theta - vth, va.v_phi - vph) / std::max(mag, 1e-30));
    }
    tab.rows.push_back({"far_field_point_vortex", fmt17(far_err), fmt17(1e-3),
                        far_err < 1e-3 ? "1" : "0"});

    // boundary fast path vs area reference at offset points
    double agree_err = 0.0;
    for (int k = 0; k < npts; ++k) {
        const double ang = 2.0 * PI * k / npts;
        const double d = (3.0 + (k % 7)) * s;
        const SpherePoint z{c0.theta + d * std::cos(ang),
                            c0.phi + d * std::sin(ang) / std::sin(c0.theta)};
        const TangentVelocity va = induced_velocity(st, z, 48);
        const TangentVelocity vb = induced_velocity_fast(st, z);
        agree_err = std::max(agree_err,
                             std::hypot(va.v_theta - vb.v_theta, va.v_phi - vb.v_phi));
    }
    tab.rows.push_back({"boundary_vs_area", fmt17(agree_err), fmt17(1e-6),
                        agree_err < 1e-6 ? "1" : "0"});

    write_file(out_path(cfg, "verify.tsv"), tab.render());
    if (far_err >= 1e-3 || agree_err >= 1e-6)
        throw NumericalError("cross-oracle verification failed");
    return 0;
}

}  // namespace spherevortex

#endif
