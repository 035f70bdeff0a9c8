// spherevortex: command-line driver. One verb per run; parameters come from a
// JSON config file (--config) and/or flags, flags winning. Exit codes:
// 0 success, 2 validation, 3 numerical failure, 4 I/O.

#include <iostream>

#include <CLI11.hpp>

#include <spherevortex/cli_io.hpp>

namespace sv = spherevortex;

int main(int argc, char** argv) {
    CLI::App app{"point-vortex desingularization and contour dynamics on the sphere"};
    app.require_subcommand(1);

    std::string config_path, out;
    sv::json overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out, "primary output path");
    };

    // street / desingularize street parameters
    int k = 0;
    double theta0 = 0.0, kappa = 0.0, gamma = 0.0, T = 0.0, dt = 0.0, eps_single = 0.0;
    double tol = 0.0;
    std::string variant, mode, system_path, resume_path, eps_csv, checkpoint_out, prefix;
    int M = 0, nodes = 0, sample_every = 0, points = 0;
    long checkpoint_every = 0;

    CLI::App* c_green = app.add_subcommand("green", "evaluate G / Gamma / H on pairs or a grid");
    add_common(c_green);

    CLI::App* c_street = app.add_subcommand("street", "vortex street positions and speed");
    add_common(c_street);
    c_street->add_option("--k", k, "vortices per hemisphere");
    c_street->add_option("--theta0", theta0, "street colatitude (radians)");
    c_street->add_option("--kappa", kappa, "vortex strength");
    c_street->add_option("--variant", variant, "type1 or type2");

    CLI::App* c_eq = app.add_subcommand("equilibrium", "find a Kirchhoff-Routh critical point");
    add_common(c_eq);
    c_eq->add_option("--tol", tol, "gradient tolerance");

    CLI::App* c_des = app.add_subcommand("desingularize", "steady patch solves over an eps sweep");
    add_common(c_des);
    c_des->add_option("--mode", mode, "karman or general");
    c_des->add_option("--eps", eps_csv, "comma-separated eps list");
    c_des->add_option("--M", M, "boundary modes");
    c_des->add_option("--k", k, "street: vortices per hemisphere");
    c_des->add_option("--theta0", theta0, "street colatitude (radians)");
    c_des->add_option("--kappa", kappa, "vortex strength");
    c_des->add_option("--variant", variant, "street variant");
    c_des->add_option("--gamma", gamma, "general mode frame speed");
    c_des->add_option("--system-out-prefix", prefix, "write solved systems to <prefix><eps>.json");

    CLI::App* c_ev = app.add_subcommand("evolve", "contour dynamics run with diagnostics");
    add_common(c_ev);
    c_ev->add_option("--system", system_path, "solved system JSON");
    c_ev->add_option("--resume", resume_path, "checkpoint JSON to resume from");
    c_ev->add_option("--T", T, "horizon");
    c_ev->add_option("--dt", dt, "time step");
    c_ev->add_option("--nodes", nodes, "nodes per patch");
    c_ev->add_option("--sample-every", sample_every, "diagnostic sampling stride");
    c_ev->add_option("--checkpoint-out", checkpoint_out, "checkpoint path");
    c_ev->add_option("--checkpoint-every", checkpoint_every, "checkpoint stride (steps)");

    CLI::App* c_vf = app.add_subcommand("verify", "cross-oracle velocity checks");
    add_common(c_vf);
    c_vf->add_option("--eps", eps_single, "patch scale for the default scenario");
    c_vf->add_option("--points", points, "offset test point count");

    CLI11_PARSE(app, argc, argv);

    try {
        sv::json cfg = sv::json::object();
        if (!config_path.empty()) cfg = sv::load_json(config_path);
        if (!out.empty()) cfg["out"] = out;

        CLI::App* sub = app.get_subcommands().front();
        const std::string verb = sub->get_name();
        auto set_if = [&](const char* name, const char* key, auto value) {
            if (sub->count(name)) cfg[key] = value;
        };

        int rc = 1;
        if (verb == "green") {
            rc = sv::cmd_green(cfg);
        } else if (verb == "street") {
            set_if("--k", "k", k);
            set_if("--theta0", "theta0", theta0);
            set_if("--kappa", "kappa", kappa);
            set_if("--variant", "variant", variant);
            rc = sv::cmd_street(cfg);
        } else if (verb == "equilibrium") {
            set_if("--tol", "tol", tol);
            rc = sv::cmd_equilibrium(cfg);
        } else if (verb == "desingularize") {
            set_if("--mode", "mode", mode);
            set_if("--M", "M", M);
            set_if("--gamma", "gamma", gamma);
            set_if("--system-out-prefix", "system_out_prefix", prefix);
            if (sub->count("--eps")) {
                std::vector<double> eps;
                std::stringstream ss(eps_csv);
                std::string tok;
                while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
                cfg["eps"] = eps;
            }
            if (sub->count("--k") || sub->count("--theta0") || sub->count("--kappa") ||
                sub->count("--variant")) {
                sv::json street = cfg.value("street", sv::json::object());
                if (sub->count("--k")) street["k"] = k;
                if (sub->count("--theta0")) street["theta0"] = theta0;
                if (sub->count("--kappa")) street["kappa"] = kappa;
                if (sub->count("--variant")) street["variant"] = variant;
                cfg["street"] = street;
            }
            rc = sv::cmd_desingularize(cfg);
        } else if (verb == "evolve") {
            set_if("--system", "system", system_path);
            set_if("--resume", "resume", resume_path);
            set_if("--T", "T", T);
            set_if("--dt", "dt", dt);
            set_if("--nodes", "nodes", nodes);
            set_if("--sample-every", "sample_every", sample_every);
            set_if("--checkpoint-out", "checkpoint_out", checkpoint_out);
            set_if("--checkpoint-every", "checkpoint_every", checkpoint_every);
            rc = sv::cmd_evolve(cfg);
        } else if (verb == "verify") {
            set_if("--eps", "eps", eps_single);
            set_if("--points", "points", points);
            rc = sv::cmd_verify(cfg);
        }
        return rc;
    } catch (const sv::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const sv::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const sv::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
