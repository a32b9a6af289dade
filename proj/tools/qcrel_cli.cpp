// qcrel command-line interface.
//
// Subcommands:
//   run        full pipeline: filtering, summaries, calibration, reports
//   calibrate  calibration only; every channel must carry fixed CoV data
//   oc         operating-characteristic CSVs for one channel's plan
//   wall       print the wall model's design-point analysis
//
// Exit codes: 0 success, 2 scenario/validation error, 1 runtime error.
// The output directory resolves as --out, else $QCREL_OUT, else the
// scenario's report.out_dir.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "qcrel/pipeline.hpp"
#include "qcrel/wall.hpp"

namespace {

std::string resolve_out(const std::string& cli_out,
                        const qcrel::pipeline::Scenario& sc) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("QCREL_OUT"); env && *env) return env;
    return sc.report.out_dir;
}

void print_wall(const qcrel::pipeline::Scenario& sc) {
    if (!sc.wall)
        throw qcrel::pipeline::ScenarioError(
            "scenario has no [wall] section");
    const auto& w = *sc.wall;
    const double fk = qcrel::wall::characteristic_strength(w.spec);
    const double lambda = qcrel::wall::slenderness(w.geom, w.spec);
    const double re = w.geom.r_e();
    const double a = 1.0 - 2.0 * re;
    const double phi = qcrel::wall::phi_reduction(lambda, re);
    const double r = qcrel::wall::resistance_from_phi(fk, phi, w.geom.t);
    bool branch2 = false;
    const double n_re =
        qcrel::wall::homogeneity_eccentricity(lambda, re, &branch2);
    auto spec = w.spec;
    const double n_fb = qcrel::wall::homogeneity_numeric(
        [&](double x) {
            auto m = spec;
            m.f_b = x;
            return qcrel::wall::characteristic_strength(m);
        },
        spec.f_b, 1e-5);
    const double n_fm = qcrel::wall::homogeneity_numeric(
        [&](double x) {
            auto m = spec;
            m.f_m = x;
            return qcrel::wall::characteristic_strength(m);
        },
        spec.f_m, 1e-5);

    std::cout << "wall design point\n"
              << "  f_k      = " << fk << " MPa\n"
              << "  r_h      = " << w.geom.r_h() << "\n"
              << "  lambda   = " << lambda << "\n"
              << "  r_e      = " << re << "\n"
              << "  A        = " << a << "\n"
              << "  Phi      = " << phi
              << (branch2 ? "  (slender branch)\n" : "\n")
              << "  R        = " << r << " kN/m\n"
              << "homogeneity degrees\n"
              << "  n_f_b    = " << n_fb << "\n"
              << "  n_f_m    = " << n_fm << "\n"
              << "  n_r_e    = " << n_re << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conformity assessment and partial safety factor toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--scenario", scenario_path, "scenario file")
        ->required(false);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override the scenario seed");

    auto* cmd_run = app.add_subcommand("run", "run the full pipeline");
    auto* cmd_cal =
        app.add_subcommand("calibrate", "fixed-CoV calibration only");
    auto* cmd_oc = app.add_subcommand("oc", "emit OC curve CSVs");
    std::string oc_channel;
    cmd_oc->add_option("--channel", oc_channel, "channel name")->required();
    auto* cmd_wall = app.add_subcommand("wall", "wall design-point analysis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scenario_path.empty())
            throw qcrel::pipeline::ScenarioError("--scenario is required");
        const auto sc = qcrel::pipeline::load_scenario(scenario_path);

        if (cmd_run->parsed()) {
            const auto rep =
                qcrel::pipeline::run(sc, resolve_out(out_dir, sc), seed);
            std::cout << rep.text(sc.report);
        } else if (cmd_cal->parsed()) {
            for (const auto& ch : sc.channels)
                if (ch.mode != qcrel::pipeline::ChannelMode::fixed)
                    throw qcrel::pipeline::ScenarioError(
                        "calibrate needs fixed-CoV channels; channel '" +
                        ch.name + "' is in mcmc mode");
            const auto rep =
                qcrel::pipeline::run(sc, resolve_out(out_dir, sc), seed);
            std::cout << rep.text(sc.report);
        } else if (cmd_oc->parsed()) {
            qcrel::pipeline::emit_oc(sc, oc_channel, resolve_out(out_dir, sc),
                                     seed);
        } else if (cmd_wall->parsed()) {
            print_wall(sc);
        }
    } catch (const qcrel::pipeline::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
