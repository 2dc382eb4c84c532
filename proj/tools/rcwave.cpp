// rcwave command line: run, sweep, verify, affine.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rcwave/rcwave.hpp"

namespace {

int report_error(const std::exception& e) {
    if (const auto* ce = dynamic_cast<const rcwave::ConfigError*>(&e)) {
        fmt::print(stderr, "config error: {}\n", ce->what());
        return rcwave::exit_code::bad_input;
    }
    if (dynamic_cast<const rcwave::IoError*>(&e)) {
        fmt::print(stderr, "I/O error: {}\n", e.what());
        return rcwave::exit_code::io;
    }
    fmt::print(stderr, "error: {}\n", e.what());
    return rcwave::exit_code::bad_input;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial isentropic Euler runs with character-based verification"};
    app.require_subcommand(1);

    std::string out = "rcwave_out";
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool waive = false;
    int refine = 1;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out, "output directory");
        sub->add_flag("--waive-assumptions", waive, "run even if the data violate the hypotheses");
        sub->add_option("--refine", refine, "grid refinement multiplier")->check(CLI::PositiveNumber);
    };

    std::string config, grid, run_dir, params;
    auto* run = app.add_subcommand("run", "run one scenario and verify it");
    run->add_option("config", config, "scenario INI file")->required();
    common(run);

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid over a base scenario");
    sweep->add_option("config", config, "base scenario INI file")->required();
    sweep->add_option("--grid", grid, "grid INI file")->required();
    sweep->add_option("--workers", workers, "concurrent cells")->check(CLI::PositiveNumber);
    common(sweep);

    auto* verify = app.add_subcommand("verify", "re-run the assertions on a stored run directory");
    verify->add_option("run-dir", run_dir, "directory written by run")->required();

    auto* affine = app.add_subcommand("affine", "affine trajectory and admissibility report");
    affine->add_option("params", params, "affine parameter INI file")->required();
    affine->add_option("--out", out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto pc = rcwave::parse_config(config, waive, refine);
            if (pc.waived)
                fmt::print(stderr, "warning: assumptions waived ({} failed)\n", pc.assumptions.failed());
            const auto o = rcwave::run_scenario(pc, out);
            fmt::print("{}: {}", out, rcwave::to_string(o.record.termination));
            if (o.record.blowup_time)
                fmt::print(" at t = {:.6g}", *o.record.blowup_time);
            fmt::print("; verification {} ({}/{})\n", o.report.pass() ? "PASS" : "FAIL", o.report.passed(),
                       o.report.applicable());
            return o.code;
        }
        if (sweep->parsed()) {
            const int code = rcwave::sweep(rcwave::read_file(config), rcwave::read_file(grid), out, workers, waive,
                                           refine);
            fmt::print("{}: sweep finished, max exit code {}\n", out, code);
            return code;
        }
        if (verify->parsed()) {
            rcwave::VerificationReport rep;
            const int code = rcwave::verify_directory(run_dir, &rep);
            fmt::print("{}: verification {} ({}/{})\n", run_dir, rep.pass() ? "PASS" : "FAIL", rep.passed(),
                       rep.applicable());
            return code;
        }
        if (affine->parsed()) {
            rcwave::AdmissibilityReport adm;
            const int code = rcwave::affine_report(rcwave::read_file(params), out, &adm);
            std::string v;
            for (const auto& n : adm.violated())
                v += " " + n;
            fmt::print("{}: admissibility {}{}\n", out, adm.pass() ? "PASS" : "FAIL", v.empty() ? "" : ";" + v);
            return code;
        }
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return rcwave::exit_code::bad_input;
}
