#pragma once

// Orchestration behind the command line: run, verify, sweep and affine.
// Exit codes: 0 all checks pass, 1 bad input, 2 verification failure,
// 3 fatal solver error, 4 I/O failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rcwave/affine.hpp"
#include "rcwave/config.hpp"
#include "rcwave/io.hpp"
#include "rcwave/solver.hpp"
#include "rcwave/verify.hpp"

namespace rcwave {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int bad_input = 1;
inline constexpr int verification_failed = 2;
inline constexpr int fatal = 3;
inline constexpr int io = 4;
} // namespace exit_code

struct RunOutcome {
    int code = exit_code::ok;
    RunRecord record;
    VerificationReport report;
    std::optional<double> riccati_divergence; // compressive runs
};

namespace detail {

inline std::vector<std::pair<CharacteristicTrace, RiccatiHistory>> standard_traces(const Scenario& sc,
                                                                                 const RunRecord& rec,
                                                                                 std::optional<double>& divergence) {
    std::vector<std::pair<CharacteristicTrace, RiccatiHistory>> out;
    if (rec.snapshots.size() < 2)
        return out;
    const auto& c0 = rec.snapshots.front().chars;
    const std::size_t buf = 6;
    if (c0.size() <= 2 * buf)
        return out;
    std::size_t amax = buf, bmax = buf, bmin = buf;
    for (std::size_t i = buf; i + buf < c0.size(); ++i) {
        if (!c0.defined[i])
            continue;
        if (c0.alpha[i] > c0.alpha[amax])
            amax = i;
        if (c0.beta[i] > c0.beta[bmax])
            bmax = i;
        if (c0.beta[i] < c0.beta[bmin])
            bmin = i;
    }
    auto add = [&](int family, std::size_t i) {
        try {
            auto tr = trace_characteristic(family, c0.r[i], 0.0, rec);
            auto h = integrate_riccati_along(tr, rec, sc.gas);
            out.emplace_back(std::move(tr), std::move(h));
        } catch (const std::exception&) {
        }
    };
    if (sc.rarefactive) {
        add(2, amax);
        add(1, bmax);
    } else {
        add(1, bmin);
        if (!out.empty()) {
            const double cap = rec.final_time + std::max(rec.final_time, 1.0);
            divergence = riccati_divergence_time(out.back().first, out.back().second, sc.gas, cap);
        }
    }
    return out;
}

inline std::string manifest_text(const ParsedConfig& pc, const RunRecord& rec, const VerificationReport& rep,
                                 const std::optional<double>& divergence, double wall) {
    const auto& sc = pc.scenario;
    std::string out = "[run]\n";
    out += fmt::format("scenario_hash = {:016x}\n", pc.hash);
    out += fmt::format("preset = {}\n", sc.preset);
    out += fmt::format("termination = {}\n", to_string(rec.termination));
    if (rec.termination == Termination::blowup) {
        out += fmt::format("blowup_time = {:.17g}\n", *rec.blowup_time);
        out += fmt::format("blowup_trigger = {}\n", rec.blowup_trigger);
    }
    if (rec.termination == Termination::fatal)
        out += fmt::format("fatal_message = {}\n", rec.fatal_message);
    out += fmt::format("final_time = {:.17g}\n", rec.final_time);
    out += fmt::format("steps = {}\n", rec.steps);
    out += fmt::format("dr = {:.17g}\n", rec.dr);
    out += fmt::format("gradient_threshold = {:.17g}\n", rec.gradient_threshold);
    out += fmt::format("assumptions_waived = {}\n", pc.waived ? "true" : "false");
    out += fmt::format("assumptions_failed = {}\n", pc.assumptions.failed());
    out += fmt::format("wall_clock_seconds = {:.6f}\n", wall);
    out += "\n" + ledger_text(rep.ledger);
    if (pc.N_threshold)
        out += fmt::format("N_threshold = {:.17g}\n", *pc.N_threshold);
    if (sc.seed)
        out += fmt::format("seed = {:.17g}\n", *sc.seed);
    if (rep.t_star)
        out += fmt::format("t_star = {:.17g}\n", *rep.t_star);
    if (divergence)
        out += fmt::format("riccati_divergence_time = {:.17g}\n", *divergence);
    out += fmt::format("eps_grid = {:.17g}\n", rep.eps);
    out += "\n[verification]\n";
    out += fmt::format("status = {}\n", rep.pass() ? "pass" : "fail");
    out += fmt::format("passed = {}\n", rep.passed());
    out += fmt::format("applicable = {}\n", rep.applicable());
    for (const auto& c : rep.checks) {
        out += fmt::format("{}_status = {}\n", c.name, !c.applicable ? "skipped" : (c.pass ? "pass" : "fail"));
        out += fmt::format("{}_worst_margin = {:.17g}\n", c.name, c.worst_margin);
    }
    out += "\n[snapshots]\n";
    out += fmt::format("count = {}\n", rec.snapshots.size());
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
        out += fmt::format("t_{:04d} = {:.17g}\n", k, rec.snapshots[k].field.t);
        out += fmt::format("edge_{:04d} = {:.17g}\n", k, rec.snapshots[k].left_edge);
    }
    return out;
}

} // namespace detail

/// Runs a parsed scenario, writes all artifacts into `dir` (manifest last)
/// and returns the exit code with the in-memory record.
inline RunOutcome run_scenario(const ParsedConfig& pc, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(dir / "snapshots");
    write_atomic(dir / "config.ini", pc.echo);
    RunOutcome o;
    o.record = run(pc.scenario, pc.solver);
    o.report = verify_run(pc.scenario, o.record, pc.verify);
    const auto traces = detail::standard_traces(pc.scenario, o.record, o.riccati_divergence);
    for (std::size_t k = 0; k < o.record.snapshots.size(); ++k)
        write_atomic(dir / "snapshots" / snapshot_name(k), snapshot_csv(o.record.snapshots[k]));
    std::ostringstream rep;
    o.report.write(rep);
    write_atomic(dir / "verification.txt", rep.str());
    write_atomic(dir / "checks.csv", checks_csv(o.report));
    write_atomic(dir / "traces.csv", traces_csv(traces));
    if (o.record.termination == Termination::fatal)
        o.code = exit_code::fatal;
    else if (!o.report.pass())
        o.code = exit_code::verification_failed;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_atomic(dir / "manifest.ini", detail::manifest_text(pc, o.record, o.report, o.riccati_divergence, wall));
    return o;
}

/// Re-runs the assertion suite on the snapshots stored in a run directory.
/// Results go to verification_recheck.txt; the stored files are untouched.
inline int verify_directory(const fs::path& dir, VerificationReport* out = nullptr) {
    const auto man = read_manifest(dir);
    const bool waived = man.get<std::string>("run.assumptions_waived", "false") == "true";
    const auto pc = parse_config_text(read_file(dir / "config.ini"), waived);
    RunRecord rec;
    const auto term = man.get<std::string>("run.termination", "");
    if (term == to_string(Termination::blowup)) {
        rec.termination = Termination::blowup;
        rec.blowup_time = man.get<double>("run.blowup_time");
    } else if (term == to_string(Termination::fatal)) {
        rec.termination = Termination::fatal;
        rec.fatal_message = man.get<std::string>("run.fatal_message", "");
    } else if (term != to_string(Termination::horizon)) {
        throw IoError("manifest: unknown termination '" + term + "'");
    }
    rec.final_time = man.get<double>("run.final_time");
    rec.dr = man.get<double>("run.dr");
    const auto n = man.get<std::size_t>("snapshots.count");
    for (std::size_t k = 0; k < n; ++k) {
        const double t = man.get<double>(fmt::format("snapshots.t_{:04d}", k));
        const double e = man.get<double>(fmt::format("snapshots.edge_{:04d}", k));
        rec.snapshots.push_back(read_snapshot_csv(dir / "snapshots" / snapshot_name(k), t, e, pc.scenario.gas));
    }
    const auto rep = verify_run(pc.scenario, rec, pc.verify);
    std::ostringstream os;
    rep.write(os);
    write_atomic(dir / "verification_recheck.txt", os.str());
    write_atomic(dir / "checks_recheck.csv", checks_csv(rep));
    if (out)
        *out = rep;
    if (rec.termination == Termination::fatal)
        return exit_code::fatal;
    return rep.pass() ? exit_code::ok : exit_code::verification_failed;
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepAxis {
    std::string key; // section.key
    std::vector<std::string> values;
};

inline std::vector<SweepAxis> parse_grid_text(const std::string& text) {
    boost::property_tree::ptree t;
    try {
        std::istringstream is(text);
        boost::property_tree::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("<grid>", fmt::format("line {}: {}", e.line(), e.message()));
    }
    std::vector<SweepAxis> axes;
    for (const auto& [sec, body] : t) {
        if (sec != "grid")
            throw ConfigError(sec, "grid files hold a single [grid] section");
        for (const auto& [k, v] : body) {
            if (k.find('.') == std::string::npos)
                throw ConfigError("grid." + k, "expected section.key");
            SweepAxis ax{k, {}};
            std::stringstream ss(v.data());
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto a = item.find_first_not_of(" \t");
                const auto b = item.find_last_not_of(" \t");
                if (a != std::string::npos)
                    ax.values.push_back(item.substr(a, b - a + 1));
            }
            axes.push_back(std::move(ax));
        }
    }
    return axes;
}

struct SweepRow {
    std::size_t cell = 0;
    int code = exit_code::ok;
    std::string message;
    double gamma = 0, b = 0, C0 = 0;
    int m = 0;
    std::optional<double> seed, blowup, t_star, N;
    std::optional<bool> floors_ok, signs_ok;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? g17(*v) : std::string(); };
    auto optb = [](const std::optional<bool>& v) { return v ? std::string(*v ? "true" : "false") : std::string(); };
    std::string out =
        "cell,gamma,m,b,C0,seed,observed_blowup_time,t_star,N_threshold,floors_ok,signs_ok,exit_code\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.cell, g17(r.gamma), r.m, g17(r.b), g17(r.C0),
                           opt(r.seed), opt(r.blowup), opt(r.t_star), opt(r.N), optb(r.floors_ok), optb(r.signs_ok),
                           r.code);
    return out;
}

inline SweepRow sweep_cell(const std::string& text, std::size_t idx, const fs::path& dir, bool waive, int refine) {
    SweepRow row;
    row.cell = idx;
    try {
        const auto pc = parse_config_text(text, waive, refine);
        row.gamma = pc.scenario.gas.gamma;
        row.m = pc.scenario.gas.m;
        row.b = pc.scenario.b;
        row.C0 = pc.scenario.C0;
        row.seed = pc.scenario.seed;
        row.N = pc.N_threshold;
        const auto o = run_scenario(pc, dir);
        row.code = o.code;
        row.blowup = o.record.blowup_time;
        row.t_star = o.report.t_star;
        auto ok = [&](const char* n) -> std::optional<bool> {
            const auto* c = o.report.find(n);
            if (!c || !c->applicable)
                return std::nullopt;
            return c->pass;
        };
        const auto fr = ok("density_floor_rarefaction"), fg = ok("density_floor_general");
        if (fr || fg)
            row.floors_ok = fr.value_or(true) && fg.value_or(true);
        const auto smin = ok("character_min"), smax = ok("character_max");
        if (smin || smax)
            row.signs_ok = smin.value_or(true) && smax.value_or(true);
    } catch (const IoError& e) {
        row.code = exit_code::io;
        row.message = e.what();
    } catch (const std::exception& e) {
        row.code = exit_code::bad_input;
        row.message = e.what();
    }
    return row;
}

/// Cartesian product over the grid axes applied to the base config; each cell
/// runs into dir/cell_NNNN. Returns the largest cell exit code (0 when empty).
inline int sweep(const std::string& base_text, const std::string& grid_text, const fs::path& dir, int workers,
                 bool waive, int refine, std::vector<SweepRow>* rows_out = nullptr) {
    const auto axes = parse_grid_text(grid_text);
    boost::property_tree::ptree base;
    try {
        std::istringstream is(base_text);
        boost::property_tree::read_ini(is, base);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("<file>", fmt::format("line {}: {}", e.line(), e.message()));
    }
    std::vector<std::string> cells;
    bool empty = axes.empty();
    for (const auto& a : axes)
        empty = empty || a.values.empty();
    if (!empty) {
        std::vector<std::size_t> idx(axes.size(), 0);
        while (true) {
            auto t = base;
            for (std::size_t k = 0; k < axes.size(); ++k)
                t.put(axes[k].key, axes[k].values[idx[k]]);
            std::ostringstream os;
            boost::property_tree::write_ini(os, t);
            cells.push_back(os.str());
            std::size_t k = axes.size();
            while (k > 0) {
                --k;
                if (++idx[k] < axes[k].values.size())
                    break;
                idx[k] = 0;
                if (k == 0) {
                    k = axes.size() + 1;
                    break;
                }
            }
            if (k == axes.size() + 1)
                break;
        }
    }
    ensure_dir(dir);
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
            rows[i] = sweep_cell(cells[i], i, dir / fmt::format("cell_{:04d}", i), waive, refine);
    };
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(cells.size(), 1))));
    std::vector<std::thread> pool;
    for (int w = 1; w < nw; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    write_atomic(dir / "sweep.csv", sweep_csv(rows));
    std::string errors;
    for (const auto& r : rows)
        if (!r.message.empty())
            errors += fmt::format("cell_{:04d}: {}\n", r.cell, r.message);
    if (!errors.empty())
        write_atomic(dir / "sweep_errors.txt", errors);
    if (rows_out)
        *rows_out = rows;
    int code = exit_code::ok;
    for (const auto& r : rows)
        code = std::max(code, r.code);
    return code;
}

// ---------------------------------------------------------------------------
// Affine trajectory and admissibility

/// Params file: [gas] gamma, K, m; [affine] rho_c, v_a, b, T, dt.
inline int affine_report(const std::string& text, const fs::path& dir, AdmissibilityReport* out = nullptr) {
    boost::property_tree::ptree t;
    try {
        std::istringstream is(text);
        boost::property_tree::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("<file>", fmt::format("line {}: {}", e.line(), e.message()));
    }
    auto num = [&](const std::string& k, std::optional<double> def = std::nullopt) {
        const auto v = t.get_optional<std::string>(k);
        if (!v) {
            if (!def)
                throw ConfigError(k, "missing");
            return *def;
        }
        try {
            std::size_t pos = 0;
            const double x = std::stod(*v, &pos);
            if (pos != v->size())
                throw std::invalid_argument(*v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(k, fmt::format("expected a number, got '{}'", *v));
        }
    };
    AffineParams p;
    p.gas.gamma = num("gas.gamma");
    p.gas.K = num("gas.K");
    p.gas.m = static_cast<int>(num("gas.m"));
    p.rho_c = num("affine.rho_c");
    p.v_a = num("affine.v_a");
    p.b = num("affine.b");
    const double T = num("affine.T", 10.0);
    const double dt = num("affine.dt", 0.01);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError("affine", e.what());
    }
    const AffineMotion motion(p, T);
    const auto adm = check_admissibility(p);
    ensure_dir(dir);
    std::ostringstream traj;
    motion.write_csv(traj, dt);
    write_atomic(dir / "trajectory.csv", traj.str());
    std::string rep = "[admissibility]\n";
    rep += fmt::format("status = {}\n", adm.pass() ? "pass" : "fail");
    rep += fmt::format("required_v_a = {:.17g}\n", adm.required_v_a);
    rep += fmt::format("near_degenerate = {}\n", adm.near_degenerate ? "true" : "false");
    std::string violated;
    for (const auto& v : adm.violated())
        violated += (violated.empty() ? "" : ", ") + v;
    rep += fmt::format("violated = {}\n", violated);
    for (const auto& c : adm.conditions) {
        rep += fmt::format("{}_status = {}\n", c.name, c.pass ? "pass" : "fail");
        rep += fmt::format("{}_margin = {:.17g}\n", c.name, c.margin);
    }
    rep += fmt::format("max_first_integral_drift = {:.17g}\n", motion.max_first_integral_drift());
    if (adm.pass()) {
        const auto trace = trace_boundary(motion, T);
        const auto bc = boundary_conclusions(motion, trace);
        rep += "\n[boundary]\n";
        rep += fmt::format("conclusions = {}\n", bc.hold() ? "hold" : "fail");
        rep += fmt::format("min_alpha = {:.17g}\n", bc.min_alpha);
        rep += fmt::format("min_z = {:.17g}\n", bc.min_z);
        rep += fmt::format("min_c1 = {:.17g}\n", bc.min_c1);
        rep += fmt::format("beta_corner = {:.17g}\n", bc.beta_corner);
    }
    write_atomic(dir / "admissibility.txt", rep);
    if (out)
        *out = adm;
    return adm.pass() ? exit_code::ok : exit_code::verification_failed;
}

} // namespace rcwave
