// Acceptance harness: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "rcwave/rcwave.hpp"

using namespace rcwave;

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

// 1. Affine window at t = 0.5 over three 2x refinements.
Outcome affine_exactness() {
    const auto t0 = Clock::now();
    const AffineParams ap{GasParams::make(2.0, 1.0, 2), 1.0, 1.0, 1.2};
    std::vector<double> err;
    for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
        const auto sc = affine_window_scenario(ap, 0.2, 1.0, n, 0.5);
        SolverConfig cfg;
        cfg.snapshot_dt = 0.5;
        const auto rec = run(sc, cfg);
        if (rec.termination != Termination::horizon)
            return {false, fmt::format("run at {} cells ended with '{}'", n, to_string(rec.termination))};
        err.push_back(oracle::affine_linf_error(rec, *sc.affine));
    }
    bool ok = true;
    std::string orders;
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double p = std::log2(err[i - 1] / err[i]);
        ok = ok && p >= 1.8;
        orders += fmt::format(" {:.3f}", p);
    }
    const double dt = seconds_since(t0);
    return {ok && dt < 120.0, fmt::format("orders{}; finest error {:.3g}; {:.1f} s", orders, err.back(), dt)};
}

// 2. First integral over [0, 50].
Outcome first_integral() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    int combos = 0;
    for (double v : {0.5, 1.0, 3.0})
        for (double g : {1.2, 1.4, 2.0, 2.5})
            for (int m : {1, 2}) {
                const AffineParams p{GasParams::make(g, 1.0, m), 1.0, v, 0.5};
                worst = std::max(worst, AffineMotion(p, 50.0).max_first_integral_drift());
                ++combos;
            }
    const double dt = seconds_since(t0);
    return {combos == 24 && worst <= 1e-10 && dt < 5.0,
            fmt::format("{} combinations, max drift {:.3g}, {:.2f} s", combos, worst, dt)};
}

// 3. Coefficient identities and signs.
Outcome coefficient_identities() {
    oracle::StateGen gen(424242);
    double worst = 0.0;
    bool signs = true;
    for (int i = 0; i < 10000; ++i) {
        const auto s = gen.next();
        const auto c = riccati_coeffs(s.r, s.h, s.u, s.gas);
        const double e1 = std::fabs(c.B1 - c.A1 - c.d1) / std::max({std::fabs(c.B1), std::fabs(c.A1), std::fabs(c.d1)});
        const double e2 = std::fabs(c.B2 - c.A2 - c.d2) / std::max({std::fabs(c.B2), std::fabs(c.A2), std::fabs(c.d2)});
        worst = std::max({worst, e1, e2});
        signs = signs && c.A1 >= 0.0 && c.A2 >= 0.0 && c.d1 >= 0.0 && c.d2 >= 0.0;
    }
    return {worst <= 1e-10 && signs, fmt::format("10000 states, max relative defect {:.3g}, signs {}", worst,
                                                 signs ? "ok" : "violated")};
}

// 4. Riccati integration along 10 characteristics of a rarefaction run.
double riccati_worst(std::size_t cells) {
    RarefactionSetup p;
    p.gas = GasParams::make(2.0, 1.0, 1);
    p.cells = cells;
    const auto sc = rarefaction_scenario(p);
    SolverConfig cfg;
    cfg.snapshot_dt = 0.025;
    const auto rec = run(sc, cfg);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int fam = k < 5 ? 1 : 2;
        const double r0 = k < 5 ? 2.5 + 0.25 * k : 1.5 + 0.25 * (k - 5);
        const auto h = integrate_riccati_along(trace_characteristic(fam, r0, 0.0, rec), rec, sc.gas);
        worst = std::max(worst, h.max_relative_deviation);
    }
    return worst;
}

Outcome riccati_cross_validation() {
    const double a = riccati_worst(800), b = riccati_worst(1600);
    return {a <= 0.05 && b < a, fmt::format("max relative deviation {:.4f} at 800 cells, {:.4f} at 1600", a, b)};
}

// Shared rarefaction matrix for 5, 6 and 7.
struct MatrixRun {
    double gamma;
    int m;
    std::size_t cells;
    Scenario sc;
    RunRecord rec;
    VerificationReport rep;
};

std::vector<MatrixRun>& matrix() {
    static std::vector<MatrixRun> runs = [] {
        std::vector<MatrixRun> out;
        for (double g : {1.4, 2.0, 2.5})
            for (int m : {1, 2})
                for (std::size_t n : {800u, 1600u}) {
                    RarefactionSetup p;
                    p.gas = GasParams::make(g, 1.0, m);
                    p.cells = n;
                    MatrixRun mr{g, m, n, rarefaction_scenario(p), {}, {}};
                    mr.rec = run(mr.sc, SolverConfig{});
                    mr.rep = verify_run(mr.sc, mr.rec);
                    out.push_back(std::move(mr));
                }
        return out;
    }();
    return runs;
}

Outcome invariant_domain() {
    bool ok = true;
    std::string bad;
    double worst_min = 1e300, worst_max = 1e300;
    for (const auto& r : matrix()) {
        const auto* cmin = r.rep.find("character_min");
        const auto* cmax = r.rep.find("character_max");
        const bool horizon = r.rec.termination == Termination::horizon &&
                             std::fabs(r.rec.final_time - 2.0 * r.sc.b / r.sc.C0) < 1e-12;
        if (!cmin->pass || !cmax->pass || !horizon) {
            ok = false;
            bad += fmt::format(" (gamma {} m {} n {})", r.gamma, r.m, r.cells);
        }
        worst_min = std::min(worst_min, cmin->worst_margin / r.rep.eps);
        worst_max = std::min(worst_max, cmax->worst_margin);
    }
    for (std::size_t i = 0; i + 1 < matrix().size(); i += 2) {
        const double ratio = matrix()[i + 1].rep.eps / matrix()[i].rep.eps;
        if (std::fabs(ratio - 0.5) > 0.1)
            ok = false;
    }
    return {ok, fmt::format("6 parameter pairs at 800 and 1600 cells; min(alpha,beta) + eps >= {:.3f} eps; "
                            "M0 + 1e-6 - max >= {:.3g}; eps ratio 0.5{}",
                            worst_min, worst_max, bad.empty() ? "" : "; failing" + bad)};
}

Outcome supersonic_region() {
    std::size_t violations = 0, snaps = 0;
    for (const auto& r : matrix())
        for (const auto& s : r.rec.snapshots) {
            ++snaps;
            violations += check_supersonic_region(s.field, r.sc.gas, r.sc.C0).size();
        }
    return {violations == 0, fmt::format("{} violations over {} snapshots (all cells)", violations, snaps)};
}

// Compressive seeds for 7 and 8.
struct SeedRun {
    double factor;
    ParsedConfig pc;
    RunRecord rec;
    VerificationReport rep;
};

std::vector<SeedRun>& seeds() {
    static std::vector<SeedRun> runs = [] {
        std::vector<SeedRun> out;
        for (double f : {1.0, 2.0, 4.0}) {
            const auto pc = parse_config_text(
                fmt::format("[gas]\ngamma = 2\nK = 1\nm = 1\n[domain]\nb = 1\n[initial]\npreset = compressive\n"
                            "seed_factor = {}\n",
                            f),
                true);
            SeedRun s{f, pc, run(pc.scenario, pc.solver), {}};
            s.rep = verify_run(pc.scenario, s.rec, pc.verify);
            out.push_back(std::move(s));
        }
        return out;
    }();
    return runs;
}

Outcome density_floors() {
    bool ok = true;
    double wr = 1e300, wg = 1e300;
    for (const auto& r : matrix()) {
        const auto* c = r.rep.find("density_floor_rarefaction");
        ok = ok && c->applicable && c->pass;
        wr = std::min(wr, c->worst_margin);
    }
    for (const auto& s : seeds()) {
        const auto* c = s.rep.find("density_floor_general");
        ok = ok && c->applicable && c->pass;
        wg = std::min(wg, c->worst_margin);
    }
    return {ok, fmt::format("rarefaction floor margin >= {:.3g}; general floor margin >= {:.3g} pre-blowup", wr, wg)};
}

Outcome blowup_bound() {
    bool ok = true;
    std::string d;
    double prev = 1e300;
    for (const auto& s : seeds()) {
        const auto& tb = s.rec.blowup_time;
        const double ts = s.rep.t_star.value_or(-1.0);
        if (!tb || !(*tb > 0.0) || !(*tb < prev) || !(*tb <= ts))
            ok = false;
        d += fmt::format(" seed {:.4g}: blowup {:.4g} <= t* {:.4g};", *s.pc.scenario.seed, tb.value_or(-1.0), ts);
        prev = tb.value_or(-1.0);
    }
    const auto& L = seeds().front().rep.ledger;
    double tprev = 1e300;
    for (int k = 1; k <= 8; ++k) {
        const double t = blowup_time_bound(-std::pow(10.0, k), L);
        ok = ok && t > 0.0 && t < tprev;
        tprev = t;
    }
    ok = ok && tprev < 1e-3 * L.b / L.hyp.C0;
    return {ok, fmt::format("N = {:.4g};{} t*(-1e8) = {:.3g}", *seeds().front().pc.N_threshold, d, tprev)};
}

Outcome steady_oracle() {
    double worst = 0.0;
    for (double gamma : {1.4, 2.0, 2.5})
        for (int m : {1, 2}) {
            const auto g = GasParams::make(gamma, 1.0, m);
            const oracle::SteadyBernoulli s(g, 1.0, 1.0, 1.5 * g.riemann_factor() * sound_speed(1.0, g));
            for (double r = 1.0; r <= 4.0; r += 0.25) {
                const auto c = characters_from_gradients(r, s.h(r), s.u(r), s.h_r(r), s.u_r(r), g);
                worst = std::max({worst, std::fabs(c.alpha), std::fabs(c.beta)});
            }
        }
    return {worst <= 1e-8, fmt::format("max |alpha|, |beta| = {:.3g}", worst)};
}

Outcome admissibility() {
    const AffineParams good{GasParams::make(2.0, 1.0, 1), 1.0, 3.0, 1.0};
    AffineParams bad = good;
    bad.v_a = 2.0;
    const auto rg = check_admissibility(good);
    const auto rb = check_admissibility(bad);
    const auto v = rb.violated();
    const bool names = v.size() == 2 && v[0] == condition::beta_at_corner && v[1] == condition::z_at_corner;
    const AffineMotion motion(good, 10.0);
    const auto bc = boundary_conclusions(motion, trace_boundary(motion, 10.0));
    return {rg.pass() && !rb.pass() && names && bc.hold() && bc.min_alpha > 0.0 && bc.min_z >= 0.0 && bc.min_c1 > 0.0,
            fmt::format("v_a = 3 {}; v_a = 2 violates [{}]; on B_b(t), t <= 10: min alpha {:.4g}, min z {:.4g}, "
                        "min c1 {:.4g}",
                        rg.pass() ? "admissible" : "rejected", fmt::format("{}", fmt::join(v, ", ")), bc.min_alpha,
                        bc.min_z, bc.min_c1)};
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "rcwave_acceptance_determinism";
    fs::remove_all(base);
    std::size_t compared = 0;
    for (const char* cfg : {"rarefaction.ini", "affine_composite.ini"}) {
        for (const char* d : {"a", "b"}) {
            const auto cmd = fmt::format("\"{}\" run \"{}/{}\" --out \"{}\" > /dev/null", RCWAVE_CLI, RCWAVE_EXAMPLES,
                                         cfg, (base / cfg / d).string());
            if (std::system(cmd.c_str()) != 0)
                return {false, "CLI run failed: " + cmd};
        }
        for (const auto& e : fs::recursive_directory_iterator(base / cfg / "a")) {
            if (!e.is_regular_file() || e.path().filename() == "manifest.ini")
                continue;
            const auto rel = fs::relative(e.path(), base / cfg / "a");
            if (read_file(e.path()) != read_file(base / cfg / "b" / rel))
                return {false, fmt::format("{} differs between runs", rel.string())};
            ++compared;
        }
    }
    return {compared > 0, fmt::format("{} data files byte-identical across repeated runs", compared)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"affine exactness", affine_exactness},
        {"affine first integral", first_integral},
        {"coefficient identities", coefficient_identities},
        {"Riccati cross-validation", riccati_cross_validation},
        {"invariant domain", invariant_domain},
        {"supersonic region", supersonic_region},
        {"density floors", density_floors},
        {"blowup bound", blowup_bound},
        {"steady oracle", steady_oracle},
        {"admissibility logic", admissibility},
        {"end-to-end determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o{false, ""};
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        fmt::print("{} {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
