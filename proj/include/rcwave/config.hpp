#pragma once

// INI configuration: sections gas, domain, initial, boundary, solver, verify.
// Parsing resolves every default, builds the scenario and runs the
// assumption checks.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rcwave/affine.hpp"
#include "rcwave/errors.hpp"
#include "rcwave/scenario.hpp"
#include "rcwave/solver.hpp"
#include "rcwave/verify.hpp"

namespace rcwave {

namespace pt = boost::property_tree;

struct AssumptionCheck {
    std::string name;
    bool pass = true;
    double margin = 0.0;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    std::string failed() const {
        std::string s;
        for (const auto& c : checks)
            if (!c.pass)
                s += (s.empty() ? "" : ", ") + c.name;
        return s;
    }
};

struct ParsedConfig {
    Scenario scenario;
    SolverConfig solver;
    VerifyOptions verify;
    AssumptionReport assumptions;
    bool waived = false;
    int refine = 1;
    std::optional<double> N_threshold; // compressive presets
    std::optional<double> t_star;
    std::string echo;                  // canonical resolved config
    std::uint64_t hash = 0;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

// Reads keys from the tree and records every resolved value, in a fixed
// section order, for the canonical echo.
class Reader {
public:
    explicit Reader(const pt::ptree& t) : t_(t) {}

    double num(const std::string& key, std::optional<double> def = std::nullopt) {
        const auto v = t_.get_optional<std::string>(key);
        double x;
        if (!v) {
            if (!def)
                throw ConfigError(key, "missing");
            x = *def;
        } else {
            x = parse_double(key, *v);
        }
        record(key, fmt::format("{:.17g}", x));
        return x;
    }
    int integer(const std::string& key, std::optional<int> def = std::nullopt) {
        const double x = num_silent(key, def ? std::optional<double>(*def) : std::nullopt);
        if (x != std::floor(x) || std::fabs(x) > 1e9)
            throw ConfigError(key, "expected an integer");
        record(key, fmt::format("{}", static_cast<long long>(x)));
        return static_cast<int>(x);
    }
    std::string str(const std::string& key, std::optional<std::string> def = std::nullopt) {
        const auto v = t_.get_optional<std::string>(key);
        if (!v && !def)
            throw ConfigError(key, "missing");
        std::string s = v ? trim(*v) : *def;
        record(key, s);
        return s;
    }
    bool flag(const std::string& key, bool def) {
        const auto v = t_.get_optional<std::string>(key);
        bool b = def;
        if (v) {
            const auto s = trim(*v);
            if (s == "true" || s == "1" || s == "yes")
                b = true;
            else if (s == "false" || s == "0" || s == "no")
                b = false;
            else
                throw ConfigError(key, "expected a boolean");
        }
        record(key, b ? "true" : "false");
        return b;
    }
    /// Overrides the echoed value of a key.
    void set(const std::string& key, const std::string& v) { record(key, v); }

    bool has(const std::string& key) const { return static_cast<bool>(t_.get_optional<std::string>(key)); }

    void reject_unknown(const std::map<std::string, std::vector<std::string>>& known) const {
        for (const auto& [sec, body] : t_) {
            auto it = known.find(sec);
            if (it == known.end())
                throw ConfigError(sec, "unknown section");
            for (const auto& [k, v] : body) {
                (void)v;
                if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
                    throw ConfigError(sec + "." + k, "unknown key");
            }
        }
    }

    std::string echo() const {
        std::string out;
        for (const char* sec : {"gas", "domain", "initial", "boundary", "solver", "verify"}) {
            const std::string s = sec;
            bool any = false;
            for (const auto& [k, v] : values_) {
                if (k.rfind(s + ".", 0) != 0)
                    continue;
                if (!any) {
                    out += (out.empty() ? "" : "\n") + fmt::format("[{}]\n", s);
                    any = true;
                }
                out += fmt::format("{} = {}\n", k.substr(s.size() + 1), v);
            }
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    }
    static double parse_double(const std::string& key, const std::string& raw) {
        const auto s = trim(raw);
        std::size_t pos = 0;
        double x;
        try {
            x = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError(key, fmt::format("expected a number, got '{}'", s));
        }
        if (pos != s.size() || !std::isfinite(x))
            throw ConfigError(key, fmt::format("expected a number, got '{}'", s));
        return x;
    }
    double num_silent(const std::string& key, std::optional<double> def) {
        const auto v = t_.get_optional<std::string>(key);
        if (!v) {
            if (!def)
                throw ConfigError(key, "missing");
            return *def;
        }
        return parse_double(key, *v);
    }
    void record(const std::string& key, const std::string& v) {
        for (auto& kv : values_)
            if (kv.first == key) {
                kv.second = v;
                return;
            }
        values_.emplace_back(key, v);
    }

    const pt::ptree& t_;
    std::vector<std::pair<std::string, std::string>> values_;
};

inline Bump read_bump(Reader& rd, const std::string& prefix, Bump def) {
    Bump b;
    b.amplitude = rd.num("initial." + prefix + "_amplitude", def.amplitude);
    b.center = rd.num("initial." + prefix + "_center", def.center);
    b.width = rd.num("initial." + prefix + "_width", def.width);
    if (!(b.width > 0.0))
        throw ConfigError("initial." + prefix + "_width", "must be positive");
    return b;
}

inline const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> k = {
        {"gas", {"gamma", "K", "m"}},
        {"domain", {"b", "R", "T", "cells"}},
        {"initial",
         {"preset", "u_b", "h_ratio", "alpha_amplitude", "alpha_center", "alpha_width", "beta_amplitude",
          "beta_center", "beta_width", "dip_center", "dip_width", "seed", "seed_factor", "rho_c", "v_a", "decay",
          "r_lo_fraction", "affine_b"}},
        {"boundary", {"left", "right"}},
        {"solver",
         {"cfl", "order", "source", "snapshot_dt", "blowup_factor", "blowup_gradient_max", "dt_collapse",
          "max_steps"}},
        {"verify", {"edge_buffer", "M_margin", "eps", "waive_assumptions"}},
    };
    return k;
}

inline void add_initial_checks(AssumptionReport& rep, const Scenario& sc) {
    const auto h = check_initial_hypotheses(sc);
    for (const auto& c : h.checks)
        rep.checks.push_back({"initial." + c.name, c.pass, c.worst_margin, fmt::format("at r = {:.6g}", c.at_r)});
}

// Assumption on the boundary data along B_b(t), plus admissibility and
// compatibility of the affine core.
inline void add_composite_checks(AssumptionReport& rep, const Scenario& sc) {
    const auto& motion = *sc.affine;
    const auto adm = check_admissibility(motion.params());
    for (const auto& c : adm.conditions)
        rep.checks.push_back({"admissibility." + c.name, c.pass, c.margin, ""});
    const auto comp = check_compatibility(motion, outer_data(sc), 1e-8, 1e-4, 1e-6, sc.horizon);
    for (const auto* c : {&comp.value_match, &comp.corner_derivative, &comp.boundary_ode})
        rep.checks.push_back({"compatibility." + c->name, c->pass, c->margin, ""});
    const double k = sc.gas.riemann_factor();
    double lower = std::numeric_limits<double>::infinity(), upper = lower;
    for (int i = 0; i <= 400; ++i) {
        const double t = sc.horizon * i / 400.0;
        const auto s = affine_state(sc.left_edge(t), t, motion);
        const double h = sound_speed(s.rho, sc.gas);
        lower = std::min(lower, h > 0.0 ? s.u - k * h : -1.0);
        upper = std::min(upper, sc.C0 - s.u);
    }
    rep.checks.push_back({"boundary.supersonic_lower", lower >= 0.0, lower, "along B_b(t)"});
    rep.checks.push_back({"boundary.velocity_ceiling", upper >= 0.0, upper, "along B_b(t)"});
}

} // namespace detail

/// Parses INI text. `waive` (from the command line) or verify.waive_assumptions
/// lets data that violate the assumptions through; they are flagged instead.
inline ParsedConfig parse_config_text(const std::string& text, bool waive = false, int refine = 1) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<file>", fmt::format("line {}: {}", e.line(), e.message()));
    }
    if (refine < 1)
        throw ConfigError("--refine", "must be >= 1");
    detail::Reader rd(tree);
    rd.reject_unknown(detail::known_keys());

    ParsedConfig pc;
    pc.refine = refine;
    GasParams gas;
    gas.gamma = rd.num("gas.gamma");
    gas.K = rd.num("gas.K");
    gas.m = rd.integer("gas.m");
    try {
        gas.validate();
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        const std::string key = msg.find("gamma") != std::string::npos ? "gas.gamma"
                                : msg.find("K") != std::string::npos   ? "gas.K"
                                                                       : "gas.m";
        throw ConfigError(key, msg);
    }

    const std::string preset = rd.str("initial.preset");
    const double b = rd.num("domain.b");
    if (!(b > 0.0))
        throw ConfigError("domain.b", "must be positive");
    Scenario sc;

    auto cells_for = [&](std::size_t def) {
        const int c = rd.integer("domain.cells", static_cast<int>(def));
        if (c < 8)
            throw ConfigError("domain.cells", "need at least 8 cells");
        const auto n = static_cast<std::size_t>(c) * static_cast<std::size_t>(refine);
        rd.set("domain.cells", fmt::format("{}", n));
        return n;
    };

    try {
        if (preset == "rarefaction" || preset == "compressive") {
            RarefactionSetup p = preset == "compressive" ? compressive_setup(gas) : RarefactionSetup{};
            p.gas = gas;
            p.b = b;
            p.r_hi = rd.num("domain.R", p.r_hi);
            p.cells = cells_for(p.cells);
            if (rd.has("domain.T"))
                p.horizon = rd.num("domain.T");
            p.u_b = rd.num("initial.u_b", p.u_b);
            p.h_ratio = rd.num("initial.h_ratio", p.h_ratio);
            if (!(p.h_ratio > 0.0 && p.h_ratio <= 1.0))
                throw ConfigError("initial.h_ratio", "must lie in (0, 1]");
            if (!(p.r_hi > b))
                throw ConfigError("domain.R", "must exceed b");
            p.alpha = detail::read_bump(rd, "alpha", p.alpha);
            p.beta = detail::read_bump(rd, "beta", p.beta);
            if (preset == "rarefaction") {
                sc = rarefaction_scenario(p);
                if (!rd.has("domain.T"))
                    rd.num("domain.T", sc.horizon);
            } else {
                p.beta_dip.center = rd.num("initial.dip_center", p.beta_dip.center);
                p.beta_dip.width = rd.num("initial.dip_width", p.beta_dip.width);
                if (!(p.beta_dip.width > 0.0))
                    throw ConfigError("initial.dip_width", "must be positive");
                RarefactionSetup base_p = p;
                base_p.beta_dip.amplitude = 0.0;
                const auto base = rarefaction_scenario(base_p);
                rd.num("domain.T", base.horizon);
                const auto ledger = compute_ledger(gas, b, data_hypotheses(base));
                pc.N_threshold = compression_threshold(b, base.horizon, ledger);
                double seed;
                if (rd.has("initial.seed")) {
                    seed = rd.num("initial.seed");
                    if (!(seed < 0.0))
                        throw ConfigError("initial.seed", "must be negative");
                } else {
                    const double f = rd.num("initial.seed_factor", 1.0);
                    if (!(f > 0.0))
                        throw ConfigError("initial.seed_factor", "must be positive");
                    seed = -f * *pc.N_threshold;
                }
                sc = compressive_scenario(p, seed);
                pc.t_star = blowup_time_bound(seed, ledger);
            }
        } else if (preset == "affine_composite") {
            CompositeSetup p;
            p.affine.gas = gas;
            p.affine.b = b;
            p.affine.rho_c = rd.num("initial.rho_c", 1.0);
            p.affine.v_a = rd.num("initial.v_a", 3.0);
            p.r_hi = rd.num("domain.R", p.r_hi);
            p.horizon = rd.num("domain.T", p.horizon);
            p.cells = cells_for(p.cells);
            p.decay = rd.num("initial.decay", p.decay);
            p.r_lo_fraction = rd.num("initial.r_lo_fraction", p.r_lo_fraction);
            if (!(p.r_hi > b))
                throw ConfigError("domain.R", "must exceed b");
            if (!(p.horizon > 0.0))
                throw ConfigError("domain.T", "must be positive");
            if (!(p.r_lo_fraction > 0.0 && p.r_lo_fraction < 1.0))
                throw ConfigError("initial.r_lo_fraction", "must lie in (0, 1)");
            sc = affine_composite_scenario(p);
        } else if (preset == "affine_window") {
            AffineParams ap;
            ap.gas = gas;
            ap.rho_c = rd.num("initial.rho_c", 1.0);
            ap.v_a = rd.num("initial.v_a", 3.0);
            ap.b = rd.num("initial.affine_b", 1.0);
            const double r_hi = rd.num("domain.R");
            const double T = rd.num("domain.T", 0.5);
            sc = affine_window_scenario(ap, b, r_hi, cells_for(512), T);
        } else {
            throw ConfigError("initial.preset", fmt::format("unknown preset '{}'", preset));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("initial.preset", e.what());
    }

    const std::string left = rd.str("boundary.left", to_string(sc.left));
    try {
        const auto mode = left_boundary_from_string(left);
        if (mode != sc.left) {
            if (mode == LeftBoundary::outflow && sc.left == LeftBoundary::dependence_cone)
                sc.left = mode;
            else
                throw ConfigError("boundary.left",
                                  fmt::format("preset '{}' requires '{}'", preset, to_string(sc.left)));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("boundary.left", e.what());
    }
    const std::string right = rd.str("boundary.right", sc.right_state ? "prescribed" : "outflow");
    if (right != (sc.right_state ? "prescribed" : "outflow"))
        throw ConfigError("boundary.right", fmt::format("preset '{}' uses '{}'", preset,
                                                         sc.right_state ? "prescribed" : "outflow"));

    SolverConfig& cfg = pc.solver;
    cfg.cfl = rd.num("solver.cfl", cfg.cfl);
    cfg.order = rd.integer("solver.order", cfg.order);
    const auto src = rd.str("solver.source", to_string(cfg.source));
    if (src == "unsplit")
        cfg.source = SourceTreatment::unsplit;
    else if (src == "strang")
        cfg.source = SourceTreatment::strang;
    else
        throw ConfigError("solver.source", "expected 'unsplit' or 'strang'");
    cfg.snapshot_dt = rd.num("solver.snapshot_dt", preset == "compressive" ? 0.01 : cfg.snapshot_dt);
    // grid-limited shocks cap the discrete gradient at a few times its
    // initial value on compressive data
    cfg.blowup_factor = rd.num("solver.blowup_factor", preset == "compressive" ? 3.0 : cfg.blowup_factor);
    cfg.blowup_gradient_max = rd.num("solver.blowup_gradient_max", cfg.blowup_gradient_max);
    cfg.dt_collapse = rd.num("solver.dt_collapse", cfg.dt_collapse);
    cfg.max_steps = static_cast<std::size_t>(rd.integer("solver.max_steps", static_cast<int>(cfg.max_steps)));
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError("solver", e.what());
    }

    auto& vo = pc.verify;
    vo.edge_buffer = static_cast<std::size_t>(rd.integer("verify.edge_buffer", 6));
    vo.M_margin = rd.num("verify.M_margin", 1e-6);
    if (rd.has("verify.eps"))
        vo.eps = rd.num("verify.eps");
    pc.waived = rd.flag("verify.waive_assumptions", false) || waive;
    rd.set("verify.waive_assumptions", pc.waived ? "true" : "false");

    AssumptionReport& rep = pc.assumptions;
    if (preset != "affine_window")
        detail::add_initial_checks(rep, sc);
    if (preset == "affine_composite")
        detail::add_composite_checks(rep, sc);
    if (!rep.pass()) {
        if (!pc.waived)
            throw ConfigError("initial.preset", fmt::format("assumption violation: {}", rep.failed()));
    }
    sc.waived = pc.waived && !rep.pass();

    pc.scenario = std::move(sc);
    pc.echo = rd.echo();
    pc.hash = fnv1a(pc.echo);
    return pc;
}

inline ParsedConfig parse_config(const std::string& path, bool waive = false, int refine = 1) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), waive, refine);
}

} // namespace rcwave
