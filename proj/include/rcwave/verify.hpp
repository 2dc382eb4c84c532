#pragma once

// Executable forms of the invariant-region, density-floor and blowup results:
// the bound ledger, the blowup-time bound t*, the compression threshold
// N(b, T), and per-run assertion suites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rcwave/characters.hpp"
#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"
#include "rcwave/scenario.hpp"
#include "rcwave/solver.hpp"

namespace rcwave {

/// Character error per unit of k dr (k = 2/(gamma-1)), maximised over the
/// affine calibration runs: gamma in {2, 2.5}, m in {1, 2}, K = 1, rho_c = 1,
/// v_a = 3, b = 1, window [0.55, 0.95], 200/400/800 cells, snapshots every
/// 0.05 on [0, 0.5], all cells. h_r enters alpha and beta multiplied by k, so
/// the slack carries that factor.
inline constexpr double kEpsGridConstant = 0.164926;

inline double eps_grid(double dr, const GasParams& gas) { return kEpsGridConstant * gas.riemann_factor() * dr; }

struct Hypotheses {
    double C0 = 1.0;      // velocity ceiling of the data
    double M0 = 1.0;      // max of the initial (and boundary) characters
    double rho_bar = 1.0; // density infimum of the data
    double T = 1.0;       // horizon entering e^(C_b T) and C_hat
    double M_margin = 1e-6;

    double M() const { return M0 + M_margin; }
};

struct BoundLedger {
    GasParams gas;
    double b = 1.0;
    Hypotheses hyp;
    double M = 0.0;
    double K_hat = 0.0;
    double M_b = 0.0;
    double C_b = 0.0;
    double M_bar = 0.0;
    double M_bar_b = 0.0;
    double C_hat = 0.0;
    double tilde_upper = 0.0;   // upper bound of the tilde characters on [0, T]
    double h_lambda_low = 0.0;  // lower bound of h^lambda at t = T

    double C0() const { return hyp.C0; }
};

namespace detail {
// max over s = h/u in (0, (gamma-1)/2] of max_i |coefficient_i| at u = r = m = 1.
inline double coefficient_profile_max(const GasParams& gas, std::size_t samples = 20000) {
    GasParams g1 = gas;
    g1.m = 1;
    const double smax = 0.5 * (gas.gamma - 1.0);
    double best = 0.0;
    for (std::size_t i = 1; i <= samples; ++i) {
        const double s = smax * static_cast<double>(i) / static_cast<double>(samples);
        const auto c = riccati_coeffs(1.0, s, 1.0, g1);
        best = std::max({best, std::fabs(c.A1), std::fabs(c.A2), std::fabs(c.B1), std::fabs(c.B2)});
    }
    return best;
}
} // namespace detail

/// Builds every ledger constant from the hypotheses. The suprema over the
/// state box {r >= b, 0 < h <= (gamma-1)u/2, u <= 2 C0} use homogeneity:
/// each coefficient is (m u / r) times a function of h/u.
inline BoundLedger compute_ledger(const GasParams& gas, double b, const Hypotheses& hyp) {
    gas.validate();
    if (!(b > 0.0))
        throw DomainError("compute_ledger: b must be positive");
    const double g = gas.gamma;
    const double m = gas.m;
    const double C0 = hyp.C0;
    BoundLedger L;
    L.gas = gas;
    L.b = b;
    L.hyp = hyp;
    L.M = hyp.M();
    const double geo = 2.0 * m * (g - 1.0) * C0 / (b * (3.0 - g));
    L.M_b = L.M + geo;
    L.C_b = 1.0 + 4.0 * m * C0 / (b * (3.0 - g));
    L.K_hat = m * 2.0 * C0 / b * detail::coefficient_profile_max(gas);
    const double Kg = gas.K * g;
    L.M_bar = 1.0 + std::pow(Kg, -1.0 / (g - 1.0)) * hyp.M0 / hyp.rho_bar;
    L.M_bar_b = std::exp(L.C_b * hyp.T) * std::pow((g - 1.0) * C0, 2.0 / (g - 1.0)) * L.M_bar + geo;
    L.C_hat = std::pow(Kg, (3.0 - g) / (4.0 * (g - 1.0))) * std::pow(hyp.rho_bar, (3.0 - g) / 4.0) *
              std::exp(-L.M_bar_b * (3.0 - g) * hyp.T / 4.0);
    L.tilde_upper = std::exp(L.C_b * hyp.T) * std::pow((g - 1.0) * C0, (g + 1.0) / (2.0 * (g - 1.0))) * L.M_bar;
    L.h_lambda_low = L.C_hat * std::pow(b / (b + 2.0 * C0 * hyp.T), m * (3.0 - g) / 4.0);
    return L;
}

inline double density_floor_rarefaction(double t, const BoundLedger& L) {
    if (!(L.gas.gamma < 3.0) || !(L.b > 0.0))
        throw DomainError("density floor undefined for gamma >= 3 or b = 0");
    return L.hyp.rho_bar * std::pow(L.b / (L.b + 2.0 * L.hyp.C0 * t), L.gas.m) * std::exp(-L.M_b * t);
}

inline double density_floor_general(double t, const BoundLedger& L) {
    if (!(L.gas.gamma < 3.0) || !(L.b > 0.0))
        throw DomainError("density floor undefined for gamma >= 3 or b = 0");
    return L.hyp.rho_bar * std::pow(L.b / (L.b + 2.0 * L.hyp.C0 * t), L.gas.m) * std::exp(-L.M_bar_b * t);
}

/// Upper bound on the blowup time for an initial weighted character `seed` < 0,
/// with an explicit C_hat.
inline double blowup_time_bound(double seed, double C_hat, double b, double C0, int m, double gamma) {
    if (!(seed < 0.0))
        throw DomainError("blowup_time_bound: no bound for a nonnegative seed");
    const double q = 4.0 - m * (3.0 - gamma);
    const double inner = 1.0 + 4.0 * C0 * q / (-seed * (gamma + 1.0) * C_hat * b);
    return b / (2.0 * C0) * (std::pow(inner, 4.0 / q) - 1.0);
}

inline double blowup_time_bound(double seed, const BoundLedger& L) {
    return blowup_time_bound(seed, L.C_hat, L.b, L.hyp.C0, L.gas.m, L.gas.gamma);
}

/// Bracketed remainder of the weighted equation bounded from above at
/// tilde-beta = -n, using |A_i|, |B_i| <= K_hat, the tilde upper bound and the
/// lower bound of h^lambda. The geometric term has a favourable sign.
inline double remainder_upper(double n, const BoundLedger& L) {
    const double a = (L.gas.gamma + 1.0) / 8.0 * L.h_lambda_low;
    return -a * n * n + L.K_hat * n + L.K_hat * std::max(L.tilde_upper, 0.0);
}

/// Smallest N (to `rel_tol`) such that the remainder is negative for every
/// weighted character <= -N and t*(-N) < T. Bisection on N.
inline double compression_threshold(double b, double T, const BoundLedger& L, double rel_tol = 1e-3) {
    if (!(b > 0.0) || !(T > 0.0))
        throw DomainError("compression_threshold: need b > 0 and T > 0");
    if (std::fabs(b - L.b) > 1e-12 * b)
        throw DomainError("compression_threshold: ledger built for a different b");
    if (!std::isfinite(L.K_hat) || !std::isfinite(L.tilde_upper) || !(L.h_lambda_low > 0.0))
        throw DomainError("compression_threshold: ledger bounds are not finite");
    // remainder is a downward parabola in n: negative for all n >= N iff N is
    // past its larger root, so checking at N itself suffices once past the vertex
    const double a = (L.gas.gamma + 1.0) / 8.0 * L.h_lambda_low;
    const double vertex = L.K_hat / (2.0 * a);
    auto ok = [&](double n) {
        return n >= vertex && remainder_upper(n, L) < 0.0 && blowup_time_bound(-n, L) < T;
    };
    double lo = 0.0, hi = std::max(1.0, vertex);
    int guard = 0;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 2000 || !std::isfinite(hi))
            throw DomainError("compression_threshold: no finite threshold");
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Cellwise checks

struct Violation {
    std::size_t index;
    double r;
    double margin;
};

/// (2/(gamma-1)) h <= u <= 2 C0 on each listed cell.
inline std::vector<Violation> check_supersonic_region(const FlowField& f, const GasParams& gas, double C0,
                                                      std::size_t lo = 0, std::size_t hi = std::size_t(-1)) {
    std::vector<Violation> v;
    const double k = gas.riemann_factor();
    hi = std::min(hi, f.size());
    for (std::size_t i = lo; i < hi; ++i) {
        const auto& s = f.states[i];
        const double m = std::min(s.u - k * s.h, 2.0 * C0 - s.u);
        if (m < 0.0 || !std::isfinite(m))
            v.push_back({i, f.r[i], m});
    }
    return v;
}

struct SignReport {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double r_min = 0.0, r_max = 0.0;
    bool pass = true;
};

inline SignReport check_character_signs(const CharacterField& c, double M, double eps, std::size_t lo = 0,
                                        std::size_t hi = std::size_t(-1)) {
    SignReport s;
    hi = std::min(hi, c.size());
    for (std::size_t i = lo; i < hi; ++i) {
        if (!c.defined[i])
            continue;
        const double mn = std::min(c.alpha[i], c.beta[i]);
        const double mx = std::max(c.alpha[i], c.beta[i]);
        if (mn < s.min) {
            s.min = mn;
            s.r_min = c.r[i];
        }
        if (mx > s.max) {
            s.max = mx;
            s.r_max = c.r[i];
        }
    }
    s.pass = s.min >= -eps && s.max < M;
    return s;
}

// ---------------------------------------------------------------------------
// Run verification

struct CheckResult {
    std::string name;
    bool pass = true;
    bool applicable = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double r = std::nan("");
    double t = std::nan("");
    std::string detail;
};

struct SnapshotSeries {
    double t;
    double char_min;
    double char_max;
    double rho_min;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<SnapshotSeries> series;
    BoundLedger ledger;
    double eps = 0.0;
    std::optional<double> t_star;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.applicable || c.pass; });
    }
    std::size_t passed() const {
        return static_cast<std::size_t>(
            std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.applicable && c.pass; }));
    }
    std::size_t applicable() const {
        return static_cast<std::size_t>(
            std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.applicable; }));
    }
    const CheckResult* find(const std::string& n) const {
        for (const auto& c : checks)
            if (c.name == n)
                return &c;
        return nullptr;
    }

    void write(std::ostream& os) const {
        os << fmt::format("verification {}\n", pass() ? "PASS" : "FAIL");
        os << fmt::format("passed {} of {}\n", passed(), applicable());
        os << fmt::format("eps_grid {:.17g}\n", eps);
        if (t_star)
            os << fmt::format("t_star {:.17g}\n", *t_star);
        for (const auto& c : checks) {
            os << fmt::format("[check {}]\n", c.name);
            os << fmt::format("status {}\n", !c.applicable ? "skipped" : (c.pass ? "pass" : "fail"));
            os << fmt::format("worst_margin {:.17g}\n", c.worst_margin);
            os << fmt::format("r {:.17g}\n", c.r);
            os << fmt::format("t {:.17g}\n", c.t);
            if (!c.detail.empty())
                os << "detail " << c.detail << "\n";
        }
        os << "[series]\n";
        os << "t,char_min,char_max,rho_min\n";
        for (const auto& s : series)
            os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.char_min, s.char_max, s.rho_min);
    }
};

struct VerifyOptions {
    std::size_t edge_buffer = 6;        // cells excluded next to both active edges
    double M_margin = 1e-6;
    std::optional<double> eps;          // default eps_grid(dr, gas)
    std::optional<double> seed;         // weighted seed for t*; default measured
    std::optional<Hypotheses> hypotheses;
};

/// Max of alpha, beta over the verified cells of a snapshot.
inline double snapshot_char_max(const Snapshot& s, std::size_t buf) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = buf; i + buf < s.chars.size(); ++i)
        if (s.chars.defined[i])
            mx = std::max({mx, s.chars.alpha[i], s.chars.beta[i]});
    return mx;
}

inline double snapshot_min_weighted_beta(const Snapshot& s, std::size_t buf) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = buf; i + buf < s.chars.size(); ++i)
        if (s.chars.defined[i])
            mn = std::min(mn, s.chars.beta_tilde[i]);
    return mn;
}

/// Hypotheses of the initial data alone (no run needed); M0 must be known.
inline Hypotheses data_hypotheses(const Scenario& sc, double M_margin = 1e-6) {
    if (!sc.M0)
        throw DomainError("data_hypotheses: scenario carries no character maximum");
    Hypotheses h;
    h.C0 = sc.C0;
    h.rho_bar = sc.rho_bar;
    h.T = sc.horizon;
    h.M0 = *sc.M0;
    h.M_margin = M_margin;
    return h;
}

/// Hypotheses measured from the scenario and the initial snapshot.
inline Hypotheses measure_hypotheses(const Scenario& sc, const RunRecord& rec, std::size_t buf = 6,
                                     double M_margin = 1e-6) {
    Hypotheses h;
    h.C0 = sc.C0;
    h.rho_bar = sc.rho_bar;
    h.T = sc.horizon;
    h.M_margin = M_margin;
    h.M0 = rec.snapshots.empty() ? 0.0 : snapshot_char_max(rec.snapshots.front(), buf);
    if (sc.M0)
        h.M0 = std::max(h.M0, *sc.M0);
    if (sc.left == LeftBoundary::characteristic && sc.affine) {
        // boundary characters along B_b(t)
        for (int i = 0; i <= 400; ++i) {
            const double t = sc.horizon * i / 400.0;
            const double r = sc.left_edge(t);
            h.M0 = std::max(h.M0, affine_characters(r, t, *sc.affine).alpha);
        }
    }
    return h;
}

inline VerificationReport verify_run(const Scenario& sc, const RunRecord& rec, const VerifyOptions& opt = {}) {
    VerificationReport rep;
    const auto& gas = sc.gas;
    const std::size_t buf = opt.edge_buffer;
    const Hypotheses hyp = opt.hypotheses ? *opt.hypotheses : measure_hypotheses(sc, rec, buf, opt.M_margin);
    rep.ledger = compute_ledger(gas, sc.b, hyp);
    const auto& L = rep.ledger;
    rep.eps = opt.eps ? *opt.eps : eps_grid(sc.dr(), gas);
    const bool compressive = !sc.rarefactive && sc.preset == "compressive";
    const bool signs_apply = sc.rarefactive;
    const double t_end = rec.blowup_time ? *rec.blowup_time : rec.final_time;

    auto named = [](const char* n) {
        CheckResult c;
        c.name = n;
        return c;
    };
    CheckResult sup = named("supersonic_region"), cmin = named("character_min"), cmax = named("character_max");
    CheckResult floor_r = named("density_floor_rarefaction"), floor_g = named("density_floor_general");
    CheckResult coeff = named("coefficient_signs"), tstar = named("blowup_bound"), fatal = named("solver_completed");
    cmin.applicable = signs_apply;
    cmax.applicable = signs_apply;
    floor_r.applicable = signs_apply;
    // the affine window is a convergence harness; its data need not satisfy
    // the region hypotheses
    floor_g.applicable = signs_apply || compressive;
    sup.applicable = signs_apply;
    tstar.applicable = compressive;

    auto worse = [](CheckResult& c, double margin, double r, double t) {
        if (margin < c.worst_margin) {
            c.worst_margin = margin;
            c.r = r;
            c.t = t;
        }
    };

    for (const auto& snap : rec.snapshots) {
        const double t = snap.field.t;
        const std::size_t n = snap.field.size();
        if (n <= 2 * buf)
            continue;
        const std::size_t lo = buf, hi = n - buf;
        SnapshotSeries ser{t, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
        const double fr = density_floor_rarefaction(t, L);
        const double fg = density_floor_general(t, L);
        const bool pre_blowup = !rec.blowup_time || t < *rec.blowup_time;
        const double k = gas.riemann_factor();
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& s = snap.field.states[i];
            const double r = snap.field.r[i];
            worse(sup, std::min(s.u - k * s.h, 2.0 * L.hyp.C0 - s.u), r, t);
            ser.rho_min = std::min(ser.rho_min, s.rho);
            if (signs_apply)
                worse(floor_r, s.rho - fr, r, t);
            if (pre_blowup)
                worse(floor_g, s.rho - fg, r, t);
            if (snap.chars.defined[i]) {
                const double mn = std::min(snap.chars.alpha[i], snap.chars.beta[i]);
                const double mx = std::max(snap.chars.alpha[i], snap.chars.beta[i]);
                ser.char_min = std::min(ser.char_min, mn);
                ser.char_max = std::max(ser.char_max, mx);
                if (signs_apply) {
                    worse(cmin, mn + rep.eps, r, t);
                    worse(cmax, L.M - mx, r, t);
                }
                if (characters_defined(r, s.h, s.u) && s.u - s.h > 0.0) {
                    const auto c = riccati_coeffs(r, s.h, s.u, gas);
                    if (s.u >= k * s.h)
                        worse(coeff, std::min({c.d1, c.d2, c.A1, c.A2}), r, t);
                    else
                        worse(coeff, std::min(c.d1, c.d2), r, t);
                }
            }
        }
        rep.series.push_back(ser);
    }
    sup.pass = sup.worst_margin >= 0.0;
    cmin.pass = cmin.worst_margin >= 0.0;
    cmax.pass = cmax.worst_margin > 0.0;
    floor_r.pass = floor_r.worst_margin >= 0.0;
    floor_g.pass = floor_g.worst_margin >= 0.0;
    coeff.pass = coeff.worst_margin >= 0.0;

    if (compressive) {
        double seed = opt.seed ? *opt.seed : (sc.seed ? *sc.seed : 0.0);
        if (!opt.seed && !sc.seed && !rec.snapshots.empty())
            seed = snapshot_min_weighted_beta(rec.snapshots.front(), buf);
        if (seed < 0.0) {
            rep.t_star = blowup_time_bound(seed, L);
            if (rec.blowup_time) {
                tstar.worst_margin = *rep.t_star - *rec.blowup_time;
                tstar.pass = tstar.worst_margin >= 0.0 && *rec.blowup_time > 0.0;
                tstar.t = *rec.blowup_time;
                tstar.detail = fmt::format("seed {:.17g} t_star {:.17g} observed {:.17g}", seed, *rep.t_star,
                                           *rec.blowup_time);
            } else {
                // no blowup before the horizon: the bound is only violated if t* < horizon
                tstar.worst_margin = t_end - *rep.t_star;
                tstar.pass = *rep.t_star >= sc.horizon;
                tstar.detail = fmt::format("seed {:.17g} t_star {:.17g}; no blowup by t = {:.17g}", seed,
                                           *rep.t_star, t_end);
            }
        } else {
            tstar.pass = false;
            tstar.detail = "initial data carry no compression";
        }
    }
    fatal.pass = rec.termination != Termination::fatal;
    fatal.worst_margin = fatal.pass ? 0.0 : -1.0;
    fatal.detail = rec.fatal_message;

    rep.checks = {fatal, sup, cmin, cmax, floor_r, floor_g, coeff, tstar};
    return rep;
}

} // namespace rcwave
