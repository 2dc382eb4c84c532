#pragma once

// Problem setups: the radial window, boundary treatment, initial data and the
// hypothesis checks on that data. Presets build data in character space.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "rcwave/affine.hpp"
#include "rcwave/characters.hpp"
#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"
#include "rcwave/ode.hpp"

namespace rcwave {

enum class LeftBoundary {
    dependence_cone, // cells left of the 2-characteristic from (b, 0) are inactive
    characteristic,  // cells left of B_b(t) take the prescribed boundary state
    origin,          // reflective at r = 0
    prescribed,      // ghost cells from a prescribed state
    outflow,
};

inline const char* to_string(LeftBoundary m) {
    switch (m) {
    case LeftBoundary::dependence_cone: return "dependence_cone";
    case LeftBoundary::characteristic: return "characteristic";
    case LeftBoundary::origin: return "origin";
    case LeftBoundary::prescribed: return "prescribed";
    case LeftBoundary::outflow: return "outflow";
    }
    return "?";
}

inline LeftBoundary left_boundary_from_string(const std::string& s) {
    if (s == "dependence_cone") return LeftBoundary::dependence_cone;
    if (s == "characteristic") return LeftBoundary::characteristic;
    if (s == "origin") return LeftBoundary::origin;
    if (s == "prescribed") return LeftBoundary::prescribed;
    if (s == "outflow") return LeftBoundary::outflow;
    throw std::invalid_argument("unknown left boundary mode '" + s + "'");
}

using ProfileFn = std::function<RhoU(double)>;
using StateFn = std::function<RhoU(double, double)>;

struct Scenario {
    std::string preset;
    GasParams gas;
    double b = 1.0;      // left edge of the physical problem
    double r_lo = 1.0;   // grid window
    double r_hi = 2.0;
    std::size_t cells = 400;
    double horizon = 1.0;
    double C0 = 1.0;     // velocity ceiling of the initial data
    double rho_bar = 0.0;
    LeftBoundary left = LeftBoundary::dependence_cone;
    ProfileFn initial;
    StateFn left_state;  // characteristic and prescribed modes
    StateFn right_state; // empty: outflow extrapolation
    std::function<double(double)> left_edge; // B_b(t) for characteristic mode
    std::shared_ptr<const AffineMotion> affine;
    bool rarefactive = true; // data built with nonnegative characters
    bool waived = false;
    std::optional<double> M0;   // max of the prescribed characters, when known
    std::optional<double> seed; // prescribed min weighted compression character

    void validate() const {
        gas.validate();
        if (!(r_hi > r_lo) || r_lo < 0.0)
            throw std::invalid_argument("scenario: need 0 <= r_lo < r_hi");
        if (cells < 8)
            throw std::invalid_argument("scenario: need at least 8 cells");
        if (!(horizon >= 0.0))
            throw std::invalid_argument("scenario: negative horizon");
        if (!initial)
            throw std::invalid_argument("scenario: no initial data");
        if ((left == LeftBoundary::characteristic || left == LeftBoundary::prescribed) && !left_state)
            throw std::invalid_argument("scenario: boundary mode requires a boundary state");
        if (left == LeftBoundary::characteristic && !left_edge)
            throw std::invalid_argument("scenario: characteristic mode requires the boundary curve");
        if (left == LeftBoundary::origin && r_lo != 0.0)
            throw std::invalid_argument("scenario: origin mode requires r_lo = 0");
    }

    double dr() const { return (r_hi - r_lo) / static_cast<double>(cells); }
};

// ---------------------------------------------------------------------------
// Hypothesis checks on initial data

struct HypothesisCheck {
    std::string name;
    bool pass;
    double worst_margin;
    double at_r;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    std::string summary() const {
        std::string s;
        for (const auto& c : checks)
            s += fmt::format("{}{}={} (margin {:.6g} at r={:.6g})", s.empty() ? "" : "; ", c.name,
                             c.pass ? "pass" : "FAIL", c.worst_margin, c.at_r);
        return s;
    }
};

/// Samples the initial data on [b, r_hi]: the supersonic expanding bound
/// 2h/(gamma-1) <= u <= C0 with h > 0, and alpha0, beta0 >= 0 within `char_tol`
/// (the sign hypothesis of the global existence results).
inline HypothesisReport check_initial_hypotheses(const Scenario& sc, std::size_t samples = 2000,
                                                 double char_tol = 1e-7) {
    HypothesisReport rep;
    const double k = sc.gas.riemann_factor();
    HypothesisCheck lower{"supersonic_lower", true, std::numeric_limits<double>::infinity(), sc.b};
    HypothesisCheck upper{"velocity_ceiling", true, std::numeric_limits<double>::infinity(), sc.b};
    HypothesisCheck chars{"nonnegative_characters", true, std::numeric_limits<double>::infinity(), sc.b};
    const double lo = std::max(sc.b, sc.r_lo);
    const double span = sc.r_hi - lo;
    std::vector<double> r(samples + 1), h(samples + 1), u(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) {
        r[i] = lo + span * static_cast<double>(i) / static_cast<double>(samples);
        const auto s = sc.initial(r[i]);
        h[i] = sound_speed(s.rho, sc.gas);
        u[i] = s.u;
        const double m1 = u[i] - k * h[i];
        if (m1 < lower.worst_margin || !(h[i] > 0.0)) {
            lower.worst_margin = h[i] > 0.0 ? m1 : std::min(m1, -1.0);
            lower.at_r = r[i];
        }
        const double m2 = sc.C0 - u[i];
        if (m2 < upper.worst_margin) {
            upper.worst_margin = m2;
            upper.at_r = r[i];
        }
    }
    lower.pass = lower.worst_margin >= -1e-12;
    upper.pass = upper.worst_margin >= -1e-12;
    rep.checks.push_back(lower);
    rep.checks.push_back(upper);
    if (lower.pass && r.front() > 0.0) {
        // central differences of the profile itself; every preset defines its
        // data a few cells beyond the window, so no one-sided stencil is needed
        for (std::size_t i = 0; i <= samples; ++i) {
            if (!characters_defined(r[i], h[i], u[i]))
                continue;
            const double d = 1e-6 * std::max(1.0, r[i]);
            const auto sp = sc.initial(r[i] + d), sm = sc.initial(r[i] - d);
            const double hr = (sound_speed(sp.rho, sc.gas) - sound_speed(sm.rho, sc.gas)) / (2.0 * d);
            const double ur = (sp.u - sm.u) / (2.0 * d);
            const auto c = characters_from_gradients(r[i], h[i], u[i], hr, ur, sc.gas);
            const double mn = std::min(c.alpha, c.beta);
            if (mn < chars.worst_margin) {
                chars.worst_margin = mn;
                chars.at_r = r[i];
            }
        }
        chars.pass = chars.worst_margin >= -char_tol;
        rep.checks.push_back(chars);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Data from prescribed characters

/// Solves the character definitions for (u, h)(r) given alpha0(r), beta0(r) and
/// the state at r = r0; integrates outwards to r_hi and inwards to r_lo.
class CharacterProfile {
public:
    CharacterProfile(const GasParams& gas, double r0, double u0, double h0, std::function<double(double)> alpha0,
                     std::function<double(double)> beta0, double r_lo, double r_hi)
        : gas_(gas), r0_(r0) {
        const double k = gas.riemann_factor();
        const int m = gas.m;
        auto rhs = [&](double r, const ode::State<2>& y) {
            const double u = y[0];
            const double h = y[1];
            const double c1c2 = (u - h) * (u + h);
            const double a = alpha0(r);
            const double be = beta0(r);
            const double ur = 0.5 * (a + be) + m / r * h * h * u / c1c2;
            const double hr = (0.5 * (a - be) - m / r * h * u * u / c1c2) / k;
            return ode::State<2>{ur, hr};
        };
        ode::Tolerance tol;
        tol.rtol = 1e-12;
        tol.atol = 1e-14;
        tol.h_init = 1e-5;
        tol.h_max = 2e-3 * std::max(1.0, r0);
        auto guard = [](double, const ode::State<2>& y) { return !(y[1] > 0.0) || !(y[0] > y[1]); };
        out_ = ode::dopri5<2>(rhs, r0, {u0, h0}, r_hi, tol, guard);
        if (out_.back().t < r_hi)
            throw DomainError(fmt::format("character profile lost supersonic state at r = {}", out_.back().t));
        if (r_lo < r0) {
            auto back = [&](double s, const ode::State<2>& y) {
                const auto d = rhs(r0 - s, y);
                return ode::State<2>{-d[0], -d[1]};
            };
            in_ = ode::dopri5<2>(back, 0.0, {u0, h0}, r0 - r_lo, tol, guard);
            if (in_.back().t < r0 - r_lo)
                throw DomainError(fmt::format("character profile lost supersonic state at r = {}",
                                              r0 - in_.back().t));
        }
    }

    /// (u, h) at r.
    std::pair<double, double> uh(double r) const {
        if (r >= r0_) {
            const auto y = eval(out_, r);
            return {y[0], y[1]};
        }
        const auto y = eval(in_, r0_ - r);
        return {y[0], y[1]};
    }

    RhoU operator()(double r) const {
        const auto [u, h] = uh(r);
        return {rho_from_sound_speed(h, gas_), u};
    }

private:
    static ode::State<2> eval(const std::vector<ode::Sample<2>>& s, double x) {
        if (s.empty())
            throw DomainError("character profile evaluated outside its range");
        if (x < s.front().t - 1e-12 || x > s.back().t + 1e-12)
            throw DomainError("character profile evaluated outside its range");
        if (s.size() == 1)
            return s.front().y;
        const std::size_t k = ode::locate(s, x);
        return ode::hermite(s[k], s[k + 1], x);
    }

    GasParams gas_;
    double r0_;
    std::vector<ode::Sample<2>> out_, in_;
};

struct Bump {
    double amplitude = 0.0;
    double center = 0.0;
    double width = 1.0;
    double operator()(double r) const {
        const double x = (r - center) / width;
        return amplitude * std::exp(-x * x);
    }
};

struct RarefactionSetup {
    GasParams gas;
    double b = 1.0;
    double u_b = 1.0;
    double h_ratio = 0.6;   // h(b) = h_ratio * (gamma-1)/2 * u(b)
    double r_lo = -1.0;     // < 0: use b
    double r_hi = 7.0;
    std::size_t cells = 800;
    double horizon = -1.0;  // < 0: 2 b / C0
    Bump alpha{0.5, 2.0, 0.4};
    Bump beta{0.5, 3.0, 0.4};
    Bump beta_dip{};        // subtracted from beta; compressive data
};

namespace detail {
inline void fill_bounds(Scenario& sc, const std::function<RhoU(double)>& f, double lo, double hi) {
    const std::size_t n = 4000;
    double umax = 0.0;
    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const auto s = f(r);
        umax = std::max(umax, s.u);
        rmin = std::min(rmin, s.rho);
    }
    // cell centres lie strictly inside the window; a fine sample suffices
    sc.C0 = umax * (1.0 + 1e-9);
    sc.rho_bar = rmin;
}
} // namespace detail

inline Scenario rarefaction_scenario(const RarefactionSetup& p) {
    p.gas.validate();
    Scenario sc;
    sc.preset = p.beta_dip.amplitude != 0.0 ? "compressive" : "rarefaction";
    sc.gas = p.gas;
    sc.b = p.b;
    sc.r_lo = p.r_lo < 0.0 ? p.b : p.r_lo;
    sc.r_hi = p.r_hi;
    sc.cells = p.cells;
    sc.left = LeftBoundary::dependence_cone;
    sc.rarefactive = p.beta_dip.amplitude == 0.0;
    const double h_b = p.h_ratio * 0.5 * (p.gas.gamma - 1.0) * p.u_b;
    const double dx = (sc.r_hi - sc.r_lo) / static_cast<double>(p.cells);
    const Bump a = p.alpha, be = p.beta, dip = p.beta_dip;
    auto prof = std::make_shared<CharacterProfile>(
        p.gas, p.b, p.u_b, h_b, [a](double r) { return a(r); },
        [be, dip](double r) { return be(r) - dip(r); }, sc.r_lo - 3 * dx, sc.r_hi + 3 * dx);
    sc.initial = [prof](double r) { return (*prof)(r); };
    detail::fill_bounds(sc, sc.initial, p.b, sc.r_hi);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
        const double r = p.b + (sc.r_hi - p.b) * i / 4000.0;
        mx = std::max({mx, a(r), be(r) - dip(r)});
    }
    sc.M0 = mx;
    sc.horizon = p.horizon < 0.0 ? 2.0 * p.b / sc.C0 : p.horizon;
    sc.validate();
    return sc;
}

/// Short window used for blowup experiments: small characters keep the
/// ledger constants moderate, so N(b, T) is resolvable on a desk grid.
inline RarefactionSetup compressive_setup(const GasParams& gas) {
    RarefactionSetup p;
    p.gas = gas;
    p.r_hi = 1.4;
    p.horizon = 0.2;
    p.cells = 3200;
    p.alpha = {0.05, 1.2, 0.1};
    p.beta = {0.05, 1.2, 0.1};
    p.beta_dip = {0.0, 1.15, 0.002};
    return p;
}

/// Weighted compression character h^(-lambda) beta at t = 0, minimised over
/// the window [b, r_hi].
inline double min_weighted_beta(const Scenario& sc, std::size_t samples = 20000) {
    const double lam = weights::tilde(sc.gas);
    std::vector<double> r(samples + 1), h(samples + 1), u(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) {
        r[i] = sc.b + (sc.r_hi - sc.b) * static_cast<double>(i) / static_cast<double>(samples);
        const auto s = sc.initial(r[i]);
        h[i] = sound_speed(s.rho, sc.gas);
        u[i] = s.u;
    }
    const auto hr = radial_derivative(r, h);
    const auto ur = radial_derivative(r, u);
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= samples; ++i) {
        const auto c = characters_from_gradients(r[i], h[i], u[i], hr[i], ur[i], sc.gas);
        mn = std::min(mn, std::pow(h[i], -lam) * c.beta);
    }
    return mn;
}

/// Rarefaction data plus a narrow negative dip in beta whose depth is chosen
/// so that the minimum weighted compression character equals `seed` (< 0).
inline Scenario compressive_scenario(RarefactionSetup p, double seed) {
    if (!(seed < 0.0))
        throw std::invalid_argument("compressive preset requires a negative seed");
    if (!(p.beta_dip.width > 0.0))
        throw std::invalid_argument("compressive preset requires a positive dip width");
    auto build = [&](double amp) {
        RarefactionSetup q = p;
        q.beta_dip.amplitude = amp;
        return rarefaction_scenario(q);
    };
    auto f = [&](double amp) { return min_weighted_beta(build(amp)) - seed; };
    double lo = 0.0, hi = 1.0;
    double fhi = f(hi);
    for (int i = 0; i < 60 && fhi > 0.0; ++i) {
        lo = hi;
        hi *= 2.0;
        fhi = f(hi);
    }
    if (fhi > 0.0)
        throw DomainError("compressive preset: could not reach the requested seed");
    for (int i = 0; i < 80 && (hi - lo) > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    auto sc = build(hi);
    sc.preset = "compressive";
    sc.rarefactive = false;
    sc.seed = seed;
    // the dip lowers u and raises h downstream; the hypotheses are taken over
    // both data sets so every seed shares the ledger of the undisturbed data
    const auto base = build(0.0);
    sc.C0 = std::max(sc.C0, base.C0);
    sc.rho_bar = std::min(sc.rho_bar, base.rho_bar);
    sc.M0 = std::max(*sc.M0, *base.M0);
    return sc;
}

// ---------------------------------------------------------------------------
// Affine presets

/// Affine motion on the whole window, with exact ghost states on both sides.
/// The window must stay inside the patch: r_hi plus ghosts <= b.
inline Scenario affine_window_scenario(const AffineParams& ap, double r_lo, double r_hi, std::size_t cells,
                                       double horizon) {
    auto motion = std::make_shared<const AffineMotion>(ap, horizon);
    Scenario sc;
    sc.preset = "affine_window";
    sc.gas = ap.gas;
    sc.b = r_lo;
    sc.r_lo = r_lo;
    sc.r_hi = r_hi;
    sc.cells = cells;
    sc.horizon = horizon;
    sc.left = LeftBoundary::prescribed;
    sc.affine = motion;
    sc.rarefactive = false;
    const double dx = (r_hi - r_lo) / static_cast<double>(cells);
    if (r_hi + 3.0 * dx > ap.b)
        throw std::invalid_argument("affine window extends beyond the affine patch");
    if (r_lo - 3.0 * dx <= 0.0)
        throw std::invalid_argument("affine window ghosts reach the origin");
    sc.initial = [motion](double r) { return affine_state(r, 0.0, *motion); };
    sc.left_state = [motion](double r, double t) { return affine_state(r, t, *motion); };
    sc.right_state = sc.left_state;
    detail::fill_bounds(sc, sc.initial, r_lo, r_hi);
    sc.validate();
    return sc;
}

struct CompositeSetup {
    AffineParams affine;
    double r_lo_fraction = 0.5; // grid starts at this fraction of b
    double r_hi = 5.0;
    std::size_t cells = 800;
    double horizon = 1.0;
    double decay = 0.5;         // outer characters decay like exp(-(r-b)/decay)
};

/// Affine patch on [0, b] glued to outer data whose characters continue the
/// affine values at b with exponential decay. The left boundary is B_b(t).
inline Scenario affine_composite_scenario(const CompositeSetup& p) {
    p.affine.validate();
    auto motion = std::make_shared<const AffineMotion>(p.affine, p.horizon);
    auto trace = std::make_shared<const BoundaryTrace>(trace_boundary(*motion, p.horizon));
    const double b = p.affine.b;
    const auto corner = affine_point(b, 0.0, *motion);
    const auto ch = characters_from_gradients(b, corner.h, corner.u, corner.h_r, corner.u_r, p.affine.gas);
    const double ell = p.decay;
    const double a0 = ch.alpha, b0 = ch.beta;
    auto outer = std::make_shared<CharacterProfile>(
        p.affine.gas, b, corner.u, corner.h, [a0, b, ell](double r) { return a0 * std::exp(-(r - b) / ell); },
        [b0, b, ell](double r) { return b0 * std::exp(-(r - b) / ell); }, b, p.r_hi * 1.01);

    Scenario sc;
    sc.preset = "affine_composite";
    sc.gas = p.affine.gas;
    sc.b = b;
    sc.r_lo = p.r_lo_fraction * b;
    sc.r_hi = p.r_hi;
    sc.cells = p.cells;
    sc.horizon = p.horizon;
    sc.left = LeftBoundary::characteristic;
    sc.affine = motion;
    sc.rarefactive = true;
    sc.initial = [motion, outer, b](double r) {
        if (r <= b)
            return affine_state(r, 0.0, *motion);
        return (*outer)(r);
    };
    sc.left_state = [motion](double r, double t) {
        const double a = motion->at(t).a;
        // cells left of B_b(t) lie inside the patch; clamp ghosts at the edge
        return affine_state(std::clamp(r, 1e-12, a * motion->params().b), t, *motion);
    };
    sc.left_edge = [trace](double t) { return trace->at(t); };
    detail::fill_bounds(sc, sc.initial, b, sc.r_hi);
    // rho_bar and C0 also cover the boundary data along B_b(t)
    for (int i = 0; i <= 400; ++i) {
        const double t = p.horizon * i / 400.0;
        const auto s = affine_state(trace->at(t), t, *motion);
        sc.rho_bar = std::min(sc.rho_bar, s.rho);
        sc.C0 = std::max(sc.C0, s.u * (1.0 + 1e-9));
    }
    sc.validate();
    return sc;
}

/// Outer initial data of a composite scenario, for compatibility checks.
inline OuterData outer_data(const Scenario& sc) {
    auto f = sc.initial;
    return {[f](double r) { return f(r).rho; }, [f](double r) { return f(r).u; }};
}

} // namespace rcwave
