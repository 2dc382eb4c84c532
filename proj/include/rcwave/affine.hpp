#pragma once

// Exact affine motions r = a(t) y: the static profile, the expansion ODE,
// the closed-form state and gradients, admissibility of the patch radius and
// compatibility with outer data along the 1-characteristic B_b(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rcwave/characters.hpp"
#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"
#include "rcwave/ode.hpp"

namespace rcwave {

struct AffineParams {
    GasParams gas;
    double rho_c = 1.0;
    double v_a = 1.0;
    double b = 1.0;

    void validate() const {
        gas.validate();
        if (!(rho_c > 0.0))
            throw std::invalid_argument("affine: rho_c must be positive");
        if (!(v_a > 0.0))
            throw std::invalid_argument("affine: v_a must be positive");
        if (!(b > 0.0))
            throw std::invalid_argument("affine: b must be positive");
    }

    /// Exponent (m+1)(gamma-1) that appears throughout.
    double kappa() const { return (gas.m + 1) * (gas.gamma - 1.0); }

    /// Radius where the static profile reaches vacuum.
    double vacuum_radius() const {
        return std::sqrt(2.0 * gas.gamma * gas.K / (gas.gamma - 1.0)) *
               std::pow(rho_c, 0.5 * (gas.gamma - 1.0));
    }

    /// rho_c^(gamma-1) - (gamma-1) y^2 / (2 gamma K); >= 0 inside the profile support.
    double bracket(double y) const {
        return std::pow(rho_c, gas.gamma - 1.0) - (gas.gamma - 1.0) * y * y / (2.0 * gas.gamma * gas.K);
    }

    /// Upper limit of a'(t) as t -> infinity.
    double a_prime_limit() const { return std::sqrt(2.0 / kappa() + v_a * v_a); }
};

inline double initial_profile(double y, const AffineParams& p) {
    if (y < 0.0)
        throw DomainError("initial_profile: negative material radius");
    const double s = p.bracket(y);
    if (s < 0.0) {
        if (y <= p.vacuum_radius() * (1.0 + 1e-14))
            return 0.0;
        throw DomainError(fmt::format("initial_profile: y = {} beyond vacuum radius {}", y, p.vacuum_radius()));
    }
    return std::pow(s, 1.0 / (p.gas.gamma - 1.0));
}

inline double first_integral_residual(double a, double ap, const AffineParams& p) {
    const double k = p.kappa();
    return ap * ap - 2.0 / k * (1.0 - std::pow(a, -k)) - p.v_a * p.v_a;
}

struct AffineSample {
    double t;
    double a;
    double a_prime;
};

/// Trajectory of a(t) on [0, horizon] with dense output. a'' is known in
/// closed form from a, so interpolation uses quintic Hermite polynomials.
class AffineMotion {
public:
    AffineMotion(const AffineParams& p, double horizon, ode::Tolerance tol = default_tolerance())
        : p_(p), horizon_(horizon) {
        p_.validate();
        if (!(horizon >= 0.0))
            throw std::invalid_argument("integrate_motion: negative horizon");
        const double k = p_.kappa();
        auto rhs = [k](double, const ode::State<2>& y) {
            return ode::State<2>{y[1], std::pow(y[0], -k - 1.0)};
        };
        samples_ = ode::dopri5<2>(rhs, 0.0, {1.0, p_.v_a}, horizon, tol);
        for (const auto& s : samples_) {
            if (!(s.y[1] > 0.0) || !(s.y[0] >= 1.0))
                throw IntegrationFailure("integrate_motion: monotonicity lost", s.t, 0.0);
        }
    }

    static ode::Tolerance default_tolerance() {
        ode::Tolerance t;
        t.rtol = 1e-14;
        t.atol = 1e-15;
        t.h_init = 1e-4;
        t.h_max = 5e-3;
        return t;
    }

    const AffineParams& params() const { return p_; }
    double horizon() const { return horizon_; }
    const std::vector<ode::Sample<2>>& samples() const { return samples_; }

    double accel(double a) const { return std::pow(a, -p_.kappa() - 1.0); }

    /// (a, a') at time t in [0, horizon].
    AffineSample at(double t) const {
        if (t < 0.0 || t > horizon_ * (1.0 + 1e-14) + 1e-300)
            throw DomainError(fmt::format("affine motion evaluated at t = {} outside [0, {}]", t, horizon_));
        if (samples_.size() == 1)
            return {t, 1.0, p_.v_a};
        const std::size_t k = ode::locate(samples_, t);
        const auto& s0 = samples_[k];
        const auto& s1 = samples_[k + 1];
        const double h = s1.t - s0.t;
        const double th = std::clamp((t - s0.t) / h, 0.0, 1.0);
        const double k1 = -(p_.kappa() + 1.0);
        const double a0 = s0.y[0], v0 = s0.y[1], g0 = s0.dy[1];
        const double a1 = s1.y[0], v1 = s1.y[1], g1 = s1.dy[1];
        // third derivative: -(kappa+1) a^(-kappa-2) a'
        const double j0 = k1 * g0 / a0 * v0;
        const double j1 = k1 * g1 / a1 * v1;
        const double a = quintic(a0, v0, g0, a1, v1, g1, h, th);
        const double ap = quintic(v0, g0, j0, v1, g1, j1, h, th);
        return {t, a, ap};
    }

    double max_first_integral_drift() const {
        double d = 0.0;
        for (const auto& s : samples_)
            d = std::max(d, std::fabs(first_integral_residual(s.y[0], s.y[1], p_)));
        return d;
    }

    /// CSV with header t,a,a_prime,first_integral_residual. dt <= 0 writes
    /// the accepted integrator steps, otherwise a uniform sampling.
    void write_csv(std::ostream& os, double dt = 0.0) const {
        os << "t,a,a_prime,first_integral_residual\n";
        auto row = [&](double t, double a, double ap) {
            os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", t, a, ap, first_integral_residual(a, ap, p_));
        };
        if (dt <= 0.0) {
            for (const auto& s : samples_)
                row(s.t, s.y[0], s.y[1]);
            return;
        }
        const auto n = static_cast<std::size_t>(std::floor(horizon_ / dt + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) {
            const auto s = at(std::min(horizon_, static_cast<double>(i) * dt));
            row(s.t, s.a, s.a_prime);
        }
    }

private:
    static double quintic(double y0, double d0, double dd0, double y1, double d1, double dd1, double h,
                          double th) {
        const double t2 = th * th, t3 = t2 * th, t4 = t3 * th, t5 = t4 * th;
        const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        const double H1 = th - 6 * t3 + 8 * t4 - 3 * t5;
        const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double H3 = 0.5 * t3 - t4 + 0.5 * t5;
        const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
        const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
        return H0 * y0 + H5 * y1 + h * (H1 * d0 + H4 * d1) + h * h * (H2 * dd0 + H3 * dd1);
    }

    AffineParams p_;
    double horizon_;
    std::vector<ode::Sample<2>> samples_;
};

inline AffineMotion integrate_motion(const AffineParams& p, double horizon,
                                     ode::Tolerance tol = AffineMotion::default_tolerance()) {
    return AffineMotion(p, horizon, tol);
}

struct AffinePoint {
    double rho;
    double u;
    double h;
    double rho_r;
    double u_r;
    double h_r;
};

/// Closed-form state and radial gradients; `patch_only` rejects r/a > b.
inline AffinePoint affine_point(double r, double t, const AffineMotion& motion, bool patch_only = true) {
    const auto& p = motion.params();
    const auto [tt, a, ap] = motion.at(t);
    (void)tt;
    const double y = r / a;
    if (r < 0.0)
        throw DomainError("affine_state: negative radius");
    if (patch_only && y > p.b * (1.0 + 1e-12))
        throw DomainError(fmt::format("affine_state: r/a = {} outside the affine patch (b = {})", y, p.b));
    const double g = p.gas.gamma;
    const double k = p.kappa();
    const double s = p.bracket(y);
    if (!(s > 0.0))
        throw DomainError("affine_state: vacuum reached inside evaluation point");
    AffinePoint out{};
    const double ak = std::pow(a, -(p.gas.m + 1));
    out.rho = std::pow(s, 1.0 / (g - 1.0)) * ak;
    out.u = ap / a * r;
    out.u_r = ap / a;
    out.h = std::sqrt(p.gas.K * g) * std::pow(a, -0.5 * k) * std::sqrt(s);
    // ds/dr = -(gamma-1) y / (gamma K a)
    const double ds = -(g - 1.0) * y / (g * p.gas.K * a);
    out.h_r = std::sqrt(p.gas.K * g) * std::pow(a, -0.5 * k) * 0.5 / std::sqrt(s) * ds;
    out.rho_r = std::pow(s, 1.0 / (g - 1.0) - 1.0) / (g - 1.0) * ds * ak;
    return out;
}

struct RhoU {
    double rho;
    double u;
};

inline RhoU affine_state(double r, double t, const AffineMotion& motion) {
    const auto pt = affine_point(r, t, motion);
    return {pt.rho, pt.u};
}

inline CharacterPair affine_characters(double r, double t, const AffineMotion& motion) {
    const auto pt = affine_point(r, t, motion);
    return characters_from_gradients(r, pt.h, pt.u, pt.h_r, pt.u_r, motion.params().gas);
}

// ---------------------------------------------------------------------------
// Admissibility of (rho_c, v_a, b)

struct NamedCondition {
    std::string name;
    bool pass;
    double required; // lower bound on v_a, or NaN where not applicable
    double margin;   // positive when satisfied
};

struct AdmissibilityReport {
    std::vector<NamedCondition> conditions;
    double required_v_a = std::numeric_limits<double>::infinity();
    bool near_degenerate = false;

    bool pass() const {
        return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
    }
    std::vector<std::string> violated() const {
        std::vector<std::string> v;
        for (const auto& c : conditions)
            if (!c.pass)
                v.push_back(c.name);
        return v;
    }
};

namespace condition {
inline constexpr const char* vacuum_margin = "vacuum_margin";
inline constexpr const char* beta_at_corner = "beta_nonnegative_at_corner";
inline constexpr const char* z_at_corner = "z_nonnegative_at_corner";
inline constexpr const char* alpha_on_boundary = "alpha_positive_on_boundary";
} // namespace condition

inline AdmissibilityReport check_admissibility(const AffineParams& p) {
    p.validate();
    AdmissibilityReport rep;
    const double g = p.gas.gamma;
    const double kg = p.gas.K * g;
    const double s = p.bracket(p.b);
    const double lhs = std::pow(p.rho_c, g - 1.0);
    rep.conditions.push_back({condition::vacuum_margin, s > 0.0, std::nan(""), s});
    rep.near_degenerate = s < 1e-3 * lhs;
    if (!(s > 0.0)) {
        for (const char* n : {condition::beta_at_corner, condition::z_at_corner, condition::alpha_on_boundary})
            rep.conditions.push_back({n, false, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
        return rep;
    }
    const double x = std::sqrt(s);
    const double t1 = (p.gas.m + 1) * std::sqrt(kg) * x / p.b;
    const double t2 = 2.0 * std::sqrt(kg) * x / ((g - 1.0) * p.b);
    const double t3 = p.b / (std::sqrt(kg) * x);
    rep.conditions.push_back({condition::beta_at_corner, p.v_a >= t1, t1, p.v_a - t1});
    rep.conditions.push_back({condition::z_at_corner, p.v_a >= t2, t2, p.v_a - t2});
    rep.conditions.push_back({condition::alpha_on_boundary, p.v_a >= t3, t3, p.v_a - t3});
    rep.required_v_a = std::max({t1, t2, t3});
    rep.near_degenerate = rep.near_degenerate || t3 > 1e6;
    return rep;
}

// ---------------------------------------------------------------------------
// The 1-characteristic B_b(t) from (b, 0)

struct BoundaryTrace {
    std::vector<ode::Sample<1>> samples;

    double at(double t) const {
        if (samples.size() == 1)
            return samples.front().y[0];
        const std::size_t k = ode::locate(samples, t);
        return ode::hermite(samples[k], samples[k + 1], t)[0];
    }
    double end_time() const { return samples.back().t; }
};

inline BoundaryTrace trace_boundary(const AffineMotion& motion, double horizon, double rtol = 1e-12) {
    const double T = std::min(horizon, motion.horizon());
    auto rhs = [&](double t, const ode::State<1>& y) {
        const auto pt = affine_point(y[0], t, motion);
        return ode::State<1>{pt.u - pt.h};
    };
    ode::Tolerance tol;
    tol.rtol = rtol;
    tol.atol = 1e-14;
    tol.h_init = 1e-4;
    tol.h_max = 1e-3;
    return {ode::dopri5<1>(rhs, 0.0, {motion.params().b}, T, tol)};
}

struct BoundaryConclusions {
    double min_alpha = std::numeric_limits<double>::infinity();
    double min_z = std::numeric_limits<double>::infinity();
    double min_c1 = std::numeric_limits<double>::infinity();
    double min_w_minus_z = std::numeric_limits<double>::infinity();
    double beta_corner = std::nan("");
    std::size_t points = 0;

    bool hold() const {
        return min_alpha > 0.0 && min_z >= 0.0 && min_c1 > 0.0 && min_w_minus_z > 0.0 && beta_corner >= 0.0;
    }
};

/// Evaluates the boundary conclusions on `n` uniformly spaced times of the trace.
inline BoundaryConclusions boundary_conclusions(const AffineMotion& motion, const BoundaryTrace& trace,
                                                std::size_t n = 400) {
    const auto& gas = motion.params().gas;
    BoundaryConclusions bc;
    const double T = trace.end_time();
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(n);
        const double r = i == 0 ? motion.params().b : trace.at(t);
        const auto pt = affine_point(r, t, motion);
        const auto ch = characters_from_gradients(r, pt.h, pt.u, pt.h_r, pt.u_r, gas);
        const auto rz = riemann_variables(pt.h, pt.u, gas);
        bc.min_alpha = std::min(bc.min_alpha, ch.alpha);
        bc.min_z = std::min(bc.min_z, rz.z);
        bc.min_c1 = std::min(bc.min_c1, pt.u - pt.h);
        bc.min_w_minus_z = std::min(bc.min_w_minus_z, rz.w - rz.z);
        if (i == 0)
            bc.beta_corner = ch.beta;
        ++bc.points;
    }
    return bc;
}

// ---------------------------------------------------------------------------
// Compatibility of outer data with the affine boundary values

struct OuterData {
    std::function<double(double)> rho;
    std::function<double(double)> u;
};

struct CompatibilityReport {
    NamedCondition value_match;
    NamedCondition corner_derivative;
    NamedCondition boundary_ode;

    bool pass() const { return value_match.pass && corner_derivative.pass && boundary_ode.pass; }
};

namespace detail {
// One-sided third-order first derivative from the right.
template <class F>
double right_derivative(F&& f, double x, double d) {
    return (-11.0 * f(x) + 18.0 * f(x + d) - 9.0 * f(x + 2 * d) + 2.0 * f(x + 3 * d)) / (6.0 * d);
}
} // namespace detail

/// Checks, within `tol` for the two algebraic conditions:
///  - (rho0, u0)(b) equals the affine values at (b, 0);
///  - the corner derivative of w = u + 2h/(gamma-1) on the outer side equals
///    -(dw_b/dt + m u_b h_b / b) / (2 h_b), which is what the 2-characteristic
///    through the corner forces for a C^1 solution;
///  - along B_b(t), dz_b/dt = m u_b h_b / B_b, by central differences with step
///    `ode_step`, reported against `ode_tol`.
inline CompatibilityReport check_compatibility(const AffineMotion& motion, const OuterData& outer,
                                               double tol = 1e-8, double ode_step = 1e-4,
                                               double ode_tol = 1e-6, double horizon = -1.0) {
    const auto& p = motion.params();
    const auto& gas = p.gas;
    const double b = p.b;
    const double k = gas.riemann_factor();
    CompatibilityReport rep;

    const auto in = affine_point(b, 0.0, motion);
    const double drho = std::fabs(outer.rho(b) - in.rho);
    const double du = std::fabs(outer.u(b) - in.u);
    const double scale_v = std::max(1.0, std::fabs(in.u));
    const double scale_r = std::max(1.0, in.rho);
    const double vm = std::max(drho / scale_r, du / scale_v);
    rep.value_match = {"value_match", vm <= tol, tol, tol - vm};

    const double T = horizon > 0.0 ? std::min(horizon, motion.horizon()) : motion.horizon();
    const auto trace = trace_boundary(motion, T);
    auto wb = [&](double t) {
        const double r = trace.at(t);
        const auto pt = affine_point(r, t, motion);
        return pt.u + k * pt.h;
    };
    auto zb = [&](double t) {
        const double r = trace.at(t);
        const auto pt = affine_point(r, t, motion);
        return pt.u - k * pt.h;
    };
    const double dt0 = std::min(1e-4, T / 8.0);
    const double dwb = T > 0.0 ? detail::right_derivative(wb, 0.0, dt0)
                               : -(gas.m * in.u * in.h / b) - 2.0 * in.h * (in.u_r + k * in.h_r);
    auto w_outer = [&](double r) { return outer.u(r) + k * sound_speed(outer.rho(r), gas); };
    const double dw_outer = detail::right_derivative(w_outer, b, 1e-4 * b);
    const double dw_required = -(dwb + gas.m * in.u * in.h / b) / (2.0 * in.h);
    const double cd = std::fabs(dw_outer - dw_required);
    const double ctol = std::max(tol, 1e-6 * std::max(1.0, std::fabs(dw_required)));
    rep.corner_derivative = {"corner_derivative", cd <= ctol, ctol, ctol - cd};

    double worst = 0.0;
    if (T > 2.0 * ode_step) {
        const std::size_t n = 64;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = ode_step + (T - 2.0 * ode_step) * static_cast<double>(i) / static_cast<double>(n);
            const double dz = (zb(t + ode_step) - zb(t - ode_step)) / (2.0 * ode_step);
            const double r = trace.at(t);
            const auto pt = affine_point(r, t, motion);
            worst = std::max(worst, std::fabs(dz - gas.m * pt.u * pt.h / r));
        }
    }
    rep.boundary_ode = {"boundary_ode", worst <= ode_tol, ode_tol, ode_tol - worst};
    return rep;
}

} // namespace rcwave
