#pragma once

// Finite-volume solver for radially symmetric isentropic Euler in r^m-weighted
// conservation form, plus characteristic tracing through stored snapshots and
// Riccati integration along traces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rcwave/characters.hpp"
#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"
#include "rcwave/ode.hpp"
#include "rcwave/scenario.hpp"

namespace rcwave {

enum class SourceTreatment { unsplit, strang };

inline const char* to_string(SourceTreatment s) { return s == SourceTreatment::unsplit ? "unsplit" : "strang"; }

struct SolverConfig {
    double cfl = 0.4;
    int order = 2;
    SourceTreatment source = SourceTreatment::unsplit;
    double snapshot_dt = 0.05;
    double blowup_factor = 1e3;      // G_max = factor * initial max gradient
    double blowup_gradient_max = 0.; // > 0 overrides the factor rule
    double dt_collapse = 1e-10;      // relative to the first dt
    double fixed_dt = 0.0;           // > 0: fixed step, CFL is checked instead
    std::size_t max_steps = 20'000'000;

    void validate() const {
        if (!(cfl > 0.0 && cfl <= 1.0))
            throw std::invalid_argument("solver: cfl must lie in (0, 1]");
        if (order != 1 && order != 2)
            throw std::invalid_argument("solver: order must be 1 or 2");
        if (!(snapshot_dt > 0.0))
            throw std::invalid_argument("solver: snapshot_dt must be positive");
        if (!(blowup_factor > 0.0) || blowup_gradient_max < 0.0)
            throw std::invalid_argument("solver: blowup threshold must be positive");
    }
};

enum class Termination { horizon, blowup, fatal };

inline const char* to_string(Termination t) {
    switch (t) {
    case Termination::horizon: return "horizon reached";
    case Termination::blowup: return "blowup detected";
    case Termination::fatal: return "fatal";
    }
    return "?";
}

/// Snapshot of the active cells plus their characters.
struct Snapshot {
    FlowField field;
    CharacterField chars;
    double left_edge = 0.0; // active region starts here (cone or B_b)
};

struct RunRecord {
    std::vector<Snapshot> snapshots;
    Termination termination = Termination::horizon;
    std::optional<double> blowup_time;
    std::string blowup_trigger;
    std::string fatal_message;
    double final_time = 0.0;
    std::size_t steps = 0;
    double dr = 0.0;
    double initial_gradient = 0.0;
    double gradient_threshold = 0.0;
    double max_mass_defect = 0.0; // per-step relative conservation defect (unmasked runs)
};

// ---------------------------------------------------------------------------

class Solver {
public:
    static constexpr std::size_t G = 2; // ghost cells per side

    Solver(const Scenario& sc, const SolverConfig& cfg) : sc_(sc), cfg_(cfg) {
        sc_.validate();
        cfg_.validate();
        const std::size_t n = sc_.cells;
        const double dx = sc_.dr();
        nt_ = n + 2 * G;
        rc_.resize(nt_);
        vol_.resize(nt_);
        for (std::size_t i = 0; i < nt_; ++i)
            rc_[i] = sc_.r_lo + (static_cast<double>(i) - static_cast<double>(G) + 0.5) * dx;
        rf_.resize(nt_ + 1);
        for (std::size_t i = 0; i <= nt_; ++i)
            rf_[i] = sc_.r_lo + (static_cast<double>(i) - static_cast<double>(G)) * dx;
        const double m = sc_.gas.m;
        af_.resize(nt_ + 1);
        for (std::size_t i = 0; i <= nt_; ++i)
            af_[i] = rf_[i] > 0.0 ? std::pow(rf_[i], m) : 0.0;
        for (std::size_t i = 0; i < nt_; ++i) {
            const double a = std::copysign(std::pow(std::fabs(rf_[i]), m + 1), rf_[i]);
            const double c = std::copysign(std::pow(std::fabs(rf_[i + 1]), m + 1), rf_[i + 1]);
            vol_[i] = (c - a) / (m + 1);
        }
        rho_.assign(nt_, 0.0);
        mom_.assign(nt_, 0.0);
        for (std::size_t i = G; i < G + n; ++i) {
            const auto s = sc_.initial(rc_[i]);
            if (!(s.rho >= 0.0) || !std::isfinite(s.u))
                throw StepError("invalid initial state", i - G);
            rho_[i] = s.rho;
            mom_[i] = s.rho * s.u;
        }
        edge_ = initial_edge();
        t_ = 0.0;
        fill_boundaries(rho_, mom_, t_);
    }

    double time() const { return t_; }
    double dr() const { return sc_.dr(); }
    double left_edge() const { return edge_; }
    const Scenario& scenario() const { return sc_; }

    /// First and one-past-last physical index of active cells.
    std::size_t first_active() const { return first_active_; }

    FlowField field() const {
        FlowField f;
        f.t = t_;
        for (std::size_t i = first_active_; i < G + sc_.cells; ++i) {
            const double rho = rho_[i];
            const double u = rho > 0.0 ? mom_[i] / rho : 0.0;
            f.r.push_back(rc_[i]);
            f.states.push_back(CellState::from_primitive(rho, u, sc_.gas));
        }
        return f;
    }

    /// Total r^m-weighted mass over the physical window.
    double mass() const {
        double s = 0.0;
        for (std::size_t i = G; i < G + sc_.cells; ++i)
            s += vol_[i] * rho_[i];
        return s;
    }

    /// Largest stable time step over active cells.
    double cfl_dt() const {
        double smax = 0.0;
        for (std::size_t i = first_active_; i < G + sc_.cells; ++i) {
            const double rho = rho_[i];
            const double u = rho > 0.0 ? mom_[i] / rho : 0.0;
            smax = std::max(smax, std::fabs(u) + sound_speed(rho, sc_.gas));
        }
        if (!(smax > 0.0))
            return std::numeric_limits<double>::infinity();
        return cfg_.cfl * dr() / smax;
    }

    /// Max of |u_r| and |h_r| over active cells by centred differences.
    double max_gradient() const {
        double g = 0.0;
        const double inv = 1.0 / (2.0 * dr());
        for (std::size_t i = first_active_ + 1; i + 1 < G + sc_.cells; ++i) {
            const double ul = mom_[i - 1] / rho_[i - 1], ur = mom_[i + 1] / rho_[i + 1];
            const double hl = sound_speed(rho_[i - 1], sc_.gas), hr = sound_speed(rho_[i + 1], sc_.gas);
            g = std::max({g, std::fabs(ur - ul) * inv, std::fabs(hr - hl) * inv});
        }
        return g;
    }

    /// One SSP-RK2 step of size dt. Returns the boundary mass flux integrated
    /// over the step (outflow positive).
    double step(double dt) {
        if (cfg_.fixed_dt > 0.0) {
            const double lim = cfl_dt() / cfg_.cfl;
            if (dt > lim * (1.0 + 1e-12))
                throw StepError(fmt::format("CFL violation: dt = {} exceeds {}", dt, lim), 0);
        }
        if (cfg_.source == SourceTreatment::strang)
            source_half_step(0.5 * dt);
        double flux = 0.0;
        try {
            flux = rk2(dt, cfg_.order);
        } catch (const StepError&) {
            if (cfg_.order == 1)
                throw;
            restore();
            flux = rk2(dt, 1);
        }
        if (cfg_.source == SourceTreatment::strang)
            source_half_step(0.5 * dt);
        t_ += dt;
        advance_edge(dt);
        fill_boundaries(rho_, mom_, t_);
        return flux;
    }

private:
    // Conservative state before the current step, for the first-order retry.
    void save() {
        rho_save_ = rho_;
        mom_save_ = mom_;
        edge_save_ = edge_;
    }
    void restore() {
        rho_ = rho_save_;
        mom_ = mom_save_;
        edge_ = edge_save_;
        update_mask(t_);
    }

    bool weighted() const { return cfg_.source == SourceTreatment::unsplit; }

    double rk2(double dt, int order) {
        save();
        auto& r1 = s_r1_;
        auto& m1 = s_m1_;
        r1 = rho_;
        m1 = mom_;
        double f0l = 0, f0r = 0, f1l = 0, f1r = 0;
        const std::size_t lo = first_active_, hi = G + sc_.cells;
        residual(rho_, mom_, order, s_dr1_, s_dm1_, f0l, f0r);
        for (std::size_t i = lo; i < hi; ++i) {
            r1[i] = rho_[i] + dt * s_dr1_[i];
            m1[i] = mom_[i] + dt * s_dm1_[i];
        }
        check(r1, m1);
        fill_boundaries(r1, m1, t_ + dt);
        // the stage may move the mask; the final update uses the union
        const std::size_t lo2 = std::min(lo, first_active_);
        residual(r1, m1, order, s_dr2_, s_dm2_, f1l, f1r);
        for (std::size_t i = lo2; i < hi; ++i) {
            rho_[i] = 0.5 * rho_[i] + 0.5 * (r1[i] + dt * s_dr2_[i]);
            mom_[i] = 0.5 * mom_[i] + 0.5 * (m1[i] + dt * s_dm2_[i]);
        }
        check(rho_, mom_);
        return 0.5 * dt * ((f0r - f0l) + (f1r - f1l));
    }

    void check(const std::vector<double>& rho, const std::vector<double>& mom) const {
        for (std::size_t i = first_active_; i < G + sc_.cells; ++i) {
            if (!std::isfinite(rho[i]) || !std::isfinite(mom[i]))
                throw StepError("non-finite state", i - G);
            if (rho[i] < 0.0)
                throw StepError("negative density after limiting", i - G);
        }
    }

    static double minmod(double a, double b) {
        if (a * b <= 0.0)
            return 0.0;
        return std::fabs(a) < std::fabs(b) ? a : b;
    }

    // Spatial operator: fills d(rho)/dt and d(mom)/dt for physical cells and
    // reports mass flux through the outer faces (already multiplied by area
    // in the weighted form).
    void residual(const std::vector<double>& rho, const std::vector<double>& mom, int order,
                  std::vector<double>& drho, std::vector<double>& dmom, double& flux_left,
                  double& flux_right) const {
        const auto& gas = sc_.gas;
        auto& u = s_u_;
        auto& sr = s_sr_;
        auto& su = s_su_;
        auto& fr = s_fr_;
        auto& fm = s_fm_;
        drho.assign(nt_, 0.0);
        dmom.assign(nt_, 0.0);
        sr.assign(nt_, 0.0);
        su.assign(nt_, 0.0);
        fr.assign(nt_ + 1, 0.0);
        fm.assign(nt_ + 1, 0.0);
        u.resize(nt_);
        // inactive cells are overwritten by the boundary fill, so the
        // operator only needs the active range and its stencil
        const std::size_t lo = first_active_, hi = G + sc_.cells;
        const std::size_t slo = lo - std::min<std::size_t>(lo, 2);
        for (std::size_t i = slo; i < nt_; ++i)
            u[i] = rho[i] > 0.0 ? mom[i] / rho[i] : 0.0;
        if (order == 2) {
            for (std::size_t i = std::max<std::size_t>(slo, 1); i + 1 < nt_; ++i) {
                sr[i] = minmod(rho[i] - rho[i - 1], rho[i + 1] - rho[i]);
                su[i] = minmod(u[i] - u[i - 1], u[i + 1] - u[i]);
            }
        }
        const bool w = weighted();
        for (std::size_t f = lo; f <= hi; ++f) {
            const std::size_t L = f - 1, R = f;
            const double rl = rho[L] + 0.5 * sr[L], ul = u[L] + 0.5 * su[L];
            const double rr = rho[R] - 0.5 * sr[R], ur = u[R] - 0.5 * su[R];
            hll(rl, ul, rr, ur, gas, fr[f], fm[f]);
            if (w) {
                fr[f] *= af_[f];
                fm[f] *= af_[f];
            }
        }
        for (std::size_t i = lo; i < hi; ++i) {
            if (w) {
                const double p = pressure(rho[i], gas);
                drho[i] = -(fr[i + 1] - fr[i]) / vol_[i];
                dmom[i] = (-(fm[i + 1] - fm[i]) + p * (af_[i + 1] - af_[i])) / vol_[i];
            } else {
                drho[i] = -(fr[i + 1] - fr[i]) / dr();
                dmom[i] = -(fm[i + 1] - fm[i]) / dr();
            }
        }
        flux_left = fr[lo];
        flux_right = fr[G + sc_.cells];
    }

    static void hll(double rl, double ul, double rr, double ur, const GasParams& gas, double& fr, double& fm) {
        const double hl = sound_speed(std::max(rl, 0.0), gas), hr = sound_speed(std::max(rr, 0.0), gas);
        // p = rho h^2 / gamma avoids a second pow
        const double pl = std::max(rl, 0.0) * hl * hl / gas.gamma, pr = std::max(rr, 0.0) * hr * hr / gas.gamma;
        const double sl = std::min(ul - hl, ur - hr);
        const double sr = std::max(ul + hl, ur + hr);
        const double flr = rl * ul, flm = rl * ul * ul + pl;
        const double frr = rr * ur, frm = rr * ur * ur + pr;
        if (sl >= 0.0) {
            fr = flr;
            fm = flm;
        } else if (sr <= 0.0) {
            fr = frr;
            fm = frm;
        } else {
            const double inv = 1.0 / (sr - sl);
            fr = (sr * flr - sl * frr + sl * sr * (rr - rl)) * inv;
            fm = (sr * flm - sl * frm + sl * sr * (rr * ur - rl * ul)) * inv;
        }
    }

    // Geometric source for the split form, solved exactly per cell:
    // u is constant and rho decays like exp(-m u t / r).
    void source_half_step(double dt) {
        const double m = sc_.gas.m;
        for (std::size_t i = G; i < G + sc_.cells; ++i) {
            if (!(rho_[i] > 0.0))
                continue;
            const double u = mom_[i] / rho_[i];
            const double f = std::exp(-m * u * dt / rc_[i]);
            rho_[i] *= f;
            mom_[i] *= f;
        }
    }

    double initial_edge() const {
        switch (sc_.left) {
        case LeftBoundary::dependence_cone: return sc_.b;
        case LeftBoundary::characteristic: return sc_.left_edge(0.0);
        default: return -std::numeric_limits<double>::infinity();
        }
    }

    // Linear interpolation of c2 = u + h over active physical cells.
    double c2_at(double r) const {
        const std::size_t lo = first_active_, hi = G + sc_.cells - 1;
        auto c2 = [&](std::size_t i) {
            const double u = mom_[i] / rho_[i];
            return u + sound_speed(rho_[i], sc_.gas);
        };
        const double x = (r - rc_[lo]) / dr();
        if (x <= 0.0) {
            // extrapolate from the first two active cells
            return c2(lo) + x * (c2(lo + 1) - c2(lo));
        }
        std::size_t k = lo + static_cast<std::size_t>(std::floor(x));
        if (k >= hi)
            return c2(hi);
        const double th = (r - rc_[k]) / dr();
        return (1.0 - th) * c2(k) + th * c2(k + 1);
    }

    void advance_edge(double dt) {
        if (sc_.left == LeftBoundary::dependence_cone) {
            // Heun: predictor with the old field would need it stored; use the
            // new field at both ends with the old speed cached in the step.
            const double k1 = edge_speed_;
            const double pred = edge_ + dt * k1;
            const double k2 = c2_at(pred);
            edge_ = edge_ + 0.5 * dt * (k1 + k2);
        } else if (sc_.left == LeftBoundary::characteristic) {
            edge_ = sc_.left_edge(t_);
        }
    }

    void update_mask(double t) {
        (void)t;
        if (!std::isfinite(edge_)) {
            first_active_ = G;
            return;
        }
        std::size_t i = G;
        while (i < G + sc_.cells && rc_[i] < edge_)
            ++i;
        if (i + 4 >= G + sc_.cells)
            throw StepError("active region vanished", i - G);
        first_active_ = i;
    }

    void fill_boundaries(std::vector<double>& rho, std::vector<double>& mom, double t) {
        update_mask(t);
        const std::size_t n = sc_.cells;
        const auto& gas = sc_.gas;
        (void)gas;
        auto set = [&](std::size_t i, RhoU s) {
            rho[i] = s.rho;
            mom[i] = s.rho * s.u;
        };
        // left
        switch (sc_.left) {
        case LeftBoundary::prescribed:
            for (std::size_t i = 0; i < G; ++i)
                set(i, sc_.left_state(rc_[i], t));
            break;
        case LeftBoundary::characteristic:
            for (std::size_t i = 0; i < first_active_; ++i)
                set(i, sc_.left_state(rc_[i], t));
            break;
        case LeftBoundary::origin:
            for (std::size_t i = 0; i < G; ++i) {
                const std::size_t mirror = 2 * G - 1 - i;
                rho[i] = rho[mirror];
                mom[i] = -mom[mirror];
            }
            break;
        case LeftBoundary::outflow:
        case LeftBoundary::dependence_cone: {
            const std::size_t a = first_active_;
            const double r0 = rho[a], r1 = rho[a + 1];
            const double u0 = mom[a] / r0, u1 = mom[a + 1] / r1;
            for (std::size_t j = 1; j <= a; ++j) {
                const std::size_t i = a - j;
                const double d = static_cast<double>(std::min<std::size_t>(j, 3));
                double rr = r0 - d * (r1 - r0);
                const double uu = u0 - d * (u1 - u0);
                rr = std::clamp(rr, 0.5 * r0, 2.0 * r0);
                rho[i] = rr;
                mom[i] = rr * uu;
            }
            break;
        }
        }
        // right
        if (sc_.right_state) {
            for (std::size_t i = G + n; i < nt_; ++i)
                set(i, sc_.right_state(rc_[i], t));
        } else {
            const std::size_t a = G + n - 1;
            const double r0 = rho[a], r1 = rho[a - 1];
            const double u0 = mom[a] / r0, u1 = mom[a - 1] / r1;
            for (std::size_t i = G + n; i < nt_; ++i) {
                const double d = static_cast<double>(i - a);
                double rr = r0 + d * (r0 - r1);
                rr = std::clamp(rr, 0.5 * r0, 2.0 * r0);
                rho[i] = rr;
                mom[i] = rr * (u0 + d * (u0 - u1));
            }
        }
        if (sc_.left == LeftBoundary::dependence_cone && &rho == &rho_)
            edge_speed_ = c2_at(edge_);
    }

    Scenario sc_;
    SolverConfig cfg_;
    std::size_t nt_ = 0;
    std::vector<double> rc_, rf_, af_, vol_;
    std::vector<double> rho_, mom_, rho_save_, mom_save_;
    // scratch, reused across steps
    std::vector<double> s_r1_, s_m1_, s_dr1_, s_dm1_, s_dr2_, s_dm2_;
    mutable std::vector<double> s_u_, s_sr_, s_su_, s_fr_, s_fm_;
    double t_ = 0.0;
    double edge_ = 0.0, edge_save_ = 0.0, edge_speed_ = 0.0;
    std::size_t first_active_ = G;
};

inline Snapshot take_snapshot(const Solver& s) {
    Snapshot snap;
    snap.field = s.field();
    snap.chars = compute_character_field(snap.field, s.scenario().gas);
    snap.left_edge = s.left_edge();
    return snap;
}

/// Runs the scenario to its horizon or until blowup. Step errors end the run
/// with termination = fatal and the partial record kept.
inline RunRecord run(const Scenario& sc, const SolverConfig& cfg) {
    RunRecord rec;
    Solver solver(sc, cfg);
    rec.dr = solver.dr();
    rec.snapshots.push_back(take_snapshot(solver));
    if (sc.horizon <= 0.0) {
        rec.final_time = 0.0;
        return rec;
    }
    rec.initial_gradient = solver.max_gradient();
    const double g0 = rec.initial_gradient > 0.0 ? rec.initial_gradient : 1.0;
    rec.gradient_threshold = cfg.blowup_gradient_max > 0.0 ? cfg.blowup_gradient_max : cfg.blowup_factor * g0;
    const bool masked = sc.left == LeftBoundary::dependence_cone || sc.left == LeftBoundary::characteristic;

    double next_snap = std::min(cfg.snapshot_dt, sc.horizon);
    double dt0 = -1.0;
    try {
        while (solver.time() < sc.horizon) {
            if (++rec.steps > cfg.max_steps)
                throw StepError("step limit exceeded", 0);
            double dt = cfg.fixed_dt > 0.0 ? cfg.fixed_dt : solver.cfl_dt();
            if (dt0 < 0.0)
                dt0 = dt;
            if (dt < cfg.dt_collapse * dt0) {
                rec.termination = Termination::blowup;
                rec.blowup_time = solver.time();
                rec.blowup_trigger = "dt_collapse";
                break;
            }
            bool hits_snap = false;
            if (solver.time() + dt >= next_snap) {
                dt = next_snap - solver.time();
                hits_snap = true;
            }
            const double m0 = solver.mass();
            const double flux = solver.step(dt);
            if (!masked && cfg.source == SourceTreatment::unsplit && m0 > 0.0)
                rec.max_mass_defect = std::max(rec.max_mass_defect, std::fabs(solver.mass() - m0 + flux) / m0);
            if (hits_snap) {
                rec.snapshots.push_back(take_snapshot(solver));
                next_snap = std::min(next_snap + cfg.snapshot_dt, sc.horizon);
                if (sc.horizon - next_snap < 1e-12 * sc.horizon)
                    next_snap = sc.horizon;
            }
            const double g = solver.max_gradient();
            if (g > rec.gradient_threshold) {
                rec.termination = Termination::blowup;
                rec.blowup_time = solver.time();
                rec.blowup_trigger = "gradient";
                if (!hits_snap)
                    rec.snapshots.push_back(take_snapshot(solver));
                break;
            }
        }
    } catch (const StepError& e) {
        rec.termination = Termination::fatal;
        rec.fatal_message = fmt::format("{} (cell {})", e.what(), e.cell());
    } catch (const std::exception& e) {
        rec.termination = Termination::fatal;
        rec.fatal_message = e.what();
    }
    rec.final_time = solver.time();
    return rec;
}

// ---------------------------------------------------------------------------
// Interpolation in (r, t) through snapshots

struct PointSample {
    double rho, u, h, alpha, beta;
};

/// Linear interpolation in r within one snapshot; nullopt outside its active range.
inline std::optional<PointSample> sample_snapshot(const Snapshot& s, double r) {
    const auto& rv = s.field.r;
    if (rv.size() < 2 || r < rv.front() || r > rv.back())
        return std::nullopt;
    auto it = std::upper_bound(rv.begin(), rv.end(), r);
    std::size_t k = static_cast<std::size_t>(it - rv.begin());
    k = std::clamp<std::size_t>(k, 1, rv.size() - 1) - 1;
    const double th = (r - rv[k]) / (rv[k + 1] - rv[k]);
    const auto& a = s.field.states[k];
    const auto& b = s.field.states[k + 1];
    if (!s.chars.defined[k] || !s.chars.defined[k + 1])
        return std::nullopt;
    auto lerp = [th](double x, double y) { return (1.0 - th) * x + th * y; };
    return PointSample{lerp(a.rho, b.rho), lerp(a.u, b.u), lerp(a.h, b.h),
                       lerp(s.chars.alpha[k], s.chars.alpha[k + 1]), lerp(s.chars.beta[k], s.chars.beta[k + 1])};
}

/// Bilinear interpolation in (r, t); nullopt outside the stored domain.
inline std::optional<PointSample> sample_record(const RunRecord& rec, double r, double t) {
    const auto& s = rec.snapshots;
    if (s.empty() || t < s.front().field.t || t > s.back().field.t)
        return std::nullopt;
    std::size_t k = 0;
    while (k + 1 < s.size() && s[k + 1].field.t < t)
        ++k;
    if (k + 1 >= s.size())
        return sample_snapshot(s[k], r);
    const double t0 = s[k].field.t, t1 = s[k + 1].field.t;
    const auto p0 = sample_snapshot(s[k], r);
    const auto p1 = sample_snapshot(s[k + 1], r);
    if (!p0 || !p1)
        return std::nullopt;
    const double th = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    auto lerp = [th](double x, double y) { return (1.0 - th) * x + th * y; };
    return PointSample{lerp(p0->rho, p1->rho), lerp(p0->u, p1->u), lerp(p0->h, p1->h), lerp(p0->alpha, p1->alpha),
                       lerp(p0->beta, p1->beta)};
}

struct TracePoint {
    double t, r;
    PointSample state;
};

struct CharacteristicTrace {
    int family = 1;
    std::vector<TracePoint> path;
    bool truncated = false;
};

/// Integrates dr/dt = c_family through the stored snapshots with RK4 steps of
/// at most `max_step` (default: a quarter of the snapshot spacing).
inline CharacteristicTrace trace_characteristic(int family, double r0, double t0, const RunRecord& rec,
                                                double t_end = -1.0, double max_step = -1.0) {
    if (family != 1 && family != 2)
        throw std::invalid_argument("trace_characteristic: family must be 1 or 2");
    CharacteristicTrace tr;
    tr.family = family;
    const double T = t_end > 0.0 ? std::min(t_end, rec.snapshots.back().field.t) : rec.snapshots.back().field.t;
    double cadence = T - t0;
    if (rec.snapshots.size() > 1)
        cadence = rec.snapshots[1].field.t - rec.snapshots[0].field.t;
    const double hmax = max_step > 0.0 ? max_step : 0.25 * cadence;
    const auto first = sample_record(rec, r0, t0);
    if (!first)
        throw DomainError("trace_characteristic: start point outside the computed domain");
    tr.path.push_back({t0, r0, *first});
    auto speed = [&](double t, const ode::State<1>& y) {
        const auto p = sample_record(rec, y[0], t);
        if (!p)
            throw DomainError("trace left domain");
        return ode::State<1>{family == 1 ? p->u - p->h : p->u + p->h};
    };
    double t = t0, r = r0;
    while (t < T - 1e-14 * std::max(1.0, T)) {
        const double h = std::min(hmax, T - t);
        try {
            r = ode::rk4_step<1>(speed, t, {r}, h)[0];
            t += h;
            const auto p = sample_record(rec, r, t);
            if (!p)
                throw DomainError("trace left domain");
            tr.path.push_back({t, r, *p});
        } catch (const DomainError&) {
            tr.truncated = true;
            break;
        }
    }
    return tr;
}

struct RiccatiHistory {
    std::vector<double> t;
    std::vector<double> integrated;
    std::vector<double> field;
    double max_relative_deviation = 0.0;
    bool truncated = false;
};

/// Along a family-1 trace integrates d(beta)/dt from the Riccati law with
/// alpha and the coefficients taken from the field; family 2 integrates alpha.
/// Deviation is max |integrated - field| / max |field| along the trace.
inline RiccatiHistory integrate_riccati_along(const CharacteristicTrace& tr, const RunRecord& rec,
                                              const GasParams& gas) {
    RiccatiHistory hist;
    if (tr.path.empty())
        return hist;
    auto rhs = [&](double t, double r, double y) {
        const auto p = sample_record(rec, r, t);
        if (!p)
            throw DomainError("riccati: sample outside domain");
        const auto c = riccati_coeffs(r, p->h, p->u, gas);
        if (tr.family == 1)
            return riccati_rhs(p->alpha, y, c, gas).d1_beta;
        return riccati_rhs(y, p->beta, c, gas).d2_alpha;
    };
    const auto pick = [&](const PointSample& p) { return tr.family == 1 ? p.beta : p.alpha; };
    double y = pick(tr.path.front().state);
    hist.t.push_back(tr.path.front().t);
    hist.integrated.push_back(y);
    hist.field.push_back(y);
    double scale = std::fabs(y), dev = 0.0;
    for (std::size_t i = 1; i < tr.path.size(); ++i) {
        const auto& a = tr.path[i - 1];
        const auto& b = tr.path[i];
        const double h = b.t - a.t;
        const double rm = 0.5 * (a.r + b.r);
        try {
            // path midpoint approximated linearly; the path is smooth
            const double k1 = rhs(a.t, a.r, y);
            const double k2 = rhs(a.t + 0.5 * h, rm, y + 0.5 * h * k1);
            const double k3 = rhs(a.t + 0.5 * h, rm, y + 0.5 * h * k2);
            const double k4 = rhs(b.t, b.r, y + h * k3);
            y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        } catch (const std::exception&) {
            hist.truncated = true;
            break;
        }
        if (!std::isfinite(y)) {
            hist.truncated = true;
            break;
        }
        const double f = pick(b.state);
        hist.t.push_back(b.t);
        hist.integrated.push_back(y);
        hist.field.push_back(f);
        scale = std::max(scale, std::fabs(f));
        dev = std::max(dev, std::fabs(y - f));
    }
    hist.max_relative_deviation = scale > 0.0 ? dev / scale : dev;
    return hist;
}

/// Time at which the integrated character runs away: the first history time
/// with a non-finite value, otherwise the Riccati law is continued past the
/// trace end with coefficients frozen there until |y| exceeds `runaway`
/// times its starting magnitude. Empty when nothing diverges before `t_cap`.
inline std::optional<double> riccati_divergence_time(const CharacteristicTrace& tr, const RiccatiHistory& hist,
                                                     const GasParams& gas, double t_cap, double runaway = 1e6) {
    if (tr.path.empty() || hist.t.empty())
        return std::nullopt;
    if (hist.truncated && hist.t.size() < tr.path.size())
        return hist.t.back();
    const double y0 = std::fabs(hist.integrated.front());
    const double limit = runaway * std::max(y0, 1.0);
    const auto& end = tr.path[hist.t.size() - 1];
    const auto c = riccati_coeffs(end.r, end.state.h, end.state.u, gas);
    auto f = [&](double y) {
        return tr.family == 1 ? riccati_rhs(end.state.alpha, y, c, gas).d1_beta
                              : riccati_rhs(y, end.state.beta, c, gas).d2_alpha;
    };
    double t = hist.t.back(), y = hist.integrated.back();
    while (t < t_cap) {
        if (!std::isfinite(y) || std::fabs(y) > limit)
            return t;
        // step shrinks with |y| so the quadratic growth stays resolved
        const double h = std::min(t_cap - t, 1e-3 / std::max(std::fabs(f(y)) / std::max(std::fabs(y), 1.0), 1.0));
        const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    if (!std::isfinite(y) || std::fabs(y) > limit)
        return t;
    return std::nullopt;
}

} // namespace rcwave
