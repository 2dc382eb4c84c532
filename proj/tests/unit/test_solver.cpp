#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rcwave/solver.hpp"

using namespace rcwave;

namespace {
RunRecord affine_run(std::size_t n, double T = 0.5, double snap = 0.5) {
    const AffineParams ap{GasParams::make(2.0, 1.0, 2), 1.0, 1.0, 1.2};
    const auto sc = affine_window_scenario(ap, 0.2, 1.0, n, T);
    SolverConfig cfg;
    cfg.snapshot_dt = snap;
    return run(sc, cfg);
}
} // namespace

TEST(Solver, ConfigValidation) {
    SolverConfig c;
    c.cfl = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.order = 3;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.snapshot_dt = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Solver, AffineWindowSecondOrder) {
    const AffineParams ap{GasParams::make(2.0, 1.0, 2), 1.0, 1.0, 1.2};
    std::vector<double> err;
    for (std::size_t n : {128u, 256u, 512u}) {
        const auto sc = affine_window_scenario(ap, 0.2, 1.0, n, 0.5);
        SolverConfig cfg;
        cfg.snapshot_dt = 0.5;
        const auto rec = run(sc, cfg);
        ASSERT_EQ(rec.termination, Termination::horizon);
        err.push_back(oracle::affine_linf_error(rec, *sc.affine));
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
}

TEST(Solver, ZeroHorizonGivesInitialSnapshot) {
    const auto rec = affine_run(64, 0.0);
    ASSERT_EQ(rec.snapshots.size(), 1u);
    EXPECT_EQ(rec.snapshots.front().field.t, 0.0);
    EXPECT_EQ(rec.termination, Termination::horizon);
}

TEST(Solver, PositivityAndInitialFinalSnapshots) {
    RarefactionSetup p;
    p.gas = GasParams::make(1.4, 1.0, 2);
    p.cells = 400;
    const auto sc = rarefaction_scenario(p);
    const auto rec = run(sc, SolverConfig{});
    ASSERT_GE(rec.snapshots.size(), 2u);
    EXPECT_EQ(rec.snapshots.front().field.t, 0.0);
    EXPECT_NEAR(rec.snapshots.back().field.t, sc.horizon, 1e-12);
    for (const auto& s : rec.snapshots)
        for (const auto& c : s.field.states)
            ASSERT_GT(c.rho, 0.0);
}

TEST(Solver, MassConservedUpToBoundaryFluxes) {
    const auto rec = affine_run(256, 0.5, 0.1);
    EXPECT_LE(rec.max_mass_defect, 1e-10);
}

// Supersonic outflow: nothing travels left, so the right boundary position
// cannot influence the window.
TEST(Solver, RightBoundaryInsensitive) {
    RarefactionSetup p;
    p.gas = GasParams::make(2.0, 1.0, 1);
    p.cells = 400;
    p.r_hi = 7.0;
    const auto a = rarefaction_scenario(p);
    p.r_hi = 13.0;
    p.cells = 400 * 2;
    p.horizon = a.horizon;
    auto b = rarefaction_scenario(p);
    ASSERT_NEAR(a.dr(), b.dr(), 1e-3 * a.dr());
    SolverConfig cfg;
    cfg.snapshot_dt = a.horizon;
    const auto ra = run(a, cfg), rb = run(b, cfg);
    const auto& fa = ra.snapshots.back().field;
    const auto& fb = rb.snapshots.back().field;
    const double c2max = 2.0 * a.C0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (fa.r[i] > a.r_hi - c2max * a.horizon - 10 * a.dr())
            break;
        const auto it = std::lower_bound(fb.r.begin(), fb.r.end(), fa.r[i] - 1e-9);
        ASSERT_NE(it, fb.r.end());
        const auto j = static_cast<std::size_t>(it - fb.r.begin());
        EXPECT_NEAR(fb.states[j].rho / fa.states[i].rho, 1.0, 1e-6) << fa.r[i];
        EXPECT_NEAR(fb.states[j].u / fa.states[i].u, 1.0, 1e-6) << fa.r[i];
    }
}

// Problem 1 twin runs: data left of b only reach cells outside the cone.
TEST(Solver, DomainOfDependence) {
    RarefactionSetup p;
    p.gas = GasParams::make(2.0, 1.0, 1);
    p.cells = 400;
    p.r_lo = 0.8;
    auto a = rarefaction_scenario(p);
    auto b = a;
    const auto base = a.initial;
    b.initial = [base](double r) {
        auto s = base(r);
        if (r < 0.95)
            s.u *= 1.0 + 0.05 * std::sin(40.0 * r);
        return s;
    };
    SolverConfig cfg;
    cfg.snapshot_dt = a.horizon / 4;
    const auto ra = run(a, cfg), rb = run(b, cfg);
    ASSERT_EQ(ra.snapshots.size(), rb.snapshots.size());
    for (std::size_t k = 0; k < ra.snapshots.size(); ++k) {
        const auto& sa = ra.snapshots[k];
        const auto& sb = rb.snapshots[k];
        for (std::size_t i = 0; i < sa.field.size(); ++i) {
            if (sa.field.r[i] < sa.left_edge + 4 * a.dr())
                continue;
            ASSERT_EQ(sa.field.states[i].rho, sb.field.states[i].rho) << "t " << sa.field.t << " r " << sa.field.r[i];
            ASSERT_EQ(sa.field.states[i].u, sb.field.states[i].u);
        }
    }
}

TEST(Solver, Deterministic) {
    const auto a = affine_run(128, 0.3, 0.1);
    const auto b = affine_run(128, 0.3, 0.1);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        for (std::size_t i = 0; i < a.snapshots[k].field.size(); ++i)
            ASSERT_EQ(a.snapshots[k].field.states[i].rho, b.snapshots[k].field.states[i].rho);
}

TEST(Tracing, BoundaryCharacteristicOfAffineRun) {
    const AffineParams ap{GasParams::make(2.0, 1.0, 1), 1.0, 3.0, 1.0};
    const auto sc = affine_window_scenario(ap, 0.3, 0.95, 800, 0.2);
    SolverConfig cfg;
    cfg.snapshot_dt = 0.01;
    const auto rec = run(sc, cfg);
    // the 1-characteristic from (0.5, 0) is B_b(t) of a patch of radius 0.5
    AffineParams inner = ap;
    inner.b = 0.5;
    const AffineMotion motion(inner, 0.2);
    const auto exact = trace_boundary(motion, 0.2);
    const auto tr = trace_characteristic(1, 0.5, 0.0, rec);
    ASSERT_FALSE(tr.truncated);
    for (const auto& pt : tr.path)
        EXPECT_NEAR(pt.r, exact.at(pt.t), 2e-4) << pt.t;
    const auto tr2 = trace_characteristic(2, 0.4, 0.0, rec);
    for (std::size_t i = 1; i < tr2.path.size(); ++i)
        EXPECT_GT(tr2.path[i].r, tr2.path[i - 1].r);
}

TEST(Tracing, RiccatiHomogeneityOnSteadyData) {
    RarefactionSetup p;
    p.gas = GasParams::make(2.0, 1.0, 1);
    p.alpha.amplitude = 0.0;
    p.beta.amplitude = 0.0;
    p.cells = 800;
    const auto sc = rarefaction_scenario(p);
    SolverConfig cfg;
    cfg.snapshot_dt = 0.025;
    const auto rec = run(sc, cfg);
    for (int fam : {1, 2}) {
        const auto tr = trace_characteristic(fam, 2.0, 0.0, rec);
        const auto h = integrate_riccati_along(tr, rec, sc.gas);
        ASSERT_FALSE(h.integrated.empty());
        EXPECT_EQ(h.integrated.front(), h.integrated.front()); // not NaN
        for (double v : h.integrated)
            EXPECT_LE(std::fabs(v), 1e-3);
    }
}

TEST(Tracing, RiccatiCrossValidationImproves) {
    double prev = 1.0;
    for (std::size_t n : {400u, 800u}) {
        RarefactionSetup p;
        p.gas = GasParams::make(2.0, 1.0, 1);
        p.cells = n;
        const auto sc = rarefaction_scenario(p);
        SolverConfig cfg;
        cfg.snapshot_dt = 0.025;
        const auto rec = run(sc, cfg);
        double worst = 0.0;
        for (double r0 : {2.5, 3.0}) {
            const auto h = integrate_riccati_along(trace_characteristic(1, r0, 0.0, rec), rec, sc.gas);
            worst = std::max(worst, h.max_relative_deviation);
        }
        const auto h2 = integrate_riccati_along(trace_characteristic(2, 1.75, 0.0, rec), rec, sc.gas);
        worst = std::max(worst, h2.max_relative_deviation);
        EXPECT_LT(worst, prev);
        prev = worst;
    }
    EXPECT_LE(prev, 0.05);
}
