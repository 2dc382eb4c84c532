#include <gtest/gtest.h>

#include <sstream>

#include "rcwave/affine.hpp"
#include "rcwave/scenario.hpp"

using namespace rcwave;

namespace {
AffineParams worked(double v_a = 3.0) { return {GasParams::make(2.0, 1.0, 1), 1.0, v_a, 1.0}; }
} // namespace

TEST(Affine, InitialProfile) {
    const auto p = worked();
    EXPECT_NEAR(initial_profile(0.0, p), 1.0, 1e-15);
    EXPECT_NEAR(initial_profile(1.0, p), 0.75, 1e-15);
    EXPECT_NEAR(initial_profile(p.vacuum_radius(), p), 0.0, 1e-7);
    EXPECT_NEAR(p.vacuum_radius(), 2.0, 1e-14);
    EXPECT_THROW(initial_profile(2.1, p), DomainError);
}

TEST(Affine, TrajectoryStartAndLongTimeLimit) {
    for (double gamma : {1.4, 2.0, 2.5})
        for (int m : {1, 2}) {
            const AffineParams p{GasParams::make(gamma, 1.0, m), 1.0, 1.0, 0.5};
            const AffineMotion motion(p, 50.0);
            const auto s0 = motion.at(0.0);
            EXPECT_EQ(s0.a, 1.0);
            EXPECT_EQ(s0.a_prime, 1.0);
            double prev = s0.a_prime;
            for (double t = 1.0; t <= 50.0; t += 1.0) {
                const auto s = motion.at(t);
                EXPECT_GE(s.a, 1.0);
                EXPECT_GT(s.a_prime, prev);
                EXPECT_LT(s.a_prime, p.a_prime_limit());
                prev = s.a_prime;
            }
        }
}

TEST(Affine, FirstIntegralDrift) {
    for (double v : {0.5, 1.0, 3.0})
        for (double gamma : {1.2, 1.4, 2.0, 2.5})
            for (int m : {1, 2}) {
                const AffineParams p{GasParams::make(gamma, 1.0, m), 1.0, v, 0.5};
                const AffineMotion motion(p, 50.0);
                EXPECT_LE(motion.max_first_integral_drift(), 1e-10) << v << " " << gamma << " " << m;
            }
}

TEST(Affine, StateAtCentreAndInitialTime) {
    const auto p = worked();
    const AffineMotion motion(p, 2.0);
    const auto s0 = affine_state(0.7, 0.0, motion);
    EXPECT_NEAR(s0.rho, initial_profile(0.7, p), 1e-14);
    EXPECT_NEAR(s0.u, 3.0 * 0.7, 1e-14);
    for (double t : {0.3, 1.0, 2.0}) {
        const double a = motion.at(t).a;
        const auto c = affine_state(0.0, t, motion);
        EXPECT_NEAR(c.rho, 1.0 / std::pow(a, p.gas.m + 1), 1e-13);
        EXPECT_EQ(c.u, 0.0);
    }
    EXPECT_THROW(affine_state(1.5, 0.0, motion), DomainError);
}

// Mass along material lines: rho(a y, t) a^(m+1) is constant in t.
TEST(Affine, MaterialMassInvariant) {
    const AffineParams p{GasParams::make(1.4, 1.0, 2), 1.0, 1.0, 1.0};
    const AffineMotion motion(p, 3.0);
    for (double y : {0.1, 0.5, 0.9}) {
        const double ref = affine_state(y, 0.0, motion).rho;
        for (double t : {0.5, 1.5, 3.0}) {
            const double a = motion.at(t).a;
            EXPECT_NEAR(affine_state(a * y, t, motion).rho * std::pow(a, p.gas.m + 1) / ref, 1.0, 1e-10);
        }
    }
}

// Residual of the mass and momentum equations by central differences.
TEST(Affine, SatisfiesEulerEquations) {
    const AffineParams p{GasParams::make(2.0, 1.0, 2), 1.0, 3.0, 1.0};
    const AffineMotion motion(p, 1.0);
    double prev = 0.0;
    for (double d : {1e-3, 5e-4, 2.5e-4}) {
        double res = 0.0;
        for (double r : {0.2, 0.5, 0.8})
            for (double t : {0.2, 0.5}) {
                auto S = [&](double rr, double tt) { return affine_state(rr, tt, motion); };
                const auto c = S(r, t);
                const double rho_t = (S(r, t + d).rho - S(r, t - d).rho) / (2 * d);
                const double u_t = (S(r, t + d).u - S(r, t - d).u) / (2 * d);
                const double rho_r = (S(r + d, t).rho - S(r - d, t).rho) / (2 * d);
                const double u_r = (S(r + d, t).u - S(r - d, t).u) / (2 * d);
                const double p_r = (pressure(S(r + d, t).rho, p.gas) - pressure(S(r - d, t).rho, p.gas)) / (2 * d);
                const double mass = rho_t + c.u * rho_r + c.rho * u_r + p.gas.m / r * c.rho * c.u;
                const double mom = u_t + c.u * u_r + p_r / c.rho;
                res = std::max({res, std::fabs(mass), std::fabs(mom)});
            }
        if (prev > 0.0) {
            EXPECT_GE(std::log2(prev / res), 1.8);
        }
        prev = res;
    }
}

TEST(Affine, VelocityCeilingOnPatch) {
    const auto p = worked();
    const AffineMotion motion(p, 10.0);
    for (double t = 0.0; t <= 10.0; t += 0.5) {
        const double a = motion.at(t).a;
        EXPECT_LE(affine_state(a * p.b, t, motion).u, p.a_prime_limit() * p.b * a);
        EXPECT_LE(motion.at(t).a_prime * p.b, p.a_prime_limit() * p.b);
    }
}

TEST(Affine, AdmissibilityWorkedExample) {
    const auto ok = check_admissibility(worked(3.0));
    EXPECT_TRUE(ok.pass());
    EXPECT_FALSE(ok.near_degenerate);
    const auto bad = check_admissibility(worked(2.0));
    EXPECT_FALSE(bad.pass());
    const auto v = bad.violated();
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], condition::beta_at_corner);
    EXPECT_EQ(v[1], condition::z_at_corner);
}

TEST(Affine, AdmissibilityNearVacuumRadius) {
    auto p = worked();
    double prev = 0.0;
    for (double f : {0.9, 0.99, 0.999, 0.99999}) {
        p.b = f * p.vacuum_radius();
        const auto rep = check_admissibility(p);
        EXPECT_GT(rep.required_v_a, prev);
        prev = rep.required_v_a;
    }
    p.b = (1.0 - 1e-12) * p.vacuum_radius();
    EXPECT_TRUE(check_admissibility(p).near_degenerate);
}

TEST(Affine, BoundaryConclusions) {
    const auto p = worked(3.0);
    const AffineMotion motion(p, 5.0);
    const auto trace = trace_boundary(motion, 5.0);
    const auto bc = boundary_conclusions(motion, trace);
    EXPECT_TRUE(bc.hold());
    EXPECT_GT(bc.min_alpha, 0.0);
    EXPECT_GE(bc.min_z, 0.0);
    EXPECT_GT(bc.min_c1, 0.0);
    EXPECT_GE(bc.beta_corner, 0.0);
}

TEST(Affine, CompatibilityOfC1Extension) {
    const auto p = worked(3.0);
    const AffineMotion motion(p, 1.0);
    OuterData same{[&](double r) { return initial_profile(r, p); }, [&](double r) { return p.v_a * r; }};
    // the affine profile continued past b is a C^1 extension, but it is not
    // forced to satisfy the corner relation; only values and the ODE are checked
    const auto rep = check_compatibility(motion, same, 1e-8, 1e-4, 1e-6, 1.0);
    EXPECT_TRUE(rep.value_match.pass);
    EXPECT_TRUE(rep.boundary_ode.pass);
}

TEST(Affine, CompatibilityOfCompositeData) {
    CompositeSetup s;
    s.affine = worked(3.0);
    s.r_hi = 4.0;
    const auto sc = affine_composite_scenario(s);
    const auto rep = check_compatibility(*sc.affine, outer_data(sc), 1e-8, 1e-4, 1e-6, 1.0);
    EXPECT_TRUE(rep.pass()) << rep.value_match.margin << " " << rep.corner_derivative.margin << " "
                            << rep.boundary_ode.margin;

    // a kink in u at b breaks the corner condition by the jump size
    OuterData kinked = outer_data(sc);
    const auto base_u = kinked.u;
    const double jump = 0.3;
    kinked.u = [base_u, jump, b = s.affine.b](double r) { return base_u(r) + jump * (r - b); };
    const auto bad = check_compatibility(*sc.affine, kinked, 1e-8, 1e-4, 1e-6, 1.0);
    EXPECT_TRUE(bad.value_match.pass);
    EXPECT_FALSE(bad.corner_derivative.pass);
    EXPECT_NEAR(-bad.corner_derivative.margin, jump, 0.05 * jump);
}

TEST(Affine, BoundaryOdeResidualShrinksWithStep) {
    const auto p = worked(3.0);
    const AffineMotion motion(p, 1.0);
    OuterData same{[&](double r) { return initial_profile(r, p); }, [&](double r) { return p.v_a * r; }};
    double prev = 0.0;
    for (double step : {1e-2, 5e-3, 2.5e-3}) {
        const auto rep = check_compatibility(motion, same, 1e-8, step, 1.0, 1.0);
        const double res = 1.0 - rep.boundary_ode.margin;
        if (prev > 0.0) {
            EXPECT_LT(res, prev);
        }
        prev = res;
    }
}

TEST(Affine, TrajectoryCsv) {
    const AffineMotion motion(worked(), 1.0);
    std::ostringstream os;
    motion.write_csv(os, 0.25);
    const auto s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "t,a,a_prime,first_integral_residual");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
}
