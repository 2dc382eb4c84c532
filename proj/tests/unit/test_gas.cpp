#include <gtest/gtest.h>

#include "rcwave/gas.hpp"

using namespace rcwave;

TEST(Gas, SoundSpeedValues) {
    const auto g = GasParams::make(2.0, 1.0, 1);
    EXPECT_EQ(sound_speed(0.0, g), 0.0);
    EXPECT_NEAR(sound_speed(0.5, g), 1.0, 1e-15);
    EXPECT_NEAR(sound_speed(2.0, g), 2.0, 1e-15);
    EXPECT_THROW(sound_speed(-1.0, g), DomainError);
}

TEST(Gas, DensityFromSoundSpeed) {
    const auto g = GasParams::make(2.0, 1.0, 1);
    EXPECT_EQ(rho_from_sound_speed(0.0, g), 0.0);
    EXPECT_NEAR(rho_from_sound_speed(1.0, g), 0.5, 1e-15);
    EXPECT_THROW(rho_from_sound_speed(-1e-3, g), DomainError);
    for (double gamma : {1.2, 1.4, 2.0, 2.9})
        for (double rho : {1e-6, 1.0, 10.0}) {
            const auto gg = GasParams::make(gamma, 0.7, 2);
            EXPECT_NEAR(rho_from_sound_speed(sound_speed(rho, gg), gg) / rho, 1.0, 1e-12);
        }
}

TEST(Gas, RiemannVariables) {
    const auto g2 = GasParams::make(2.0, 1.0, 1);
    auto p = riemann_variables(1.0, 3.0, g2);
    EXPECT_NEAR(p.w, 5.0, 1e-15);
    EXPECT_NEAR(p.z, 1.0, 1e-15);
    const auto g14 = GasParams::make(1.4, 1.0, 1);
    p = riemann_variables(0.2, 1.0, g14);
    EXPECT_NEAR(p.w, 2.0, 1e-14);
    EXPECT_NEAR(p.z, 0.0, 1e-14);
    p = riemann_variables(0.0, 0.7, g14);
    EXPECT_EQ(p.w, 0.7);
    EXPECT_EQ(p.z, 0.7);
}

TEST(Gas, WaveSpeeds) {
    auto s = wave_speeds(1.0, 3.0);
    EXPECT_EQ(s.c1, 2.0);
    EXPECT_EQ(s.c2, 4.0);
    s = wave_speeds(0.0, 1.5);
    EXPECT_EQ(s.c1, 1.5);
    EXPECT_EQ(s.c2, 1.5);
}

TEST(Gas, ParameterValidation) {
    try {
        GasParams::make(3.5, 1.0, 1);
        FAIL() << "gamma = 3.5 accepted";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "gamma out of (1,3)");
    }
    EXPECT_THROW(GasParams::make(1.0, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(GasParams::make(3.0, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(GasParams::make(2.0, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(GasParams::make(2.0, 1.0, 3), std::invalid_argument);
}

TEST(Gas, FlowFieldDerivedColumns) {
    const auto g = GasParams::make(2.0, 1.0, 1);
    const auto f = FlowField::from_primitive(0.0, {1.0, 2.0, 3.0}, {0.5, 2.0, 1.0}, {3.0, 5.0, 4.0}, g);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_NEAR(f.states[0].h, 1.0, 1e-15);
    EXPECT_NEAR(f.states[0].w, 5.0, 1e-15);
    EXPECT_NEAR(f.states[1].c1, 3.0, 1e-15);
    EXPECT_NEAR(f.states[1].c2, 7.0, 1e-15);
}
