#include <gtest/gtest.h>

#include "rcwave/config.hpp"

using namespace rcwave;

namespace {
const char* kMinimal = R"([gas]
gamma = 2
K = 1
m = 1

[domain]
b = 1
R = 10
T = 1

[initial]
preset = affine_composite
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
    return s;
}

const char* kCompressive = R"([gas]
gamma = 2
K = 1
m = 1

[domain]
b = 1

[initial]
preset = compressive
)";
} // namespace

TEST(Config, MinimalCompositeParsesAndPassesAssumptions) {
    const auto pc = parse_config_text(kMinimal);
    EXPECT_TRUE(pc.assumptions.pass()) << pc.assumptions.failed();
    EXPECT_FALSE(pc.waived);
    EXPECT_EQ(pc.scenario.preset, "affine_composite");
    EXPECT_EQ(pc.scenario.left, LeftBoundary::characteristic);
    EXPECT_EQ(pc.scenario.r_hi, 10.0);
    EXPECT_EQ(pc.scenario.horizon, 1.0);
}

TEST(Config, GammaOutOfRange) {
    try {
        parse_config_text(replace(kMinimal, "gamma = 2", "gamma = 3.5"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "gas.gamma");
        EXPECT_NE(std::string(e.what()).find("gamma out of (1,3)"), std::string::npos);
    }
}

TEST(Config, MissingAndMalformedKeys) {
    try {
        parse_config_text(replace(kMinimal, "K = 1\n", ""));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "gas.K");
    }
    try {
        parse_config_text(replace(kMinimal, "b = 1", "b = one"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "domain.b");
    }
    try {
        parse_config_text(replace(kMinimal, "T = 1", "T = 1\nbogus = 2"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "domain.bogus");
    }
    try {
        parse_config_text(replace(kMinimal, "affine_composite", "spiral"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "initial.preset");
    }
}

TEST(Config, InadmissibleAffineCoreRejected) {
    const auto text = replace(kMinimal, "preset = affine_composite", "preset = affine_composite\nv_a = 2");
    EXPECT_THROW(parse_config_text(text), ConfigError);
    const auto pc = parse_config_text(text, true);
    EXPECT_TRUE(pc.waived);
    EXPECT_NE(pc.assumptions.failed().find("admissibility.beta_nonnegative_at_corner"), std::string::npos);
}

TEST(Config, CompressiveNeedsWaiver) {
    try {
        parse_config_text(kCompressive);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("assumption violation"), std::string::npos);
    }
    const auto pc = parse_config_text(kCompressive, true);
    EXPECT_TRUE(pc.waived);
    EXPECT_TRUE(pc.scenario.waived);
    ASSERT_TRUE(pc.N_threshold.has_value());
    ASSERT_TRUE(pc.scenario.seed.has_value());
    EXPECT_NEAR(*pc.scenario.seed, -*pc.N_threshold, 1e-12);
    EXPECT_NE(pc.echo.find("waive_assumptions = true"), std::string::npos);
    // the waiver may also come from the file
    const auto pf = parse_config_text(std::string(kCompressive) + "\n[verify]\nwaive_assumptions = true\n");
    EXPECT_TRUE(pf.waived);
}

TEST(Config, EchoReparsesToSameHash) {
    const auto a = parse_config_text(kMinimal, false, 2);
    EXPECT_EQ(a.scenario.cells, 1600u);
    const auto b = parse_config_text(a.echo);
    EXPECT_EQ(a.echo, b.echo);
    EXPECT_EQ(a.hash, b.hash);
    EXPECT_EQ(b.scenario.cells, 1600u);
}

TEST(Config, RarefactionDefaultsHorizon) {
    const auto pc = parse_config_text("[gas]\ngamma = 1.4\nK = 1\nm = 2\n[domain]\nb = 1\n[initial]\npreset = rarefaction\n");
    EXPECT_NEAR(pc.scenario.horizon, 2.0 * pc.scenario.b / pc.scenario.C0, 1e-15);
    EXPECT_TRUE(pc.assumptions.pass());
}

TEST(Config, BoundaryModes) {
    const std::string base = "[gas]\ngamma = 2\nK = 1\nm = 1\n[domain]\nb = 1\n[initial]\npreset = rarefaction\n";
    EXPECT_EQ(parse_config_text(base + "[boundary]\nleft = outflow\n").scenario.left, LeftBoundary::outflow);
    EXPECT_THROW(parse_config_text(base + "[boundary]\nleft = characteristic\n"), ConfigError);
    EXPECT_THROW(parse_config_text(base + "[boundary]\nright = prescribed\n"), ConfigError);
}
