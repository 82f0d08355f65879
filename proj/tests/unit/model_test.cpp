#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ratchet/model.hpp"

using namespace ratchet;

TEST(Preset, WeakPresetsDifferOnlyInForcing) {
    const auto a = preset(PresetName::weak_002);
    const auto b = preset(PresetName::weak_005);
    EXPECT_DOUBLE_EQ(a.F, 0.02);
    EXPECT_DOUBLE_EQ(b.F, 0.05);
    for (const auto& p : {a, b}) {
        EXPECT_DOUBLE_EQ(p.B, 0.2);
        EXPECT_DOUBLE_EQ(p.phi_a, 0.0);
        EXPECT_DOUBLE_EQ(p.Gamma, 1e-4);
        EXPECT_DOUBLE_EQ(p.epsilon, p.Gamma);
        EXPECT_DOUBLE_EQ(p.A, 0.5);
        EXPECT_DOUBLE_EQ(p.phi_b, std::numbers::pi / 2);
        EXPECT_DOUBLE_EQ(p.hbar, 0.041);
        EXPECT_FALSE(p.T.has_value());
    }
}

TEST(Preset, Strong) {
    const auto p = preset("strong");
    EXPECT_DOUBLE_EQ(p.F, 2.5);
    EXPECT_DOUBLE_EQ(p.B, 0.0);
    EXPECT_DOUBLE_EQ(p.phi_a, std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(p.Gamma, 0.05);
    EXPECT_DOUBLE_EQ(p.epsilon, 0.05);
    EXPECT_THROW(preset("medium"), ConfigError);
}

TEST(Validate, RejectsOutOfRangeValues) {
    auto p = preset(PresetName::strong);
    p.T = 0.1;
    EXPECT_NO_THROW(validate(p));
    auto bad = p;
    bad.Gamma = 1.5;
    EXPECT_THROW(validate(bad), ConfigError);
    bad = p;
    bad.T = -0.1;
    EXPECT_THROW(validate(bad), ConfigError);
    bad = p;
    bad.hbar = 0.0;
    EXPECT_THROW(validate(bad), ConfigError);
    bad = p;
    bad.F = std::nan("");
    EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Validate, MessageStartsWithKey) {
    auto p = preset(PresetName::strong);
    p.Gamma = 1.5;
    try {
        validate(p);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("Gamma", 0), 0u);
    }
}

TEST(Temperature, UnsetTemperatureIsAnError) {
    const auto p = preset(PresetName::weak_002);
    EXPECT_THROW((void)p.temperature(), ConfigError);
}

TEST(Potential, KnownValues) {
    auto p = preset(PresetName::weak_002);
    // x = 0: 1 - 1 - A cos(phi_a) = -0.5; no drive contribution.
    EXPECT_NEAR(potential(0.0, 0.3, p), -0.5, 1e-15);
    // x = pi/2, t = 0: 1 - 0 - 0.5 cos(pi) + 0.02 (1 + 0.2 cos(pi/2)) = 1.52
    EXPECT_NEAR(potential(std::numbers::pi / 2, 0.0, p), 1.52, 1e-15);
    p.free_particle = true;
    EXPECT_EQ(potential(1.0, 2.0, p), 0.0);
    EXPECT_EQ(potential_gradient(1.0, 2.0, p), 0.0);
}

TEST(Potential, GradientMatchesFiniteDifference) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-10.0, 10.0);
    std::uniform_real_distribution<double> ut(0.0, 50.0);
    std::uniform_real_distribution<double> uphase(0.0, two_pi);
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto p = preset(i % 2 ? PresetName::strong : PresetName::weak_005);
        p.phi_a = uphase(rng);
        p.B = 0.3;
        p.phi_b = uphase(rng);
        const double x = ux(rng), t = ut(rng);
        const double fd = (potential(x + h, t, p) - potential(x - h, t, p)) / (2 * h);
        worst = std::max(worst, std::abs(fd - potential_gradient(x, t, p)));
    }
    EXPECT_LE(worst, 1e-8);
}

TEST(Potential, PeriodicInSpaceAndTime) {
    const auto p = preset(PresetName::weak_002);
    for (double x : {0.1, 1.7, -2.3})
        for (double t : {0.0, 0.4, 5.0}) {
            EXPECT_NEAR(potential(x + two_pi, t, p), potential(x, t, p), 1e-12);
            EXPECT_NEAR(potential(x, t + two_pi, p), potential(x, t, p), 1e-12);
        }
}

TEST(Potential, ParityTimeShiftSymmetryWithoutAsymmetryTerms) {
    auto p = preset(PresetName::strong);
    p.phi_a = 0.0;
    p.B = 0.0;
    for (double x : {0.3, 1.1, 2.9})
        for (double t : {0.0, 0.7, 3.3})
            EXPECT_NEAR(potential(-x, t + std::numbers::pi, p), potential(x, t, p), 1e-14);
    // With phi_a = pi/2 the spatial parity is broken.
    p.phi_a = std::numbers::pi / 2;
    EXPECT_GT(std::abs(potential(-0.3, std::numbers::pi, p) - potential(0.3, 0.0, p)), 0.1);
}

TEST(Drive, TemporalFactor) {
    auto p = preset(PresetName::weak_002);
    EXPECT_NEAR(drive(0.0, p), 1.0, 1e-15);
    EXPECT_NEAR(drive(std::numbers::pi / 4, p), std::cos(std::numbers::pi / 4) - 0.2, 1e-15);
}
