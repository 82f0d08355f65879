#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ratchet/config.hpp"
#include "ratchet/run.hpp"

using namespace ratchet;

namespace {

RunConfig from_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
    return resolve_config(parse_config_text(text, "test.cfg"), overrides);
}

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        from_text(text, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, PresetWithTemperature) {
    const auto cfg = from_text("preset=strong\nT=0.1\nperiods=50\n");
    EXPECT_EQ(cfg.preset, "strong");
    EXPECT_DOUBLE_EQ(cfg.params.F, 2.5);
    EXPECT_DOUBLE_EQ(cfg.params.Gamma, 0.05);
    EXPECT_DOUBLE_EQ(*cfg.params.T, 0.1);
    EXPECT_EQ(cfg.periods, 50u);
    EXPECT_EQ(cfg.basis().dim(), 201u);
}

TEST(Config, CommentsAndWhitespace) {
    const auto cfg = from_text("# header\n\n  preset = weak_005   # trailing\nT=0\n");
    EXPECT_DOUBLE_EQ(cfg.params.F, 0.05);
}

TEST(Config, OverridesWinAndLastOverrideWins) {
    const auto cfg = from_text("preset=strong\nT=0\n", {"T=0.5", "T=0.01"});
    EXPECT_DOUBLE_EQ(*cfg.params.T, 0.01);
}

TEST(Config, ExplicitParametersOverridePreset) {
    const auto cfg = from_text("F=1.0\npreset=strong\nT=0\n");
    EXPECT_DOUBLE_EQ(cfg.params.F, 1.0);
    EXPECT_DOUBLE_EQ(cfg.params.phi_a, std::numbers::pi / 2);
}

TEST(Config, EpsilonFollowsGammaUnlessGiven) {
    EXPECT_DOUBLE_EQ(from_text("preset=strong\nT=0\nGamma=0.2\n").params.epsilon, 0.2);
    const auto cfg = from_text("preset=strong\nT=0\nGamma=0.2\nepsilon=0.01\n");
    EXPECT_DOUBLE_EQ(cfg.params.epsilon, 0.01);
    EXPECT_DOUBLE_EQ(cfg.params.Gamma, 0.2);
}

TEST(Config, RejectsGammaAboveOneNamingKeyAndLine) {
    const auto msg = error_of("preset=strong\nT=0\nGamma=1.5\n");
    EXPECT_NE(msg.find("Gamma"), std::string::npos) << msg;
    EXPECT_NE(msg.find("test.cfg:3"), std::string::npos) << msg;
    const auto over = error_of("preset=strong\nT=0\n", {"Gamma=1.5"});
    EXPECT_NE(over.find("--set"), std::string::npos) << over;
}

TEST(Config, RejectsUnknownKey) {
    const auto msg = error_of("preset=strong\nT=0\ntemperature=3\n");
    EXPECT_NE(msg.find("temperature"), std::string::npos);
    EXPECT_NE(msg.find("test.cfg:3"), std::string::npos) << msg;
}

TEST(Config, RejectsUnparsableValues) {
    EXPECT_NE(error_of("preset=strong\nT=warm\n").find("T"), std::string::npos);
    EXPECT_NE(error_of("preset=strong\nT=0\nperiods=-3\n").find("periods"), std::string::npos);
    EXPECT_NE(error_of("preset=strong\nT=0\nphase_space=maybe\n").find("phase_space"), std::string::npos);
    EXPECT_FALSE(error_of("preset=strong\nT=0\nnoequals\n").empty());
}

TEST(Config, TemperatureIsRequired) {
    EXPECT_NE(error_of("preset=strong\n").find("'T'"), std::string::npos);
}

TEST(Config, SweepValidation) {
    const auto cfg = from_text("mode=sweep\npreset=strong\nT=0\nsweep_param=T\nsweep_values=0, 0.001,0.01,0.1\n");
    EXPECT_EQ(cfg.sweep_values.size(), 4u);
    EXPECT_NE(error_of("mode=sweep\npreset=strong\nT=0\nsweep_param=periods\nsweep_values=1\n")
                  .find("sweep_param"),
              std::string::npos);
    EXPECT_NE(error_of("mode=sweep\npreset=strong\nT=0\nsweep_param=Gamma\nsweep_values=0.1,2\n")
                  .find("sweep_values"),
              std::string::npos);
    EXPECT_NE(error_of("mode=sweep\npreset=strong\nT=0\nsweep_param=T\n").find("sweep_values"),
              std::string::npos);
}

TEST(Config, HistogramRunsDefaultToLargerEnsembles) {
    EXPECT_EQ(from_text("preset=strong\nT=0\n").trajectories, 10000u);
    EXPECT_EQ(from_text("preset=strong\nT=0\nphase_space=true\n").trajectories, 100000u);
    EXPECT_EQ(from_text("preset=strong\nT=0\nphase_space=true\ntrajectories=50\n").trajectories, 50u);
}

TEST(Config, ResolvedTextReproducesConfiguration) {
    const auto cfg = from_text(
        "preset=weak_005\nT=0.01\nphi_b=0.3\nseed=18446744073709551615\nsplitting=potential_first\n"
        "kraus_form=first_order\nnoise_convention=gamma\nphase_space=true\ngrid_pmin=-2.5\n");
    const std::string text = format_config(cfg);
    const auto again = resolve_config(parse_config_text(text, "resolved.cfg"), {});
    EXPECT_EQ(format_config(again), text);
    EXPECT_EQ(again.seed, 18446744073709551615ull);
    EXPECT_EQ(again.params.phi_b, 0.3);
    EXPECT_EQ(again.splitting, Splitting::potential_first);
    EXPECT_EQ(again.noise, classical::NoiseConvention::gamma);
}

TEST(Config, ModeArgumentOverridesFileMode) {
    const auto cfg = resolve_config(parse_config_text("mode=quantum\npreset=strong\nT=0\n", "f"), {},
                                    RunMode::classical);
    EXPECT_EQ(cfg.mode, RunMode::classical);
}

TEST(Output, SweepPointNames) {
    EXPECT_EQ(sweep_point_name("T", 0.0), "T=0");
    EXPECT_EQ(sweep_point_name("T", 0.001), "T=0.001");
    EXPECT_EQ(sweep_point_name("F", 2.5), "F=2.5");
}

TEST(Output, GridTextRoundTrip) {
    PhaseSpaceGrid g{GridSpec{3, 2, -1.0, 1.0}, {0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0}, "unit_sum"};
    const std::string text = format_grid(g);
    EXPECT_EQ(text.substr(0, text.find('\n')), "3 2 0 6.2831853071795862 -1 1");
    const auto back = parse_grid(text);
    EXPECT_EQ(back.values, g.values);
    EXPECT_EQ(back.spec.nx, 3u);
}

TEST(Output, CurrentsHeader) {
    CurrentSeries s;
    s.push(1.0, 0.5);
    EXPECT_EQ(format_currents(s).substr(0, format_currents(s).find('\n')),
              "period_index,time_periods,instantaneous_mean_p,cumulative_J");
    std::vector<double> tr{1.0}, pu{0.5};
    const auto q = format_currents(s, &tr, &pu);
    EXPECT_EQ(q.substr(0, q.find('\n')),
              "period_index,time_periods,instantaneous_mean_p,cumulative_J,trace,purity");
    EXPECT_NE(q.find("1,1,0.5,0.5,1,0.5"), std::string::npos);
}

TEST(Output, ExitCodesByCategory) {
    EXPECT_EQ(exit_code("config"), 2);
    EXPECT_EQ(exit_code("classical"), 3);
    EXPECT_EQ(exit_code("hilbert"), 4);
    EXPECT_EQ(exit_code("propagator"), 5);
    EXPECT_EQ(exit_code("spectral"), 6);
    EXPECT_EQ(exit_code("io"), 7);
}
