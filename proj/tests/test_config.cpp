#include <gtest/gtest.h>

#include <string>

#include <hestonis/config.hpp>

using namespace hestonis;

namespace {
std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST(Config, DefaultsAreTheReferenceSetting) {
    const auto c = parse_config("");
    EXPECT_EQ(c, RunConfig{});
    EXPECT_EQ(c.params.s0, 50.0);
    EXPECT_EQ(c.params.rho, -0.5);
    EXPECT_EQ(c.n_steps, 252u);
    EXPECT_EQ(c.strikes, std::vector<double>{50.0});
    EXPECT_EQ(c.kinds, std::vector<EstimatorKind>{EstimatorKind::Classic});
    EXPECT_FALSE(c.timing);
}

TEST(Config, ParsesEveryKey) {
    const auto c = parse_config(R"(# comment line
s0 = 40
r=0.03
v0 = 0.05   # trailing comment
rho = -0.3
kappa = 1.5
theta = 0.06
xi = 0.3
T = 2
n_steps = 100
payoff = arithmetic_asian
strikes = 35, 40,45
kinds = Classic,LDPsn_A , MDPlt
n_paths = 5000
seed = 123
out = table.csv
dump_drift = true
constant_sigma = 0.3
mdp_reduction = rederived
timing = 1
)");
    EXPECT_EQ(c.params.s0, 40.0);
    EXPECT_EQ(c.params.t_end, 2.0);
    EXPECT_EQ(c.n_steps, 100u);
    EXPECT_EQ(c.payoff, PayoffKind::ArithmeticAsianCall);
    EXPECT_EQ(c.strikes, (std::vector<double>{35, 40, 45}));
    EXPECT_EQ(c.kinds, (std::vector<EstimatorKind>{EstimatorKind::Classic, EstimatorKind::LDPsn_A, EstimatorKind::MDPlt}));
    EXPECT_EQ(c.seed, 123u);
    EXPECT_EQ(c.out, "table.csv");
    EXPECT_TRUE(c.dump_drift);
    EXPECT_EQ(c.constant_sigma, 0.3);
    EXPECT_EQ(c.mdp_reduction, MdpReduction::Rederived);
    EXPECT_TRUE(c.timing);
    EXPECT_EQ(c.setting().grid.n_steps(), 100u);
    EXPECT_EQ(c.setting().grid.t_end(), 2.0);
}

TEST(Config, RoundTripIsLossless) {
    RunConfig c;
    c.params.rho = -0.123456789012345;
    c.params.theta = 0.1 + 0.2;
    c.strikes = {30.5, 1e-3, 85};
    c.kinds = {EstimatorKind::BS_A2, EstimatorKind::MDPsnLog};
    c.constant_sigma = 0.25;
    c.payoff = PayoffKind::VolIndicatorSwap;
    c.seed = 18446744073709551615ull;
    c.out = "x.csv";
    const auto text = serialize(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(serialize(parse_config(text)), text);
    EXPECT_EQ(parse_config(serialize(RunConfig{})), RunConfig{});
}

TEST(Config, ErrorsNameLineAndKey) {
    const auto e = error_of("s0 = 50\nrho = abc\n");
    EXPECT_NE(e.find("line 2"), std::string::npos) << e;
    EXPECT_NE(e.find("'rho'"), std::string::npos) << e;
    EXPECT_NE(error_of("strikes = 40,x").find("'strikes'"), std::string::npos);
    EXPECT_NE(error_of("kinds = Classic,LDP").find("'LDP'"), std::string::npos);
    EXPECT_NE(error_of("\n\nnot a pair").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("colour = red").find("unknown key 'colour'"), std::string::npos);
    EXPECT_NE(error_of("n_paths = -5").find("'n_paths'"), std::string::npos);
    EXPECT_NE(error_of("timing = maybe").find("'timing'"), std::string::npos);
    EXPECT_NE(error_of("mdp_reduction = other").find("'mdp_reduction'"), std::string::npos);
}

TEST(Config, ValidationNamesTheKey) {
    const auto e = error_of("rho = 1.5");
    EXPECT_NE(e.find("key 'rho'"), std::string::npos) << e;
    EXPECT_NE(error_of("v0 = -1").find("'v0'"), std::string::npos);
    EXPECT_NE(error_of("T = 0").find("'T'"), std::string::npos);
    EXPECT_NE(error_of("n_steps = 0").find("'n_steps'"), std::string::npos);
    EXPECT_NE(error_of("n_paths = 1").find("'n_paths'"), std::string::npos);
    EXPECT_NE(error_of("constant_sigma = 0").find("'constant_sigma'"), std::string::npos);
    EXPECT_NE(error_of("strikes = -1").find("'strikes'"), std::string::npos);
}

TEST(Config, ConstantSigmaCanBeCleared) {
    EXPECT_FALSE(parse_config("constant_sigma = 0.2\nconstant_sigma = none").constant_sigma);
}

TEST(Config, LaterLinesAndBaseLayering) {
    RunConfig base;
    base.n_paths = 77;
    const auto c = parse_config("seed = 1\nseed = 2", base);
    EXPECT_EQ(c.seed, 2u);
    EXPECT_EQ(c.n_paths, 77u);
}

TEST(Config, PresetsReplaceTheTableShape) {
    RunConfig c;
    apply_preset(c, preset_appendix_c());
    EXPECT_EQ(c.payoff, PayoffKind::ArithmeticAsianCall);
    EXPECT_EQ(c.constant_sigma, 0.25);
    EXPECT_TRUE(c.setting().constant_vol());
    apply_preset(c, preset_table3());
    EXPECT_FALSE(c.constant_sigma);
    EXPECT_EQ(c.strikes.size(), 12u);
    EXPECT_EQ(parse_config(serialize(c)), c);
}

TEST(Config, EveryKeyIsSerialized) {
    const auto text = serialize(RunConfig{});
    for (auto k : config_keys()) EXPECT_NE(text.find(std::string(k) + " = "), std::string::npos) << k;
}
