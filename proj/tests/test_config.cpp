#include <gtest/gtest.h>

#include "rosen/config.hpp"

using namespace rosen;

namespace {

const char* kText = R"([model]
kind = affine
h1 = 0.6
slope1 = 0.1
h2 = 0.7
slope2 = 0.05
T = 1
gamma = 0.95

[domain]
L = 32
grading = graded
M = 64

[simulation]
n = 123
seed = 99
)";

}  // namespace

TEST(Config, RoundTripIsCanonical) {
  const auto c = parse_config(kText, "t.ini");
  EXPECT_EQ(c.simulation.n, 123u);
  EXPECT_EQ(c.simulation.seed, 99u);
  ASSERT_TRUE(c.domain.L.has_value());
  EXPECT_EQ(*c.domain.L, 32.0);
  EXPECT_EQ(c.domain.grading, Grading::graded);
  const auto text = to_ini(c);
  EXPECT_EQ(to_ini(parse_config(text)), text);
  EXPECT_EQ(config_hash(parse_config(text)), config_hash(c));
}

TEST(Config, HashTracksContent) {
  auto c = parse_config(kText);
  const auto h = config_hash(c);
  EXPECT_EQ(h.size(), 16u);
  c.simulation.seed += 1;
  EXPECT_NE(config_hash(c), h);
}

TEST(Config, DefaultsWhenEmpty) {
  const auto c = parse_config("");
  EXPECT_FALSE(c.domain.L.has_value());
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, UnknownKeyReportsLocation) {
  try {
    parse_config("[domain]\nMM = 3\n", "x.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.location(), "domain.MM");
  }
}

TEST(Config, UnknownSectionRejected) { EXPECT_THROW(parse_config("[extra]\na = 1\n"), ConfigError); }

TEST(Config, MalformedLineReportsFileAndLine) {
  try {
    parse_config("[simulation]\nn = 5\nthis line has no equals sign\n", "bad.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.location(), "bad.ini:3");
  }
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(parse_config("[simulation]\nn = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("[domain]\nratio = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[domain]\nL = soon\n"), ConfigError);
  EXPECT_THROW(parse_config("[verify]\nquick = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("[analysis]\nsynthetic_spectrum = 0.5, x\n"), ConfigError);
}

TEST(Config, SyntheticSpectrumParsed) {
  const auto c = parse_config("[analysis]\nsynthetic_spectrum = 0.5, 0.25\n");
  EXPECT_EQ(c.analysis.synthetic_spectrum, (std::vector<double>{0.5, 0.25}));
}

TEST(Config, DyadicTimesIncludeEndpoints) {
  const auto t = dyadic_times(5, 2.0);
  EXPECT_EQ(t, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
}
