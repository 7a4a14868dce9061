#include <gtest/gtest.h>

#include "nonholo/config.hpp"
#include "nonholo/errors.hpp"

using namespace nonholo;
using namespace nonholo::config;

TEST(Parse, MinimalFillsDefaults) {
  const auto cfg = parse_config("[system]\nkind = suslov_det\ninertia = [1, 2, 3]\n");
  EXPECT_EQ(cfg.system.kind, "suslov_det");
  EXPECT_EQ(cfg.system.axis, (Vec3{0, 0, 1}));
  EXPECT_EQ(cfg.system.potential, "zero");
  EXPECT_EQ(cfg.noise.kind, "off");
  EXPECT_TRUE(cfg.has("system"));
  EXPECT_FALSE(cfg.has("noise"));
}

TEST(Parse, CommentsAndQuotes) {
  const auto cfg = parse_config(
      "# header\n[system]  # trailing\nkind = suslov_det\n\n[output]\ndirectory = \"out dir # not a comment\"\n");
  EXPECT_EQ(cfg.output.directory, "out dir # not a comment");
}

TEST(Parse, NegativeInertiaIsRejected) {
  try {
    (void)parse_config("[system]\nkind = suslov_det\ninertia = [1, -2, 3]\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key(), "system.inertia");
  }
}

TEST(Parse, ErrorsCarryLineNumbers) {
  auto line_of = [](std::string_view text) -> std::size_t {
    try {
      (void)parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("[system]\nkind = suslov_det\nthis is not a statement\n"), 3u);
  EXPECT_EQ(line_of("[system]\n[bogus]\n"), 2u);
  EXPECT_EQ(line_of("[system]\nkind = suslov_det\nkind = suslov_det\n"), 3u);
  EXPECT_EQ(line_of("[system]\nunknown_key = 1\n"), 2u);
  EXPECT_EQ(line_of("[system]\ninertia = [1, 2\n"), 2u);
  EXPECT_EQ(line_of("kind = suslov_det\n"), 1u);
}

TEST(Parse, CrossFieldValidation) {
  EXPECT_THROW(parse_config("[system]\nkind = rolling_det\nmass = 0\n"), ValidationError);
  EXPECT_THROW(parse_config("[system]\nkind = suslov_det\n[integration]\ndt = -1\n"), ValidationError);
  EXPECT_THROW(parse_config("[system]\nkind = nonsense\n"), ValidationError);
  EXPECT_THROW(parse_config("[system]\nkind = suslov_type2\npotential = zero\n[noise]\nkind = cross\ncross = chi\n"),
               ValidationError);
}

TEST(Serialize, RoundTrip) {
  const char* text = R"(
[system]
kind = suslov_type2
inertia = [1, 2, 3]
potential = linear
chi = [0.5, 0.3, 0]

[initial]
omega = [1, 0.5, 0.2]
gamma = [0.3, 0.4, 0.86602540378443860]
n = [-0.35301270189221928, 0.80602540378443854, -0.25]

[noise]
kind = cross
cross = gamma
g = [0.1, 0.2, 0.3]
eta = [0.06, -0.04, 0.1]

[integration]
dt = 0.001
t_final = 0.1
seed = 18446744073709551615

[ensemble]
n_paths = 20
threads = 3
policy = abort

[fp]
cells = [8, 9, 10]
dt_fp = 0.0001

[output]
directory = "some dir"
format = json
fields = [energy, kharlamova]
)";
  const auto cfg = parse_config(text);
  EXPECT_EQ(cfg.integration.seed, 18446744073709551615ull);
  const auto again = parse_config(serialize(cfg));
  EXPECT_EQ(cfg, again);
  EXPECT_EQ(serialize(again), serialize(cfg));
}

TEST(Load, MissingFile) {
  try {
    (void)load_config("/nonexistent/path.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
