#include "htmsp/run_config.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "support/testutil.hpp"

using namespace htmsp;

namespace {

std::filesystem::path write_config(const testutil::TempDir& dir, const std::string& text) {
  const auto path = dir.path() / "run.conf";
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST(RunConfig, DefaultsValidate) {
  EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(RunConfig, ParsesKeysCommentsAndWhitespace) {
  testutil::TempDir dir("conf");
  const auto path = write_config(dir,
                                 "# experiment setup\n"
                                 "init_mode = random_weight\n"
                                 "inhibit_mode = percentile\n"
                                 "block_h = 16\n"
                                 "block_w=16\n"
                                 "region_h = 2   # two blocks\n"
                                 "region_w = 3\n"
                                 "neighborhood = 5\n"
                                 "\n"
                                 "gamma = 7\n"
                                 "rho = 0.25\n"
                                 "theta_c = 0.4\n"
                                 "theta_s = 0.5\n"
                                 "s = 0.1\n"
                                 "phi = 3.5\n"
                                 "eta = 0.75\n"
                                 "big_t = 50\n"
                                 "perm_delta = 0.02\n"
                                 "seed = 1234567890123\n"
                                 "resize_h = 32\n"
                                 "resize_w = 48\n"
                                 "trials = 4\n");
  const auto config = parse_config_file(path);
  EXPECT_EQ(config.sp.init_mode, InitMode::kRandomWeight);
  EXPECT_EQ(config.sp.inhibit_mode, InhibitMode::kPercentile);
  EXPECT_EQ(config.tiling.block_h, 16);
  EXPECT_EQ(config.tiling.block_w, 16);
  EXPECT_EQ(config.tiling.region_h, 2);
  EXPECT_EQ(config.tiling.region_w, 3);
  EXPECT_EQ(config.tiling.neighborhood, 5);
  EXPECT_EQ(config.sp.gamma, 7);
  EXPECT_DOUBLE_EQ(config.sp.rho, 0.25);
  EXPECT_DOUBLE_EQ(config.sp.theta_c, 0.4);
  EXPECT_DOUBLE_EQ(config.sp.theta_s, 0.5);
  EXPECT_DOUBLE_EQ(config.sp.s, 0.1);
  EXPECT_DOUBLE_EQ(config.sp.phi, 3.5);
  EXPECT_DOUBLE_EQ(config.sp.eta, 0.75);
  EXPECT_EQ(config.sp.avg_window, 50);
  EXPECT_DOUBLE_EQ(config.sp.perm_delta, 0.02);
  EXPECT_EQ(config.sp.seed, 1234567890123u);
  EXPECT_EQ(config.resize_h, 32);
  EXPECT_EQ(config.resize_w, 48);
  EXPECT_EQ(config.trials, 4);
  EXPECT_NO_THROW(config.validate());
}

TEST(RunConfig, RejectsUnknownKeysByName) {
  testutil::TempDir dir("conf");
  const auto path = write_config(dir, "blocc_h = 8\n");
  try {
    parse_config_file(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("blocc_h"), std::string::npos);
  }
}

TEST(RunConfig, RejectsMalformedValuesNamingTheKey) {
  RunConfig config;
  try {
    apply_config_entry(config, "gamma", "five");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
  }
  EXPECT_THROW(apply_config_entry(config, "rho", "0.5x"), ConfigError);
  EXPECT_THROW(apply_config_entry(config, "init_mode", "sometimes"), ConfigError);
  EXPECT_THROW(apply_config_entry(config, "inhibit_mode", "never"), ConfigError);
}

TEST(RunConfig, RejectsMalformedLines) {
  testutil::TempDir dir("conf");
  EXPECT_THROW(parse_config_file(write_config(dir, "gamma\n")), ConfigError);
  EXPECT_THROW(parse_config_file(write_config(dir, "= 5\n")), ConfigError);
  EXPECT_THROW(parse_config_file(dir.path() / "missing.conf"), IoError);
}

TEST(RunConfig, ModeAliasesAreAccepted) {
  EXPECT_EQ(parse_init_mode("random"), InitMode::kRandomWeight);
  EXPECT_EQ(parse_init_mode("rule"), InitMode::kRuleBased);
  EXPECT_EQ(parse_init_mode("rule_based"), InitMode::kRuleBased);
}

TEST(RunConfig, ValidationCoversHarnessKnobs) {
  RunConfig config;
  config.trials = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = RunConfig{};
  config.resize_h = 0;  // but resize_w still 64
  EXPECT_THROW(config.validate(), ConfigError);
  config.resize_w = 0;
  EXPECT_NO_THROW(config.validate());
  config = RunConfig{};
  config.sp.rho = 2.0;  // SpConfig rules apply through RunConfig
  EXPECT_THROW(config.validate(), ConfigError);
}
