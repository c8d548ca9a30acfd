#include <gtest/gtest.h>

#include "spoofdet/config.hpp"
#include "spoofdet/errors.hpp"

using namespace spoofdet;

TEST(Config, DefaultsRoundTrip) {
  const RunConfig d;
  const auto j = config_to_json(d);
  EXPECT_EQ(j.at("labeller").at("t1"), 0.25);
  EXPECT_EQ(j.at("windows").at("length"), 200);
  EXPECT_EQ(j.at("features").at("depth"), 25);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(config_hash(config_from_json(nlohmann::json::object())), config_hash(d));
}

TEST(Config, OverridesOnlyGivenKeys) {
  const auto c = config_from_json(nlohmann::json::parse(R"({"labeller":{"t2":0.02},"train":{"hidden":64}})"));
  EXPECT_EQ(c.labeller.t2, 0.02);
  EXPECT_EQ(c.labeller.t1, 0.25);
  EXPECT_EQ(c.train.hidden, 64u);
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  try {
    config_from_json(nlohmann::json::parse(R"({"labeller":{"t4":1}})"));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("labeller.t4"), std::string::npos);
  }
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"bogus":1})")), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"train":{"hidden":"x"}})")), UsageError);
  RunConfig c;
  c.windows.stride = 0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Config, SmokeReducesBudget) {
  RunConfig c;
  c.search.budget = 10;
  c.apply_smoke();
  EXPECT_EQ(c.eval_seeds, 1u);
  EXPECT_EQ(c.train.epochs, 6u);
  EXPECT_LE(c.search.budget, 1u);
  EXPECT_EQ(c.eval_config().seeds, 1u);
}
