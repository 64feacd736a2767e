#include "peerrank/simulate.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "peerrank/io.hpp"

namespace {

using peerrank::SimConfig;

TEST(Simulate, SameSeedSameBytes) {
  SimConfig cfg;
  cfg.m = 5;
  cfg.n = 8;
  cfg.seed = 31;
  cfg.noise = 0.7;
  auto a = peerrank::simulate(cfg);
  auto b = peerrank::simulate(cfg);
  std::ostringstream sa, sb;
  peerrank::write_ballots(sa, a.profiles);
  peerrank::write_ballots(sb, b.profiles);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_FALSE(sa.str().empty());

  cfg.seed = 32;
  auto c = peerrank::simulate(cfg);
  std::ostringstream sc;
  peerrank::write_ballots(sc, c.profiles);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Simulate, ZeroNoiseReproducesTrueRankingEverywhere) {
  SimConfig cfg;
  cfg.m = 4;
  cfg.n = 6;
  cfg.seed = 5;
  cfg.noise = 0.0;
  auto run = peerrank::simulate(cfg);
  EXPECT_EQ(run.true_ranking.to_string(), "m01 > m02 > m03 > m04");
  ASSERT_EQ(run.profiles.size(), 6u);
  for (const auto& p : run.profiles) {
    ASSERT_EQ(p.records.size(), 4u);
    for (const auto& rec : p.records)
      EXPECT_EQ(rec.ranking.to_string(), run.true_ranking.to_string());
  }
}

TEST(Simulate, TruncationTiesTheTail) {
  SimConfig cfg;
  cfg.m = 5;
  cfg.n = 3;
  cfg.seed = 9;
  cfg.noise = 0.3;
  cfg.truncate_k = 2;
  auto run = peerrank::simulate(cfg);
  for (const auto& p : run.profiles)
    for (const auto& rec : p.records) {
      const auto& gs = rec.ranking.groups();
      ASSERT_EQ(gs.size(), 3u);
      EXPECT_EQ(gs[0].size(), 1u);
      EXPECT_EQ(gs[1].size(), 1u);
      EXPECT_EQ(gs[2].size(), 3u);
    }
}

TEST(Simulate, SelfBiasOnlyLiftsOwnBallot) {
  SimConfig cfg;
  cfg.m = 3;
  cfg.n = 20;
  cfg.seed = 13;
  cfg.noise = 0.0;
  cfg.self_bias["m03"] = 10.0;  // overwhelming: m03 always tops its own ballot
  auto run = peerrank::simulate(cfg);
  for (const auto& p : run.profiles)
    for (const auto& rec : p.records) {
      if (rec.evaluator == "m03")
        EXPECT_EQ(rec.ranking.groups().front().front(), "m03");
      else
        EXPECT_EQ(rec.ranking.to_string(), "m01 > m02 > m03");
    }
}

TEST(Simulate, ConfigValidation) {
  SimConfig cfg;
  cfg.m = 1;
  EXPECT_THROW(peerrank::simulate(cfg), peerrank::Error);
  cfg.m = 4;
  cfg.n = 0;
  EXPECT_THROW(peerrank::simulate(cfg), peerrank::Error);
  cfg.n = 2;
  cfg.truncate_k = 9;
  EXPECT_THROW(peerrank::simulate(cfg), peerrank::Error);
}

TEST(Simulate, EvaluatorsDisagreeUnderNoise) {
  SimConfig cfg;
  cfg.m = 5;
  cfg.n = 12;
  cfg.seed = 77;
  cfg.noise = 3.0;
  auto run = peerrank::simulate(cfg);
  int disagreements = 0;
  for (const auto& p : run.profiles) {
    const auto first = p.records.front().ranking.to_string();
    for (const auto& rec : p.records)
      if (rec.ranking.to_string() != first) {
        ++disagreements;
        break;
      }
  }
  // Noise at 3x the quality spread must produce disagreement somewhere.
  EXPECT_GT(disagreements, 0);
}

}  // namespace
