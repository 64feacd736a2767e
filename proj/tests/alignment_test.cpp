#include "peerrank/alignment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

namespace {

using peerrank::Errc;
using peerrank::Error;
using peerrank::Metric;
using peerrank::Ranking;
using peerrank::ReferenceRanking;

TEST(Alignment, DescribePinnedConventions) {
  auto s = peerrank::describe({0.2, 0.4, 0.6, 0.8, 1.0});
  EXPECT_DOUBLE_EQ(s.mean, 0.6);
  EXPECT_DOUBLE_EQ(s.p50, 0.6);
  EXPECT_DOUBLE_EQ(s.min, 0.2);
  EXPECT_DOUBLE_EQ(s.max, 1.0);
  // Percentiles interpolate linearly at h = (n-1)p.
  auto t = peerrank::describe({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(t.p25, 1.75);
  EXPECT_DOUBLE_EQ(t.p50, 2.5);
  EXPECT_DOUBLE_EQ(t.p75, 3.25);
  // Sample standard deviation (ddof = 1); a singleton has none.
  EXPECT_NEAR(t.std_dev, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(peerrank::describe({7.0}).std_dev, 0.0);
}

TEST(Alignment, MeanPositionRankingKeepsExactTies) {
  std::map<std::string, Ranking> stream;
  stream["q1"] = Ranking::linear({"a", "b", "c"});
  stream["q2"] = Ranking::linear({"c", "b", "a"});
  // Every model averages to position 2: one big tie group.
  EXPECT_EQ(peerrank::mean_position_ranking(stream).to_string(),
            "a = b = c");
  stream["q3"] = Ranking::linear({"a", "c", "b"});
  // a: (1+3+1)/3, c: (3+1+2)/3, b: (2+2+3)/3.
  EXPECT_EQ(peerrank::mean_position_ranking(stream).to_string(),
            "a > c > b");
}

TEST(Alignment, MicroAndMacroAgreement) {
  ReferenceRanking ref;
  ref.ranking = Ranking::linear({"a", "b", "c"});
  std::map<std::string, Ranking> stream;
  stream["q1"] = Ranking::linear({"a", "b", "c"});
  stream["q2"] = Ranking::linear({"a", "c", "b"});
  stream["q3"] = Ranking::linear({"a", "b", "c"});
  auto rep = peerrank::align(stream, ref, Metric::pearson);
  ASSERT_EQ(rep.per_question.size(), 3u);
  EXPECT_EQ(rep.per_question[0].first, "q1");
  EXPECT_DOUBLE_EQ(rep.per_question[0].second, 1.0);
  EXPECT_DOUBLE_EQ(rep.per_question[1].second, 0.5);
  EXPECT_DOUBLE_EQ(rep.micro.mean, (1.0 + 0.5 + 1.0) / 3.0);
  // Mean positions: a 1, b 7/3, c 8/3 -> macro order a > b > c.
  EXPECT_DOUBLE_EQ(rep.macro, 1.0);

  auto kend = peerrank::align(stream, ref, Metric::kendall);
  EXPECT_DOUBLE_EQ(kend.per_question[1].second, 1.0 / 3.0);
}

TEST(Alignment, AccuracyRankingDescendingLexBroken) {
  std::map<peerrank::ModelId, double> acc = {
      {"gamma", 0.9}, {"alpha", 0.9}, {"beta", 0.8}};
  EXPECT_EQ(peerrank::accuracy_ranking(acc).to_string(),
            "alpha > gamma > beta");
  acc["delta"] = 1.2;
  try {
    peerrank::accuracy_ranking(acc);
    FAIL() << "accuracy above 1 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_range);
  }
}

TEST(Alignment, AlignRequiresReferenceCoverage) {
  ReferenceRanking ref;
  ref.ranking = Ranking::linear({"a", "b"});
  std::map<std::string, Ranking> stream;
  stream["q1"] = Ranking::linear({"a", "b", "c"});
  try {
    peerrank::align(stream, ref, Metric::pearson);
    FAIL() << "candidate mismatch accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::candidate_mismatch);
  }
}

}  // namespace
