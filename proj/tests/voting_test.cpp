#include "peerrank/voting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <span>
#include <vector>

#include "peerrank/oracle.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/rng.hpp"

namespace {

using peerrank::Errc;
using peerrank::Error;
using peerrank::ModelId;
using peerrank::QuestionProfile;
using peerrank::Ranking;
using peerrank::Rule;
using peerrank::RuleConfig;
using peerrank::TieBreak;

QuestionProfile profile_of(std::vector<std::vector<std::vector<ModelId>>> grouped_ballots,
                           std::vector<ModelId> candidates) {
  QuestionProfile p;
  p.question_id = "q";
  p.candidates = std::move(candidates);
  int e = 0;
  for (auto& groups : grouped_ballots) {
    peerrank::EvaluationRecord rec;
    rec.question_id = "q";
    rec.evaluator = "ev" + std::to_string(e++);
    std::vector<Ranking::Group> gs;
    for (auto& g : groups) gs.push_back(g);
    rec.ranking = Ranking::from_groups(gs);
    rec.external_reference = true;  // evaluators here are not candidates
    p.records.push_back(std::move(rec));
  }
  return p;
}

QuestionProfile linear_profile(std::vector<std::vector<ModelId>> ballots,
                               std::vector<ModelId> candidates) {
  std::vector<std::vector<std::vector<ModelId>>> grouped;
  for (auto& b : ballots) {
    std::vector<std::vector<ModelId>> groups;
    for (auto& id : b) groups.push_back({id});
    grouped.push_back(std::move(groups));
  }
  return profile_of(std::move(grouped), std::move(candidates));
}

RuleConfig cfg_for(Rule r) {
  RuleConfig cfg;
  cfg.rule = r;
  return cfg;
}

TEST(Voting, AverageRankExactFractions) {
  // b's mean position 5/3 vs a's 5/3: exactly tied, resolved lex.
  auto p = linear_profile({{"a", "b", "c"}, {"b", "a", "c"}, {"b", "a", "c"}},
                          {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::average));
  EXPECT_EQ(res.ranking.to_string(), "b > a > c");
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("a"), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("b"), 4.0 / 3.0);

  auto tie = linear_profile({{"a", "b"}, {"b", "a"}}, {"a", "b"});
  EXPECT_EQ(aggregate(tie, cfg_for(Rule::average)).ranking.to_string(),
            "a > b");
}

TEST(Voting, BordaHandlesTieGroups) {
  // Ballot 1: a > b = c, ballot 2: b > a > c. With midrank scoring the
  // points are a: 2 + 1 = 3, b: 0.5 + 2 = 2.5, c: 0.5 + 0 = 0.5.
  auto p = profile_of({{{"a"}, {"b", "c"}}, {{"b"}, {"a"}, {"c"}}},
                      {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::borda));
  EXPECT_EQ(res.ranking.groups().front().front(), "a");
  EXPECT_GT(res.per_candidate_score.at("a"), res.per_candidate_score.at("b"));
  EXPECT_GT(res.per_candidate_score.at("b"), res.per_candidate_score.at("c"));
}

TEST(Voting, CopelandNetWins) {
  auto p = linear_profile(
      {{"a", "b", "c"}, {"a", "c", "b"}, {"b", "c", "a"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::copeland));
  // a beats b 2-1 and c 2-1: copeland 2. b beats c 2-1: 0. c: -2.
  EXPECT_EQ(res.ranking.to_string(), "a > b > c");
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("a"), 2.0);
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("c"), -2.0);
}

TEST(Voting, DodgsonUnanimousScores) {
  auto p = linear_profile({{"a", "b", "c"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::dodgson));
  EXPECT_EQ(res.ranking.to_string(), "a > b > c");
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("a"), 0.0);
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("b"), 1.0);
  EXPECT_DOUBLE_EQ(res.per_candidate_score.at("c"), 2.0);
}

TEST(Voting, DodgsonRejectsTiedBallots) {
  auto p = profile_of({{{"a"}, {"b", "c"}}}, {"a", "b", "c"});
  try {
    aggregate(p, cfg_for(Rule::dodgson));
    FAIL() << "tied ballot accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ties_unsupported);
  }
}

TEST(Voting, IrvBreaksFirstRoundTieByDeeperCounts) {
  // All three candidates tie on first preferences; second-preference
  // counts (a:3, b:2, c:1) eliminate c, after which a wins 2-1.
  auto p = linear_profile(
      {{"a", "b", "c"}, {"b", "a", "c"}, {"c", "a", "b"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::irv));
  EXPECT_EQ(res.ranking.to_string(), "a > b > c");
}

TEST(Voting, KemenyExactPinnedProfile) {
  auto p = linear_profile(
      {{"a", "b", "c"}, {"b", "a", "c"}, {"c", "a", "b"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::kemeny_exact));
  EXPECT_EQ(res.ranking.to_string(), "a > b > c");
  EXPECT_DOUBLE_EQ(res.objective, 3.0);
}

TEST(Voting, KemenyHeuristicBreaksPerfectCycle) {
  auto p = linear_profile(
      {{"a", "b", "c"}, {"b", "c", "a"}, {"c", "a", "b"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::kemeny_heuristic));
  // Every linear order scores 4 on this cycle; the heuristic drops the
  // lexicographically first minimum-weight edge (a, b) and sorts the rest.
  EXPECT_DOUBLE_EQ(res.objective, 4.0);
  auto exact = aggregate(p, cfg_for(Rule::kemeny_exact));
  EXPECT_DOUBLE_EQ(exact.objective, 4.0);
}

TEST(Voting, KendallMaxUnanimousProfile) {
  auto p = linear_profile({{"b", "a", "c"}, {"b", "a", "c"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::kendall_max));
  EXPECT_EQ(res.ranking.to_string(), "b > a > c");
  EXPECT_NEAR(res.objective, 2.0, 1e-12);
}

TEST(Voting, SpearmanMaxPrefersAbsoluteRhoThenSigned) {
  // {abc, bac, cab}: b > a > c reaches total |rho| 2.5 because it is
  // perfectly anti-correlated with cab; a > b > c only reaches 2.0.
  auto p = linear_profile(
      {{"a", "b", "c"}, {"b", "a", "c"}, {"c", "a", "b"}}, {"a", "b", "c"});
  auto res = aggregate(p, cfg_for(Rule::spearman_max));
  EXPECT_EQ(res.ranking.to_string(), "b > a > c");
  EXPECT_NEAR(res.objective, 2.5, 1e-9);

  // On a unanimous profile the signed tiebreaker picks the ballot itself
  // over its reversal.
  auto u = linear_profile({{"c", "a", "b"}}, {"a", "b", "c"});
  EXPECT_EQ(aggregate(u, cfg_for(Rule::spearman_max)).ranking.to_string(),
            "c > a > b");
}

TEST(Voting, TieBreakVariants) {
  QuestionProfile p = linear_profile({{"b", "a"}, {"a", "b"}}, {"b", "a"});
  RuleConfig lex = cfg_for(Rule::average);
  EXPECT_EQ(aggregate(p, lex).ranking.to_string(), "a > b");

  RuleConfig in_order = lex;
  in_order.tie_break = TieBreak::input_order;
  EXPECT_EQ(aggregate(p, in_order).ranking.to_string(), "b > a");

  RuleConfig rnd = lex;
  rnd.tie_break = TieBreak::random;
  rnd.seed = 42;
  auto r1 = aggregate(p, rnd).ranking;
  auto r2 = aggregate(p, rnd).ranking;
  EXPECT_EQ(r1.to_string(), r2.to_string());
}

TEST(Voting, ExactRulesEnforceSizeLimits) {
  std::vector<ModelId> many;
  for (int i = 0; i < 11; ++i) many.push_back("c" + std::to_string(10 + i));
  std::vector<std::vector<ModelId>> one = {many};
  auto p = linear_profile(one, many);
  for (Rule r : {Rule::kemeny_exact, Rule::kendall_max, Rule::spearman_max}) {
    try {
      aggregate(p, cfg_for(r));
      FAIL() << "limit ignored for " << peerrank::rule_name(r);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::size_limit_exceeded);
      EXPECT_EQ(e.exit_code(), 3);
    }
  }
}

TEST(Voting, EmptyProfileRejected) {
  QuestionProfile p;
  p.question_id = "q";
  p.candidates = {"a", "b"};
  try {
    aggregate(p, cfg_for(Rule::borda));
    FAIL() << "empty profile accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_profile);
  }
}

// ===== randomized cross-checks against the exhaustive oracle ==============

std::vector<ModelId> candidate_pool(int m) {
  std::vector<ModelId> ids;
  for (int i = 0; i < m; ++i) ids.push_back(std::string(1, char('a' + i)));
  return ids;
}

QuestionProfile random_linear_profile(peerrank::SplitMix64& rng, int m,
                                      int n_ballots) {
  auto ids = candidate_pool(m);
  std::vector<std::vector<ModelId>> ballots;
  for (int b = 0; b < n_ballots; ++b) {
    auto order = peerrank::shuffled_indices(ids.size(), rng.next());
    std::vector<ModelId> ballot;
    for (auto i : order) ballot.push_back(ids[i]);
    ballots.push_back(std::move(ballot));
  }
  return linear_profile(std::move(ballots), ids);
}

TEST(Voting, KemenyExactMatchesOracle) {
  peerrank::SplitMix64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);
    const int nb = 1 + static_cast<int>(rng.next() % 7);
    auto p = random_linear_profile(rng, m, nb);
    auto res = aggregate(p, cfg_for(Rule::kemeny_exact));
    auto ballots = p.ballots();
    auto ora = peerrank::oracle::kemeny(p.candidates, ballots);
    EXPECT_DOUBLE_EQ(res.objective, ora.objective);
    EXPECT_EQ(res.ranking.to_string(), ora.ranking.to_string());
  }
}

TEST(Voting, KendallMaxReachesOracleObjective) {
  peerrank::SplitMix64 rng(78);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 2);
    const int nb = 1 + static_cast<int>(rng.next() % 5);
    auto p = random_linear_profile(rng, m, nb);
    auto res = aggregate(p, cfg_for(Rule::kendall_max));
    auto ballots = p.ballots();
    auto ora = peerrank::oracle::kendall_max(p.candidates, ballots);
    EXPECT_NEAR(res.objective, ora.objective, 1e-9);
    // The chosen order must itself attain the oracle optimum.
    std::vector<ModelId> order;
    for (const auto& g : res.ranking.groups()) order.push_back(g.front());
    auto maps = peerrank::oracle::detail::ballot_group_maps(ballots);
    double total = 0;
    for (const auto& g : maps) {
      auto t = peerrank::oracle::naive_tau(order, g);
      if (t) total += *t;
    }
    EXPECT_NEAR(total, ora.objective, 1e-9);
  }
}

TEST(Voting, SpearmanMaxReachesOracleObjective) {
  peerrank::SplitMix64 rng(79);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 2);
    const int nb = 1 + static_cast<int>(rng.next() % 5);
    auto p = random_linear_profile(rng, m, nb);
    auto res = aggregate(p, cfg_for(Rule::spearman_max));
    auto ballots = p.ballots();
    auto ora = peerrank::oracle::spearman_max(p.candidates, ballots);
    EXPECT_NEAR(res.objective, ora.objective, 1e-9);
    std::vector<ModelId> order;
    for (const auto& g : res.ranking.groups()) order.push_back(g.front());
    double total = 0;
    for (const auto& b : ballots) {
      auto rho = peerrank::oracle::naive_rho(order, b);
      if (rho) total += std::fabs(*rho);
    }
    EXPECT_NEAR(total, ora.objective, 1e-9);
  }
}

TEST(Voting, DodgsonMatchesSwapSearchOracle) {
  peerrank::SplitMix64 rng(80);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 2);
    const int nb = 1 + 2 * static_cast<int>(rng.next() % 2);  // 1 or 3
    auto p = random_linear_profile(rng, m, nb);
    auto res = aggregate(p, cfg_for(Rule::dodgson));
    auto ballots = p.ballots();
    for (const auto& c : p.candidates) {
      auto expect =
          peerrank::oracle::dodgson_score_bfs(p.candidates, ballots, c);
      EXPECT_DOUBLE_EQ(res.per_candidate_score.at(c),
                       static_cast<double>(expect))
          << "candidate " << c << " trial " << trial;
    }
  }
}

TEST(Voting, CondorcetWinnerRanksFirstAcrossCondorcetRules) {
  peerrank::SplitMix64 rng(81);
  int found = 0;
  for (int trial = 0; trial < 120 && found < 40; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);
    const int nb = 3 + 2 * static_cast<int>(rng.next() % 3);  // odd
    auto p = random_linear_profile(rng, m, nb);
    auto ballots = p.ballots();
    auto winner = peerrank::oracle::condorcet_winner(p.candidates, ballots);
    if (!winner) continue;
    ++found;
    for (Rule r : {Rule::copeland, Rule::dodgson, Rule::kemeny_exact,
                   Rule::kemeny_heuristic}) {
      auto res = aggregate(p, cfg_for(r));
      EXPECT_EQ(res.ranking.groups().front().front(), *winner)
          << peerrank::rule_name(r);
    }
  }
  EXPECT_GE(found, 20);
}

}  // namespace
