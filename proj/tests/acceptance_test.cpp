// Release gate: twelve criteria, one printed PASS/FAIL line each.
// Tolerances are pinned next to every check; a failing line means the
// build must not ship.

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "peerrank/alignment.hpp"
#include "peerrank/gateway.hpp"
#include "peerrank/io.hpp"
#include "peerrank/metrics.hpp"
#include "peerrank/oracle.hpp"
#include "peerrank/pipeline.hpp"
#include "peerrank/protocols.hpp"
#include "peerrank/rng.hpp"
#include "peerrank/simulate.hpp"
#include "peerrank/voting.hpp"

namespace {

using namespace peerrank;

void report(int num, const char* what, bool ok) {
  std::printf("ACCEPTANCE %02d %s: %s\n", num, ok ? "PASS" : "FAIL", what);
  std::fflush(stdout);
  EXPECT_TRUE(ok) << "criterion " << num << ": " << what;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<ModelId> candidate_pool(int m) {
  std::vector<ModelId> ids;
  for (int i = 0; i < m; ++i) ids.push_back(std::string(1, char('a' + i)));
  return ids;
}

QuestionProfile random_linear_profile(SplitMix64& rng, int m, int n_ballots) {
  auto ids = candidate_pool(m);
  QuestionProfile p;
  p.question_id = "q";
  p.candidates = ids;
  for (int b = 0; b < n_ballots; ++b) {
    EvaluationRecord rec;
    rec.question_id = "q";
    rec.evaluator = "ev" + std::to_string(b);
    rec.external_reference = true;
    auto order = shuffled_indices(ids.size(), rng.next());
    std::vector<ModelId> ballot;
    for (auto i : order) ballot.push_back(ids[i]);
    rec.ranking = Ranking::linear(std::move(ballot));
    p.records.push_back(std::move(rec));
  }
  return p;
}

RuleConfig cfg_for(Rule r) {
  RuleConfig cfg;
  cfg.rule = r;
  return cfg;
}

// Strict-majority digraph acyclicity, recomputed from the raw ballots so the
// check shares nothing with the heuristic under test.
bool majority_acyclic(const QuestionProfile& p) {
  const auto& ids = p.candidates;
  const std::size_t m = ids.size();
  auto ballots = p.ballots();
  auto maps = oracle::detail::ballot_group_maps(ballots);
  std::vector<std::vector<bool>> edge(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      int wins = 0, losses = 0;
      for (const auto& g : maps) {
        int r = oracle::detail::relation(g, ids[i], ids[j]);
        if (r == -1) ++wins;
        if (r == 1) ++losses;
      }
      edge[i][j] = wins > losses;
    }
  // DFS three-color cycle detection.
  std::vector<int> color(m, 0);
  std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
    color[u] = 1;
    for (std::size_t v = 0; v < m; ++v) {
      if (!edge[u][v]) continue;
      if (color[v] == 1) return false;
      if (color[v] == 0 && !dfs(v)) return false;
    }
    color[u] = 2;
    return true;
  };
  for (std::size_t u = 0; u < m; ++u)
    if (color[u] == 0 && !dfs(u)) return false;
  return true;
}

double consensus_micro_pearson_mean(const SimRun& run) {
  std::map<std::string, Ranking> stream;
  for (const auto& p : run.profiles)
    stream[p.question_id] = aggregate(p, cfg_for(Rule::kemeny_exact)).ranking;
  ReferenceRanking ref;
  ref.ranking = run.true_ranking;
  return align(stream, ref, Metric::pearson).micro.mean;
}

TEST(Acceptance, C01_KendallExample) {
  const auto t0 = std::chrono::steady_clock::now();
  auto a = Ranking::linear({"A", "B", "C"});
  auto b = Ranking::linear({"B", "A", "C"});
  const bool dist_ok = kendall_distance(a, b) == 1;
  // tau = (2 - 1) / 3: exactly representable, so exact equality is pinned.
  const bool tau_ok = kendall_tau(a, b).value == 1.0 / 3.0;
  const bool fast = seconds_since(t0) < 0.001;
  report(1, "kendall distance 1 and tau 1/3 in under 1ms",
         dist_ok && tau_ok && fast);
}

TEST(Acceptance, C02_KemenyOracleEquivalence) {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(20260815);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);        // 3..5
    const int nb = 1 + static_cast<int>(rng.next() % 7);       // 1..7
    auto p = random_linear_profile(rng, m, nb);
    auto res = aggregate(p, cfg_for(Rule::kemeny_exact));
    auto ballots = p.ballots();
    auto ora = oracle::kemeny(p.candidates, ballots);
    // Objectives are integral; compared exactly.
    if (res.objective != ora.objective) ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  report(2, "kemeny_exact matches brute force on 200 profiles in <10s",
         mismatches == 0 && elapsed < 10.0);
}

TEST(Acceptance, C03_PinnedThreeBallotProfile) {
  QuestionProfile p;
  p.question_id = "q";
  p.candidates = {"A", "B", "C"};
  int e = 0;
  for (auto ballot : {std::vector<ModelId>{"A", "B", "C"},
                      std::vector<ModelId>{"B", "A", "C"},
                      std::vector<ModelId>{"C", "A", "B"}}) {
    EvaluationRecord rec;
    rec.question_id = "q";
    rec.evaluator = "ev" + std::to_string(e++);
    rec.external_reference = true;
    rec.ranking = Ranking::linear(ballot);
    p.records.push_back(std::move(rec));
  }
  auto res = aggregate(p, cfg_for(Rule::kemeny_exact));
  const bool optimum_ok =
      res.objective == 3.0 && res.ranking.to_string() == "A > B > C";
  // The widely quoted consensus [B, A, C] for this profile totals 4, which
  // is strictly worse than the true optimum; pinned here so the discrepancy
  // stays visible.
  auto ballots = p.ballots();
  auto maps = oracle::detail::ballot_group_maps(ballots);
  std::int64_t quoted = 0;
  for (const auto& g : maps)
    quoted += oracle::naive_distance({"B", "A", "C"}, g);
  report(3, "pinned profile: optimum [A,B,C] at 3; quoted [B,A,C] totals 4",
         optimum_ok && quoted == 4);
}

TEST(Acceptance, C04_CondorcetConsistency) {
  SplitMix64 rng(44001);
  int found = 0, violations = 0, attempts = 0;
  while (found < 500 && attempts < 20000) {
    ++attempts;
    const int m = 3 + static_cast<int>(rng.next() % 3);       // 3..5
    const int nb = 3 + 2 * static_cast<int>(rng.next() % 3);  // 3,5,7
    auto p = random_linear_profile(rng, m, nb);
    auto ballots = p.ballots();
    auto winner = oracle::condorcet_winner(p.candidates, ballots);
    if (!winner) continue;
    ++found;
    for (Rule r : {Rule::copeland, Rule::dodgson, Rule::kemeny_exact,
                   Rule::kemeny_heuristic}) {
      auto res = aggregate(p, cfg_for(r));
      if (res.ranking.groups().front().front() != *winner) ++violations;
    }
  }
  report(4, "condorcet winner first under 4 rules on 500 profiles",
         found == 500 && violations == 0);
}

TEST(Acceptance, C05_RuleAxioms) {
  const Rule all_rules[] = {Rule::average,      Rule::borda,
                            Rule::copeland,     Rule::dodgson,
                            Rule::irv,          Rule::kemeny_exact,
                            Rule::kemeny_heuristic, Rule::kendall_max,
                            Rule::spearman_max};
  SplitMix64 rng(55001);
  int anonymity_bad = 0, neutrality_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);
    const int nb = 2 + static_cast<int>(rng.next() % 6);  // 2..7
    auto p = random_linear_profile(rng, m, nb);

    QuestionProfile shuffled = p;
    std::reverse(shuffled.records.begin(), shuffled.records.end());

    QuestionProfile relabeled = p;
    std::map<ModelId, ModelId> fwd;
    for (auto& id : relabeled.candidates) {
      fwd[id] = "n" + id;  // order-preserving relabel
      id = "n" + id;
    }
    for (auto& rec : relabeled.records) rec.ranking = rec.ranking.relabeled(fwd);

    for (Rule r : all_rules) {
      const auto base = aggregate(p, cfg_for(r)).ranking.to_string();
      if (aggregate(shuffled, cfg_for(r)).ranking.to_string() != base)
        ++anonymity_bad;
      const auto mapped =
          aggregate(p, cfg_for(r)).ranking.relabeled(fwd).to_string();
      if (aggregate(relabeled, cfg_for(r)).ranking.to_string() != mapped)
        ++neutrality_bad;
    }
  }
  int unanimity_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);
    const int copies = 1 + static_cast<int>(rng.next() % 5);
    auto ids = candidate_pool(m);
    auto order = shuffled_indices(ids.size(), rng.next());
    std::vector<ModelId> ballot;
    for (auto i : order) ballot.push_back(ids[i]);
    QuestionProfile p;
    p.question_id = "q";
    p.candidates = ids;
    for (int c = 0; c < copies; ++c) {
      EvaluationRecord rec;
      rec.question_id = "q";
      rec.evaluator = "ev" + std::to_string(c);
      rec.external_reference = true;
      rec.ranking = Ranking::linear(ballot);
      p.records.push_back(std::move(rec));
    }
    const auto want = Ranking::linear(ballot).to_string();
    for (Rule r : all_rules)
      if (aggregate(p, cfg_for(r)).ranking.to_string() != want)
        ++unanimity_bad;
  }
  report(5, "anonymity, unanimity, lex neutrality across all nine rules",
         anonymity_bad == 0 && unanimity_bad == 0 && neutrality_bad == 0);
}

TEST(Acceptance, C06_HeuristicBound) {
  SplitMix64 rng(20260815);  // same stream shape as criterion 2
  int bound_bad = 0, acyclic_gap = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + static_cast<int>(rng.next() % 3);
    const int nb = 1 + static_cast<int>(rng.next() % 7);
    auto p = random_linear_profile(rng, m, nb);
    const double exact = aggregate(p, cfg_for(Rule::kemeny_exact)).objective;
    const double heur =
        aggregate(p, cfg_for(Rule::kemeny_heuristic)).objective;
    // Both objectives are integral distance totals; 1e-9 absorbs nothing
    // but guards the comparison form.
    if (heur < exact - 1e-9) ++bound_bad;
    if (majority_acyclic(p) && std::fabs(heur - exact) > 1e-9) ++acyclic_gap;
  }
  report(6, "heuristic objective >= exact, equal on acyclic majorities",
         bound_bad == 0 && acyclic_gap == 0);
}

TEST(Acceptance, C07_BiasDirectionReproduction) {
  const auto t0 = std::chrono::steady_clock::now();
  int ok_seeds = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    SimConfig cfg;
    cfg.m = 6;
    cfg.n = 500;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.quality_spread = 1.0;
    cfg.noise = 0.5;  // moderate perception noise
    cfg.set_uniform_bias(0.8 * cfg.quality_spread);
    auto run = simulate(cfg);
    auto rows = bias_table(run.profiles, cfg_for(Rule::kemeny_exact));
    double mean_delta = 0, mean_abs_delta = 0, mean_abs_iso = 0;
    for (const auto& r : rows) {
      mean_delta += r.pe_minus_se;
      mean_abs_delta += std::fabs(r.pe_minus_se);
      mean_abs_iso += std::fabs(r.sfe_minus_sie);
    }
    const double nm = static_cast<double>(rows.size());
    mean_delta /= nm;
    mean_abs_delta /= nm;
    mean_abs_iso /= nm;
    if (mean_delta > 0.0 && mean_abs_iso < mean_abs_delta) ++ok_seeds;
  }
  const double elapsed = seconds_since(t0);
  char what[160];
  std::snprintf(what, sizeof(what),
                "self-bias direction holds in %d/20 seeds (need >=18, <2min)",
                ok_seeds);
  report(7, what, ok_seeds >= 18 && elapsed < 120.0);
}

TEST(Acceptance, C08_TruncationDirection) {
  int ok_seeds = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    SimConfig cfg;
    cfg.m = 6;
    cfg.n = 500;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.quality_spread = 1.0;
    cfg.noise = 1.5;  // moderate: consensus clearly imperfect yet informative
    auto full = simulate(cfg);
    cfg.truncate_k = 3;
    auto trunc = simulate(cfg);
    if (consensus_micro_pearson_mean(trunc) <=
        consensus_micro_pearson_mean(full))
      ++ok_seeds;
  }
  char what[160];
  std::snprintf(what, sizeof(what),
                "truncated micro pearson <= full in %d/20 seeds (need >=17)",
                ok_seeds);
  report(8, what, ok_seeds >= 17);
}

TEST(Acceptance, C09_NoiseZeroRecovery) {
  SimConfig cfg;
  cfg.m = 6;
  cfg.n = 40;
  cfg.seed = 9;
  cfg.noise = 0.0;
  auto run = simulate(cfg);
  const Rule all_rules[] = {Rule::average,      Rule::borda,
                            Rule::copeland,     Rule::dodgson,
                            Rule::irv,          Rule::kemeny_exact,
                            Rule::kemeny_heuristic, Rule::kendall_max,
                            Rule::spearman_max};
  const std::string truth = run.true_ranking.to_string();
  bool all_match = true;
  std::map<std::string, Ranking> stream;
  for (const auto& p : run.profiles) {
    for (Rule r : all_rules) {
      auto res = aggregate(p, cfg_for(r));
      if (res.ranking.to_string() != truth) all_match = false;
      if (r == Rule::kemeny_exact) stream[p.question_id] = res.ranking;
    }
  }
  ReferenceRanking ref;
  ref.ranking = run.true_ranking;
  // Identical integer rank vectors: both correlations are exactly 1.
  const bool macro_ok =
      align(stream, ref, Metric::pearson).macro == 1.0 &&
      align(stream, ref, Metric::kendall).macro == 1.0;
  report(9, "noise-zero: every rule recovers truth, macro exactly 1.0",
         all_match && macro_ok);
}

TEST(Acceptance, C10_DistributionStatsPinned) {
  auto render = [] {
    auto s = describe({0.2, 0.4, 0.6, 0.8, 1.0});
    return fmt_num(s.mean) + "|" + fmt_num(s.std_dev) + "|" + fmt_num(s.min) +
           "|" + fmt_num(s.p25) + "|" + fmt_num(s.p50) + "|" +
           fmt_num(s.p75) + "|" + fmt_num(s.max);
  };
  auto s = describe({0.2, 0.4, 0.6, 0.8, 1.0});
  // The five-point list sums to exactly 3.0 in binary, so the pinned
  // convention demands exact equality, not a tolerance.
  const bool values_ok =
      s.mean == 0.6 && s.p50 == 0.6 && s.min == 0.2 && s.max == 1.0;
  const bool stable = render() == render();
  report(10, "describe({0.2..1.0}) pinned and byte-stable", values_ok && stable);
}

TEST(Acceptance, C11_EndToEndDeterminism) {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "peerrank_acceptance_c11";
  fs::remove_all(root);
  fs::create_directories(root);
  SimConfig cfg;
  cfg.m = 5;
  cfg.n = 12;
  cfg.seed = 1101;
  cfg.noise = 1.0;
  cfg.set_uniform_bias(0.5);
  auto run = simulate(cfg);
  write_ballot_file(root / "ballots.jsonl", run.profiles);
  ReferenceRanking ref;
  ref.ranking = run.true_ranking;
  write_reference_file(root / "ref.json", ref);

  RunManifest manifest;
  manifest.ballots_path = (root / "ballots.jsonl").string();
  manifest.reference_path = (root / "ref.json").string();
  manifest.output_dir = (root / "out").string();

  auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(manifest.output_dir)) {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      files[e.path().filename().string()] = ss.str();
    }
    fs::remove_all(manifest.output_dir);
    return files;
  };

  run_pipeline(manifest, 1);
  auto first = snapshot();
  run_pipeline(manifest, 1);
  auto second = snapshot();
  run_pipeline(manifest, 4);
  auto parallel = snapshot();
  fs::remove_all(root);
  report(11, "identical manifest: byte-identical reruns, serial == parallel",
         !first.empty() && first == second && first == parallel);
}

TEST(Acceptance, C12_GatewayParseRoundTrip) {
  auto tmpl = prompt_template(PromptDomain::overall);
  std::vector<std::string> responses = {"r0", "r1", "r2", "r3", "r4", "r5"};
  auto rp = render_prompt(tmpl, "q?", responses, 6, 987654321);
  std::vector<std::size_t> response_to_slot(6);
  for (std::size_t slot = 0; slot < 6; ++slot)
    response_to_slot[rp.slot_to_response[slot]] = slot;

  int cases = 0, good = 0;
  std::vector<std::size_t> target = {0, 1, 2, 3, 4, 5};
  do {
    ++cases;
    std::string reply;
    for (std::size_t r = 0; r < 6; ++r)
      reply += std::to_string(r + 1) + ". Solution " +
               std::to_string(response_to_slot[target[r]] + 1) + "\n";
    auto order = parse_ranking_reply(reply, 6);
    bool ok = true;
    for (std::size_t r = 0; r < 6; ++r)
      if (rp.slot_to_response[order[r] - 1] != target[r]) ok = false;
    if (ok) ++good;
  } while (std::next_permutation(target.begin(), target.end()));

  // Malformed replies surface as typed errors and never abort collection.
  bool errors_ok = true;
  try {
    parse_ranking_reply("1. Solution 1\n2. Solution 1\n", 2);
    errors_ok = false;
  } catch (const Error& e) {
    if (e.code() != Errc::malformed_reply) errors_ok = false;
  }
  try {
    parse_ranking_reply("1. Solution 2\n", 2);
    errors_ok = false;
  } catch (const Error& e) {
    if (e.code() != Errc::incomplete_ranking) errors_ok = false;
  }
  CollectRequest req;
  req.domain = PromptDomain::overall;
  req.seed = 3;
  CollectQuestion q;
  q.question_id = "q1";
  q.question = "q?";
  q.responses = {{"a", "ra"}, {"b", "rb"}};
  req.questions.push_back(q);
  std::vector<EndpointConfig> eps(2);
  eps[0].model = "a";
  eps[1].model = "b";
  for (auto& ep : eps) ep.max_retries = 1;
  FixtureTransport fx;
  fx.add_reply("q1", "a", "gibberish");
  fx.add_reply("q1", "a", "more gibberish");
  fx.add_reply("q1", "b", "1. Solution 1\n2. Solution 2");
  bool run_survived = false;
  std::size_t records = 0, failures = 0;
  try {
    auto out = collect(req, eps, fx);
    run_survived = true;
    records = out.records.size();
    failures = out.failures.size();
  } catch (const Error&) {
    run_survived = false;
  }
  report(12, "720/720 shuffled replies decode; malformed replies degrade",
         cases == 720 && good == 720 && errors_ok && run_survived &&
             records == 1 && failures == 1);
}

}  // namespace
