#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/ranking.hpp"
#include "peerrank/rng.hpp"

namespace peerrank {

enum class Rule {
  average,
  borda,
  copeland,
  dodgson,
  irv,
  kemeny_exact,
  kemeny_heuristic,
  kendall_max,
  spearman_max,
};

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::average: return "average";
    case Rule::borda: return "borda";
    case Rule::copeland: return "copeland";
    case Rule::dodgson: return "dodgson";
    case Rule::irv: return "irv";
    case Rule::kemeny_exact: return "kemeny_exact";
    case Rule::kemeny_heuristic: return "kemeny_heuristic";
    case Rule::kendall_max: return "kendall_max";
    case Rule::spearman_max: return "spearman_max";
  }
  return "?";
}

inline Rule rule_from_name(const std::string& s) {
  for (Rule r : {Rule::average, Rule::borda, Rule::copeland, Rule::dodgson,
                 Rule::irv, Rule::kemeny_exact, Rule::kemeny_heuristic,
                 Rule::kendall_max, Rule::spearman_max})
    if (s == rule_name(r)) return r;
  fail(Errc::invalid_config, "unknown rule '" + s + "'");
}

/// How exact ties between candidates are resolved into a strict order.
/// lex_id: smaller id wins. input_order: earlier candidate wins.
/// random: a seeded shuffle fixes the priority order (reproducible).
enum class TieBreak { lex_id, input_order, random };

inline const char* tie_break_name(TieBreak t) {
  switch (t) {
    case TieBreak::lex_id: return "lex_id";
    case TieBreak::input_order: return "input_order";
    case TieBreak::random: return "random";
  }
  return "?";
}

inline TieBreak tie_break_from_name(const std::string& s) {
  for (TieBreak t : {TieBreak::lex_id, TieBreak::input_order, TieBreak::random})
    if (s == tie_break_name(t)) return t;
  fail(Errc::invalid_config, "unknown tie_break '" + s + "'");
}

struct RuleConfig {
  Rule rule = Rule::kemeny_exact;
  TieBreak tie_break = TieBreak::lex_id;
  std::uint64_t seed = 0;  // consumed by TieBreak::random only
  int exact_m_limit = 10;  // candidate ceiling for the exact rules
};

/// Outcome of one aggregation. `ranking` is always linear: score ties are
/// broken by the configured tie-break so downstream consumers never face
/// ambiguity. `objective` is rule-specific:
///   kemeny_*     total Kendall distance to the ballots
///   kendall_max  total Kendall tau at the optimum
///   spearman_max total |Spearman rho| at the optimum
///   irv          number of elimination rounds
///   others       the winner's score
struct ConsensusResult {
  Rule rule = Rule::kemeny_exact;
  Ranking ranking;
  double objective = 0.0;
  std::map<ModelId, double> per_candidate_score;
};

namespace voting_detail {

/// Tie-break priority rank per candidate index; lower rank wins ties.
inline std::vector<std::size_t> tie_break_rank(
    const std::vector<ModelId>& cands, const RuleConfig& cfg) {
  const std::size_t n = cands.size();
  std::vector<std::size_t> rank(n);
  switch (cfg.tie_break) {
    case TieBreak::input_order:
      for (std::size_t i = 0; i < n; ++i) rank[i] = i;
      break;
    case TieBreak::lex_id: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cands[a] < cands[b];
      });
      for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;
      break;
    }
    case TieBreak::random: {
      auto order = shuffled_indices(n, cfg.seed);
      for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;
      break;
    }
  }
  return rank;
}

/// Sorts candidates by an exact three-way comparator (negative = first
/// argument ranks higher), breaking exact ties by tie-break priority.
inline ConsensusResult order_by(
    Rule rule, const std::vector<ModelId>& cands,
    const std::vector<double>& report_score,
    const std::function<int(std::size_t, std::size_t)>& cmp,
    const RuleConfig& cfg) {
  auto tb = tie_break_rank(cands, cfg);
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int c = cmp(a, b);
    if (c != 0) return c < 0;
    return tb[a] < tb[b];
  });
  ConsensusResult res;
  res.rule = rule;
  std::vector<ModelId> lin;
  lin.reserve(order.size());
  for (std::size_t i : order) lin.push_back(cands[i]);
  res.ranking = Ranking::linear(std::move(lin));
  for (std::size_t i = 0; i < cands.size(); ++i)
    res.per_candidate_score[cands[i]] = report_score[i];
  res.objective = report_score[order.front()];
  return res;
}

inline void require_ballots(const std::vector<ModelId>& cands,
                            std::span<const Ranking> ballots) {
  if (cands.empty()) fail(Errc::empty_profile, "no candidates to rank");
  if (ballots.empty()) fail(Errc::empty_profile, "no ballots to aggregate");
}

inline void require_exact_size(std::size_t m, const RuleConfig& cfg,
                               std::size_t hard_cap) {
  if (m > static_cast<std::size_t>(cfg.exact_m_limit) || m > hard_cap)
    fail(Errc::size_limit_exceeded,
         std::to_string(m) + " candidates exceed the exact-rule limit " +
             std::to_string(std::min<std::size_t>(
                 hard_cap, static_cast<std::size_t>(cfg.exact_m_limit))));
}

/// Subset DP for the linear ordering problem: find the permutation
/// minimizing sum of cost[a][b] over ordered pairs (a above b). Among
/// co-optimal permutations returns the one lexicographically smallest in
/// tie-break priority order. Cost recomputation during reconstruction
/// mirrors the DP loop exactly, so equality tests are exact even for
/// floating-point costs.
template <typename Cost>
std::pair<std::vector<std::size_t>, Cost> linear_order_dp(
    const std::vector<std::vector<Cost>>& cost,
    const std::vector<std::size_t>& tb_rank) {
  const std::size_t m = cost.size();
  // Re-index candidates so that ascending index = tie-break priority.
  std::vector<std::size_t> by_prio(m);
  std::iota(by_prio.begin(), by_prio.end(), std::size_t{0});
  std::sort(by_prio.begin(), by_prio.end(),
            [&](std::size_t a, std::size_t b) { return tb_rank[a] < tb_rank[b]; });
  std::vector<std::vector<Cost>> c(m, std::vector<Cost>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) c[i][j] = cost[by_prio[i]][by_prio[j]];

  const std::size_t full = (std::size_t{1} << m) - 1;
  std::vector<Cost> g(full + 1, Cost{});
  auto head_cost = [&](std::size_t head, std::size_t mask) {
    Cost s{};
    for (std::size_t u = 0; u < m; ++u)
      if (u != head && (mask >> u & 1)) s += c[head][u];
    return s;
  };
  for (std::size_t mask = 1; mask <= full; ++mask) {
    Cost best{};
    bool first = true;
    for (std::size_t h = 0; h < m; ++h) {
      if (!(mask >> h & 1)) continue;
      const Cost v = head_cost(h, mask) + g[mask & ~(std::size_t{1} << h)];
      if (first || v < best) {
        best = v;
        first = false;
      }
    }
    g[mask] = best;
  }

  std::vector<std::size_t> order;
  order.reserve(m);
  std::size_t mask = full;
  while (mask) {
    for (std::size_t h = 0; h < m; ++h) {
      if (!(mask >> h & 1)) continue;
      const std::size_t rest = mask & ~(std::size_t{1} << h);
      if (head_cost(h, mask) + g[rest] == g[mask]) {
        order.push_back(by_prio[h]);
        mask = rest;
        break;
      }
    }
  }
  return {order, g[full]};
}

inline ConsensusResult from_order(Rule rule,
                                  const std::vector<ModelId>& cands,
                                  const std::vector<std::size_t>& order,
                                  double objective) {
  ConsensusResult res;
  res.rule = rule;
  std::vector<ModelId> lin;
  lin.reserve(order.size());
  for (std::size_t i : order) lin.push_back(cands[i]);
  res.ranking = Ranking::linear(std::move(lin));
  for (std::size_t p = 0; p < order.size(); ++p)
    res.per_candidate_score[cands[order[p]]] = static_cast<double>(p + 1);
  res.objective = objective;
  return res;
}

/// Per-ballot tie-group structure restricted to the candidate index space.
struct BallotView {
  std::vector<int> gidx;                       // group index or -1
  std::vector<std::vector<std::size_t>> groups;  // restricted, in order
  std::size_t present = 0;
};

inline std::vector<BallotView> ballot_views(const std::vector<ModelId>& cands,
                                            std::span<const Ranking> ballots) {
  std::vector<BallotView> out;
  out.reserve(ballots.size());
  for (const auto& b : ballots) {
    BallotView v;
    v.gidx = b.group_index_over(cands);
    int max_g = -1;
    for (int g : v.gidx) max_g = std::max(max_g, g);
    std::vector<std::vector<std::size_t>> groups(
        static_cast<std::size_t>(max_g + 1));
    for (std::size_t i = 0; i < v.gidx.size(); ++i)
      if (v.gidx[i] >= 0) {
        groups[static_cast<std::size_t>(v.gidx[i])].push_back(i);
        ++v.present;
      }
    for (auto& g : groups)
      if (!g.empty()) v.groups.push_back(std::move(g));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace voting_detail

/// Mean mid-rank position, ascending. Ballot coverage may vary (partial
/// ballots contribute only to the candidates they rank); comparisons use
/// exact integer fractions, never float equality.
inline ConsensusResult average_rank(const std::vector<ModelId>& cands,
                                    std::span<const Ranking> ballots,
                                    const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t n = cands.size();
  std::vector<std::int64_t> sum_dbl(n, 0), cnt(n, 0);
  for (const auto& b : ballots) {
    auto dbl = b.doubled_positions_over(cands);
    for (std::size_t i = 0; i < n; ++i)
      if (dbl[i] >= 0) {
        sum_dbl[i] += dbl[i];
        ++cnt[i];
      }
  }
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i)
    score[i] = cnt[i] ? static_cast<double>(sum_dbl[i]) /
                            (2.0 * static_cast<double>(cnt[i]))
                      : std::numeric_limits<double>::infinity();
  auto cmp = [&](std::size_t a, std::size_t b) -> int {
    if (cnt[a] == 0 || cnt[b] == 0) {
      if (cnt[a] == cnt[b]) return 0;
      return cnt[a] ? -1 : 1;  // unranked candidates sink to the bottom
    }
    const auto lhs = sum_dbl[a] * cnt[b];
    const auto rhs = sum_dbl[b] * cnt[a];
    return lhs < rhs ? -1 : lhs > rhs ? 1 : 0;
  };
  return voting_detail::order_by(Rule::average, cands, score, cmp, cfg);
}

/// Borda count: a ballot over m_b candidates awards m_b - position points;
/// a tie group splits its span's points evenly. Descending total points.
inline ConsensusResult borda(const std::vector<ModelId>& cands,
                             std::span<const Ranking> ballots,
                             const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t n = cands.size();
  std::vector<std::int64_t> pts_dbl(n, 0);
  for (const auto& b : ballots) {
    const std::int64_t mb = static_cast<std::int64_t>(b.candidate_count());
    auto dbl = b.doubled_positions_over(cands);
    for (std::size_t i = 0; i < n; ++i)
      if (dbl[i] >= 0) pts_dbl[i] += 2 * mb - dbl[i];
  }
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i)
    score[i] = static_cast<double>(pts_dbl[i]) / 2.0;
  auto cmp = [&](std::size_t a, std::size_t b) -> int {
    return pts_dbl[a] > pts_dbl[b] ? -1 : pts_dbl[a] < pts_dbl[b] ? 1 : 0;
  };
  return voting_detail::order_by(Rule::borda, cands, score, cmp, cfg);
}

/// Copeland: net pairwise wins, +1 per majority win, -1 per loss.
inline ConsensusResult copeland(const PairwiseMatrix& m,
                                const RuleConfig& cfg = {}) {
  const std::size_t n = m.candidates.size();
  if (n == 0 || m.ballot_count == 0)
    fail(Errc::empty_profile, "copeland needs a non-empty profile");
  std::vector<std::int64_t> net(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (m.above[i][j] > m.above[j][i]) ++net[i];
      else if (m.above[i][j] < m.above[j][i]) --net[i];
    }
  std::vector<double> score(net.begin(), net.end());
  auto cmp = [&](std::size_t a, std::size_t b) -> int {
    return net[a] > net[b] ? -1 : net[a] < net[b] ? 1 : 0;
  };
  return voting_detail::order_by(Rule::copeland, m.candidates, score, cmp, cfg);
}

inline ConsensusResult copeland(const std::vector<ModelId>& cands,
                                std::span<const Ranking> ballots,
                                const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  return copeland(pairwise_from_ballots(cands, ballots), cfg);
}

/// Dodgson score: minimum number of adjacent swaps across ballots needed to
/// make the candidate a Condorcet winner (strict majority over every rival,
/// threshold ceil((n+1)/2) of n ballots). Exact search: iterative deepening
/// over per-ballot lift amounts with the remaining-deficit lower bound as
/// pruning. Ballots must be linear and complete. Ascending score.
inline ConsensusResult dodgson(const std::vector<ModelId>& cands,
                               std::span<const Ranking> ballots,
                               const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t m = cands.size();
  voting_detail::require_exact_size(m, cfg, 20);
  for (const auto& b : ballots) {
    if (!b.is_linear())
      fail(Errc::ties_unsupported, "dodgson requires linear ballots");
    if (b.candidate_count() != m)
      fail(Errc::candidate_mismatch, "dodgson requires complete ballots");
  }
  auto views = voting_detail::ballot_views(cands, ballots);
  for (const auto& v : views)
    if (v.present != m)
      fail(Errc::candidate_mismatch, "dodgson requires complete ballots");

  const std::int64_t nb = static_cast<std::int64_t>(ballots.size());
  const std::int64_t thr = (nb + 2) / 2;
  auto w = pairwise_from_ballots(cands, ballots);

  // Candidates above c in each ballot, nearest (adjacent) first.
  auto above_lists = [&](std::size_t c) {
    std::vector<std::vector<std::size_t>> lists;
    lists.reserve(views.size());
    for (const auto& v : views) {
      std::vector<std::size_t> order(m);
      for (std::size_t i = 0; i < m; ++i)
        order[static_cast<std::size_t>(v.gidx[i])] = i;
      std::vector<std::size_t> up;
      const std::size_t pos = static_cast<std::size_t>(v.gidx[c]);
      for (std::size_t p = pos; p-- > 0;) up.push_back(order[p]);
      lists.push_back(std::move(up));
    }
    return lists;
  };

  std::vector<std::int64_t> score(m, 0);
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<std::int64_t> deficit(m, 0);
    std::int64_t lb = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == c) continue;
      deficit[j] = std::max<std::int64_t>(0, thr - w.above[c][j]);
      lb += deficit[j];
    }
    if (lb == 0) continue;
    auto lifts = above_lists(c);

    std::function<bool(std::size_t, std::int64_t, std::int64_t,
                       std::vector<std::int64_t>&)>
        dfs = [&](std::size_t b, std::int64_t spent, std::int64_t budget,
                  std::vector<std::int64_t>& d) -> bool {
      std::int64_t rem = 0;
      for (std::size_t j = 0; j < m; ++j) rem += d[j];
      if (rem == 0) return true;
      if (b == lifts.size() || spent + rem > budget) return false;
      if (dfs(b + 1, spent, budget, d)) return true;
      std::vector<std::size_t> touched;
      bool ok = false;
      for (std::size_t t = 0; t < lifts[b].size() && !ok; ++t) {
        const std::size_t opp = lifts[b][t];
        ++spent;
        if (d[opp] > 0) {
          --d[opp];
          touched.push_back(opp);
        }
        ok = dfs(b + 1, spent, budget, d);
      }
      for (std::size_t opp : touched) ++d[opp];
      return ok;
    };

    std::int64_t budget = lb;
    while (true) {
      std::vector<std::int64_t> d = deficit;
      if (dfs(0, 0, budget, d)) break;
      ++budget;
    }
    score[c] = budget;
  }

  std::vector<double> rep(score.begin(), score.end());
  auto cmp = [&](std::size_t a, std::size_t b) -> int {
    return score[a] < score[b] ? -1 : score[a] > score[b] ? 1 : 0;
  };
  return voting_detail::order_by(Rule::dodgson, cands, rep, cmp, cfg);
}

/// Instant-runoff: repeatedly eliminate the candidate with the fewest
/// current first-choice votes. A ballot's first choice is the top remaining
/// singleton; if the top remaining tie group holds several candidates the
/// ballot is exhausted (a tied tail never casts a first-choice vote).
/// Elimination ties compare deeper preference counts (second choices, then
/// third, ...) before falling back to tie-break priority, so a unanimous
/// profile always eliminates bottom-up.
inline ConsensusResult irv(const std::vector<ModelId>& cands,
                           std::span<const Ranking> ballots,
                           const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t n = cands.size();
  auto views = voting_detail::ballot_views(cands, ballots);
  auto tb = voting_detail::tie_break_rank(cands, cfg);

  std::vector<bool> alive(n, true);
  std::vector<std::size_t> eliminated;  // in elimination order
  std::size_t alive_count = n;
  std::size_t rounds = 0;

  while (alive_count > 1) {
    ++rounds;
    // tally[0][c]: true first-choice votes. tally[k][c] for k >= 1: number
    // of ballots holding c in their (k+1)-th remaining tie group (cascade
    // refinement for elimination ties).
    std::vector<std::vector<std::int64_t>> tally(
        n, std::vector<std::int64_t>(n, 0));
    for (const auto& v : views) {
      std::size_t depth = 0;
      bool first_group = true;
      for (const auto& g : v.groups) {
        std::vector<std::size_t> rem;
        for (std::size_t c : g)
          if (alive[c]) rem.push_back(c);
        if (rem.empty()) continue;
        if (first_group) {
          if (rem.size() == 1) ++tally[0][rem.front()];
          first_group = false;
        } else {
          for (std::size_t c : rem) ++tally[depth][c];
        }
        ++depth;
      }
    }
    std::size_t out = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (!alive[c]) continue;
      if (out == n) {
        out = c;
        continue;
      }
      int rel = 0;
      for (std::size_t k = 0; k < n && rel == 0; ++k)
        rel = tally[k][c] < tally[k][out]   ? -1
              : tally[k][c] > tally[k][out] ? 1
                                            : 0;
      if (rel < 0 || (rel == 0 && tb[c] > tb[out])) out = c;
    }
    alive[out] = false;
    --alive_count;
    eliminated.push_back(out);
  }

  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < n; ++c)
    if (alive[c]) order.push_back(c);
  for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it)
    order.push_back(*it);
  auto res = voting_detail::from_order(Rule::irv, cands, order,
                                       static_cast<double>(rounds));
  // Score: elimination round (survivor gets rounds + 1); higher is better.
  for (std::size_t k = 0; k < eliminated.size(); ++k)
    res.per_candidate_score[cands[eliminated[k]]] = static_cast<double>(k + 1);
  res.per_candidate_score[cands[order.front()]] =
      static_cast<double>(rounds + 1);
  return res;
}

/// Exact Kemeny consensus: the linear order minimizing the total Kendall
/// distance to the ballots, via subset dynamic programming over the
/// pairwise matrix. Among co-optimal orders returns the lexicographically
/// smallest in tie-break priority.
inline ConsensusResult kemeny_exact(const PairwiseMatrix& m,
                                    const RuleConfig& cfg = {}) {
  const std::size_t n = m.candidates.size();
  if (n == 0 || m.ballot_count == 0)
    fail(Errc::empty_profile, "kemeny needs a non-empty profile");
  voting_detail::require_exact_size(n, cfg, 20);
  std::vector<std::vector<std::int64_t>> cost(
      n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) cost[i][j] = m.above[j][i];  // i above j upsets w[j][i] ballots
  auto tb = voting_detail::tie_break_rank(m.candidates, cfg);
  auto [order, value] = voting_detail::linear_order_dp(cost, tb);
  return voting_detail::from_order(Rule::kemeny_exact, m.candidates, order,
                                   static_cast<double>(value));
}

inline ConsensusResult kemeny_exact(const std::vector<ModelId>& cands,
                                    std::span<const Ranking> ballots,
                                    const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  return kemeny_exact(pairwise_from_ballots(cands, ballots), cfg);
}

/// Kemeny heuristic: build the weighted majority digraph, repeatedly delete
/// the globally minimum-weight edge that lies on a cycle (ties by
/// lexicographic endpoint pair), then topologically sort, breaking Kahn
/// ties by tie-break priority. Objective reports the true total Kendall
/// distance of the returned order, so it is directly comparable with
/// kemeny_exact.
inline ConsensusResult kemeny_heuristic(const PairwiseMatrix& m,
                                        const RuleConfig& cfg = {}) {
  const std::size_t n = m.candidates.size();
  if (n == 0 || m.ballot_count == 0)
    fail(Errc::empty_profile, "kemeny needs a non-empty profile");
  std::vector<std::vector<std::int64_t>> wt(n, std::vector<std::int64_t>(n, 0));
  std::vector<std::vector<bool>> edge(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && m.above[i][j] > m.above[j][i]) {
        edge[i][j] = true;
        wt[i][j] = m.above[i][j] - m.above[j][i];
      }

  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (std::size_t v = 0; v < n; ++v)
        if (edge[u][v] && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    return false;
  };

  while (true) {
    bool found = false;
    std::size_t bu = 0, bv = 0;
    std::int64_t bw = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        if (!edge[u][v] || !reaches(v, u)) continue;  // on a cycle?
        const bool better =
            !found || wt[u][v] < bw ||
            (wt[u][v] == bw &&
             std::pair(m.candidates[u], m.candidates[v]) <
                 std::pair(m.candidates[bu], m.candidates[bv]));
        if (better) {
          found = true;
          bu = u;
          bv = v;
          bw = wt[u][v];
        }
      }
    if (!found) break;
    edge[bu][bv] = false;
  }

  auto tb = voting_detail::tie_break_rank(m.candidates, cfg);
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (edge[u][v]) ++indeg[v];
  std::vector<bool> placed(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (placed[c] || indeg[c] != 0) continue;
      if (pick == n || tb[c] < tb[pick]) pick = c;
    }
    placed[pick] = true;
    order.push_back(pick);
    for (std::size_t v = 0; v < n; ++v)
      if (edge[pick][v]) --indeg[v];
  }

  std::int64_t total = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      total += m.above[order[b]][order[a]];
  return voting_detail::from_order(Rule::kemeny_heuristic, m.candidates, order,
                                   static_cast<double>(total));
}

inline ConsensusResult kemeny_heuristic(const std::vector<ModelId>& cands,
                                        std::span<const Ranking> ballots,
                                        const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  return kemeny_heuristic(pairwise_from_ballots(cands, ballots), cfg);
}

/// Maximizes the total Kendall tau (tie-adjusted per ballot) between the
/// output order and the ballots. Decomposes into pairwise contributions
/// and reuses the linear ordering DP, so it is exact.
inline ConsensusResult kendall_max(const std::vector<ModelId>& cands,
                                   std::span<const Ranking> ballots,
                                   const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t m = cands.size();
  voting_detail::require_exact_size(m, cfg, 20);
  auto views = voting_detail::ballot_views(cands, ballots);
  // Per-pair contributions are collected first and summed in sorted order,
  // so the cost matrix depends only on the ballot multiset, never on ballot
  // order (anonymity down to the last bit).
  std::vector<std::vector<std::vector<double>>> parts(
      m, std::vector<std::vector<double>>(m));
  for (const auto& v : views) {
    const std::int64_t mk = static_cast<std::int64_t>(v.present);
    if (mk < 2) continue;  // no pair information
    const std::int64_t n0 = mk * (mk - 1) / 2;
    std::int64_t tied = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (v.gidx[i] >= 0 && v.gidx[j] >= 0 && v.gidx[i] == v.gidx[j]) ++tied;
    if (tied == n0)
      fail(Errc::degenerate_variance,
           "kendall_max: a ballot ties every candidate pair");
    const double denom = std::sqrt(static_cast<double>(n0) *
                                   static_cast<double>(n0 - tied));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j || v.gidx[i] < 0 || v.gidx[j] < 0) continue;
        if (v.gidx[i] < v.gidx[j]) parts[i][j].push_back(1.0 / denom);
        else if (v.gidx[i] > v.gidx[j]) parts[i][j].push_back(-1.0 / denom);
      }
  }
  std::vector<std::vector<double>> cost(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      auto& ps = parts[i][j];
      std::sort(ps.begin(), ps.end());
      double contrib = 0.0;
      for (double x : ps) contrib += x;
      cost[i][j] = -contrib;
    }
  auto tb = voting_detail::tie_break_rank(cands, cfg);
  auto [order, value] = voting_detail::linear_order_dp(cost, tb);
  return voting_detail::from_order(Rule::kendall_max, cands, order, -value);
}

/// Maximizes the total |Spearman rho| between the output order and the
/// ballots (the absolute value is part of the rule's definition, odd as it
/// is: a perfectly anti-correlated order scores as well as a perfectly
/// correlated one). Exact ties on |rho| prefer the larger signed total,
/// then tie-break priority. Exhaustive enumeration, so the candidate cap
/// is strict.
inline ConsensusResult spearman_max(const std::vector<ModelId>& cands,
                                    std::span<const Ranking> ballots,
                                    const RuleConfig& cfg = {}) {
  voting_detail::require_ballots(cands, ballots);
  const std::size_t m = cands.size();
  voting_detail::require_exact_size(m, cfg, 10);
  auto views = voting_detail::ballot_views(cands, ballots);

  struct BallotStats {
    std::vector<std::size_t> members;  // candidate indices, ascending
    std::vector<double> r_centered;    // ballot mid-rank minus mean
    double sd_r = 0, sd_p = 0, p_mean = 0;
  };
  std::vector<BallotStats> stats;
  for (std::size_t bi = 0; bi < views.size(); ++bi) {
    const auto& v = views[bi];
    if (v.present < 2) continue;  // rho undefined, contributes nothing
    BallotStats s;
    auto dbl = ballots[bi].doubled_positions_over(cands);
    for (std::size_t i = 0; i < m; ++i)
      if (v.gidx[i] >= 0) s.members.push_back(i);
    const double mk = static_cast<double>(s.members.size());
    double mean_r = 0;
    for (std::size_t i : s.members) mean_r += static_cast<double>(dbl[i]) / 2.0;
    mean_r /= mk;
    double ss = 0;
    for (std::size_t i : s.members) {
      const double d = static_cast<double>(dbl[i]) / 2.0 - mean_r;
      s.r_centered.push_back(d);
      ss += d * d;
    }
    if (ss == 0.0)
      fail(Errc::degenerate_variance,
           "spearman_max: a ballot ties every candidate");
    s.sd_r = std::sqrt(ss);
    s.p_mean = (mk + 1.0) / 2.0;
    s.sd_p = std::sqrt(mk * (mk * mk - 1.0) / 12.0);
    stats.push_back(std::move(s));
  }

  auto tb = voting_detail::tie_break_rank(cands, cfg);
  std::vector<std::size_t> by_prio(m);
  std::iota(by_prio.begin(), by_prio.end(), std::size_t{0});
  std::sort(by_prio.begin(), by_prio.end(),
            [&](std::size_t a, std::size_t b) { return tb[a] < tb[b]; });

  std::vector<std::size_t> prio_perm(m);
  std::iota(prio_perm.begin(), prio_perm.end(), std::size_t{0});
  std::vector<std::size_t> pos(m);  // candidate index -> position in sigma

  constexpr double kEps = 1e-9;
  double best_abs = -1.0, best_signed = 0.0;
  std::vector<std::size_t> best;
  do {
    for (std::size_t p = 0; p < m; ++p) pos[by_prio[prio_perm[p]]] = p;
    double tot_abs = 0, tot_signed = 0;
    for (const auto& s : stats) {
      // Restricted positions: order of the ballot's members within sigma.
      std::vector<std::size_t> order(s.members.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pos[s.members[a]] < pos[s.members[b]];
      });
      double num = 0;
      for (std::size_t k = 0; k < order.size(); ++k)
        num += (static_cast<double>(k + 1) - s.p_mean) * s.r_centered[order[k]];
      const double rho = num / (s.sd_p * s.sd_r);
      tot_abs += std::fabs(rho);
      tot_signed += rho;
    }
    const bool better =
        tot_abs > best_abs + kEps ||
        (std::fabs(tot_abs - best_abs) <= kEps && tot_signed > best_signed + kEps);
    if (better) {
      best_abs = tot_abs;
      best_signed = tot_signed;
      best.assign(m, 0);
      for (std::size_t p = 0; p < m; ++p) best[p] = by_prio[prio_perm[p]];
    }
  } while (std::next_permutation(prio_perm.begin(), prio_perm.end()));

  return voting_detail::from_order(Rule::spearman_max, cands, best, best_abs);
}

inline ConsensusResult aggregate(const std::vector<ModelId>& cands,
                                 std::span<const Ranking> ballots,
                                 const RuleConfig& cfg) {
  switch (cfg.rule) {
    case Rule::average: return average_rank(cands, ballots, cfg);
    case Rule::borda: return borda(cands, ballots, cfg);
    case Rule::copeland: return copeland(cands, ballots, cfg);
    case Rule::dodgson: return dodgson(cands, ballots, cfg);
    case Rule::irv: return irv(cands, ballots, cfg);
    case Rule::kemeny_exact: return kemeny_exact(cands, ballots, cfg);
    case Rule::kemeny_heuristic: return kemeny_heuristic(cands, ballots, cfg);
    case Rule::kendall_max: return kendall_max(cands, ballots, cfg);
    case Rule::spearman_max: return spearman_max(cands, ballots, cfg);
  }
  fail(Errc::invalid_config, "unhandled rule");
}

inline ConsensusResult aggregate(const QuestionProfile& profile,
                                 const RuleConfig& cfg) {
  auto ballots = profile.ballots();
  return aggregate(profile.candidates, ballots, cfg);
}

}  // namespace peerrank
