#pragma once

// Brute-force reference solvers. These deliberately avoid the optimized
// implementations in voting.hpp and metrics.hpp: everything here is plain
// enumeration over permutations (or breadth-first search over ballot
// states), so results can be cross-checked against the production rules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/ranking.hpp"

namespace peerrank::oracle {

struct OracleResult {
  Ranking ranking;
  double objective = 0.0;
};

namespace detail {

inline std::vector<std::map<ModelId, int>> ballot_group_maps(
    std::span<const Ranking> ballots) {
  std::vector<std::map<ModelId, int>> out;
  out.reserve(ballots.size());
  for (const auto& b : ballots) {
    std::map<ModelId, int> g;
    int gi = 0;
    for (const auto& grp : b.groups()) {
      for (const auto& id : grp) g[id] = gi;
      ++gi;
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline int relation(const std::map<ModelId, int>& g, const ModelId& a,
                    const ModelId& b) {
  auto ia = g.find(a);
  auto ib = g.find(b);
  if (ia == g.end() || ib == g.end()) return 2;  // pair not covered
  if (ia->second < ib->second) return -1;
  if (ia->second > ib->second) return 1;
  return 0;
}

inline void check_size(std::size_t m) {
  if (m > 9)
    fail(Errc::size_limit_exceeded,
         "oracle enumerates permutations; " + std::to_string(m) +
             " candidates is too many");
}

}  // namespace peerrank::oracle::detail

/// Discordant-pair count between a strict order (as a candidate sequence)
/// and one ballot, counted pair by pair.
inline std::int64_t naive_distance(const std::vector<ModelId>& order,
                                   const std::map<ModelId, int>& ballot) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      // order places order[i] above order[j]; discordant iff ballot strictly
      // reverses the pair.
      if (detail::relation(ballot, order[i], order[j]) == 1) ++d;
    }
  return d;
}

inline std::int64_t naive_distance(const Ranking& a, const Ranking& b) {
  auto ga = detail::ballot_group_maps(std::span<const Ranking>(&a, 1)).front();
  auto gb = detail::ballot_group_maps(std::span<const Ranking>(&b, 1)).front();
  std::int64_t d = 0;
  std::vector<ModelId> ids = a.candidates();
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      int ra = detail::relation(ga, ids[i], ids[j]);
      int rb = detail::relation(gb, ids[i], ids[j]);
      if ((ra == 1 && rb == -1) || (ra == -1 && rb == 1)) ++d;
    }
  return d;
}

/// Tie-adjusted Kendall tau between a strict order and one ballot,
/// restricted to the candidates the ballot covers.
inline std::optional<double> naive_tau(const std::vector<ModelId>& order,
                                       const std::map<ModelId, int>& ballot) {
  std::int64_t conc = 0, disc = 0, tied = 0, covered = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      int r = detail::relation(ballot, order[i], order[j]);
      if (r == 2) continue;
      ++covered;
      if (r == 0) ++tied;
      else if (r == -1) ++conc;
      else ++disc;
    }
  if (covered == 0 || tied == covered) return std::nullopt;
  return static_cast<double>(conc - disc) /
         std::sqrt(static_cast<double>(covered) *
                   static_cast<double>(covered - tied));
}

/// Spearman rho between a strict order and one ballot over the ballot's
/// candidates, computed from raw rank vectors.
inline std::optional<double> naive_rho(const std::vector<ModelId>& order,
                                       const Ranking& ballot) {
  std::vector<ModelId> members;
  for (const auto& id : order)
    if (ballot.contains(id)) members.push_back(id);
  if (members.size() < 2) return std::nullopt;
  auto bpos = ballot.positions();
  std::vector<double> p, r;
  for (std::size_t k = 0; k < members.size(); ++k) {
    p.push_back(static_cast<double>(k + 1));
    r.push_back(bpos.at(members[k]));
  }
  const double n = static_cast<double>(p.size());
  double mp = 0, mr = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mp += p[i];
    mr += r[i];
  }
  mp /= n;
  mr /= n;
  double spr = 0, spp = 0, srr = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    spr += (p[i] - mp) * (r[i] - mr);
    spp += (p[i] - mp) * (p[i] - mp);
    srr += (r[i] - mr) * (r[i] - mr);
  }
  if (srr == 0.0) return std::nullopt;
  return spr / std::sqrt(spp * srr);
}

/// Exhaustive Kemeny: tries every permutation, keeps the minimum total
/// distance; ties resolved toward the lexicographically smaller sequence.
inline OracleResult kemeny(const std::vector<ModelId>& candidates,
                           std::span<const Ranking> ballots) {
  detail::check_size(candidates.size());
  auto maps = detail::ballot_group_maps(ballots);
  std::vector<ModelId> perm = candidates;
  std::sort(perm.begin(), perm.end());
  std::vector<ModelId> best;
  std::int64_t best_d = -1;
  do {
    std::int64_t d = 0;
    for (const auto& g : maps) d += naive_distance(perm, g);
    if (best_d < 0 || d < best_d) {
      best_d = d;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {Ranking::linear(best), static_cast<double>(best_d)};
}

/// Exhaustive total-tau maximizer, ties toward the smaller sequence.
inline OracleResult kendall_max(const std::vector<ModelId>& candidates,
                                std::span<const Ranking> ballots) {
  detail::check_size(candidates.size());
  auto maps = detail::ballot_group_maps(ballots);
  std::vector<ModelId> perm = candidates;
  std::sort(perm.begin(), perm.end());
  std::vector<ModelId> best;
  double best_t = 0;
  bool first = true;
  constexpr double kEps = 1e-9;
  do {
    double t = 0;
    for (const auto& g : maps) {
      auto tau = naive_tau(perm, g);
      if (tau) t += *tau;
    }
    if (first || t > best_t + kEps) {
      best_t = t;
      best = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {Ranking::linear(best), best_t};
}

/// Exhaustive total-|rho| maximizer; |rho| ties prefer the larger signed
/// total, then the smaller sequence.
inline OracleResult spearman_max(const std::vector<ModelId>& candidates,
                                 std::span<const Ranking> ballots) {
  detail::check_size(candidates.size());
  std::vector<ModelId> perm = candidates;
  std::sort(perm.begin(), perm.end());
  std::vector<ModelId> best;
  double best_abs = 0, best_signed = 0;
  bool first = true;
  constexpr double kEps = 1e-9;
  do {
    double tot = 0, sgn = 0;
    for (const auto& b : ballots) {
      auto rho = naive_rho(perm, b);
      if (rho) {
        tot += std::fabs(*rho);
        sgn += *rho;
      }
    }
    const bool better =
        first || tot > best_abs + kEps ||
        (std::fabs(tot - best_abs) <= kEps && sgn > best_signed + kEps);
    if (better) {
      best_abs = tot;
      best_signed = sgn;
      best = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {Ranking::linear(best), best_abs};
}

/// Condorcet winner by direct pairwise counting, if one exists.
inline std::optional<ModelId> condorcet_winner(
    const std::vector<ModelId>& candidates, std::span<const Ranking> ballots) {
  auto maps = detail::ballot_group_maps(ballots);
  for (const auto& c : candidates) {
    bool wins_all = true;
    for (const auto& d : candidates) {
      if (c == d) continue;
      std::int64_t above = 0, below = 0;
      for (const auto& g : maps) {
        int r = detail::relation(g, c, d);
        if (r == -1) ++above;
        else if (r == 1) ++below;
      }
      if (above <= below) {
        wins_all = false;
        break;
      }
    }
    if (wins_all) return c;
  }
  return std::nullopt;
}

/// Dodgson score by breadth-first search over ballot states: every move is
/// one adjacent transposition in one ballot, the goal is `target` becoming
/// a Condorcet winner. Exponential; only for tiny profiles.
inline std::int64_t dodgson_score_bfs(const std::vector<ModelId>& candidates,
                                      std::span<const Ranking> ballots,
                                      const ModelId& target) {
  std::vector<std::vector<ModelId>> start;
  for (const auto& b : ballots) {
    if (!b.is_linear())
      fail(Errc::ties_unsupported, "oracle dodgson requires linear ballots");
    std::vector<ModelId> flat;
    for (const auto& g : b.groups()) flat.push_back(g.front());
    start.push_back(std::move(flat));
  }
  const std::int64_t nb = static_cast<std::int64_t>(ballots.size());
  const std::int64_t thr = (nb + 2) / 2;

  auto is_winner = [&](const std::vector<std::vector<ModelId>>& state) {
    for (const auto& d : candidates) {
      if (d == target) continue;
      std::int64_t above = 0;
      for (const auto& bal : state) {
        auto pt = std::find(bal.begin(), bal.end(), target);
        auto pd = std::find(bal.begin(), bal.end(), d);
        if (pt < pd) ++above;
      }
      if (above < thr) return false;
    }
    return true;
  };

  auto key = [](const std::vector<std::vector<ModelId>>& state) {
    std::string k;
    for (const auto& bal : state) {
      for (const auto& id : bal) {
        k += id;
        k += ',';
      }
      k += ';';
    }
    return k;
  };

  std::queue<std::pair<std::vector<std::vector<ModelId>>, std::int64_t>> q;
  std::set<std::string> seen;
  q.push({start, 0});
  seen.insert(key(start));
  while (!q.empty()) {
    auto [state, d] = q.front();
    q.pop();
    if (is_winner(state)) return d;
    for (std::size_t b = 0; b < state.size(); ++b)
      for (std::size_t p = 0; p + 1 < state[b].size(); ++p) {
        auto next = state;
        std::swap(next[b][p], next[b][p + 1]);
        auto k = key(next);
        if (seen.insert(k).second) q.push({std::move(next), d + 1});
      }
  }
  fail(Errc::invalid_config, "dodgson BFS exhausted the state space");
}

}  // namespace peerrank::oracle
