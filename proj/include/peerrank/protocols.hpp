#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/ranking.hpp"
#include "peerrank/voting.hpp"

namespace peerrank {

enum class Protocol { se, pe, sie, sfe };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::se: return "SE";
    case Protocol::pe: return "PE";
    case Protocol::sie: return "SIE";
    case Protocol::sfe: return "SFE";
  }
  return "?";
}

inline Protocol protocol_from_name(const std::string& s) {
  for (Protocol p : {Protocol::se, Protocol::pe, Protocol::sie, Protocol::sfe})
    if (s == protocol_name(p)) return p;
  fail(Errc::invalid_config, "unknown protocol '" + s + "'");
}

/// Result of running one protocol over a set of question profiles.
/// `per_model_mean_rank` averages the model's per-question rank value over
/// the questions it was covered on; `coverage` records how many questions
/// that was. Models a protocol cannot score on a question (e.g. no
/// self-ballot) simply contribute nothing there.
struct ProtocolReport {
  Protocol protocol = Protocol::se;
  std::map<ModelId, double> per_model_mean_rank;
  std::map<std::string, Ranking> per_question_rankings;
  std::map<ModelId, int> coverage;
};

/// One row of the bias table.
struct BiasDelta {
  ModelId model;
  double se_rank = 0, pe_rank = 0, sie_rank = 0, sfe_rank = 0;
  double pe_minus_se = 0;    // positive = peers rank the model worse than itself
  double sfe_minus_sie = 0;  // shift when the model's self-votes are removed
};

inline RuleConfig default_protocol_config() {
  RuleConfig cfg;
  cfg.rule = Rule::kemeny_exact;
  return cfg;
}

namespace protocol_detail {

/// Ranking from exact per-model fractions (ascending value = better rank);
/// exact ties become tie groups. Fractions are compared by cross
/// multiplication, never by float equality.
inline Ranking ranking_from_fractions(
    const std::vector<ModelId>& ids, const std::vector<std::int64_t>& num,
    const std::vector<std::int64_t>& den) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    return num[a] * den[b] < num[b] * den[a];
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (less(a, b)) return true;
    if (less(b, a)) return false;
    return ids[a] < ids[b];
  });
  std::vector<Ranking::Group> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || less(order[k - 1], order[k]))
      groups.push_back({ids[order[k]]});
    else
      groups.back().push_back(ids[order[k]]);
  }
  return Ranking::from_groups(std::move(groups));
}

/// SIE/SFE consensus rule: kemeny_exact silently falls back to the
/// heuristic above the exact-size limit so large candidate sets stay usable.
inline ConsensusResult consensus_with_fallback(
    const std::vector<ModelId>& cands, std::span<const Ranking> ballots,
    const RuleConfig& cfg) {
  if (cfg.rule == Rule::kemeny_exact &&
      cands.size() > static_cast<std::size_t>(cfg.exact_m_limit))
    return kemeny_heuristic(cands, ballots, cfg);
  return aggregate(cands, ballots, cfg);
}

struct MeanAccumulator {
  std::map<ModelId, double> sum;
  std::map<ModelId, int> cnt;
  void add(const ModelId& id, double value) {
    sum[id] += value;
    cnt[id] += 1;
  }
  void finish(ProtocolReport& rep) const {
    for (const auto& [id, s] : sum)
      rep.per_model_mean_rank[id] = s / static_cast<double>(cnt.at(id));
    for (const auto& [id, c] : cnt) rep.coverage[id] = c;
  }
};

inline void require_profiles(std::span<const QuestionProfile> profiles) {
  if (profiles.empty()) fail(Errc::empty_profile, "no question profiles");
}

}  // namespace protocol_detail

/// Self-evaluation: each model's rank value on a question is the (mid-rank)
/// position it assigned to itself in its own ballot.
inline ProtocolReport self_evaluation(std::span<const QuestionProfile> profiles) {
  protocol_detail::require_profiles(profiles);
  ProtocolReport rep;
  rep.protocol = Protocol::se;
  protocol_detail::MeanAccumulator acc;
  for (const auto& p : profiles) {
    std::vector<ModelId> ids;
    std::vector<std::int64_t> num, den;
    for (const auto& rec : p.records) {
      if (rec.external_reference || !rec.ranking.contains(rec.evaluator))
        continue;
      const std::int64_t dbl =
          rec.ranking.doubled_positions().at(rec.evaluator);
      acc.add(rec.evaluator, static_cast<double>(dbl) / 2.0);
      ids.push_back(rec.evaluator);
      num.push_back(dbl);
      den.push_back(1);
    }
    if (!ids.empty())
      rep.per_question_rankings[p.question_id] =
          protocol_detail::ranking_from_fractions(ids, num, den);
  }
  acc.finish(rep);
  if (rep.per_model_mean_rank.empty())
    fail(Errc::missing_self_ballot, "no model ranked itself on any question");
  return rep;
}

/// Peer evaluation: each model's rank value on a question is the mean of
/// the positions assigned to it by the other evaluators' ballots.
inline ProtocolReport peer_evaluation(std::span<const QuestionProfile> profiles) {
  protocol_detail::require_profiles(profiles);
  ProtocolReport rep;
  rep.protocol = Protocol::pe;
  protocol_detail::MeanAccumulator acc;
  for (const auto& p : profiles) {
    if (p.records.size() < 2)
      fail(Errc::insufficient_peers, "question '" + p.question_id +
                                         "' needs at least two ballots for "
                                         "peer evaluation");
    std::vector<ModelId> ids;
    std::vector<std::int64_t> num, den;
    for (const auto& cand : p.candidates) {
      std::int64_t sum_dbl = 0, cnt = 0;
      for (const auto& rec : p.records) {
        if (rec.evaluator == cand) continue;
        auto dbl = rec.ranking.doubled_positions_over({cand});
        if (dbl[0] >= 0) {
          sum_dbl += dbl[0];
          ++cnt;
        }
      }
      if (cnt == 0) continue;
      acc.add(cand, static_cast<double>(sum_dbl) /
                        (2.0 * static_cast<double>(cnt)));
      ids.push_back(cand);
      num.push_back(sum_dbl);
      den.push_back(2 * cnt);
    }
    if (!ids.empty())
      rep.per_question_rankings[p.question_id] =
          protocol_detail::ranking_from_fractions(ids, num, den);
  }
  acc.finish(rep);
  return rep;
}

/// Self-inclusive evaluation: one consensus ranking per question over all
/// ballots; each model's rank value is its position in that consensus.
inline ProtocolReport sie_consensus(
    std::span<const QuestionProfile> profiles,
    const RuleConfig& cfg = default_protocol_config()) {
  protocol_detail::require_profiles(profiles);
  ProtocolReport rep;
  rep.protocol = Protocol::sie;
  protocol_detail::MeanAccumulator acc;
  for (const auto& p : profiles) {
    auto ballots = p.ballots();
    auto res = protocol_detail::consensus_with_fallback(p.candidates, ballots, cfg);
    auto dbl = res.ranking.doubled_positions();
    for (const auto& [id, d] : dbl) acc.add(id, static_cast<double>(d) / 2.0);
    rep.per_question_rankings[p.question_id] = res.ranking;
  }
  acc.finish(rep);
  return rep;
}

/// Removes the evaluator's own entry from its ballot (ties shrink; an
/// emptied group disappears). External-reference ballots pass unchanged.
inline Ranking strip_self(const Ranking& ballot, const ModelId& evaluator) {
  return ballot.without(evaluator);
}

/// Self-free evaluation: like SIE, but every evaluator's ballot first has
/// the evaluator's own entry removed, so no model's self-placement
/// influences the shared consensus. The consensus still ranks the full
/// candidate set; ballots merely become partial.
inline ProtocolReport sfe_consensus(
    std::span<const QuestionProfile> profiles,
    const RuleConfig& cfg = default_protocol_config()) {
  protocol_detail::require_profiles(profiles);
  ProtocolReport rep;
  rep.protocol = Protocol::sfe;
  protocol_detail::MeanAccumulator acc;
  for (const auto& p : profiles) {
    if (p.records.size() < 2)
      fail(Errc::insufficient_peers, "question '" + p.question_id +
                                         "' needs at least two ballots for "
                                         "self-free evaluation");
    std::vector<Ranking> stripped;
    stripped.reserve(p.records.size());
    for (const auto& rec : p.records) {
      Ranking b = rec.external_reference ? rec.ranking
                                         : strip_self(rec.ranking, rec.evaluator);
      if (b.candidate_count() > 0) stripped.push_back(std::move(b));
    }
    if (stripped.empty())
      fail(Errc::insufficient_peers,
           "question '" + p.question_id + "' has no usable self-free ballots");
    auto res = protocol_detail::consensus_with_fallback(p.candidates, stripped, cfg);
    auto dbl = res.ranking.doubled_positions();
    for (const auto& [id, d] : dbl) acc.add(id, static_cast<double>(d) / 2.0);
    rep.per_question_rankings[p.question_id] = res.ranking;
  }
  acc.finish(rep);
  return rep;
}

inline ProtocolReport run_protocol(
    Protocol p, std::span<const QuestionProfile> profiles,
    const RuleConfig& cfg = default_protocol_config()) {
  switch (p) {
    case Protocol::se: return self_evaluation(profiles);
    case Protocol::pe: return peer_evaluation(profiles);
    case Protocol::sie: return sie_consensus(profiles, cfg);
    case Protocol::sfe: return sfe_consensus(profiles, cfg);
  }
  fail(Errc::invalid_config, "unhandled protocol");
}

/// All four protocols side by side, one row per model that every protocol
/// could score. pe - se > 0 indicates the model ranks itself better than
/// its peers do; sfe - sie isolates how much its own votes moved the
/// consensus.
inline std::vector<BiasDelta> bias_table(
    std::span<const QuestionProfile> profiles,
    const RuleConfig& cfg = default_protocol_config()) {
  auto se = self_evaluation(profiles);
  auto pe = peer_evaluation(profiles);
  auto sie = sie_consensus(profiles, cfg);
  auto sfe = sfe_consensus(profiles, cfg);
  std::vector<BiasDelta> rows;
  for (const auto& [id, se_val] : se.per_model_mean_rank) {
    auto ipe = pe.per_model_mean_rank.find(id);
    auto isie = sie.per_model_mean_rank.find(id);
    auto isfe = sfe.per_model_mean_rank.find(id);
    if (ipe == pe.per_model_mean_rank.end() ||
        isie == sie.per_model_mean_rank.end() ||
        isfe == sfe.per_model_mean_rank.end())
      continue;
    BiasDelta row;
    row.model = id;
    row.se_rank = se_val;
    row.pe_rank = ipe->second;
    row.sie_rank = isie->second;
    row.sfe_rank = isfe->second;
    row.pe_minus_se = row.pe_rank - row.se_rank;
    row.sfe_minus_sie = row.sfe_rank - row.sie_rank;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace peerrank
