#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/ranking.hpp"

namespace peerrank {

/// One ballot: `evaluator` ranked the question's candidates.
/// `external_reference` marks ballots from judges that are not themselves
/// candidates (e.g. a human reference); such evaluators never receive
/// self-evaluation scores.
struct EvaluationRecord {
  std::string question_id;
  ModelId evaluator;
  Ranking ranking;
  bool external_reference = false;
};

/// All ballots collected for one question over a fixed candidate set.
/// Candidate order is the order of first appearance in the input; it is the
/// row order of the pairwise matrix and the `input_order` tie-break order.
struct QuestionProfile {
  std::string question_id;
  std::vector<ModelId> candidates;
  std::vector<EvaluationRecord> records;

  /// Throws if a ballot does not cover the candidate set, an evaluator
  /// appears twice, or a non-external evaluator is not a candidate.
  void validate() const {
    std::set<ModelId> cset(candidates.begin(), candidates.end());
    if (cset.size() != candidates.size())
      fail(Errc::duplicate_candidate,
           "question '" + question_id + "' lists a candidate twice");
    std::set<ModelId> seen_eval;
    for (const auto& rec : records) {
      if (rec.question_id != question_id)
        fail(Errc::candidate_mismatch,
             "ballot for question '" + rec.question_id +
                 "' grouped under question '" + question_id + "'");
      if (!seen_eval.insert(rec.evaluator).second)
        fail(Errc::duplicate_ballot, "evaluator '" + rec.evaluator +
                                         "' has two ballots on question '" +
                                         question_id + "'");
      if (!rec.external_reference && !cset.count(rec.evaluator))
        fail(Errc::unknown_model, "evaluator '" + rec.evaluator +
                                      "' is not a candidate on question '" +
                                      question_id + "'");
      if (rec.ranking.candidate_count() != candidates.size() ||
          !std::all_of(candidates.begin(), candidates.end(),
                       [&](const ModelId& c) { return rec.ranking.contains(c); }))
        fail(Errc::candidate_mismatch,
             "ballot by '" + rec.evaluator + "' on question '" + question_id +
                 "' does not cover the candidate set");
    }
  }

  std::vector<Ranking> ballots() const {
    std::vector<Ranking> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(rec.ranking);
    return out;
  }
};

/// Pairwise preference counts. above[i][j] = number of ballots ranking
/// candidate i strictly above candidate j; ties contribute to neither cell.
struct PairwiseMatrix {
  std::vector<ModelId> candidates;
  std::vector<std::vector<std::int64_t>> above;
  std::int64_t ballot_count = 0;

  std::int64_t at(std::size_t i, std::size_t j) const { return above[i][j]; }

  /// Ballots expressing no strict preference between i and j. Only
  /// meaningful when every ballot covers both candidates.
  std::int64_t ties(std::size_t i, std::size_t j) const {
    return ballot_count - above[i][j] - above[j][i];
  }
};

/// Pairwise counts over an explicit candidate order. Ballots may cover a
/// subset of the candidates; pairs with an absent member are skipped.
inline PairwiseMatrix pairwise_from_ballots(
    const std::vector<ModelId>& candidates, std::span<const Ranking> ballots) {
  PairwiseMatrix m;
  m.candidates = candidates;
  m.ballot_count = static_cast<std::int64_t>(ballots.size());
  const std::size_t n = candidates.size();
  m.above.assign(n, std::vector<std::int64_t>(n, 0));
  for (const auto& b : ballots) {
    std::vector<int> g = b.group_index_over(candidates);
    for (std::size_t i = 0; i < n; ++i) {
      if (g[i] < 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || g[j] < 0) continue;
        if (g[i] < g[j]) ++m.above[i][j];
      }
    }
  }
  return m;
}

inline PairwiseMatrix pairwise_matrix(const QuestionProfile& profile) {
  if (profile.records.empty())
    fail(Errc::empty_profile,
         "question '" + profile.question_id + "' has no ballots");
  auto ballots = profile.ballots();
  return pairwise_from_ballots(profile.candidates, ballots);
}

}  // namespace peerrank
