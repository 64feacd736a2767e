#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/metrics.hpp"
#include "peerrank/ranking.hpp"

namespace peerrank {

/// A trusted ranking to measure against (e.g. a human preference order).
struct ReferenceRanking {
  std::string domain;
  Ranking ranking;
};

enum class Metric { pearson, kendall };

inline const char* metric_name(Metric m) {
  return m == Metric::pearson ? "pearson" : "kendall";
}

inline Metric metric_from_name(const std::string& s) {
  if (s == "pearson") return Metric::pearson;
  if (s == "kendall") return Metric::kendall;
  fail(Errc::invalid_config, "unknown metric '" + s + "'");
}

/// Seven-number summary of a sample.
struct DistributionStats {
  double mean = 0, std_dev = 0, min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0;
};

/// Sample statistics: std uses the n-1 denominator (0 when n == 1);
/// percentiles interpolate linearly between closest ranks.
inline DistributionStats describe(std::vector<double> values) {
  if (values.empty())
    fail(Errc::empty_profile, "describe() needs at least one value");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  DistributionStats s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std_dev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  auto pct = [&](double p) {
    const double h = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return values[n - 1];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  s.min = values.front();
  s.p25 = pct(0.25);
  s.p50 = pct(0.50);
  s.p75 = pct(0.75);
  s.max = values.back();
  return s;
}

inline CorrelationValue correlate(const Ranking& a, const Ranking& b,
                                  Metric m) {
  return m == Metric::pearson ? pearson_ranks(a, b) : kendall_tau(a, b);
}

/// Micro and macro agreement of a per-question ranking stream against a
/// reference. Micro: correlation per question, summarized as a
/// distribution. Macro: mean position per model across questions collapses
/// into a single (possibly tied) ranking, correlated once.
struct AlignmentReport {
  Metric metric = Metric::pearson;
  std::vector<std::pair<std::string, double>> per_question;  // sorted by id
  DistributionStats micro;
  double macro = 0;
};

/// Mean-position ranking across questions: every ranking must cover the
/// same candidate set; exactly equal mean positions become tie groups
/// (means are compared as exact integer fractions).
inline Ranking mean_position_ranking(
    const std::map<std::string, Ranking>& per_question) {
  if (per_question.empty())
    fail(Errc::empty_profile, "no per-question rankings");
  const auto cands = per_question.begin()->second.candidates();
  std::vector<std::int64_t> sum_dbl(cands.size(), 0);
  for (const auto& [qid, r] : per_question) {
    if (r.candidates() != cands)
      fail(Errc::candidate_mismatch,
           "question '" + qid + "' ranks a different candidate set");
    auto dbl = r.doubled_positions_over(cands);
    for (std::size_t i = 0; i < cands.size(); ++i) sum_dbl[i] += dbl[i];
  }
  // Common question count cancels, so summed doubled positions compare
  // exactly.
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sum_dbl[a] != sum_dbl[b]) return sum_dbl[a] < sum_dbl[b];
    return cands[a] < cands[b];
  });
  std::vector<Ranking::Group> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || sum_dbl[order[k]] != sum_dbl[order[k - 1]])
      groups.push_back({cands[order[k]]});
    else
      groups.back().push_back(cands[order[k]]);
  }
  return Ranking::from_groups(std::move(groups));
}

inline DistributionStats micro_alignment(
    const std::map<std::string, Ranking>& per_question,
    const ReferenceRanking& ref, Metric metric) {
  if (per_question.empty())
    fail(Errc::empty_profile, "no per-question rankings");
  std::vector<double> vals;
  vals.reserve(per_question.size());
  for (const auto& [qid, r] : per_question)
    vals.push_back(correlate(r, ref.ranking, metric).value);
  return describe(std::move(vals));
}

inline double macro_alignment(const std::map<std::string, Ranking>& per_question,
                              const ReferenceRanking& ref, Metric metric) {
  return correlate(mean_position_ranking(per_question), ref.ranking, metric)
      .value;
}

inline AlignmentReport align(const std::map<std::string, Ranking>& per_question,
                             const ReferenceRanking& ref, Metric metric) {
  AlignmentReport rep;
  rep.metric = metric;
  std::vector<double> vals;
  for (const auto& [qid, r] : per_question) {
    const double v = correlate(r, ref.ranking, metric).value;
    rep.per_question.emplace_back(qid, v);
    vals.push_back(v);
  }
  rep.micro = describe(std::move(vals));
  rep.macro = macro_alignment(per_question, ref, metric);
  return rep;
}

/// Ranking induced by benchmark accuracies: descending accuracy, exact ties
/// broken lexicographically (a strict order, mirroring how an accuracy
/// column is read off a leaderboard).
inline Ranking accuracy_ranking(const std::map<ModelId, double>& accuracies) {
  if (accuracies.empty())
    fail(Errc::empty_profile, "no accuracies given");
  std::vector<std::pair<ModelId, double>> rows(accuracies.begin(),
                                               accuracies.end());
  for (const auto& [id, acc] : rows)
    if (!(acc >= 0.0 && acc <= 1.0))
      fail(Errc::out_of_range,
           "accuracy for '" + id + "' is outside [0, 1]");
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<ModelId> order;
  order.reserve(rows.size());
  for (const auto& [id, acc] : rows) order.push_back(id);
  return Ranking::linear(std::move(order));
}

}  // namespace peerrank
