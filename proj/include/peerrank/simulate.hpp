#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/protocols.hpp"
#include "peerrank/ranking.hpp"
#include "peerrank/rng.hpp"

namespace peerrank {

/// Thurstonian evaluator simulator. Model i has latent quality
/// quality_spread * (m - 1 - i), so id order is the true quality order.
/// Evaluator e perceives candidate i on a question as
///   quality(i) + noise * N(0,1) + (i == e ? self_bias[e] : 0)
/// and ranks candidates by descending perceived score. Every noise draw is
/// keyed by (seed, question, evaluator, candidate), so regeneration is
/// bit-identical regardless of evaluation order or threading.
struct SimConfig {
  int m = 6;                  // models (2..99)
  int n = 100;                // questions
  std::uint64_t seed = 0;
  double quality_spread = 1.0;
  double noise = 0.0;
  std::map<ModelId, double> self_bias;     // absent model = no bias
  std::optional<int> truncate_k;           // top-k kept, rest tied last

  void set_uniform_bias(double b) {
    self_bias.clear();
    for (int i = 0; i < m; ++i) self_bias[model_id(i)] = b;
  }

  static ModelId model_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "m%02d", index + 1);
    return ModelId(buf);
  }

  void validate() const {
    if (m < 2 || m > 99) fail(Errc::invalid_config, "m must be in [2, 99]");
    if (n < 1) fail(Errc::invalid_config, "n must be positive");
    if (quality_spread < 0) fail(Errc::invalid_config, "quality_spread < 0");
    if (noise < 0) fail(Errc::invalid_config, "noise < 0");
    if (truncate_k && (*truncate_k < 1 || *truncate_k > m))
      fail(Errc::invalid_config, "truncate_k must be in [1, m]");
    for (const auto& [id, b] : self_bias) {
      bool known = false;
      for (int i = 0; i < m; ++i)
        if (id == model_id(i)) known = true;
      if (!known)
        fail(Errc::invalid_config, "self_bias names unknown model '" + id + "'");
    }
  }
};

struct SimRun {
  SimConfig config;
  Ranking true_ranking;
  std::vector<QuestionProfile> profiles;
};

namespace sim_detail {

inline std::string question_id(int q) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "q%05d", q + 1);
  return std::string(buf);
}

}  // namespace sim_detail

/// One evaluator's ballot on one question.
inline Ranking simulate_ballot(const SimConfig& cfg, int question, int evaluator) {
  const int m = cfg.m;
  std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double s = cfg.quality_spread * static_cast<double>(m - 1 - i);
    if (cfg.noise > 0) {
      const std::uint64_t key = derive_seed(
          cfg.seed, {static_cast<std::uint64_t>(question),
                     static_cast<std::uint64_t>(evaluator),
                     static_cast<std::uint64_t>(i)});
      s += cfg.noise * standard_normal(key);
    }
    if (i == evaluator) {
      auto it = cfg.self_bias.find(SimConfig::model_id(i));
      if (it != cfg.self_bias.end()) s += it->second;
    }
    scored[static_cast<std::size_t>(i)] = {s, i};
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;  // descending score
    return a.second < b.second;
  });
  std::vector<Ranking::Group> groups;
  const int k = cfg.truncate_k.value_or(m);
  for (int p = 0; p < m; ++p) {
    const ModelId id = SimConfig::model_id(scored[static_cast<std::size_t>(p)].second);
    if (p < k)
      groups.push_back({id});
    else if (p == k)
      groups.push_back({id});
    else
      groups.back().push_back(id);
  }
  return Ranking::from_groups(std::move(groups));
}

inline SimRun simulate(const SimConfig& cfg) {
  cfg.validate();
  SimRun run;
  run.config = cfg;
  std::vector<ModelId> cands;
  for (int i = 0; i < cfg.m; ++i) cands.push_back(SimConfig::model_id(i));
  run.true_ranking = Ranking::linear(cands);
  run.profiles.reserve(static_cast<std::size_t>(cfg.n));
  for (int q = 0; q < cfg.n; ++q) {
    QuestionProfile p;
    p.question_id = sim_detail::question_id(q);
    p.candidates = cands;
    for (int e = 0; e < cfg.m; ++e) {
      EvaluationRecord rec;
      rec.question_id = p.question_id;
      rec.evaluator = SimConfig::model_id(e);
      rec.ranking = simulate_ballot(cfg, q, e);
      p.records.push_back(std::move(rec));
    }
    run.profiles.push_back(std::move(p));
  }
  return run;
}

/// Aggregate self-preference readout of a simulated run.
struct BiasSummary {
  std::vector<BiasDelta> per_model;
  double mean_pe_minus_se = 0;       // > 0: models flatter themselves
  double mean_abs_pe_minus_se = 0;
  double mean_sfe_minus_sie = 0;
  double mean_abs_sfe_minus_sie = 0;
};

inline BiasSummary bias_recovery_check(
    const SimRun& run, const RuleConfig& cfg = default_protocol_config()) {
  BiasSummary s;
  s.per_model = bias_table(run.profiles, cfg);
  if (s.per_model.empty())
    fail(Errc::empty_profile, "bias table came back empty");
  for (const auto& row : s.per_model) {
    s.mean_pe_minus_se += row.pe_minus_se;
    s.mean_abs_pe_minus_se += std::fabs(row.pe_minus_se);
    s.mean_sfe_minus_sie += row.sfe_minus_sie;
    s.mean_abs_sfe_minus_sie += std::fabs(row.sfe_minus_sie);
  }
  const double k = static_cast<double>(s.per_model.size());
  s.mean_pe_minus_se /= k;
  s.mean_abs_pe_minus_se /= k;
  s.mean_sfe_minus_sie /= k;
  s.mean_abs_sfe_minus_sie /= k;
  return s;
}

}  // namespace peerrank
