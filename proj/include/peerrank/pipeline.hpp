#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "peerrank/alignment.hpp"
#include "peerrank/io.hpp"
#include "peerrank/protocols.hpp"
#include "peerrank/voting.hpp"

namespace peerrank {

struct PipelineResult {
  std::uint64_t manifest_hash = 0;
  std::vector<std::string> artifacts;  // file names relative to output_dir
};

namespace pipeline_detail {

/// Index-slotted parallel map: results land by index, so the artifact
/// bytes cannot depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min<int>(threads, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pipeline_detail

/// Runs the full pipeline described by a manifest: per-rule consensus
/// tables, protocol tables (plus the bias table when all four protocols are
/// selected), and micro/macro alignment tables per metric when a reference
/// ranking is given. Every artifact records the manifest hash; identical
/// manifests produce identical bytes regardless of `threads`.
inline PipelineResult run_pipeline(const RunManifest& manifest,
                                   int threads = 1) {
  namespace fs = std::filesystem;
  auto profiles = parse_ballot_file(manifest.ballots_path);
  std::optional<ReferenceRanking> ref;
  if (!manifest.reference_path.empty())
    ref = parse_reference_file(manifest.reference_path);
  std::map<ModelId, double> accuracies;
  if (!manifest.accuracies_path.empty())
    accuracies = parse_accuracy_file(manifest.accuracies_path);

  fs::create_directories(manifest.output_dir);
  PipelineResult result;
  result.manifest_hash = manifest.hash();
  const std::vector<std::string> preamble = {"manifest_hash=" +
                                             hex64(result.manifest_hash)};
  const fs::path out_dir(manifest.output_dir);
  auto emit_pair = [&](const std::string& stem, const Table& t) {
    write_table_pair(out_dir, stem, t, preamble);
    result.artifacts.push_back(stem + ".tsv");
    result.artifacts.push_back(stem + ".txt");
  };

  {
    json echo;
    echo["manifest_hash"] = hex64(result.manifest_hash);
    echo["manifest"] = manifest.to_json();
    std::ofstream out(out_dir / "manifest_echo.json");
    if (!out) fail(Errc::parse_error, "cannot write manifest_echo.json");
    out << echo.dump(2) << "\n";
    result.artifacts.push_back("manifest_echo.json");
  }

  // Question order for all per-question tables.
  std::vector<std::size_t> q_order(profiles.size());
  for (std::size_t i = 0; i < q_order.size(); ++i) q_order[i] = i;
  std::sort(q_order.begin(), q_order.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].question_id < profiles[b].question_id;
  });

  // ----- per-rule consensus ------------------------------------------------
  std::map<Rule, std::map<std::string, Ranking>> rule_streams;
  for (Rule rule : manifest.rules) {
    RuleConfig rc = manifest.consensus;
    rc.rule = rule;
    std::vector<ConsensusResult> results(profiles.size());
    pipeline_detail::parallel_for(
        profiles.size(), threads,
        [&](std::size_t i) { results[i] = aggregate(profiles[i], rc); });
    Table t;
    t.columns = {"question_id", "objective", "ranking"};
    auto& stream = rule_streams[rule];
    for (std::size_t i : q_order) {
      t.rows.push_back({profiles[i].question_id,
                        fmt_num(results[i].objective),
                        results[i].ranking.to_string()});
      stream[profiles[i].question_id] = results[i].ranking;
    }
    emit_pair(std::string("consensus_") + rule_name(rule), t);
  }

  // ----- protocols ---------------------------------------------------------
  std::set<Protocol> selected(manifest.protocols.begin(),
                              manifest.protocols.end());
  for (Protocol p : manifest.protocols) {
    auto rep = run_protocol(p, profiles, manifest.consensus);
    Table t;
    t.columns = {"model", "mean_rank", "coverage"};
    for (const auto& [id, mean] : rep.per_model_mean_rank)
      t.rows.push_back({id, fmt_num(mean),
                        std::to_string(rep.coverage.at(id))});
    emit_pair(std::string("protocol_") + protocol_name(p), t);
  }
  if (selected.size() == 4) {
    auto rows = bias_table(profiles, manifest.consensus);
    Table t;
    t.columns = {"model", "se",          "pe",  "pe_minus_se",
                 "sie",   "sfe", "sfe_minus_sie"};
    for (const auto& r : rows)
      t.rows.push_back({r.model, fmt_num(r.se_rank), fmt_num(r.pe_rank),
                        fmt_num(r.pe_minus_se), fmt_num(r.sie_rank),
                        fmt_num(r.sfe_rank), fmt_num(r.sfe_minus_sie)});
    emit_pair("bias", t);
  }

  // ----- alignment ---------------------------------------------------------
  if (ref) {
    // Each evaluator's own ballot stream, then each rule's consensus stream.
    std::map<ModelId, std::map<std::string, Ranking>> evaluator_streams;
    for (const auto& p : profiles)
      for (const auto& rec : p.records)
        evaluator_streams[rec.evaluator][p.question_id] = rec.ranking;

    for (Metric metric : manifest.metrics) {
      Table micro;
      micro.columns = {"stat"};
      std::vector<DistributionStats> cols;
      for (const auto& [id, stream] : evaluator_streams) {
        micro.columns.push_back(id);
        cols.push_back(micro_alignment(stream, *ref, metric));
      }
      for (Rule rule : manifest.rules) {
        micro.columns.push_back(std::string("rule:") + rule_name(rule));
        cols.push_back(micro_alignment(rule_streams.at(rule), *ref, metric));
      }
      const std::vector<std::pair<std::string, double DistributionStats::*>>
          stats = {{"mean", &DistributionStats::mean},
                   {"std", &DistributionStats::std_dev},
                   {"min", &DistributionStats::min},
                   {"p25", &DistributionStats::p25},
                   {"p50", &DistributionStats::p50},
                   {"p75", &DistributionStats::p75},
                   {"max", &DistributionStats::max}};
      for (const auto& [name, member] : stats) {
        std::vector<std::string> row{name};
        for (const auto& s : cols) row.push_back(fmt_num(s.*member));
        micro.rows.push_back(std::move(row));
      }
      emit_pair(std::string("alignment_micro_") + metric_name(metric), micro);

      Table macro;
      macro.columns = {"source", "value"};
      if (!accuracies.empty())
        macro.rows.push_back(
            {"accuracy",
             fmt_num(correlate(accuracy_ranking(accuracies), ref->ranking,
                               metric)
                         .value)});
      for (const auto& [id, stream] : evaluator_streams)
        macro.rows.push_back(
            {id, fmt_num(macro_alignment(stream, *ref, metric))});
      for (Rule rule : manifest.rules)
        macro.rows.push_back(
            {std::string("rule:") + rule_name(rule),
             fmt_num(macro_alignment(rule_streams.at(rule), *ref, metric))});
      emit_pair(std::string("alignment_macro_") + metric_name(metric), macro);
    }
  }

  return result;
}

}  // namespace peerrank
