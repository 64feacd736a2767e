// peerrank CLI: aggregate | protocols | align | simulate | collect | oracle | run

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peerrank/alignment.hpp"
#include "peerrank/gateway.hpp"
#include "peerrank/http_transport.hpp"
#include "peerrank/io.hpp"
#include "peerrank/oracle.hpp"
#include "peerrank/pipeline.hpp"
#include "peerrank/protocols.hpp"
#include "peerrank/simulate.hpp"
#include "peerrank/voting.hpp"

namespace {

using namespace peerrank;

struct RuleOpts {
  std::string rule = "kemeny_exact";
  std::string tie_break = "lex_id";
  std::uint64_t seed = 0;
  int exact_m_limit = 10;

  void attach(CLI::App* cmd) {
    cmd->add_option("--rule", rule, "Voting rule")->capture_default_str();
    cmd->add_option("--tie-break", tie_break, "lex_id|input_order|random")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Seed for tie_break=random")
        ->capture_default_str();
    cmd->add_option("--exact-m-limit", exact_m_limit,
                    "Candidate ceiling for exact rules")
        ->capture_default_str();
  }

  RuleConfig config() const {
    RuleConfig cfg;
    cfg.rule = rule_from_name(rule);
    cfg.tie_break = tie_break_from_name(tie_break);
    cfg.seed = seed;
    cfg.exact_m_limit = exact_m_limit;
    return cfg;
  }
};

int cmd_aggregate(const std::string& ballots, const RuleOpts& opts) {
  auto profiles = parse_ballot_file(ballots);
  const RuleConfig cfg = opts.config();
  std::sort(profiles.begin(), profiles.end(),
            [](const auto& a, const auto& b) {
              return a.question_id < b.question_id;
            });
  std::cout << "question_id\tobjective\tranking\n";
  for (const auto& p : profiles) {
    auto res = aggregate(p, cfg);
    std::cout << p.question_id << "\t" << fmt_num(res.objective) << "\t"
              << res.ranking.to_string() << "\n";
  }
  return 0;
}

int cmd_protocols(const std::string& ballots, const RuleOpts& opts) {
  auto profiles = parse_ballot_file(ballots);
  auto rows = bias_table(profiles, opts.config());
  std::cout << "model\tse\tpe\tpe_minus_se\tsie\tsfe\tsfe_minus_sie\n";
  for (const auto& r : rows)
    std::cout << r.model << "\t" << fmt_num(r.se_rank) << "\t"
              << fmt_num(r.pe_rank) << "\t" << fmt_num(r.pe_minus_se) << "\t"
              << fmt_num(r.sie_rank) << "\t" << fmt_num(r.sfe_rank) << "\t"
              << fmt_num(r.sfe_minus_sie) << "\n";
  return 0;
}

int cmd_align(const std::string& ballots, const std::string& reference,
              const std::string& metric_arg, const RuleOpts& opts) {
  auto profiles = parse_ballot_file(ballots);
  auto ref = parse_reference_file(reference);
  const RuleConfig cfg = opts.config();

  std::vector<Metric> metrics;
  if (metric_arg == "both")
    metrics = {Metric::pearson, Metric::kendall};
  else
    metrics = {metric_from_name(metric_arg)};

  std::map<ModelId, std::map<std::string, Ranking>> evaluator_streams;
  std::map<std::string, Ranking> consensus_stream;
  for (const auto& p : profiles) {
    for (const auto& rec : p.records)
      evaluator_streams[rec.evaluator][p.question_id] = rec.ranking;
    consensus_stream[p.question_id] = aggregate(p, cfg).ranking;
  }

  std::cout << "metric\tsource\tstat\tvalue\n";
  auto emit = [&](Metric metric, const std::string& source,
                  const std::map<std::string, Ranking>& stream) {
    auto rep = align(stream, ref, metric);
    const std::vector<std::pair<std::string, double>> vals = {
        {"macro", rep.macro},          {"micro_mean", rep.micro.mean},
        {"micro_std", rep.micro.std_dev}, {"micro_min", rep.micro.min},
        {"micro_p25", rep.micro.p25},  {"micro_p50", rep.micro.p50},
        {"micro_p75", rep.micro.p75},  {"micro_max", rep.micro.max}};
    for (const auto& [stat, v] : vals)
      std::cout << metric_name(metric) << "\t" << source << "\t" << stat
                << "\t" << fmt_num(v) << "\n";
  };
  for (Metric metric : metrics) {
    for (const auto& [id, stream] : evaluator_streams)
      emit(metric, id, stream);
    emit(metric, std::string("rule:") + rule_name(cfg.rule), consensus_stream);
  }
  return 0;
}

int cmd_simulate(const SimConfig& cfg, const std::string& out,
                 const std::string& reference_out) {
  auto run = simulate(cfg);
  write_ballot_file(out, run.profiles);
  if (!reference_out.empty()) {
    ReferenceRanking ref;
    ref.domain = "synthetic";
    ref.ranking = run.true_ranking;
    write_reference_file(reference_out, ref);
  }
  std::cerr << "wrote " << out << " (" << cfg.n << " questions x " << cfg.m
            << " models)\n";
  return 0;
}

int cmd_oracle(const std::string& ballots, const std::string& rule) {
  auto profiles = parse_ballot_file(ballots);
  std::sort(profiles.begin(), profiles.end(),
            [](const auto& a, const auto& b) {
              return a.question_id < b.question_id;
            });
  std::cout << "question_id\tobjective\tranking\n";
  for (const auto& p : profiles) {
    auto bs = p.ballots();
    oracle::OracleResult res;
    if (rule == "kemeny_exact")
      res = oracle::kemeny(p.candidates, bs);
    else if (rule == "kendall_max")
      res = oracle::kendall_max(p.candidates, bs);
    else if (rule == "spearman_max")
      res = oracle::spearman_max(p.candidates, bs);
    else
      fail(Errc::invalid_config,
           "oracle supports kemeny_exact, kendall_max, spearman_max");
    std::cout << p.question_id << "\t" << fmt_num(res.objective) << "\t"
              << res.ranking.to_string() << "\n";
  }
  return 0;
}

CollectRequest parse_collect_request(const json& j, const std::string& where) {
  CollectRequest req;
  if (j.contains("domain"))
    req.domain = domain_from_name(j["domain"].get<std::string>());
  if (j.contains("seed")) req.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("questions") || !j["questions"].is_array())
    fail(Errc::parse_error, where + ": config needs a 'questions' array");
  for (const auto& q : j["questions"]) {
    CollectQuestion cq;
    cq.question_id = q.at("question_id").get<std::string>();
    cq.question = q.at("question").get<std::string>();
    for (const auto& r : q.at("responses"))
      cq.responses.emplace_back(r.at("model").get<std::string>(),
                                r.at("text").get<std::string>());
    req.questions.push_back(std::move(cq));
  }
  return req;
}

int cmd_collect(const std::string& config_path, const std::string& out,
                bool live, int threads) {
  std::ifstream in(config_path);
  if (!in) fail(Errc::parse_error, "cannot open '" + config_path + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, config_path + ": " + e.what());
  }
  auto req = parse_collect_request(j, config_path);

  std::vector<EndpointConfig> endpoints;
  if (j.contains("endpoints"))
    for (const auto& e : j["endpoints"]) {
      EndpointConfig ep;
      ep.model = e.at("model").get<std::string>();
      if (e.contains("base_url")) ep.base_url = e["base_url"].get<std::string>();
      if (e.contains("path")) ep.path = e["path"].get<std::string>();
      if (e.contains("credential_env"))
        ep.credential_env = e["credential_env"].get<std::string>();
      if (e.contains("timeout_s")) ep.timeout_s = e["timeout_s"].get<double>();
      if (e.contains("max_retries"))
        ep.max_retries = e["max_retries"].get<int>();
      if (e.contains("temperature"))
        ep.temperature = e["temperature"].get<double>();
      endpoints.push_back(std::move(ep));
    }

  FixtureTransport fixtures;
  bool have_fixtures = false;
  if (j.contains("fixtures")) {
    have_fixtures = true;
    for (const auto& f : j["fixtures"]) {
      const auto qid = f.at("question_id").get<std::string>();
      const auto ev = f.at("evaluator").get<std::string>();
      for (const auto& reply : f.at("replies"))
        fixtures.add_reply(qid, ev, reply.get<std::string>());
    }
  }
  if (live && have_fixtures)
    fail(Errc::invalid_config, "--live conflicts with fixtures in the config");
  if (!live && !have_fixtures)
    fail(Errc::invalid_config,
         "no fixtures in the config; pass --live to call real endpoints");

  HttpTransport http;
  Transport& transport =
      live ? static_cast<Transport&>(http) : static_cast<Transport&>(fixtures);
  auto outcome = collect(req, endpoints, transport, threads);

  // Regroup records into profiles for canonical emission.
  std::map<std::string, QuestionProfile> by_q;
  for (const auto& q : req.questions) {
    QuestionProfile p;
    p.question_id = q.question_id;
    for (const auto& [author, text] : q.responses)
      p.candidates.push_back(author);
    by_q[q.question_id] = std::move(p);
  }
  for (auto& rec : outcome.records) {
    auto& p = by_q.at(rec.question_id);
    rec.external_reference =
        std::find(p.candidates.begin(), p.candidates.end(), rec.evaluator) ==
        p.candidates.end();
    p.records.push_back(std::move(rec));
  }
  std::vector<QuestionProfile> profiles;
  for (auto& [qid, p] : by_q)
    if (!p.records.empty()) profiles.push_back(std::move(p));
  write_ballot_file(out, profiles);

  for (const auto& f : outcome.failures)
    std::cerr << "missing " << f.question_id << "/" << f.evaluator << " after "
              << f.attempts << " attempts: " << f.reason << "\n";
  std::cerr << "wrote " << out << " (" << outcome.records.size()
            << " ballots, " << outcome.failures.size() << " missing)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank aggregation and peer-evaluation toolkit"};
  app.require_subcommand(1);

  // aggregate
  std::string agg_ballots;
  RuleOpts agg_opts;
  auto* agg = app.add_subcommand("aggregate",
                                 "Consensus ranking per question (TSV)");
  agg->add_option("--ballots", agg_ballots, "Ballot JSONL file")->required();
  agg_opts.attach(agg);

  // protocols
  std::string prot_ballots;
  RuleOpts prot_opts;
  auto* prot = app.add_subcommand(
      "protocols", "SE/PE/SIE/SFE bias table from ballots (TSV)");
  prot->add_option("--ballots", prot_ballots, "Ballot JSONL file")->required();
  prot_opts.attach(prot);

  // align
  std::string al_ballots, al_reference, al_metric = "both";
  RuleOpts al_opts;
  auto* al = app.add_subcommand(
      "align", "Micro/macro agreement against a reference ranking (TSV)");
  al->add_option("--ballots", al_ballots, "Ballot JSONL file")->required();
  al->add_option("--reference", al_reference, "Reference ranking JSON")
      ->required();
  al->add_option("--metric", al_metric, "pearson|kendall|both")
      ->capture_default_str();
  al_opts.attach(al);

  // simulate
  SimConfig sim_cfg;
  double sim_bias = 0.0;
  int sim_truncate = 0;
  std::string sim_out, sim_ref_out;
  auto* sim = app.add_subcommand("simulate",
                                 "Generate synthetic evaluator ballots");
  sim->add_option("--m", sim_cfg.m, "Models")->capture_default_str();
  sim->add_option("--n", sim_cfg.n, "Questions")->capture_default_str();
  sim->add_option("--seed", sim_cfg.seed, "Seed")->capture_default_str();
  sim->add_option("--quality-spread", sim_cfg.quality_spread,
                  "Latent quality gap between adjacent models")
      ->capture_default_str();
  sim->add_option("--noise", sim_cfg.noise, "Perception noise sigma")
      ->capture_default_str();
  sim->add_option("--self-bias", sim_bias,
                  "Uniform self-perception boost for every model")
      ->capture_default_str();
  sim->add_option("--truncate-k", sim_truncate,
                  "Keep top-k, tie the rest last (0 = full ballots)")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "Output ballot JSONL")->required();
  sim->add_option("--reference-out", sim_ref_out,
                  "Also write the true ranking as a reference file");

  // collect
  std::string col_config, col_out;
  bool col_live = false;
  int col_threads = 1;
  auto* col = app.add_subcommand(
      "collect", "Gather ballots from evaluator endpoints or fixtures");
  col->add_option("--config", col_config, "Collection config JSON")
      ->required();
  col->add_option("--out", col_out, "Output ballot JSONL")->required();
  col->add_flag("--live", col_live,
                "Call real HTTP endpoints (default: fixtures only)");
  col->add_option("--threads", col_threads, "Parallel requests")
      ->capture_default_str();

  // oracle
  std::string ora_ballots, ora_rule = "kemeny_exact";
  auto* ora = app.add_subcommand(
      "oracle", "Brute-force reference solver for cross-checks (TSV)");
  ora->add_option("--ballots", ora_ballots, "Ballot JSONL file")->required();
  ora->add_option("--rule", ora_rule,
                  "kemeny_exact|kendall_max|spearman_max")
      ->capture_default_str();

  // run
  std::string run_manifest;
  int run_threads = 1;
  auto* run = app.add_subcommand("run",
                                 "Full pipeline from a run manifest");
  run->add_option("--manifest", run_manifest, "Run manifest JSON")->required();
  run->add_option("--threads", run_threads, "Worker threads")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (agg->parsed()) return cmd_aggregate(agg_ballots, agg_opts);
    if (prot->parsed()) return cmd_protocols(prot_ballots, prot_opts);
    if (al->parsed())
      return cmd_align(al_ballots, al_reference, al_metric, al_opts);
    if (sim->parsed()) {
      if (sim_bias != 0.0) sim_cfg.set_uniform_bias(sim_bias);
      if (sim_truncate > 0) sim_cfg.truncate_k = sim_truncate;
      return cmd_simulate(sim_cfg, sim_out, sim_ref_out);
    }
    if (col->parsed())
      return cmd_collect(col_config, col_out, col_live, col_threads);
    if (ora->parsed()) return cmd_oracle(ora_ballots, ora_rule);
    if (run->parsed()) {
      auto manifest = parse_manifest_file(run_manifest);
      auto result = run_pipeline(manifest, run_threads);
      std::cerr << "manifest_hash=" << hex64(result.manifest_hash) << "\n";
      for (const auto& a : result.artifacts)
        std::cerr << "wrote " << manifest.output_dir << "/" << a << "\n";
      return 0;
    }
  } catch (const peerrank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
