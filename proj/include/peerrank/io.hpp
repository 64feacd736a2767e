#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "peerrank/alignment.hpp"
#include "peerrank/errors.hpp"
#include "peerrank/hash.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/protocols.hpp"
#include "peerrank/ranking.hpp"
#include "peerrank/voting.hpp"

namespace peerrank {

using json = nlohmann::ordered_json;

// ===== primitives ==========================================================

/// Fixed-precision number rendering so artifacts are byte-stable.
inline std::string fmt_num(double v, int precision = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

inline json ranking_to_json(const Ranking& r) {
  json arr = json::array();
  for (const auto& g : r.groups()) {
    json grp = json::array();
    for (const auto& id : g) grp.push_back(id);
    arr.push_back(std::move(grp));
  }
  return arr;
}

inline Ranking ranking_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array())
    fail(Errc::parse_error, where + ": ranking must be an array of arrays");
  std::vector<Ranking::Group> groups;
  for (const auto& g : arr) {
    if (!g.is_array())
      fail(Errc::parse_error, where + ": tie group must be an array");
    Ranking::Group grp;
    for (const auto& id : g) {
      if (!id.is_string())
        fail(Errc::parse_error, where + ": candidate ids must be strings");
      grp.push_back(id.get<std::string>());
    }
    groups.push_back(std::move(grp));
  }
  return Ranking::from_groups(std::move(groups));
}

// ===== ballot records (JSONL) ==============================================

/// Parses line-delimited ballot records
///   {"question_id": ..., "evaluator": ..., "ranking": [[...], ...]}
/// grouped into validated QuestionProfiles. Questions and candidates keep
/// first-appearance order. Streams line by line, so file size is bounded
/// only by the profile data itself.
inline std::vector<QuestionProfile> parse_ballots(std::istream& in,
                                                  const std::string& source) {
  std::vector<QuestionProfile> profiles;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        source + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, where + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("question_id") ||
        !rec.contains("evaluator") || !rec.contains("ranking") ||
        !rec["question_id"].is_string() || !rec["evaluator"].is_string())
      fail(Errc::parse_error,
           where + ": record needs question_id, evaluator, ranking");
    EvaluationRecord er;
    er.question_id = rec["question_id"].get<std::string>();
    er.evaluator = rec["evaluator"].get<std::string>();
    if (rec.contains("external_reference"))
      er.external_reference = rec["external_reference"].get<bool>();
    try {
      er.ranking = ranking_from_json(rec["ranking"], where);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }

    auto it = index.find(er.question_id);
    if (it == index.end()) {
      index[er.question_id] = profiles.size();
      QuestionProfile p;
      p.question_id = er.question_id;
      // Candidate order = first ballot's order of appearance.
      for (const auto& g : er.ranking.groups())
        for (const auto& id : g) p.candidates.push_back(id);
      p.records.push_back(std::move(er));
      profiles.push_back(std::move(p));
    } else {
      profiles[it->second].records.push_back(std::move(er));
    }
  }
  if (profiles.empty())
    fail(Errc::empty_profile, source + ": no ballot records found");
  for (auto& p : profiles) {
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(e.code(), source + ": " + e.what());
    }
  }
  return profiles;
}

inline std::vector<QuestionProfile> parse_ballot_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse_error, "cannot open '" + path.string() + "'");
  return parse_ballots(in, path.filename().string());
}

/// Canonical emission: questions sorted by id, ballots sorted by evaluator,
/// fixed key order. emit(parse(emit(x))) == emit(x).
inline void write_ballots(std::ostream& out,
                          std::vector<QuestionProfile> profiles) {
  std::sort(profiles.begin(), profiles.end(),
            [](const QuestionProfile& a, const QuestionProfile& b) {
              return a.question_id < b.question_id;
            });
  for (auto& p : profiles) {
    std::sort(p.records.begin(), p.records.end(),
              [](const EvaluationRecord& a, const EvaluationRecord& b) {
                return a.evaluator < b.evaluator;
              });
    for (const auto& rec : p.records) {
      json j;
      j["question_id"] = rec.question_id;
      j["evaluator"] = rec.evaluator;
      j["ranking"] = ranking_to_json(rec.ranking);
      if (rec.external_reference) j["external_reference"] = true;
      out << j.dump() << "\n";
    }
  }
}

inline void write_ballot_file(const std::filesystem::path& path,
                              const std::vector<QuestionProfile>& profiles) {
  std::ofstream out(path);
  if (!out) fail(Errc::parse_error, "cannot write '" + path.string() + "'");
  write_ballots(out, profiles);
}

// ===== reference ranking and accuracy files ================================

inline ReferenceRanking parse_reference(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("ranking"))
    fail(Errc::parse_error, where + ": reference file needs a 'ranking' field");
  ReferenceRanking ref;
  if (j.contains("domain")) ref.domain = j["domain"].get<std::string>();
  ref.ranking = ranking_from_json(j["ranking"], where);
  return ref;
}

inline ReferenceRanking parse_reference_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse_error, "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
  return parse_reference(j, path.filename().string());
}

inline void write_reference_file(const std::filesystem::path& path,
                                 const ReferenceRanking& ref) {
  json j;
  if (!ref.domain.empty()) j["domain"] = ref.domain;
  j["ranking"] = ranking_to_json(ref.ranking);
  std::ofstream out(path);
  if (!out) fail(Errc::parse_error, "cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

/// Accuracy file: a flat JSON object {"model_id": value, ...}.
inline std::map<ModelId, double> parse_accuracy_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse_error, "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
  if (!j.is_object())
    fail(Errc::parse_error, path.string() + ": expected an object of id: value");
  std::map<ModelId, double> acc;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number())
      fail(Errc::parse_error, path.string() + ": accuracy for '" + k +
                                  "' is not a number");
    acc[k] = v.get<double>();
  }
  return acc;
}

// ===== run manifest ========================================================

/// Everything that determines a pipeline run. The canonical JSON dump of
/// the manifest is hashed (FNV-1a 64) and stamped into every artifact.
struct RunManifest {
  std::string ballots_path;
  std::string reference_path;   // empty = no alignment stage
  std::string accuracies_path;  // empty = no accuracy row
  std::vector<Rule> rules = {Rule::average,       Rule::borda,
                             Rule::copeland,      Rule::dodgson,
                             Rule::irv,           Rule::kemeny_exact,
                             Rule::kemeny_heuristic, Rule::kendall_max,
                             Rule::spearman_max};
  std::vector<Protocol> protocols = {Protocol::se, Protocol::pe, Protocol::sie,
                                     Protocol::sfe};
  std::vector<Metric> metrics = {Metric::pearson, Metric::kendall};
  RuleConfig consensus;  // SIE/SFE rule + tie-break + exact limit + seed
  std::string output_dir = "out";

  json to_json() const {
    json j;
    j["ballots"] = ballots_path;
    j["reference"] = reference_path;
    j["accuracies"] = accuracies_path;
    json jr = json::array();
    for (Rule r : rules) jr.push_back(rule_name(r));
    j["rules"] = std::move(jr);
    json jp = json::array();
    for (Protocol p : protocols) jp.push_back(protocol_name(p));
    j["protocols"] = std::move(jp);
    json jm = json::array();
    for (Metric m : metrics) jm.push_back(metric_name(m));
    j["metrics"] = std::move(jm);
    j["consensus_rule"] = rule_name(consensus.rule);
    j["tie_break"] = tie_break_name(consensus.tie_break);
    j["seed"] = consensus.seed;
    j["exact_m_limit"] = consensus.exact_m_limit;
    j["output_dir"] = output_dir;
    return j;
  }

  static RunManifest from_json(const json& j, const std::string& where) {
    RunManifest m;
    if (!j.is_object()) fail(Errc::parse_error, where + ": manifest must be an object");
    if (!j.contains("ballots") || !j["ballots"].is_string())
      fail(Errc::parse_error, where + ": manifest needs a 'ballots' path");
    m.ballots_path = j["ballots"].get<std::string>();
    if (j.contains("reference") && j["reference"].is_string())
      m.reference_path = j["reference"].get<std::string>();
    if (j.contains("accuracies") && j["accuracies"].is_string())
      m.accuracies_path = j["accuracies"].get<std::string>();
    if (j.contains("rules")) {
      m.rules.clear();
      for (const auto& r : j["rules"]) m.rules.push_back(rule_from_name(r.get<std::string>()));
    }
    if (j.contains("protocols")) {
      m.protocols.clear();
      for (const auto& p : j["protocols"])
        m.protocols.push_back(protocol_from_name(p.get<std::string>()));
    }
    if (j.contains("metrics")) {
      m.metrics.clear();
      for (const auto& mm : j["metrics"])
        m.metrics.push_back(metric_from_name(mm.get<std::string>()));
    }
    if (j.contains("consensus_rule"))
      m.consensus.rule = rule_from_name(j["consensus_rule"].get<std::string>());
    if (j.contains("tie_break"))
      m.consensus.tie_break = tie_break_from_name(j["tie_break"].get<std::string>());
    if (j.contains("seed")) m.consensus.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("exact_m_limit"))
      m.consensus.exact_m_limit = j["exact_m_limit"].get<int>();
    if (j.contains("output_dir"))
      m.output_dir = j["output_dir"].get<std::string>();
    return m;
  }

  std::string canonical_dump() const { return to_json().dump(); }
  std::uint64_t hash() const { return fnv1a64(canonical_dump()); }
};

inline RunManifest parse_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse_error, "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
  return RunManifest::from_json(j, path.filename().string());
}

// ===== table emission ======================================================

/// Every table goes out twice: tab-separated for machines and aligned text
/// for humans. Preamble lines (manifest hash etc.) are '#'-prefixed.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void write_tsv(std::ostream& out, const Table& t,
                      const std::vector<std::string>& preamble) {
  for (const auto& line : preamble) out << "# " << line << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out << (c ? "\t" : "") << t.columns[c];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "\t" : "") << row[c];
    out << "\n";
  }
}

inline void write_pretty(std::ostream& out, const Table& t,
                         const std::vector<std::string>& preamble) {
  for (const auto& line : preamble) out << "# " << line << "\n";
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    width[c] = t.columns[c].size();
  for (const auto& row : t.rows)
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string& cell = c < row.size() ? row[c] : "";
      out << (c ? "  " : "") << cell
          << std::string(width[c] - cell.size(), ' ');
    }
    out << "\n";
  };
  emit_row(t.columns);
  std::size_t total = 0;
  for (std::size_t c = 0; c < width.size(); ++c)
    total += width[c] + (c ? 2 : 0);
  out << std::string(total, '-') << "\n";
  for (const auto& row : t.rows) emit_row(row);
}

inline void write_table_pair(const std::filesystem::path& dir,
                             const std::string& stem, const Table& t,
                             const std::vector<std::string>& preamble) {
  {
    std::ofstream out(dir / (stem + ".tsv"));
    if (!out) fail(Errc::parse_error, "cannot write '" + stem + ".tsv'");
    write_tsv(out, t, preamble);
  }
  {
    std::ofstream out(dir / (stem + ".txt"));
    if (!out) fail(Errc::parse_error, "cannot write '" + stem + ".txt'");
    write_pretty(out, t, preamble);
  }
}

}  // namespace peerrank
