#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "peerrank/errors.hpp"
#include "peerrank/hash.hpp"
#include "peerrank/profile.hpp"
#include "peerrank/ranking.hpp"
#include "peerrank/rng.hpp"

namespace peerrank {

// ===== prompt templates ====================================================

enum class PromptDomain { overall, math, chinese, instruction, code, creative };

inline const char* domain_name(PromptDomain d) {
  switch (d) {
    case PromptDomain::overall: return "overall";
    case PromptDomain::math: return "math";
    case PromptDomain::chinese: return "chinese";
    case PromptDomain::instruction: return "instruction";
    case PromptDomain::code: return "code";
    case PromptDomain::creative: return "creative";
  }
  return "?";
}

inline PromptDomain domain_from_name(const std::string& s) {
  for (PromptDomain d :
       {PromptDomain::overall, PromptDomain::math, PromptDomain::chinese,
        PromptDomain::instruction, PromptDomain::code, PromptDomain::creative})
    if (s == domain_name(d)) return d;
  fail(Errc::invalid_config, "unknown prompt domain '" + s + "'");
}

struct PromptCriterion {
  std::string name;
  std::string description;
};

/// Reviewer prompt for one evaluation domain. All domains share the same
/// skeleton and differ in the reviewer's subject line and the three
/// judging criteria.
struct PromptTemplate {
  PromptDomain domain = PromptDomain::overall;
  std::string subject;  // "...rank multiple <subject>..."
  std::vector<PromptCriterion> criteria;
};

inline PromptTemplate prompt_template(PromptDomain d) {
  PromptTemplate t;
  t.domain = d;
  switch (d) {
    case PromptDomain::overall:
      t.subject = "solutions to a given question";
      t.criteria = {
          {"Accuracy", "How correct and relevant is the information?"},
          {"Logical Consistency",
           "How coherent and well-reasoned is the explanation?"},
          {"Fluency", "How clear and natural is the language?"}};
      break;
    case PromptDomain::math:
      t.subject = "solutions to the same math problem";
      t.criteria = {
          {"Accuracy",
           "Is the mathematical reasoning correct, and does the solution "
           "produce the correct answer?"},
          {"Logical Rigor",
           "Is the problem-solving process well-structured, justified, and "
           "logically sound at each step?"},
          {"Clarity of Explanation",
           "Is the reasoning clearly explained, using appropriate notation "
           "and terminology?"}};
      break;
    case PromptDomain::chinese:
      t.subject = "answers written in Chinese";
      t.criteria = {
          {"Linguistic Accuracy",
           "Are the grammar, vocabulary, and expressions consistent with "
           "standard modern Chinese?"},
          {"Clarity of Expression",
           "Is the language smooth, natural, and easy to understand? Is the "
           "logic clearly conveyed?"},
          {"Contextual Appropriateness",
           "Does the response match the intended tone, audience, and context "
           "of the prompt?"}};
      break;
    case PromptDomain::instruction:
      t.subject = "responses to the same instruction";
      t.criteria = {
          {"Task Completion",
           "Does the response fully and accurately follow all aspects of the "
           "given instruction?"},
          {"Interpretation Accuracy",
           "Does the response show a correct understanding of the "
           "instruction's intent?"},
          {"Relevance and Focus",
           "Is the content tightly aligned with the instruction, without "
           "going off-topic or omitting key parts?"}};
      break;
    case PromptDomain::code:
      t.subject = "code implementations";
      t.criteria = {
          {"Correctness",
           "Does the code run successfully and meet all functional "
           "requirements of the prompt?"},
          {"Logical Clarity",
           "Is the code logically structured and easy to follow?"},
          {"Readability",
           "Are variable names meaningful, comments helpful, and formatting "
           "clean and maintainable?"}};
      break;
    case PromptDomain::creative:
      t.subject = "creative writing pieces";
      t.criteria = {
          {"Originality",
           "Is the content imaginative and unique? Does it offer a fresh "
           "perspective or concept?"},
          {"Structural Coherence",
           "Is the narrative or composition logically organized and "
           "well-developed from beginning to end?"},
          {"Expressive Quality",
           "Is the language vivid, engaging, and emotionally resonant?"}};
      break;
  }
  return t;
}

namespace gateway_detail {

inline std::string count_words(std::size_t n) {
  static const char* words[] = {"zero", "one", "two",   "three", "four",
                                "five", "six", "seven", "eight", "nine",
                                "ten",  "eleven", "twelve"};
  if (n < sizeof(words) / sizeof(words[0])) return words[n];
  return std::to_string(n);
}

}  // namespace gateway_detail

/// A prompt instance plus the shuffle map needed to de-anonymize the reply:
/// slot_to_response[k] is the index (into the caller's response list) shown
/// as "[Solution - k+1]".
struct RenderedPrompt {
  std::string text;
  std::vector<std::size_t> slot_to_response;
};

/// Instantiates the template with the responses in a seeded-shuffled order
/// (anonymization plus position-bias guard). Same seed, same bytes.
inline RenderedPrompt render_prompt(const PromptTemplate& tmpl,
                                    const std::string& question,
                                    const std::vector<std::string>& responses,
                                    std::size_t expected_m,
                                    std::uint64_t shuffle_seed) {
  if (responses.size() != expected_m || responses.empty())
    fail(Errc::arity_mismatch,
         std::to_string(responses.size()) + " responses against a " +
             std::to_string(expected_m) + "-slot run");
  RenderedPrompt rp;
  rp.slot_to_response = shuffled_indices(responses.size(), shuffle_seed);

  std::string& s = rp.text;
  s += "You are a reviewer assigned to rank multiple " + tmpl.subject +
       ". Your evaluation must be based solely on the following three "
       "criteria:\n";
  for (const auto& c : tmpl.criteria)
    s += "- " + c.name + ": " + c.description + "\n";
  s += "\nPlease strictly follow the format below:\n\n";
  s += "Here is the question and the options:\n\n[Question]\n\n";
  s += question;
  s += "\n\n---\n";
  for (std::size_t k = 0; k < responses.size(); ++k) {
    s += "\n[Solution - " + std::to_string(k + 1) + "]\n\n";
    s += responses[rp.slot_to_response[k]];
    s += "\n";
  }
  s += "\nOutput Format (Rank from best to worst):\n\n";
  s += "1. Solution x\n2. Solution y\n3. Solution z\n...\n\n";
  s += "You must rank all " + gateway_detail::count_words(responses.size()) +
       " solutions, without skipping or tying any of them. Do not add any "
       "comments or explanations. Only return the final ordered list by "
       "solution number.\n";
  return rp;
}

// ===== reply parsing =======================================================

/// Parses a reviewer reply: exactly m lines "<rank>. Solution <k>", ranks
/// sequential from 1, solution numbers a permutation of 1..m. Blank lines
/// are tolerated; any other interleaved prose is rejected. Returns the
/// 1-based solution numbers best-to-worst.
inline std::vector<std::size_t> parse_ranking_reply(const std::string& text,
                                                    std::size_t m) {
  std::vector<std::size_t> order;
  std::vector<bool> seen(m + 1, false);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;

    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;  // blank line
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (order.size() == m)
      fail(Errc::malformed_reply, "extra content after the ranked list: '" +
                                      line + "'");
    // "<rank>. Solution <k>"
    std::size_t i = 0;
    std::size_t rank = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9')
      rank = rank * 10 + static_cast<std::size_t>(line[i++] - '0');
    if (i == 0 || i + 1 >= line.size() || line[i] != '.' || line[i + 1] != ' ')
      fail(Errc::malformed_reply, "expected '<rank>. Solution <k>', got '" +
                                      line + "'");
    i += 2;
    const std::string kw = "Solution ";
    if (line.compare(i, kw.size(), kw) != 0)
      fail(Errc::malformed_reply, "expected '<rank>. Solution <k>', got '" +
                                      line + "'");
    i += kw.size();
    std::size_t sol = 0;
    std::size_t digits = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
      sol = sol * 10 + static_cast<std::size_t>(line[i++] - '0');
      ++digits;
    }
    if (digits == 0 || i != line.size())
      fail(Errc::malformed_reply, "trailing content in line '" + line + "'");
    if (rank != order.size() + 1)
      fail(Errc::malformed_reply, "ranks must run 1.." + std::to_string(m) +
                                      " in order, got rank " +
                                      std::to_string(rank));
    if (sol < 1 || sol > m)
      fail(Errc::malformed_reply, "solution number " + std::to_string(sol) +
                                      " out of range 1.." + std::to_string(m));
    if (seen[sol])
      fail(Errc::malformed_reply,
           "duplicate Solution " + std::to_string(sol));
    seen[sol] = true;
    order.push_back(sol);
  }
  if (order.size() < m)
    fail(Errc::incomplete_ranking, "reply ranked only " +
                                       std::to_string(order.size()) + " of " +
                                       std::to_string(m) + " solutions");
  return order;
}

// ===== transports ==========================================================

struct EndpointConfig {
  ModelId model;
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string credential_env;  // env var holding the bearer token
  double timeout_s = 60.0;
  int max_retries = 2;
  double temperature = 0.0;

  void validate() const {
    if (model.empty()) fail(Errc::invalid_config, "endpoint without a model id");
    if (max_retries < 0) fail(Errc::invalid_config, "max_retries < 0");
    if (timeout_s <= 0) fail(Errc::invalid_config, "timeout must be positive");
  }
};

struct TransportResult {
  bool ok = false;
  std::string body;       // reply text when ok
  std::string error;      // reason when not ok
  bool transient = false; // retryable transport failure
};

/// Injection point separating ballot collection from the network. The
/// default test suite only ever uses the fixture transport. `question_id`
/// identifies the cell being collected; live transports may ignore it.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult send(const EndpointConfig& endpoint,
                               const std::string& question_id,
                               const std::string& prompt) = 0;
};

/// Canned replies keyed by (question_id, evaluator); successive sends for
/// the same cell consume successive replies (so retry behavior is
/// scriptable). Missing keys are permanent transport failures.
class FixtureTransport : public Transport {
 public:
  void add_reply(const std::string& question_id, const ModelId& evaluator,
                 std::string reply) {
    replies_[question_id + "|" + evaluator].push_back(std::move(reply));
  }

  TransportResult send(const EndpointConfig& endpoint,
                       const std::string& question_id,
                       const std::string&) override {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string key = question_id + "|" + endpoint.model;
    auto it = replies_.find(key);
    if (it == replies_.end() || cursor_[key] >= it->second.size())
      return {false, "", "no fixture reply for " + key, false};
    return {true, it->second[cursor_[key]++], "", false};
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::string>> replies_;
  std::map<std::string, std::size_t> cursor_;
};

// ===== collection ==========================================================

struct CollectQuestion {
  std::string question_id;
  std::string question;
  // (author, response text); authors are the candidates being ranked.
  std::vector<std::pair<ModelId, std::string>> responses;
};

struct CollectRequest {
  PromptDomain domain = PromptDomain::overall;
  std::uint64_t seed = 0;
  std::vector<CollectQuestion> questions;
};

struct CollectFailure {
  std::string question_id;
  ModelId evaluator;
  std::string reason;
  int attempts = 0;
};

struct CollectOutcome {
  std::vector<EvaluationRecord> records;   // sorted (question, evaluator)
  std::vector<CollectFailure> failures;    // sorted (question, evaluator)
};

namespace gateway_detail {

struct Cell {
  std::size_t q = 0, e = 0;
};

}  // namespace gateway_detail

/// Collects one ballot per (question, evaluator). Each cell is retried up
/// to the endpoint's max_retries on transient transport failures and on
/// malformed or incomplete replies; a cell that never yields a valid ballot
/// is recorded as missing with its reason and the run continues. Throws
/// GatewayError only when not a single cell succeeded. The shuffle seed for
/// each cell derives from (seed, question_id, evaluator), so reruns and
/// thread counts cannot change any prompt.
inline CollectOutcome collect(const CollectRequest& request,
                              const std::vector<EndpointConfig>& endpoints,
                              Transport& transport, int threads = 1) {
  if (request.questions.empty())
    fail(Errc::empty_profile, "collect request has no questions");
  if (endpoints.empty())
    fail(Errc::invalid_config, "collect request has no endpoints");
  for (const auto& ep : endpoints) ep.validate();
  for (const auto& q : request.questions)
    if (q.responses.empty())
      fail(Errc::arity_mismatch,
           "question '" + q.question_id + "' has no responses");
  const PromptTemplate tmpl = prompt_template(request.domain);

  std::vector<gateway_detail::Cell> cells;
  for (std::size_t q = 0; q < request.questions.size(); ++q)
    for (std::size_t e = 0; e < endpoints.size(); ++e)
      cells.push_back({q, e});

  std::vector<std::optional<EvaluationRecord>> got(cells.size());
  std::vector<std::optional<CollectFailure>> bad(cells.size());
  std::vector<std::mutex> endpoint_mu(endpoints.size());
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](std::size_t ci) {
    const auto [qi, ei] = cells[ci];
    const CollectQuestion& cq = request.questions[qi];
    const EndpointConfig& ep = endpoints[ei];
    std::vector<std::string> texts;
    std::vector<ModelId> authors;
    for (const auto& [author, text] : cq.responses) {
      authors.push_back(author);
      texts.push_back(text);
    }
    const std::uint64_t cell_seed = derive_seed(
        request.seed, {fnv1a64(cq.question_id), fnv1a64(ep.model)});
    const RenderedPrompt rp = render_prompt(tmpl, cq.question, texts,
                                            texts.size(), cell_seed);
    std::string reason;
    int attempts = 0;
    for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
      ++attempts;
      TransportResult tr;
      {
        std::lock_guard<std::mutex> lock(endpoint_mu[ei]);
        tr = transport.send(ep, cq.question_id, rp.text);
      }
      if (!tr.ok) {
        reason = "transport: " + tr.error;
        if (!tr.transient) break;
        continue;
      }
      try {
        auto order = parse_ranking_reply(tr.body, texts.size());
        std::vector<ModelId> ranked;
        ranked.reserve(order.size());
        for (std::size_t sol : order)
          ranked.push_back(authors[rp.slot_to_response[sol - 1]]);
        EvaluationRecord rec;
        rec.question_id = cq.question_id;
        rec.evaluator = ep.model;
        rec.ranking = Ranking::linear(std::move(ranked));
        got[ci] = std::move(rec);
        return;
      } catch (const Error& e) {
        reason = e.what();
      }
    }
    bad[ci] = CollectFailure{cq.question_id, ep.model, reason, attempts};
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t ci = next.fetch_add(1);
          if (ci >= cells.size()) return;
          run_cell(ci);
        }
      });
    for (auto& th : pool) th.join();
  }

  CollectOutcome out;
  for (auto& r : got)
    if (r) out.records.push_back(std::move(*r));
  for (auto& f : bad)
    if (f) out.failures.push_back(std::move(*f));
  auto by_cell = [](const auto& a, const auto& b) {
    if (a.question_id != b.question_id) return a.question_id < b.question_id;
    return a.evaluator < b.evaluator;
  };
  std::sort(out.records.begin(), out.records.end(), by_cell);
  std::sort(out.failures.begin(), out.failures.end(), by_cell);
  if (out.records.empty())
    fail(Errc::gateway_error,
         "every collection cell failed; first reason: " +
             (out.failures.empty() ? std::string("unknown")
                                   : out.failures.front().reason));
  return out;
}

}  // namespace peerrank
