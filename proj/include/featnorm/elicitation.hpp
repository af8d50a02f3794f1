#ifndef FEATNORM_ELICITATION_HPP
#define FEATNORM_ELICITATION_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "featnorm/model.hpp"
#include "featnorm/normalize.hpp"
#include "featnorm/rng.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrimingExample {
  Concept subject;
  std::vector<std::string> features;  // ground-truth phrases, presentation order
};

struct PromptTemplate {
  std::string question_format = "Q: What are the properties of a {}?";
  std::string answer_prefix = "A:";
  int examples_per_prompt = 3;

  void validate() const {
    std::size_t first = question_format.find("{}");
    if (first == std::string::npos || question_format.find("{}", first + 1) != std::string::npos)
      throw ArgError("question format must contain exactly one {} concept slot");
  }
};

struct RunSpec {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> example_ids;  // priming example concept ids, drawn order
};

struct CompletionParams {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 0;
};

struct RawResponse {
  std::string concept_id;
  int run_id = 0;
  std::string prompt_hash;
  std::string completion;
  CompletionParams params;
};

inline std::string prompt_hash(const std::string& prompt) { return fnv1a64_hex(prompt); }

namespace detail {

inline std::string render_question(const PromptTemplate& tpl, const Concept& c) {
  std::string q = tpl.question_format;
  q.replace(q.find("{}"), 2, c.display());
  return q;
}

// "It is furniture, it is made of wood."
inline std::string render_answer(const std::vector<std::string>& features) {
  std::string joined = join(features, ", ");
  if (!joined.empty() && joined[0] >= 'a' && joined[0] <= 'z')
    joined[0] = static_cast<char>(joined[0] - 'a' + 'A');
  return joined + ".";
}

}  // namespace detail

// The static priming prefix shared by every prompt of a run.
inline std::string build_priming_prefix(const std::vector<PrimingExample>& examples,
                                        const PromptTemplate& tpl) {
  std::string out;
  for (const auto& ex : examples) {
    if (ex.features.empty()) throw ArgError("priming example with no features: " + ex.subject.id);
    out += detail::render_question(tpl, ex.subject);
    out += '\n';
    out += tpl.answer_prefix + ' ' + detail::render_answer(ex.features);
    out += '\n';
  }
  return out;
}

// Priming Q/A pairs followed by the open question for `concept`; the answer
// slot is left for the model.
inline std::string build_prompt(const Concept& subject,
                                const std::vector<PrimingExample>& examples,
                                const PromptTemplate& tpl) {
  tpl.validate();
  if (static_cast<int>(examples.size()) != tpl.examples_per_prompt)
    throw ArgError("expected " + std::to_string(tpl.examples_per_prompt) +
                   " priming examples, got " + std::to_string(examples.size()));
  return build_priming_prefix(examples, tpl) + detail::render_question(tpl, subject) + '\n' +
         tpl.answer_prefix;
}

// Text-completion backend contract. Implementations must be safe to call
// from multiple worker threads.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const std::string& prompt, const CompletionParams& params) = 0;
};

// Deterministic stand-in: completes every prompt with the same text.
class StubBackend : public CompletionBackend {
 public:
  explicit StubBackend(std::string completion = "It is a thing, it is made of matter.")
      : completion_(std::move(completion)) {}
  std::string complete(const std::string&, const CompletionParams&) override {
    return completion_;
  }

 private:
  std::string completion_;
};

// Replays recorded completions keyed by prompt hash; byte-identical output
// for identical prompts, error on unknown prompts.
class ReplayBackend : public CompletionBackend {
 public:
  void add(const std::string& hash, const std::string& completion) {
    store_[hash] = completion;
  }
  std::string complete(const std::string& prompt, const CompletionParams&) override {
    auto it = store_.find(prompt_hash(prompt));
    if (it == store_.end())
      throw BackendError("replay store has no completion for prompt hash " +
                         prompt_hash(prompt));
    return it->second;
  }
  std::size_t size() const { return store_.size(); }

 private:
  std::map<std::string, std::string> store_;
};

// Memoizing wrapper: equal prompt hashes never reach the inner backend twice.
class CachingBackend : public CompletionBackend {
 public:
  explicit CachingBackend(CompletionBackend& inner) : inner_(inner) {}
  std::string complete(const std::string& prompt, const CompletionParams& params) override {
    const std::string hash = prompt_hash(prompt);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(hash);
      if (it != cache_.end()) return it->second;
    }
    std::string completion = inner_.complete(prompt, params);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(hash, std::move(completion)).first->second;
  }

 private:
  CompletionBackend& inner_;
  std::mutex mu_;
  std::map<std::string, std::string> cache_;
};

struct RunResult {
  std::vector<RawResponse> responses;
  std::optional<std::string> failed_concept;  // set when the run aborted
};

struct ElicitOptions {
  CompletionParams params;
  int parallel_requests = 1;
};

// One elicitation run: the identical priming prefix plus each concept's open
// question; answers are collected independently, never accumulated into
// later prompts. Responses are ordered by concept index regardless of
// completion order.
inline RunResult elicit_run(const std::vector<Concept>& concepts, const RunSpec& run,
                            const std::vector<PrimingExample>& pool_by_id,
                            const PromptTemplate& tpl, CompletionBackend& backend,
                            const ElicitOptions& opts = {}) {
  std::vector<PrimingExample> examples;
  for (const auto& id : run.example_ids) {
    auto it = std::find_if(pool_by_id.begin(), pool_by_id.end(),
                           [&](const PrimingExample& e) { return e.subject.id == id; });
    if (it == pool_by_id.end()) throw ArgError("unknown priming example id: " + id);
    examples.push_back(*it);
  }
  {
    std::set<std::string> distinct(run.example_ids.begin(), run.example_ids.end());
    if (distinct.size() != run.example_ids.size())
      throw ArgError("priming examples must be distinct within a run");
  }
  const std::string prefix = build_priming_prefix(examples, tpl);

  RunResult result;
  result.responses.resize(concepts.size());
  std::vector<char> done(concepts.size(), 0);

  auto work = [&](std::size_t i) {
    const std::string prompt =
        prefix + detail::render_question(tpl, concepts[i]) + '\n' + tpl.answer_prefix;
    RawResponse r;
    r.concept_id = concepts[i].id;
    r.run_id = run.run_id;
    r.prompt_hash = prompt_hash(prompt);
    r.params = opts.params;
    r.completion = backend.complete(prompt, opts.params);
    result.responses[i] = std::move(r);
    done[i] = 1;
  };

  const int workers = std::max(1, opts.parallel_requests);
  if (workers == 1) {
    for (std::size_t i = 0; i < concepts.size(); ++i) {
      try {
        work(i);
      } catch (const BackendError&) {
        result.failed_concept = concepts[i].id;
        break;
      }
    }
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::optional<std::size_t> failed_index;
    auto loop = [&] {
      while (true) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (failed_index || next >= concepts.size()) return;
          i = next++;
        }
        try {
          work(i);
        } catch (const BackendError&) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failed_index || i < *failed_index) failed_index = i;
        }
      }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(loop);
    for (auto& t : threads) t.join();
    if (failed_index) result.failed_concept = concepts[*failed_index].id;
  }

  if (result.failed_concept) {
    // keep the completed prefix of responses (partial results)
    std::vector<RawResponse> partial;
    for (std::size_t i = 0; i < concepts.size(); ++i) {
      if (done[i]) partial.push_back(std::move(result.responses[i]));
    }
    result.responses = std::move(partial);
  }
  return result;
}

// Draws each run's priming examples without replacement from the pool with a
// seeded deterministic sampler; repeated sets are re-drawn (then resolved by
// enumeration) so runs differ whenever the pool permits.
inline std::vector<RunSpec> plan_runs(int n_runs, const std::vector<PrimingExample>& pool,
                                      int examples_per_prompt, std::uint64_t seed) {
  if (n_runs < 1) throw ArgError("n_runs must be >= 1");
  if (static_cast<int>(pool.size()) < examples_per_prompt)
    throw ArgError("priming pool smaller than examples_per_prompt");

  std::vector<std::string> pool_ids;
  for (const auto& e : pool) pool_ids.push_back(e.subject.id);

  Rng root(seed);
  std::set<std::vector<std::string>> used;
  std::vector<RunSpec> runs;
  for (int r = 0; r < n_runs; ++r) {
    Rng run_rng = root.stream("priming").stream(static_cast<std::uint64_t>(r));
    std::vector<std::string> chosen;
    for (int attempt = 0; attempt < 64; ++attempt) {
      Rng draw = run_rng.stream(static_cast<std::uint64_t>(attempt));
      chosen.clear();
      for (auto i : draw.sample_indices(pool_ids.size(), examples_per_prompt))
        chosen.push_back(pool_ids[i]);
      std::vector<std::string> key = chosen;
      std::sort(key.begin(), key.end());
      if (!used.count(key)) break;
      chosen.clear();
    }
    if (chosen.empty()) {
      // enumerate combinations in index order and take the first unused one;
      // if all are used the pool is exhausted and a repeat is unavoidable
      std::vector<std::size_t> idx(examples_per_prompt);
      for (int i = 0; i < examples_per_prompt; ++i) idx[i] = i;
      while (true) {
        std::vector<std::string> cand, key;
        for (auto i : idx) cand.push_back(pool_ids[i]);
        key = cand;
        std::sort(key.begin(), key.end());
        if (!used.count(key)) {
          chosen = cand;
          break;
        }
        int pos = examples_per_prompt - 1;
        while (pos >= 0 && idx[pos] == pool_ids.size() - examples_per_prompt + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < examples_per_prompt; ++i) idx[i] = idx[i - 1] + 1;
      }
      if (chosen.empty()) {
        Rng draw = run_rng.stream(std::uint64_t{0});
        for (auto i : draw.sample_indices(pool_ids.size(), examples_per_prompt))
          chosen.push_back(pool_ids[i]);
      }
    }
    std::vector<std::string> key = chosen;
    std::sort(key.begin(), key.end());
    used.insert(key);
    RunSpec spec;
    spec.run_id = r;
    spec.seed = run_rng.next_u64();
    spec.example_ids = std::move(chosen);
    runs.push_back(std::move(spec));
  }
  return runs;
}

using RunSink = std::function<void(const RunSpec&, const std::vector<RawResponse>&)>;

// n_runs passes over the concept list, each with freshly sampled priming
// examples. The sink receives every finished (or aborted, partial) run so
// results persist before any error propagates.
inline std::vector<RawResponse> elicit_norm(const std::vector<Concept>& concepts, int n_runs,
                                            const std::vector<PrimingExample>& pool,
                                            const PromptTemplate& tpl,
                                            CompletionBackend& backend, std::uint64_t seed,
                                            const ElicitOptions& opts = {},
                                            const RunSink& sink = {}) {
  auto runs = plan_runs(n_runs, pool, tpl.examples_per_prompt, seed);
  std::vector<RawResponse> corpus;
  for (const auto& run : runs) {
    RunResult res = elicit_run(concepts, run, pool, tpl, backend, opts);
    if (sink) sink(run, res.responses);
    if (res.failed_concept)
      throw BackendError("run " + std::to_string(run.run_id) + " aborted at concept " +
                         *res.failed_concept + " after retries; partial results persisted");
    corpus.insert(corpus.end(), res.responses.begin(), res.responses.end());
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Raw corpus persistence: JSON Lines, one response per line, one file per
// run named run_{id}.jsonl.

inline std::string serialize_responses(const std::vector<RawResponse>& responses) {
  std::string out;
  for (const auto& r : responses) {
    nlohmann::ordered_json j;
    j["concept_id"] = r.concept_id;
    j["run_id"] = r.run_id;
    j["prompt_hash"] = r.prompt_hash;
    j["completion"] = r.completion;
    j["model"] = r.params.model;
    j["params"] = {{"temperature", r.params.temperature}, {"max_tokens", r.params.max_tokens}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<RawResponse> parse_responses(const std::string& content) {
  std::vector<RawResponse> out;
  long line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RawResponse r;
      r.concept_id = j.at("concept_id").get<std::string>();
      r.run_id = j.at("run_id").get<int>();
      r.prompt_hash = j.at("prompt_hash").get<std::string>();
      r.completion = j.at("completion").get<std::string>();
      r.params.model = j.value("model", "");
      if (j.contains("params")) {
        r.params.temperature = j["params"].value("temperature", 0.0);
        r.params.max_tokens = j["params"].value("max_tokens", 0);
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad corpus line: ") + e.what(), line_no);
    }
  }
  return out;
}

inline std::vector<CorpusItem> to_corpus_items(const std::vector<RawResponse>& responses) {
  std::vector<CorpusItem> items;
  items.reserve(responses.size());
  for (const auto& r : responses) items.push_back({r.concept_id, r.run_id, r.completion});
  return items;
}

// Priming pool from a human norm: one example per concept, features ordered
// by production frequency (ties lexicographic), truncated to
// features_per_example.
inline std::vector<PrimingExample> priming_pool_from_norm(
    const FeatureNorm& norm, const std::vector<Concept>& concepts,
    std::size_t features_per_example) {
  std::map<std::string, const Concept*> by_id;
  for (const auto& c : concepts) by_id[c.id] = &c;
  std::vector<PrimingExample> pool;
  for (const auto& id : norm.concept_ids()) {
    auto [lo, hi] = norm.concept_range(id);
    if (lo == hi) continue;
    std::vector<const NormEntry*> entries;
    for (std::size_t i = lo; i < hi; ++i) entries.push_back(&norm.entries()[i]);
    std::sort(entries.begin(), entries.end(), [](const NormEntry* a, const NormEntry* b) {
      if (a->frequency != b->frequency) return a->frequency > b->frequency;
      return a->feature < b->feature;
    });
    PrimingExample ex;
    auto it = by_id.find(id);
    if (it != by_id.end()) {
      ex.subject = *it->second;
    } else {
      ex.subject.id = id;
      ex.subject.name = id;
    }
    for (std::size_t i = 0; i < entries.size() && i < features_per_example; ++i)
      ex.features.push_back(entries[i]->feature);
    pool.push_back(std::move(ex));
  }
  return pool;
}

}  // namespace featnorm

#endif
