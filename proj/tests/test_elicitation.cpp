#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "featnorm/elicitation.hpp"

using namespace featnorm;

namespace {

PrimingExample example(const std::string& id, const std::string& name,
                       std::vector<std::string> features, const std::string& disambiguator = "") {
  PrimingExample ex;
  ex.subject = {id, name, disambiguator, {}};
  ex.features = std::move(features);
  return ex;
}

std::vector<PrimingExample> pool3() {
  return {
      example("chair", "chair", {"it is furniture", "it is made of wood"}),
      example("cow", "cow", {"it is an animal", "it gives milk"}),
      example("knife", "knife", {"it is a tool", "it is sharp"}),
  };
}

// Counts how many calls actually reach it.
class CountingBackend : public CompletionBackend {
 public:
  std::string complete(const std::string& prompt, const CompletionParams&) override {
    ++calls;
    return "echo:" + prompt_hash(prompt);
  }
  int calls = 0;
};

class FailingBackend : public CompletionBackend {
 public:
  explicit FailingBackend(int fail_after) : remaining_(fail_after) {}
  std::string complete(const std::string&, const CompletionParams&) override {
    if (remaining_-- <= 0) throw BackendError("boom");
    return "It is a thing.";
  }

 private:
  int remaining_;
};

}  // namespace

TEST_CASE("build_prompt ends with the open question for the concept") {
  Concept chair{"chair", "chair", "", {}};
  auto prompt = build_prompt(chair, pool3(), PromptTemplate{});
  const std::string tail = "Q: What are the properties of a chair?\nA:";
  REQUIRE(prompt.size() >= tail.size());
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
}

TEST_CASE("build_prompt renders example answers as an It-is list") {
  Concept c{"x", "table", "", {}};
  auto prompt = build_prompt(c, pool3(), PromptTemplate{});
  CHECK(prompt.find("A: It is furniture, it is made of wood.") != std::string::npos);
  CHECK(prompt.find("Q: What are the properties of a cow?") != std::string::npos);
}

TEST_CASE("build_prompt renders disambiguators in parentheses") {
  Concept bat{"bat1", "bat", "animal", {}};
  auto prompt = build_prompt(bat, pool3(), PromptTemplate{});
  CHECK(prompt.find("bat (animal)") != std::string::npos);

  auto pool = pool3();
  pool[0] = example("bat2", "bat", {"it is used in baseball"}, "sports item");
  auto prompt2 = build_prompt(Concept{"c", "cup", "", {}}, pool, PromptTemplate{});
  CHECK(prompt2.find("bat (sports item)") != std::string::npos);
}

TEST_CASE("build_prompt rejects a wrong example count") {
  Concept c{"x", "table", "", {}};
  auto pool = pool3();
  pool.pop_back();
  CHECK_THROWS_AS(build_prompt(c, pool, PromptTemplate{}), ArgError);
}

TEST_CASE("prompt template validates its concept slot") {
  PromptTemplate none;
  none.question_format = "What are the properties?";
  CHECK_THROWS_AS(none.validate(), ArgError);
  PromptTemplate two;
  two.question_format = "{} or {}?";
  CHECK_THROWS_AS(two.validate(), ArgError);
}

TEST_CASE("elicit_run returns one response per concept with a static prefix") {
  std::vector<Concept> concepts = {
      {"c1", "apple", "", {}}, {"c2", "banana", "", {}}, {"c3", "bat", "animal", {}}};
  StubBackend backend("It is a thing.");
  RunSpec run{0, 7, {"chair", "cow", "knife"}};
  auto res = elicit_run(concepts, run, pool3(), PromptTemplate{}, backend);
  REQUIRE_FALSE(res.failed_concept.has_value());
  REQUIRE(res.responses.size() == 3);

  const std::string prefix = build_priming_prefix(
      {pool3()[0], pool3()[1], pool3()[2]}, PromptTemplate{});
  std::set<std::string> hashes;
  for (std::size_t i = 0; i < res.responses.size(); ++i) {
    CHECK(res.responses[i].concept_id == concepts[i].id);
    CHECK(res.responses[i].run_id == 0);
    CHECK(res.responses[i].completion == "It is a thing.");
    hashes.insert(res.responses[i].prompt_hash);
    const std::string prompt = prefix +
                               detail::render_question(PromptTemplate{}, concepts[i]) + "\nA:";
    CHECK(res.responses[i].prompt_hash == prompt_hash(prompt));
  }
  CHECK(hashes.size() == 3);  // per-concept prompts differ even if completions match
}

TEST_CASE("elicit_run of an empty concept list is empty") {
  StubBackend backend;
  RunSpec run{0, 7, {"chair", "cow", "knife"}};
  auto res = elicit_run({}, run, pool3(), PromptTemplate{}, backend);
  CHECK(res.responses.empty());
}

TEST_CASE("elicit_run aborts on backend failure and keeps partial results") {
  std::vector<Concept> concepts = {
      {"c1", "apple", "", {}}, {"c2", "banana", "", {}}, {"c3", "pear", "", {}}};
  FailingBackend backend(2);
  RunSpec run{0, 7, {"chair", "cow", "knife"}};
  auto res = elicit_run(concepts, run, pool3(), PromptTemplate{}, backend);
  REQUIRE(res.failed_concept.has_value());
  CHECK(*res.failed_concept == "c3");
  CHECK(res.responses.size() == 2);
}

TEST_CASE("elicit_norm with one run equals elicit_run") {
  std::vector<Concept> concepts = {{"c1", "apple", "", {}}, {"c2", "banana", "", {}}};
  StubBackend backend;
  auto corpus = elicit_norm(concepts, 1, pool3(), PromptTemplate{}, backend, 7);
  auto runs = plan_runs(1, pool3(), 3, 7);
  auto single = elicit_run(concepts, runs[0], pool3(), PromptTemplate{}, backend);
  REQUIRE(corpus.size() == single.responses.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(corpus[i].prompt_hash == single.responses[i].prompt_hash);
    CHECK(corpus[i].completion == single.responses[i].completion);
  }
}

TEST_CASE("elicit_norm is deterministic for a fixed seed") {
  std::vector<Concept> concepts = {{"c1", "apple", "", {}}, {"c2", "banana", "", {}}};
  StubBackend backend;
  auto a = serialize_responses(elicit_norm(concepts, 3, pool3(), PromptTemplate{}, backend, 7));
  auto b = serialize_responses(elicit_norm(concepts, 3, pool3(), PromptTemplate{}, backend, 7));
  CHECK(a == b);
  auto c = serialize_responses(elicit_norm(concepts, 3, pool3(), PromptTemplate{}, backend, 8));
  CHECK(a != c);
}

TEST_CASE("elicit_norm produces n_runs x n_concepts responses") {
  std::vector<Concept> concepts = {
      {"c1", "apple", "", {}}, {"c2", "banana", "", {}}, {"c3", "pear", "", {}}};
  StubBackend backend;
  auto corpus = elicit_norm(concepts, 4, pool3(), PromptTemplate{}, backend, 7);
  CHECK(corpus.size() == 12);
}

TEST_CASE("elicit_norm rejects a pool smaller than examples_per_prompt") {
  std::vector<Concept> concepts = {{"c1", "apple", "", {}}};
  StubBackend backend;
  auto pool = pool3();
  pool.resize(2);
  CHECK_THROWS_AS(elicit_norm(concepts, 1, pool, PromptTemplate{}, backend, 7), ArgError);
}

TEST_CASE("plan_runs varies example sets whenever the pool permits") {
  auto pool = pool3();
  pool.push_back(example("drum", "drum", {"it is an instrument"}));
  // C(4,3) = 4 distinct sets; ask for 4 runs
  auto runs = plan_runs(4, pool, 3, 123);
  std::set<std::set<std::string>> sets;
  for (const auto& r : runs) {
    CHECK(r.example_ids.size() == 3);
    sets.insert(std::set<std::string>(r.example_ids.begin(), r.example_ids.end()));
  }
  CHECK(sets.size() == 4);
  // more runs than combinations: repeats unavoidable, still deterministic
  auto more = plan_runs(6, pool, 3, 123);
  auto again = plan_runs(6, pool, 3, 123);
  for (std::size_t i = 0; i < more.size(); ++i) {
    CHECK(more[i].example_ids == again[i].example_ids);
  }
}

TEST_CASE("caching wrapper never hits the backend twice for one prompt") {
  std::vector<Concept> concepts = {{"c1", "apple", "", {}}, {"c2", "banana", "", {}}};
  CountingBackend counting;
  CachingBackend cached(counting);
  RunSpec run{0, 7, {"chair", "cow", "knife"}};
  auto r1 = elicit_run(concepts, run, pool3(), PromptTemplate{}, cached);
  auto r2 = elicit_run(concepts, run, pool3(), PromptTemplate{}, cached);
  CHECK(counting.calls == 2);  // one per distinct prompt
  REQUIRE(r1.responses.size() == r2.responses.size());
  for (std::size_t i = 0; i < r1.responses.size(); ++i) {
    CHECK(r1.responses[i].completion == r2.responses[i].completion);
  }
}

TEST_CASE("replay backend returns stored completions by prompt hash") {
  ReplayBackend replay;
  replay.add(prompt_hash("p1"), "It is recorded.");
  CHECK(replay.complete("p1", {}) == "It is recorded.");
  CHECK_THROWS_AS(replay.complete("p2", {}), BackendError);
}

TEST_CASE("responses serialize to JSONL and back") {
  RawResponse r;
  r.concept_id = "c1";
  r.run_id = 2;
  r.prompt_hash = "abc";
  r.completion = "It is a fruit, it is red.";
  r.params = {"test-model", 0.7, 128};
  auto parsed = parse_responses(serialize_responses({r}));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].concept_id == "c1");
  CHECK(parsed[0].run_id == 2);
  CHECK(parsed[0].completion == r.completion);
  CHECK(parsed[0].params.model == "test-model");
  CHECK(parsed[0].params.temperature == 0.7);
  CHECK(parsed[0].params.max_tokens == 128);
}

TEST_CASE("bad corpus lines report their line number") {
  try {
    parse_responses("{\"concept_id\": \"c1\", \"run_id\": 0, \"prompt_hash\": \"x\", "
                    "\"completion\": \"ok\"}\nnot json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parallel elicitation matches sequential output") {
  std::vector<Concept> concepts;
  for (int i = 0; i < 17; ++i) concepts.push_back({"c" + std::to_string(i), "thing", "", {}});
  CountingBackend backend;
  RunSpec run{0, 7, {"chair", "cow", "knife"}};
  auto seq = elicit_run(concepts, run, pool3(), PromptTemplate{}, backend);
  ElicitOptions opts;
  opts.parallel_requests = 4;
  auto par = elicit_run(concepts, run, pool3(), PromptTemplate{}, backend, opts);
  REQUIRE(seq.responses.size() == par.responses.size());
  for (std::size_t i = 0; i < seq.responses.size(); ++i) {
    CHECK(seq.responses[i].concept_id == par.responses[i].concept_id);
    CHECK(seq.responses[i].prompt_hash == par.responses[i].prompt_hash);
  }
}

TEST_CASE("priming pool built from a norm orders features by frequency") {
  FeatureNorm norm(
      {
          {"chair", "is brown", 2},
          {"chair", "is furniture", 19},
          {"chair", "has legs", 10},
      },
      30, Provenance::human);
  auto pool = priming_pool_from_norm(norm, {}, 2);
  REQUIRE(pool.size() == 1);
  CHECK(pool[0].subject.name == "chair");
  CHECK(pool[0].features == std::vector<std::string>{"is furniture", "has legs"});
}
