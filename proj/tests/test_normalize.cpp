#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "featnorm/lexicon.hpp"
#include "featnorm/normalize.hpp"
#include "featnorm/rng.hpp"
#include "featnorm/validate.hpp"

using namespace featnorm;

static const ClosedClassLexicon& cls() { return default_closed_class(); }
static const SynsetLexicon& syn() { return bundled_synsets(); }

TEST_CASE("split_response splits at commas, trims and lowercases") {
  auto parts = split_response("It is furniture, it is made of wood, it has four legs.");
  REQUIRE(parts == std::vector<std::string>{"it is furniture", "it is made of wood",
                                            "it has four legs"});
}

TEST_CASE("split_response of an empty completion is empty") {
  CHECK(split_response("").empty());
}

TEST_CASE("split_response drops empty pieces") {
  CHECK(split_response("It is red,,  ") == std::vector<std::string>{"it is red"});
}

TEST_CASE("split_response keeps question marks for the removal rule") {
  CHECK(split_response("it is loud?") == std::vector<std::string>{"it is loud?"});
}

TEST_CASE("clean_feature removes tautologies") {
  auto res = clean_feature("a rose is a rose", cls());
  CHECK(res.removed == RemovalReason::tautological);
}

TEST_CASE("clean_feature removes features not beginning with a pronoun") {
  auto res = clean_feature("green color", cls());
  CHECK(res.removed == RemovalReason::no_pronoun_start);
}

TEST_CASE("clean_feature truncates subordinate clauses") {
  auto res = clean_feature("it is a car that drives", cls());
  REQUIRE(res.kept());
  CHECK(res.text == "it is a car");
  CHECK(res.truncated);
}

TEST_CASE("clean_feature strips qualifier adverbs") {
  auto res = clean_feature("it is usually green", cls());
  REQUIRE(res.kept());
  CHECK(res.text == "it is green");
  CHECK(res.qualifier_stripped);
}

TEST_CASE("clean_feature removal reasons") {
  CHECK(clean_feature("red", cls()).removed == RemovalReason::single_word);
  CHECK(clean_feature("it has \xc2\xa9", cls()).removed == RemovalReason::non_ascii);
  CHECK(clean_feature("it is loud?", cls()).removed == RemovalReason::question_mark);
  CHECK(clean_feature("it wheels good", cls()).removed == RemovalReason::nonsensical);
  CHECK(clean_feature("it is it", cls()).removed == RemovalReason::tautological);
}

TEST_CASE("clean_feature keeps well-formed features unchanged") {
  auto res = clean_feature("it is a vehicle", cls());
  REQUIRE(res.kept());
  CHECK(res.text == "it is a vehicle");
  CHECK_FALSE(res.qualifier_stripped);
  CHECK_FALSE(res.truncated);
}

TEST_CASE("clean_feature never lengthens a string") {
  // surface monotonicity over assorted inputs
  const char* inputs[] = {
      "it is usually a very big tree", "it is a car that drives", "it is red",
      "it has really quite new wheels", "they are often found when wet",
  };
  for (const char* in : inputs) {
    auto res = clean_feature(in, cls());
    if (res.kept()) CHECK(res.text.size() <= std::string(in).size());
  }
}

TEST_CASE("decompose splits adjective-noun phrases") {
  auto parts = decompose_feature("it is a big tree", cls());
  REQUIRE(parts == std::vector<std::string>{"it is a tree", "it is big"});
}

TEST_CASE("decompose splits coordinated adjectives") {
  auto parts = decompose_feature("it is blue and green", cls());
  REQUIRE(parts == std::vector<std::string>{"it is blue", "it is green"});
}

TEST_CASE("decompose passes unmatched features through") {
  CHECK(decompose_feature("it is a tree", cls()) == std::vector<std::string>{"it is a tree"});
  CHECK(decompose_feature("it is made of wood", cls()) ==
        std::vector<std::string>{"it is made of wood"});
}

TEST_CASE("decompose recurses to a fixpoint") {
  auto parts = decompose_feature("it is a big tree and a small flower", cls());
  REQUIRE(parts == std::vector<std::string>{"it is a tree", "it is big", "it is a flower",
                                            "it is small"});
  auto chain = decompose_feature("it is blue and green and red", cls());
  REQUIRE(chain == std::vector<std::string>{"it is blue", "it is green", "it is red"});
}

TEST_CASE("decompose repairs a/an agreement") {
  auto parts = decompose_feature("it is an old instrument", cls());
  REQUIRE(parts == std::vector<std::string>{"it is an instrument", "it is old"});
  auto parts2 = decompose_feature("it is an old tree", cls());
  REQUIRE(parts2 == std::vector<std::string>{"it is a tree", "it is old"});
}

TEST_CASE("decompose splits coordinated nouns with determiners") {
  auto parts = decompose_feature("it has a tail and whiskers", cls());
  REQUIRE(parts == std::vector<std::string>{"it has a tail", "it has whiskers"});
  auto parts2 = decompose_feature("it is made of wood and metal", cls());
  REQUIRE(parts2 == std::vector<std::string>{"it is made of wood", "it is made of metal"});
}

TEST_CASE("unknown words block decomposition") {
  CHECK(decompose_feature("it is a big mirlup", cls()) ==
        std::vector<std::string>{"it is a big mirlup"});
  CHECK(decompose_feature("it is blue and zorple", cls()) ==
        std::vector<std::string>{"it is blue and zorple"});
}

TEST_CASE("collapse_synonyms rewrites the rarer feature to the frequent one") {
  std::map<std::string, long> counts = {{"it is a car", 20}, {"it is an automobile", 3}};
  auto [collapsed, replaced] = collapse_synonyms(counts, cls(), syn());
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed.at("it is a car") == 23);
  CHECK(replaced == 3);
}

TEST_CASE("collapse_synonyms leaves unlisted content words alone") {
  std::map<std::string, long> counts = {{"it is a fruit", 4}, {"it is a pear", 2}};
  auto [collapsed, replaced] = collapse_synonyms(counts, cls(), syn());
  CHECK(collapsed == counts);
  CHECK(replaced == 0);
}

TEST_CASE("collapse_synonyms ignores non-top shared synsets") {
  std::map<std::string, long> counts = {{"it is a bank", 4}, {"it is a slope", 2}};
  auto [collapsed, replaced] = collapse_synonyms(counts, cls(), syn());
  CHECK(collapsed == counts);
  CHECK(replaced == 0);
}

TEST_CASE("collapse_synonyms requires the rest of the feature to match") {
  std::map<std::string, long> counts = {{"it is a car", 5}, {"it has an automobile", 2}};
  auto [collapsed, replaced] = collapse_synonyms(counts, cls(), syn());
  CHECK(collapsed == counts);
  CHECK(replaced == 0);
}

TEST_CASE("collapse_synonyms breaks frequency ties lexicographically") {
  std::map<std::string, long> counts = {{"it is a car", 2}, {"it is an automobile", 2}};
  auto [collapsed, replaced] = collapse_synonyms(counts, cls(), syn());
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed.at("it is a car") == 4);
  CHECK(replaced == 2);
}

TEST_CASE("normalize_corpus dedups within a run") {
  std::vector<CorpusItem> corpus = {{"c0001", 0, "it is red, it is red"}};
  auto [norm, report] = normalize_corpus(corpus, cls(), syn());
  REQUIRE(norm.entries().size() == 1);
  CHECK(norm.entries()[0].frequency == 1);
  CHECK(norm.source_count() == 1);
  CHECK(report.split_count == 2);
}

TEST_CASE("normalize_corpus counts production frequency across runs") {
  std::vector<CorpusItem> corpus = {
      {"c0001", 0, "It is red."},
      {"c0001", 1, "It is red, it is new."},
      {"c0001", 2, "It is new."},
  };
  auto [norm, report] = normalize_corpus(corpus, cls(), syn());
  (void)report;
  REQUIRE(norm.entries().size() == 2);
  CHECK(norm.source_count() == 3);
  CHECK(norm.entries()[0].feature == "it is new");
  CHECK(norm.entries()[0].frequency == 2);
  CHECK(norm.entries()[1].feature == "it is red");
  CHECK(norm.entries()[1].frequency == 2);
}

TEST_CASE("normalize_corpus output is independent of item order") {
  std::vector<CorpusItem> corpus;
  const char* completions[] = {
      "It is a fruit, it is red and green, it is usually sweet.",
      "It is an automobile, it is fast, it is a car that drives.",
      "It is a big tree, green color, a rose is a rose.",
      "It has fur and whiskers, it is an animal.",
  };
  for (int run = 0; run < 3; ++run) {
    for (int c = 0; c < 4; ++c) {
      corpus.push_back({"c" + std::to_string(c), run, completions[(c + run) % 4]});
    }
  }
  auto [reference, ref_report] = normalize_corpus(corpus, cls(), syn());
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto shuffled = corpus;
    rng.shuffle(shuffled);
    auto [norm, report] = normalize_corpus(shuffled, cls(), syn());
    CHECK(norm == reference);
    CHECK(report.split_count == ref_report.split_count);
    CHECK(report.synonym_replaced_count == ref_report.synonym_replaced_count);
  }
}

TEST_CASE("normalize_corpus output satisfies every canonical invariant") {
  std::vector<CorpusItem> corpus = {
      {"c0001", 0, "It is a big tree and a small flower, it is usually green, green color"},
      {"c0002", 0, "It is an automobile, a car is a car, it is loud?"},
      {"c0002", 1, "It is a car, it has \xc2\xa9, ok"},
  };
  auto [norm, report] = normalize_corpus(corpus, cls(), syn());
  (void)report;
  CHECK(validate_norm(norm).empty());
  for (const auto& e : norm.entries()) {
    auto tokens = split_whitespace(e.feature);
    CHECK(tokens.size() >= 2);
    CHECK(cls().pronouns.count(tokens[0]) == 1);
    CHECK(is_seven_bit(e.feature));
    CHECK(e.feature.find(',') == std::string::npos);
  }
}

TEST_CASE("normalize_corpus is idempotent on a canonical corpus") {
  std::vector<CorpusItem> corpus = {
      {"c0001", 0, "It is a fruit, it is red, it is edible."},
      {"c0001", 1, "It is a fruit."},
      {"c0002", 0, "It is an animal, it has fur."},
      {"c0002", 1, "It has fur."},
  };
  auto [norm, report1] = normalize_corpus(corpus, cls(), syn());
  (void)report1;

  // re-serialize the canonical norm as completions: feature f with
  // frequency q appears in runs 0..q-1
  std::map<int, std::map<std::string, std::vector<std::string>>> by_run;
  for (const auto& e : norm.entries()) {
    for (int r = 0; r < e.frequency; ++r) by_run[r][e.concept_id].push_back(e.feature);
  }
  std::vector<CorpusItem> round;
  for (const auto& [run, by_concept] : by_run) {
    for (const auto& [concept_id, features] : by_concept) {
      round.push_back({concept_id, run, join(features, ", ")});
    }
  }
  auto [norm2, report2] = normalize_corpus(round, cls(), syn());
  (void)report2;
  CHECK(norm2.entries() == norm.entries());
  CHECK(norm2.source_count() == norm.source_count());
}

TEST_CASE("report percentages follow count/denominator") {
  std::vector<CorpusItem> corpus = {
      {"c0001", 0, "It is usually red, green color, it is a big tree"},
  };
  auto [norm, report] = normalize_corpus(corpus, cls(), syn());
  (void)norm;
  CHECK(report.split_count == 3);
  CHECK(report.raw_features == 3);
  CHECK(report.removed_no_pronoun_start == 1);
  CHECK(report.qualifier_stripped_count == 1);
  CHECK(report.cleaned_features == 2);
  CHECK(report.decomposed_count == 1);
  CHECK(report.canonical_instances == 3);
}
