#include <catch2/catch_amalgamated.hpp>

#include "featnorm/io.hpp"
#include "featnorm/model.hpp"
#include "featnorm/rng.hpp"
#include "featnorm/validate.hpp"

using namespace featnorm;

namespace {

FeatureNorm small_norm() {
  return FeatureNorm(
      {
          {"c0001", "it is a fruit", 3},
          {"c0001", "it is red", 2},
          {"c0002", "it is yellow", 1},
      },
      3, Provenance::generated);
}

}  // namespace

TEST_CASE("validate_norm accepts an invariant-satisfying norm") {
  REQUIRE(validate_norm(small_norm()).empty());
}

TEST_CASE("validate_norm flags a frequency above source_count") {
  FeatureNorm norm({{"c0001", "it is red", 31}}, 30, Provenance::generated);
  auto issues = validate_norm(norm);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].concept_id == "c0001");
  CHECK(issues[0].rule.find("frequency") != std::string::npos);
}

TEST_CASE("validate_norm flags a duplicate (concept, feature) pair") {
  FeatureNorm norm({{"c0001", "it is red", 2}, {"c0001", "it is red", 1}}, 3,
                   Provenance::generated);
  auto issues = validate_norm(norm);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].rule == "duplicate (concept, feature) pair");
  CHECK(issues[0].concept_id == "c0001");
  CHECK(issues[0].feature == "it is red");
}

TEST_CASE("validate_norm applies canonical surface rules to generated norms only") {
  std::vector<NormEntry> entries = {{"c0001", "is_used_for_sitting", 5}};
  FeatureNorm human(entries, 30, Provenance::human);
  CHECK(validate_norm(human).empty());

  FeatureNorm generated(entries, 30, Provenance::generated);
  auto issues = validate_norm(generated);
  REQUIRE_FALSE(issues.empty());
  bool pronoun_rule = false;
  for (const auto& i : issues) pronoun_rule |= i.rule.find("pronoun") != std::string::npos;
  CHECK(pronoun_rule);
}

TEST_CASE("norm serialization round-trips") {
  const FeatureNorm norm = small_norm();
  auto meta = parse_key_values(serialize_norm_meta(norm));
  FeatureNorm back = parse_norm_tsv(serialize_norm(norm), meta);
  CHECK(back == norm);
}

TEST_CASE("round-trip preserves concepts emptied of entries") {
  FeatureNorm norm({{"c0001", "it is red", 2}}, 3, Provenance::generated,
                   {"c0001", "c0002", "c0003"});
  auto meta = parse_key_values(serialize_norm_meta(norm));
  FeatureNorm back = parse_norm_tsv(serialize_norm(norm), meta);
  CHECK(back == norm);
  CHECK(back.empty_concepts() == std::vector<std::string>{"c0002", "c0003"});
}

TEST_CASE("construction is independent of entry order") {
  Rng rng(99);
  std::vector<NormEntry> entries;
  for (int c = 0; c < 10; ++c) {
    for (int f = 0; f < 5; ++f) {
      entries.push_back({"c" + std::to_string(c), "it is f" + std::to_string(f), 1 + (c + f) % 3});
    }
  }
  FeatureNorm reference(entries, 3, Provenance::generated);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = entries;
    rng.shuffle(shuffled);
    CHECK(FeatureNorm(shuffled, 3, Provenance::generated) == reference);
  }
}

TEST_CASE("concept_range finds a concept's entries") {
  const FeatureNorm norm = small_norm();
  auto [lo, hi] = norm.concept_range("c0001");
  CHECK(hi - lo == 2);
  auto [lo2, hi2] = norm.concept_range("c0002");
  CHECK(hi2 - lo2 == 1);
  auto [lo3, hi3] = norm.concept_range("missing");
  CHECK(lo3 == hi3);
}

TEST_CASE("category scheme derives from concept categories") {
  std::vector<Concept> concepts = {
      {"c1", "apple", "", {"fruit"}},
      {"c2", "banana", "", {"fruit"}},
      {"c3", "car", "", {"vehicle"}},
      {"c4", "tree", "", {}},
  };
  auto scheme = category_scheme_from_concepts(concepts);
  REQUIRE(scheme.size() == 2);
  CHECK(scheme["fruit"] == std::set<std::string>{"c1", "c2"});
  CHECK(scheme["vehicle"] == std::set<std::string>{"c3"});
}
