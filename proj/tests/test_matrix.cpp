#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "featnorm/matrix.hpp"
#include "featnorm/rng.hpp"

using namespace featnorm;

namespace {

FeatureNorm random_norm(Rng& rng) {
  const int n_concepts = 2 + int(rng.below(15));
  const int n_features = 2 + int(rng.below(25));
  const int source_count = 10;
  std::vector<NormEntry> entries;
  for (int c = 0; c < n_concepts; ++c) {
    const int k = 1 + int(rng.below(6));
    std::set<int> used;
    for (int i = 0; i < k; ++i) {
      int f = int(rng.below(n_features));
      if (!used.insert(f).second) continue;
      entries.push_back({"c" + std::to_string(c), "it is f" + std::to_string(f),
                         1 + int(rng.below(source_count))});
    }
  }
  return FeatureNorm(entries, source_count, Provenance::generated);
}

}  // namespace

TEST_CASE("filter_infrequent drops entries below the cutoff") {
  FeatureNorm norm({{"c1", "it is f", 3}, {"c1", "it is g", 5}}, 6, Provenance::generated);
  auto filtered = filter_infrequent(norm, {4});
  REQUIRE(filtered.entries().size() == 1);
  CHECK(filtered.entries()[0].feature == "it is g");
  CHECK(filtered.source_count() == 6);
}

TEST_CASE("filter at k=1 is the identity") {
  Rng rng(11);
  auto norm = random_norm(rng);
  CHECK(filter_infrequent(norm, {1}) == norm);
}

TEST_CASE("filtering keeps emptied concepts in the concept list") {
  FeatureNorm norm({{"c1", "it is f", 1}, {"c2", "it is g", 5}}, 6, Provenance::generated);
  auto filtered = filter_infrequent(norm, {4});
  CHECK(filtered.concept_ids() == std::vector<std::string>{"c1", "c2"});
  CHECK(filtered.empty_concepts() == std::vector<std::string>{"c1"});
}

TEST_CASE("filter composition equals filtering at the max cutoff") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto norm = random_norm(rng);
    const int k1 = 1 + int(rng.below(8));
    const int k2 = 1 + int(rng.below(8));
    auto two_step = filter_infrequent(filter_infrequent(norm, {k1}), {k2});
    auto one_step = filter_infrequent(norm, {std::max(k1, k2)});
    CHECK(two_step == one_step);
  }
}

TEST_CASE("unique_feature_curve starts at the unfiltered unique count and never increases") {
  Rng rng(13);
  auto norm = random_norm(rng);
  auto curve = unique_feature_curve(norm, 12);
  CHECK(curve.front().first == 1);
  CHECK(curve.front().second == descriptive_stats(norm).n_unique_features);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second);
}

TEST_CASE("unique_feature_curve equals re-filtering at each k") {
  FeatureNorm norm(
      {
          {"c1", "it is a", 1},
          {"c1", "it is b", 3},
          {"c2", "it is b", 7},
          {"c2", "it is c", 4},
          {"c3", "it is d", 2},
      },
      10, Provenance::generated);
  auto curve = unique_feature_curve(norm, 8);
  for (const auto& [k, n] : curve) {
    auto filtered = filter_infrequent(norm, {k});
    std::set<std::string> unique;
    for (const auto& e : filtered.entries()) unique.insert(e.feature);
    CHECK(n == long(unique.size()));
  }
}

TEST_CASE("constant-frequency norm steps at k = c + 1") {
  FeatureNorm norm({{"c1", "it is a", 5}, {"c2", "it is b", 5}}, 10, Provenance::generated);
  auto curve = unique_feature_curve(norm, 7);
  for (const auto& [k, n] : curve) CHECK(n == (k <= 5 ? 2 : 0));
}

TEST_CASE("elbow_point matches brute-force distances on a hand curve") {
  std::vector<std::pair<int, long>> curve = {{1, 10000}, {2, 4000}, {3, 2000}, {4, 1500},
                                             {5, 1300},  {6, 1200}, {7, 1150}};
  // brute force: scale both axes to [0,1], perpendicular distance to chord
  double best_d = -1;
  int best_k = 0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    double x = (curve[i].first - 1.0) / 6.0;
    double y = (curve[i].second - 1150.0) / (10000.0 - 1150.0);
    // chord from (0,1) to (1,0): distance = |x + y - 1| / sqrt(2)
    double d = std::abs(x + y - 1.0) / std::sqrt(2.0);
    if (d > best_d) {
      best_d = d;
      best_k = curve[i].first;
    }
  }
  CHECK(elbow_point(curve) == best_k);
  CHECK(best_k == 3);  // frozen from the enumeration above
}

TEST_CASE("elbow_point of a collinear curve is the first interior k") {
  std::vector<std::pair<int, long>> curve = {{1, 100}, {2, 80}, {3, 60}, {4, 40}, {5, 20}};
  CHECK(elbow_point(curve) == 2);
}

TEST_CASE("elbow_point needs at least three points") {
  CHECK_THROWS_AS(elbow_point({{1, 10}, {2, 5}}), ArgError);
}

TEST_CASE("descriptive_stats on a single-entry norm") {
  FeatureNorm norm({{"c1", "it is a", 1}}, 1, Provenance::generated);
  auto s = descriptive_stats(norm);
  CHECK(s.n_concepts == 1);
  CHECK(s.total_features == 1);
  CHECK(s.n_unique_features == 1);
  CHECK(s.features_per_concept == 1.0);
  CHECK(s.unique_share == 1.0);
}

TEST_CASE("descriptive_stats on a two-concept norm with one shared feature") {
  FeatureNorm norm({{"c1", "it is f1", 1}, {"c1", "it is f2", 1}, {"c2", "it is f2", 1}}, 1,
                   Provenance::generated);
  auto s = descriptive_stats(norm);
  CHECK(s.n_concepts == 2);
  CHECK(s.total_features == 3);
  CHECK(s.n_unique_features == 2);
  CHECK(s.features_per_concept == Catch::Approx(1.5));
  CHECK(s.unique_share == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("descriptive_stats identities hold on random norms") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    auto norm = random_norm(rng);
    auto s = descriptive_stats(norm);
    CHECK(std::abs(s.unique_share * double(s.total_features) - double(s.n_unique_features)) <
          1e-9);
    CHECK(std::abs(s.features_per_concept * double(s.n_concepts) - double(s.total_features)) <
          1e-9);
  }
}

TEST_CASE("descriptive_stats rejects an empty norm") {
  CHECK_THROWS_AS(descriptive_stats(FeatureNorm({}, 1, Provenance::human)), ArgError);
}

TEST_CASE("build_matrix lays out one concept's frequencies") {
  FeatureNorm norm({{"c1", "it is b", 4}, {"c1", "it is a", 2}}, 5, Provenance::generated);
  auto m = build_matrix(norm, {"c1"});
  REQUIRE(m.n_rows() == 1);
  REQUIRE(m.n_cols() == 2);
  CHECK(m.features() == std::vector<std::string>{"it is a", "it is b"});
  CHECK(m.at(0, 0) == 2);
  CHECK(m.at(0, 1) == 4);
}

TEST_CASE("build_matrix equals a hand-written dense array") {
  FeatureNorm norm(
      {
          {"c1", "it is x", 2},
          {"c1", "it is y", 1},
          {"c2", "it is y", 3},
          {"c3", "it is z", 7},
      },
      10, Provenance::generated);
  auto m = build_matrix(norm, {"c1", "c2", "c3"});
  const int expected[3][3] = {{2, 1, 0}, {0, 3, 0}, {0, 0, 7}};
  REQUIRE(m.n_rows() == 3);
  REQUIRE(m.n_cols() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(m.at(i, j) == expected[i][j]);
  }
}

TEST_CASE("build_matrix rejects concepts missing from the norm") {
  FeatureNorm norm({{"c1", "it is x", 2}}, 5, Provenance::generated);
  CHECK_THROWS_AS(build_matrix(norm, {"c1", "nope"}), ArgError);
}

TEST_CASE("sample_for_labeling is deterministic and stratified") {
  Rng rng(15);
  auto norm = random_norm(rng);
  std::set<std::string> inside, outside;
  for (const auto& id : norm.concept_ids()) {
    (inside.size() <= outside.size() ? inside : outside).insert(id);
  }
  std::size_t n = 2;
  auto s1 = sample_for_labeling(norm, inside, outside, n, "gen", 42);
  auto s2 = sample_for_labeling(norm, inside, outside, n, "gen", 42);
  REQUIRE(s1.size() == 2 * n);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].concept_id == s2[i].concept_id);
    CHECK(s1[i].feature == s2[i].feature);
    CHECK(s1[i].label.empty());
    CHECK(s1[i].source == "gen");
  }
  for (std::size_t i = 0; i < n; ++i) CHECK(inside.count(s1[i].concept_id) == 1);
  for (std::size_t i = n; i < 2 * n; ++i) CHECK(outside.count(s1[i].concept_id) == 1);
}

TEST_CASE("sample_for_labeling with n=0 is empty") {
  FeatureNorm norm({{"c1", "it is x", 2}, {"c2", "it is y", 1}}, 5, Provenance::generated);
  CHECK(sample_for_labeling(norm, {"c1"}, {"c2"}, 0, "gen", 1).empty());
}

TEST_CASE("sample_for_labeling reports stratum exhaustion") {
  FeatureNorm norm({{"c1", "it is x", 2}, {"c2", "it is y", 1}}, 5, Provenance::generated);
  CHECK_THROWS_AS(sample_for_labeling(norm, {"c1"}, {"c2"}, 2, "gen", 1), ArgError);
}

TEST_CASE("label_distribution of a single label is certain") {
  LabelSample sample;
  for (int i = 0; i < 10; ++i) sample.push_back({"c1", "f", "gen", "encyclopedic"});
  auto dist = label_distribution(sample, 200, 3);
  for (const auto& p : dist) {
    if (p.label == "encyclopedic") {
      CHECK(p.proportion == 1.0);
      CHECK(p.ci_low == 1.0);
      CHECK(p.ci_high == 1.0);
    } else {
      CHECK(p.proportion == 0.0);
    }
  }
}

TEST_CASE("label_distribution proportions match hand counts and CIs are sane") {
  LabelSample sample = {
      {"c1", "f1", "gen", "taxonomic"},
      {"c1", "f2", "gen", "taxonomic"},
      {"c2", "f3", "gen", "functional"},
      {"c2", "f4", "gen", "encyclopedic"},
  };
  const std::uint64_t seed = 7;
  const std::size_t B = 1000;
  auto dist = label_distribution(sample, B, seed);
  double sum = 0.0;
  for (const auto& p : dist) {
    sum += p.proportion;
    CHECK(p.ci_low >= 0.0);
    CHECK(p.ci_high <= 1.0);
    CHECK(p.ci_low <= p.ci_high);
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
  for (const auto& p : dist) {
    if (p.label == "taxonomic") CHECK(p.proportion == Catch::Approx(0.5));
    if (p.label == "functional") CHECK(p.proportion == Catch::Approx(0.25));
    if (p.label == "encyclopedic") CHECK(p.proportion == Catch::Approx(0.25));
    if (p.label == "conceptual") CHECK(p.proportion == 0.0);
  }

  // brute-force resampling oracle with the same substream layout
  Rng rng(seed);
  std::vector<double> taxo(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng rep = rng.stream("labeldist").stream(b);
    int count = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (sample[rep.below(sample.size())].label == "taxonomic") ++count;
    }
    taxo[b] = count / 4.0;
  }
  std::sort(taxo.begin(), taxo.end());
  auto pct = [&](double q) {
    double pos = q * double(B - 1);
    std::size_t lo = std::size_t(pos);
    return taxo[lo] * (1.0 - (pos - double(lo))) + taxo[std::min(lo + 1, B - 1)] * (pos - double(lo));
  };
  for (const auto& p : dist) {
    if (p.label == "taxonomic") {
      CHECK(p.ci_low == Catch::Approx(pct(0.025)).margin(1e-15));
      CHECK(p.ci_high == Catch::Approx(pct(0.975)).margin(1e-15));
    }
  }
}

TEST_CASE("label_distribution rejects unlabeled records") {
  LabelSample sample = {{"c1", "f1", "gen", ""}};
  CHECK_THROWS_AS(label_distribution(sample, 10, 1), ArgError);
}
