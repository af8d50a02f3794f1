#ifndef FEATNORM_MATRIX_HPP
#define FEATNORM_MATRIX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "featnorm/model.hpp"
#include "featnorm/rng.hpp"

namespace featnorm {

struct FilterConfig {
  int k = 1;  // minimum per-concept production frequency
};

struct DescriptiveStats {
  long n_concepts = 0;
  long total_features = 0;   // number of (concept, feature) entries
  long n_unique_features = 0;
  double features_per_concept = 0.0;
  double unique_share = 0.0;  // n_unique / total
};

// Drops entries below the frequency cutoff. Concepts emptied by the filter
// stay in the concept list so concept counts remain comparable across
// cutoffs; validate_norm-style reporting can flag them via empty_concepts().
inline FeatureNorm filter_infrequent(const FeatureNorm& norm, const FilterConfig& cfg) {
  if (cfg.k < 1) throw ArgError("filter cutoff k must be >= 1");
  std::vector<NormEntry> kept;
  for (const auto& e : norm.entries()) {
    if (e.frequency >= cfg.k) kept.push_back(e);
  }
  return FeatureNorm(std::move(kept), norm.source_count(), norm.provenance(),
                     norm.concept_ids());
}

// (k, number of unique features after filtering at k) for k = 1..k_max.
inline std::vector<std::pair<int, long>> unique_feature_curve(const FeatureNorm& norm,
                                                              int k_max) {
  if (k_max < 2) throw ArgError("unique_feature_curve needs k_max >= 2");
  std::vector<std::pair<int, long>> curve;
  for (int k = 1; k <= k_max; ++k) {
    std::set<std::string> unique;
    for (const auto& e : norm.entries()) {
      if (e.frequency >= k) unique.insert(e.feature);
    }
    curve.emplace_back(k, static_cast<long>(unique.size()));
  }
  return curve;
}

// Elbow selection: the interior point with maximum perpendicular distance
// to the chord joining the curve's endpoints, after min-max scaling both
// axes to [0, 1]. Ties resolve to the smallest k.
inline int elbow_point(const std::vector<std::pair<int, long>>& curve) {
  if (curve.size() < 3) throw ArgError("elbow_point needs at least 3 curve points");
  double kmin = curve.front().first, kmax = curve.back().first;
  double cmin = curve.front().second, cmax = curve.front().second;
  for (const auto& [k, c] : curve) {
    kmin = std::min(kmin, double(k));
    kmax = std::max(kmax, double(k));
    cmin = std::min(cmin, double(c));
    cmax = std::max(cmax, double(c));
  }
  auto scale = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  const double x0 = scale(curve.front().first, kmin, kmax);
  const double y0 = scale(curve.front().second, cmin, cmax);
  const double x1 = scale(curve.back().first, kmin, kmax);
  const double y1 = scale(curve.back().second, cmin, cmax);
  const double dx = x1 - x0, dy = y1 - y0;
  const double len = std::sqrt(dx * dx + dy * dy);

  int best_k = curve[1].first;
  double best_d = -1.0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double px = scale(curve[i].first, kmin, kmax) - x0;
    const double py = scale(curve[i].second, cmin, cmax) - y0;
    const double d = len > 0 ? std::abs(px * dy - py * dx) / len : 0.0;
    if (d > best_d) {
      best_d = d;
      best_k = curve[i].first;
    }
  }
  return best_k;
}

inline DescriptiveStats descriptive_stats(const FeatureNorm& norm) {
  if (norm.entries().empty()) throw ArgError("descriptive_stats: empty norm");
  DescriptiveStats s;
  s.n_concepts = static_cast<long>(norm.concept_ids().size());
  s.total_features = static_cast<long>(norm.entries().size());
  std::set<std::string> unique;
  for (const auto& e : norm.entries()) unique.insert(e.feature);
  s.n_unique_features = static_cast<long>(unique.size());
  s.features_per_concept = double(s.total_features) / double(s.n_concepts);
  s.unique_share = double(s.n_unique_features) / double(s.total_features);
  return s;
}

// Count matrix over an ordered concept subset; columns are the union of the
// subset's features, sorted lexicographically.
inline ConceptFeatureMatrix build_matrix(const FeatureNorm& norm,
                                         const std::vector<std::string>& concepts) {
  for (const auto& id : concepts) {
    if (!norm.has_concept(id)) throw ArgError("concept not in norm: " + id);
  }
  std::set<std::string> feature_set;
  for (const auto& id : concepts) {
    auto [lo, hi] = norm.concept_range(id);
    for (std::size_t i = lo; i < hi; ++i) feature_set.insert(norm.entries()[i].feature);
  }
  std::vector<std::string> features(feature_set.begin(), feature_set.end());
  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < features.size(); ++j) col[features[j]] = j;

  ConceptFeatureMatrix m(concepts, std::move(features));
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    auto [lo, hi] = norm.concept_range(concepts[i]);
    for (std::size_t e = lo; e < hi; ++e) {
      m.set(i, col[norm.entries()[e].feature], norm.entries()[e].frequency);
    }
  }
  m.finalize();
  return m;
}

// Fixed six-way feature label scheme.
inline const std::array<const char*, 6>& label_scheme() {
  static const std::array<const char*, 6> labels = {
      "taxonomic",       "visual perceptual", "other perceptual",
      "conceptual",      "functional",        "encyclopedic"};
  return labels;
}

inline bool is_valid_label(const std::string& label) {
  for (const char* l : label_scheme()) {
    if (label == l) return true;
  }
  return false;
}

struct LabelRecord {
  std::string concept_id;
  std::string feature;
  std::string source;  // which norm the feature came from
  std::string label;   // empty = unlabeled
};

using LabelSample = std::vector<LabelRecord>;

// Stratified uniform sample of entries for manual labeling: n from concepts
// inside the intersection, n from concepts outside it. Deterministic under
// the seed.
inline LabelSample sample_for_labeling(const FeatureNorm& norm,
                                       const std::set<std::string>& inside,
                                       const std::set<std::string>& outside,
                                       std::size_t n_per_stratum, const std::string& source,
                                       std::uint64_t seed) {
  auto stratum_entries = [&](const std::set<std::string>& ids) {
    std::vector<const NormEntry*> out;
    for (const auto& e : norm.entries()) {
      if (ids.count(e.concept_id)) out.push_back(&e);
    }
    return out;
  };
  Rng rng(seed);
  LabelSample sample;
  const char* names[2] = {"labels.inside", "labels.outside"};
  const std::set<std::string>* strata[2] = {&inside, &outside};
  for (int s = 0; s < 2; ++s) {
    auto entries = stratum_entries(*strata[s]);
    if (entries.size() < n_per_stratum)
      throw ArgError(std::string("stratum exhausted: ") + names[s] + " has " +
                     std::to_string(entries.size()) + " entries, need " +
                     std::to_string(n_per_stratum));
    Rng sub = rng.stream(names[s]);
    auto idx = sub.sample_indices(entries.size(), n_per_stratum);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) sample.push_back({entries[i]->concept_id, entries[i]->feature, source, ""});
  }
  return sample;
}

struct LabelProportion {
  std::string label;
  double proportion = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

namespace detail {

// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

// Per-label proportions with bootstrap percentile confidence intervals
// (95%, B resamples of records with replacement).
inline std::vector<LabelProportion> label_distribution(const LabelSample& sample,
                                                       std::size_t bootstrap_b,
                                                       std::uint64_t seed) {
  if (sample.empty()) throw ArgError("label_distribution: empty sample");
  if (bootstrap_b < 1) throw ArgError("label_distribution: bootstrap_b must be >= 1");
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < label_scheme().size(); ++i) label_index[label_scheme()[i]] = i;
  std::vector<std::size_t> record_label(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    auto it = label_index.find(sample[i].label);
    if (it == label_index.end())
      throw ArgError("unlabeled or unknown label '" + sample[i].label + "' for feature '" +
                     sample[i].feature + "'");
    record_label[i] = it->second;
  }

  const double n = static_cast<double>(sample.size());
  std::vector<LabelProportion> out(label_scheme().size());
  std::vector<long> counts(label_scheme().size(), 0);
  for (auto li : record_label) ++counts[li];
  for (std::size_t li = 0; li < out.size(); ++li) {
    out[li].label = label_scheme()[li];
    out[li].proportion = counts[li] / n;
  }

  Rng rng(seed);
  std::vector<std::vector<double>> boot(out.size(), std::vector<double>(bootstrap_b));
  for (std::size_t b = 0; b < bootstrap_b; ++b) {
    Rng rep = rng.stream("labeldist").stream(b);
    std::vector<long> c(out.size(), 0);
    for (std::size_t i = 0; i < sample.size(); ++i)
      ++c[record_label[rep.below(sample.size())]];
    for (std::size_t li = 0; li < out.size(); ++li) boot[li][b] = c[li] / n;
  }
  for (std::size_t li = 0; li < out.size(); ++li) {
    std::sort(boot[li].begin(), boot[li].end());
    out[li].ci_low = detail::percentile(boot[li], 0.025);
    out[li].ci_high = detail::percentile(boot[li], 0.975);
  }
  return out;
}

}  // namespace featnorm

#endif
