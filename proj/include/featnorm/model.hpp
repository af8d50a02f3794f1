#ifndef FEATNORM_MODEL_HPP
#define FEATNORM_MODEL_HPP

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "featnorm/text.hpp"

namespace featnorm {

// Bad arguments to an operation (caller bug or impossible request).
class ArgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

struct Concept {
  std::string id;
  std::string name;
  std::string disambiguator;            // superordinate category, may be empty
  std::vector<std::string> categories;  // category ids, may be empty

  // "name (disambiguator)" when disambiguated, else the plain name.
  std::string display() const {
    return disambiguator.empty() ? name : name + " (" + disambiguator + ")";
  }
};

struct NormEntry {
  std::string concept_id;
  std::string feature;
  int frequency = 1;

  friend bool operator==(const NormEntry&, const NormEntry&) = default;
};

inline bool entry_less(const NormEntry& a, const NormEntry& b) {
  if (a.concept_id != b.concept_id) return a.concept_id < b.concept_id;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.frequency < b.frequency;
}

enum class Provenance { human, generated };

inline std::string to_string(Provenance p) {
  return p == Provenance::human ? "human" : "generated";
}

inline Provenance provenance_from_string(std::string_view s) {
  if (s == "human") return Provenance::human;
  if (s == "generated") return Provenance::generated;
  throw ParseError("unknown provenance tag: " + std::string(s));
}

// A feature norm: (concept, feature, production frequency) entries plus the
// number of independent sources (runs or participants) behind them.
// Immutable after construction; entries and the concept list are kept sorted
// so equality is independent of build order.
class FeatureNorm {
 public:
  FeatureNorm() = default;

  FeatureNorm(std::vector<NormEntry> entries, int source_count, Provenance provenance,
              std::vector<std::string> concept_ids = {})
      : entries_(std::move(entries)),
        concept_ids_(std::move(concept_ids)),
        source_count_(source_count),
        provenance_(provenance) {
    std::sort(entries_.begin(), entries_.end(), entry_less);
    if (concept_ids_.empty()) {
      for (const auto& e : entries_) concept_ids_.push_back(e.concept_id);
    }
    std::sort(concept_ids_.begin(), concept_ids_.end());
    concept_ids_.erase(std::unique(concept_ids_.begin(), concept_ids_.end()),
                       concept_ids_.end());
  }

  const std::vector<NormEntry>& entries() const { return entries_; }
  const std::vector<std::string>& concept_ids() const { return concept_ids_; }
  int source_count() const { return source_count_; }
  Provenance provenance() const { return provenance_; }

  bool has_concept(std::string_view id) const {
    return std::binary_search(concept_ids_.begin(), concept_ids_.end(), id);
  }

  // Entries of one concept (contiguous in the sorted vector).
  std::pair<std::size_t, std::size_t> concept_range(std::string_view id) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const NormEntry& e, std::string_view v) { return e.concept_id < v; });
    auto hi = std::upper_bound(entries_.begin(), entries_.end(), id,
                               [](std::string_view v, const NormEntry& e) { return v < e.concept_id; });
    return {static_cast<std::size_t>(lo - entries_.begin()),
            static_cast<std::size_t>(hi - entries_.begin())};
  }

  std::vector<std::string> empty_concepts() const {
    std::vector<std::string> out;
    for (const auto& id : concept_ids_) {
      auto [lo, hi] = concept_range(id);
      if (lo == hi) out.push_back(id);
    }
    return out;
  }

  friend bool operator==(const FeatureNorm& a, const FeatureNorm& b) {
    return a.entries_ == b.entries_ && a.concept_ids_ == b.concept_ids_ &&
           a.source_count_ == b.source_count_ && a.provenance_ == b.provenance_;
  }

 private:
  std::vector<NormEntry> entries_;
  std::vector<std::string> concept_ids_;
  int source_count_ = 0;
  Provenance provenance_ = Provenance::human;
};

// Sparse concepts x features count matrix. Rows follow the concept order
// given at build time, columns are sorted feature strings.
class ConceptFeatureMatrix {
 public:
  ConceptFeatureMatrix(std::vector<std::string> concept_ids, std::vector<std::string> features)
      : concept_ids_(std::move(concept_ids)),
        features_(std::move(features)),
        rows_(concept_ids_.size()) {}

  void set(std::size_t row, std::size_t col, int count) {
    rows_[row].emplace_back(col, count);
  }
  void finalize() {
    for (auto& r : rows_) std::sort(r.begin(), r.end());
  }

  const std::vector<std::string>& concept_ids() const { return concept_ids_; }
  const std::vector<std::string>& features() const { return features_; }
  std::size_t n_rows() const { return concept_ids_.size(); }
  std::size_t n_cols() const { return features_.size(); }

  const std::vector<std::pair<std::size_t, int>>& row(std::size_t i) const { return rows_[i]; }

  int at(std::size_t i, std::size_t j) const {
    const auto& r = rows_[i];
    auto it = std::lower_bound(r.begin(), r.end(), std::make_pair(j, 0));
    return (it != r.end() && it->first == j) ? it->second : 0;
  }

 private:
  std::vector<std::string> concept_ids_;
  std::vector<std::string> features_;
  std::vector<std::vector<std::pair<std::size_t, int>>> rows_;
};

// Symmetric cosine-similarity matrix over an ordered concept list.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> ids, std::vector<double> values)
      : ids_(std::move(ids)), values_(std::move(values)) {
    if (values_.size() != ids_.size() * ids_.size())
      throw ArgError("similarity matrix: values/ids size mismatch");
  }

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  double at(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
  void set(std::size_t i, std::size_t j, double v) { values_[i * ids_.size() + j] = v; }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (ids_[i] == id) return i;
    }
    throw ArgError("concept not in similarity matrix: " + std::string(id));
  }

  // Restriction to a subset of concepts, in the given order. Cosine
  // similarity is pairwise, so this equals recomputing over the subset.
  SimilarityMatrix subset(const std::vector<std::string>& keep) const {
    std::vector<std::size_t> idx;
    idx.reserve(keep.size());
    for (const auto& id : keep) idx.push_back(index_of(id));
    std::vector<double> vals(keep.size() * keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      for (std::size_t j = 0; j < keep.size(); ++j) {
        vals[i * keep.size() + j] = at(idx[i], idx[j]);
      }
    }
    return SimilarityMatrix(keep, std::move(vals));
  }

  friend bool operator==(const SimilarityMatrix& a, const SimilarityMatrix& b) {
    return a.ids_ == b.ids_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
};

// category id -> member concept ids. For the within/between analysis a
// concept may belong to at most one category.
using CategoryScheme = std::map<std::string, std::set<std::string>>;

inline CategoryScheme category_scheme_from_concepts(const std::vector<Concept>& concepts) {
  CategoryScheme scheme;
  for (const auto& c : concepts) {
    for (const auto& cat : c.categories) scheme[cat].insert(c.id);
  }
  return scheme;
}

struct ValidationIssue {
  std::string concept_id;
  std::string feature;
  std::string rule;  // which invariant was violated
};

}  // namespace featnorm

#endif
