#ifndef FEATNORM_ANALYSIS_HPP
#define FEATNORM_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "featnorm/matrix.hpp"
#include "featnorm/model.hpp"
#include "featnorm/rng.hpp"

namespace featnorm {

inline SimilarityMatrix cosine_similarity_matrix(const ConceptFeatureMatrix& m) {
  const std::size_t n = m.n_rows();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (const auto& [col, v] : m.row(i)) {
      (void)col;
      sq += double(v) * double(v);
    }
    if (sq == 0.0)
      throw ArgError("cosine similarity undefined for all-zero concept row: " +
                     m.concept_ids()[i]);
    norms[i] = std::sqrt(sq);
  }
  std::vector<double> vals(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    vals[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      // sparse dot over the shorter row
      const auto& a = m.row(i);
      const auto& b = m.row(j);
      double dot = 0.0;
      std::size_t ia = 0, ib = 0;
      while (ia < a.size() && ib < b.size()) {
        if (a[ia].first < b[ib].first) {
          ++ia;
        } else if (b[ib].first < a[ia].first) {
          ++ib;
        } else {
          dot += double(a[ia].second) * double(b[ib].second);
          ++ia;
          ++ib;
        }
      }
      const double s = dot / (norms[i] * norms[j]);
      vals[i * n + j] = s;
      vals[j * n + i] = s;
    }
  }
  return SimilarityMatrix(m.concept_ids(), std::move(vals));
}

// Sorted intersection of the norms' concept id sets.
inline std::vector<std::string> shared_concepts(const std::vector<const FeatureNorm*>& norms) {
  if (norms.size() < 2) throw ArgError("shared_concepts needs at least 2 norms");
  std::vector<std::string> acc = norms[0]->concept_ids();
  for (std::size_t i = 1; i < norms.size(); ++i) {
    std::vector<std::string> next;
    std::set_intersection(acc.begin(), acc.end(), norms[i]->concept_ids().begin(),
                          norms[i]->concept_ids().end(), std::back_inserter(next));
    acc = std::move(next);
  }
  return acc;
}

struct ConceptCategoryScore {
  std::string concept_id;
  std::string category;
  double score = 0.0;  // mean within-category minus mean between-category similarity
};

struct CategoryAggregate {
  std::string category;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct CategoryScore {
  std::vector<ConceptCategoryScore> per_concept;
  std::vector<CategoryAggregate> per_category;
};

// Mean within-category similarity minus mean between-category similarity per
// concept, with per-category aggregates and bootstrap CIs over members.
inline CategoryScore within_minus_between(const SimilarityMatrix& s, const CategoryScheme& cats,
                                          std::size_t bootstrap_b, std::uint64_t seed) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.ids().size(); ++i) index[s.ids()[i]] = i;

  std::map<std::string, std::size_t> concept_category_count;
  for (const auto& [cat, members] : cats) {
    (void)cat;
    for (const auto& id : members) {
      if (index.count(id)) ++concept_category_count[id];
    }
  }
  for (const auto& [id, n] : concept_category_count) {
    if (n > 1) throw ArgError("concept in more than one category: " + id);
  }

  CategoryScore out;
  Rng rng(seed);
  for (const auto& [cat, member_ids] : cats) {
    std::vector<std::size_t> members;
    for (const auto& id : member_ids) {
      auto it = index.find(id);
      if (it != index.end()) members.push_back(it->second);
    }
    if (members.empty()) continue;
    if (members.size() < 2)
      throw ArgError("category '" + cat + "' has fewer than 2 members in the matrix");
    std::sort(members.begin(), members.end());
    if (members.size() == s.size())
      throw ArgError("category '" + cat + "' covers every concept; between-set empty");

    std::set<std::size_t> member_set(members.begin(), members.end());
    std::vector<double> scores;
    scores.reserve(members.size());
    for (auto c : members) {
      double within = 0.0, between = 0.0;
      std::size_t n_within = 0, n_between = 0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == c) continue;
        if (member_set.count(j)) {
          within += s.at(c, j);
          ++n_within;
        } else {
          between += s.at(c, j);
          ++n_between;
        }
      }
      const double score = within / double(n_within) - between / double(n_between);
      scores.push_back(score);
      out.per_concept.push_back({s.ids()[c], cat, score});
    }

    CategoryAggregate agg;
    agg.category = cat;
    double sum = 0.0;
    for (double v : scores) sum += v;
    agg.mean = sum / double(scores.size());

    Rng cat_rng = rng.stream(cat);
    std::vector<double> boot(bootstrap_b);
    for (std::size_t b = 0; b < bootstrap_b; ++b) {
      Rng rep = cat_rng.stream(b);
      double rs = 0.0;
      for (std::size_t i = 0; i < scores.size(); ++i) rs += scores[rep.below(scores.size())];
      boot[b] = rs / double(scores.size());
    }
    std::sort(boot.begin(), boot.end());
    agg.ci_low = detail::percentile(boot, 0.025);
    agg.ci_high = detail::percentile(boot, 0.975);
    out.per_category.push_back(agg);
  }
  return out;
}

enum class Linkage { single, complete, average };

inline std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    default: return "average";
  }
}

inline Linkage linkage_from_string(const std::string& s) {
  if (s == "single") return Linkage::single;
  if (s == "complete") return Linkage::complete;
  if (s == "average") return Linkage::average;
  throw ArgError("unknown linkage: " + s);
}

struct DendrogramMerge {
  std::size_t node_a = 0;  // node_a < node_b; leaves are 0..n-1, merge i creates node n+i
  std::size_t node_b = 0;
  double distance = 0.0;
  std::size_t size = 0;  // leaves under the merged cluster
};

struct Dendrogram {
  std::vector<std::string> leaf_ids;
  std::vector<DendrogramMerge> merges;
  Linkage linkage = Linkage::average;

  // Left-to-right leaf order when the tree is drawn (children visited in
  // (node_a, node_b) order).
  std::vector<std::size_t> leaf_order() const {
    std::vector<std::size_t> order;
    if (merges.empty()) {
      for (std::size_t i = 0; i < leaf_ids.size(); ++i) order.push_back(i);
      return order;
    }
    const std::size_t n = leaf_ids.size();
    std::vector<std::size_t> stack = {n + merges.size() - 1};
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      if (node < n) {
        order.push_back(node);
      } else {
        const auto& m = merges[node - n];
        stack.push_back(m.node_b);
        stack.push_back(m.node_a);
      }
    }
    return order;
  }
};

// Agglomerative clustering on distance 1 - similarity, Lance-Williams
// updates, deterministic tie-break on the smallest (node_a, node_b) pair.
inline Dendrogram hierarchical_cluster(const SimilarityMatrix& s,
                                       Linkage linkage = Linkage::average) {
  const std::size_t n = s.size();
  if (n < 2) throw ArgError("hierarchical_cluster needs at least 2 concepts");

  // cluster id -> current distance row, indexed by cluster id
  std::map<std::size_t, std::map<std::size_t, double>> dist;
  std::map<std::size_t, std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    sizes[i] = 1;
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = 1.0 - s.at(i, j);
  }
  auto get = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return dist[a][b];
  };

  Dendrogram out;
  out.leaf_ids = s.ids();
  out.linkage = linkage;
  std::set<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) active.insert(i);

  for (std::size_t step = 0; step < n - 1; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_pair{0, 0};
    for (auto ai = active.begin(); ai != active.end(); ++ai) {
      for (auto bi = std::next(ai); bi != active.end(); ++bi) {
        const double d = get(*ai, *bi);
        if (d < best || (d == best && std::make_pair(*ai, *bi) < best_pair)) {
          best = d;
          best_pair = {*ai, *bi};
        }
      }
    }
    const auto [a, b] = best_pair;
    const std::size_t merged = n + step;
    const std::size_t na = sizes[a], nb = sizes[b];
    sizes[merged] = na + nb;
    out.merges.push_back({a, b, best, na + nb});

    active.erase(a);
    active.erase(b);
    for (auto k : active) {
      const double dka = get(k, a);
      const double dkb = get(k, b);
      double d;
      switch (linkage) {
        case Linkage::single: d = std::min(dka, dkb); break;
        case Linkage::complete: d = std::max(dka, dkb); break;
        default:
          d = (double(na) * dka + double(nb) * dkb) / double(na + nb);
          break;
      }
      dist[k][merged] = d;
    }
    active.insert(merged);
  }
  return out;
}

}  // namespace featnorm

#endif
