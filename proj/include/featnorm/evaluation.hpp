#ifndef FEATNORM_EVALUATION_HPP
#define FEATNORM_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "featnorm/model.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

struct BenchmarkPair {
  std::string word_a;
  std::string word_b;
  double score = 0.0;
};

enum class BenchmarkKind { relatedness, similarity };

// Word-pair benchmark with human scores; pairs are unordered and stored
// normalized (word_a <= word_b) and sorted, so downstream results cannot
// depend on file order.
struct PairBenchmark {
  std::vector<BenchmarkPair> pairs;
  BenchmarkKind kind = BenchmarkKind::relatedness;
};

class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgError("pearson: length mismatch");
  if (x.size() < 3) throw ArgError("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ArgError("pearson: constant vector, r undefined");
  return sxy / std::sqrt(sxx * syy);
}

// Strictly-lower-triangle entries in row-major order.
inline std::vector<double> lower_triangle(const SimilarityMatrix& s) {
  std::vector<double> v;
  v.reserve(s.size() * (s.size() - 1) / 2);
  for (std::size_t i = 1; i < s.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) v.push_back(s.at(i, j));
  }
  return v;
}

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
};

inline CorrelationResult matrix_correlation(const SimilarityMatrix& sa,
                                            const SimilarityMatrix& sb) {
  if (sa.ids() != sb.ids()) {
    std::set<std::string> a(sa.ids().begin(), sa.ids().end());
    std::set<std::string> b(sb.ids().begin(), sb.ids().end());
    std::string only_a, only_b;
    for (const auto& id : a)
      if (!b.count(id)) only_a += (only_a.empty() ? "" : ", ") + id;
    for (const auto& id : b)
      if (!a.count(id)) only_b += (only_b.empty() ? "" : ", ") + id;
    if (only_a.empty() && only_b.empty())
      throw ArgError("matrix_correlation: concept order differs between matrices");
    throw ArgError("matrix_correlation: concept lists differ; only in first: [" + only_a +
                   "], only in second: [" + only_b + "]");
  }
  auto va = lower_triangle(sa);
  auto vb = lower_triangle(sb);
  return {pearson(va, vb), sa.size() * (sa.size() - 1) / 2};
}

// Maps a benchmark word to a concept in the similarity matrix by exact
// lowercase name match; a disambiguated concept matches on its base name
// only when no other concept shares that name.
inline std::map<std::string, std::string> benchmark_word_map(
    const SimilarityMatrix& s, const std::vector<Concept>& concepts) {
  std::map<std::string, std::string> name_of;
  for (const auto& c : concepts) name_of[c.id] = to_lower(c.name);
  std::map<std::string, std::vector<std::string>> by_name;
  for (const auto& id : s.ids()) {
    auto it = name_of.find(id);
    by_name[it != name_of.end() ? it->second : to_lower(id)].push_back(id);
  }
  std::map<std::string, std::string> out;
  for (const auto& [name, ids] : by_name) {
    if (ids.size() == 1) out[name] = ids.front();
  }
  return out;
}

struct PairCorrelationResult {
  double r = 0.0;
  std::size_t n_overlapping_pairs = 0;
  std::vector<std::string> unresolved_words;  // benchmark words with no unique concept
};

inline PairCorrelationResult pair_correlation(const SimilarityMatrix& s,
                                              const PairBenchmark& bench,
                                              const std::vector<Concept>& concepts = {}) {
  auto word_map = benchmark_word_map(s, concepts);
  std::vector<double> model, human;
  std::set<std::string> unresolved;
  for (const auto& p : bench.pairs) {
    auto a = word_map.find(to_lower(p.word_a));
    auto b = word_map.find(to_lower(p.word_b));
    if (a == word_map.end()) unresolved.insert(to_lower(p.word_a));
    if (b == word_map.end()) unresolved.insert(to_lower(p.word_b));
    if (a == word_map.end() || b == word_map.end()) continue;
    model.push_back(s.at(s.index_of(a->second), s.index_of(b->second)));
    human.push_back(p.score);
  }
  if (model.size() < 3)
    throw ArgError("pair_correlation: only " + std::to_string(model.size()) +
                   " benchmark pairs overlap the norm; need at least 3");
  PairCorrelationResult res;
  res.r = pearson(model, human);
  res.n_overlapping_pairs = model.size();
  res.unresolved_words.assign(unresolved.begin(), unresolved.end());
  return res;
}

namespace detail {

// Gaussian elimination with partial pivoting; throws on singular systems.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) scale = std::max(scale, std::abs(a[r * n + col]));
    if (scale == 0.0 || std::abs(a[pivot * n + col]) < 1e-12 * scale)
      throw RankDeficiencyError("design matrix is rank deficient");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

}  // namespace detail

// OLS coefficient of determination with intercept.
inline double rsquared(const std::vector<double>& target,
                       const std::vector<std::vector<double>>& predictors) {
  const std::size_t n = target.size();
  const std::size_t p = predictors.size();
  if (p == 0) throw ArgError("rsquared: no predictors");
  for (const auto& pr : predictors) {
    if (pr.size() != n) throw ArgError("rsquared: predictor length mismatch");
  }
  if (n <= p + 1) throw ArgError("rsquared: need more observations than parameters");

  // normal equations over [1, x1..xp]
  const std::size_t m = p + 1;
  std::vector<double> xtx(m * m, 0.0), xty(m, 0.0);
  auto col = [&](std::size_t j, std::size_t i) -> double {
    return j == 0 ? 1.0 : predictors[j - 1][i];
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += col(a, i) * col(b, i);
      xtx[a * m + b] = acc;
      xtx[b * m + a] = acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += col(a, i) * target[i];
    xty[a] = acc;
  }
  auto beta = detail::solve_linear(std::move(xtx), std::move(xty));

  double mean = 0.0;
  for (double v : target) mean += v;
  mean /= double(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = beta[0];
    for (std::size_t j = 0; j < p; ++j) fit += beta[j + 1] * predictors[j][i];
    const double r = target[i] - fit;
    ss_res += r * r;
    const double d = target[i] - mean;
    ss_tot += d * d;
  }
  if (ss_tot == 0.0) throw ArgError("rsquared: constant target");
  double r2 = 1.0 - ss_res / ss_tot;
  if (r2 < 0.0 && r2 > -1e-9) r2 = 0.0;
  if (r2 > 1.0 && r2 < 1.0 + 1e-9) r2 = 1.0;
  return r2;
}

struct CommonalityComponent {
  std::vector<std::string> subset;  // predictor names in the component
  std::string name;                 // names joined with the conjunction sign
  double value = 0.0;
};

struct CommonalityDecomposition {
  std::vector<std::string> predictors;
  std::vector<CommonalityComponent> components;  // all 2^p - 1, by bitmask order
  std::map<std::string, double> subset_r2;       // R^2 of every nonempty predictor subset
  double full_r2 = 0.0;
  std::vector<std::string> negative_components;  // suppressor warning, not an error
};

inline std::string subset_name(const std::vector<std::string>& names, unsigned mask) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (mask & (1u << i)) {
      if (!out.empty()) out += "∧";
      out += names[i];
    }
  }
  return out;
}

// Commonality analysis: solve for the unique/shared components C(T) such
// that for every nonempty subset S of predictors,
//   R^2(S) = sum of C(T) over all T intersecting S.
// Exactly duplicated predictors are collapsed before each regression so the
// subset R^2s stay well defined.
inline CommonalityDecomposition commonality_analysis(
    const std::vector<double>& target, const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& predictors) {
  const std::size_t p = predictors.size();
  if (p != 2 && p != 3) throw ArgError("commonality_analysis supports 2 or 3 predictors");
  if (names.size() != p) throw ArgError("commonality_analysis: names/predictors mismatch");

  const unsigned n_subsets = (1u << p) - 1;
  std::vector<double> r2(n_subsets + 1, 0.0);
  for (unsigned mask = 1; mask <= n_subsets; ++mask) {
    std::vector<std::vector<double>> design;
    for (std::size_t i = 0; i < p; ++i) {
      if (!(mask & (1u << i))) continue;
      bool dup = false;
      for (const auto& have : design) {
        if (have == predictors[i]) { dup = true; break; }
      }
      if (!dup) design.push_back(predictors[i]);
    }
    r2[mask] = rsquared(target, design);
  }

  // M[s][t] = 1 iff subsets s and t intersect
  std::vector<double> m(n_subsets * n_subsets, 0.0), rhs(n_subsets, 0.0);
  for (unsigned s = 1; s <= n_subsets; ++s) {
    rhs[s - 1] = r2[s];
    for (unsigned t = 1; t <= n_subsets; ++t) m[(s - 1) * n_subsets + (t - 1)] = (s & t) ? 1.0 : 0.0;
  }
  auto c = detail::solve_linear(std::move(m), std::move(rhs));

  CommonalityDecomposition out;
  out.predictors = names;
  out.full_r2 = r2[n_subsets];
  for (unsigned mask = 1; mask <= n_subsets; ++mask) {
    CommonalityComponent comp;
    for (std::size_t i = 0; i < p; ++i) {
      if (mask & (1u << i)) comp.subset.push_back(names[i]);
    }
    comp.name = subset_name(names, mask);
    comp.value = c[mask - 1];
    out.subset_r2[comp.name] = r2[mask];
    if (comp.value < -1e-12) out.negative_components.push_back(comp.name);
    out.components.push_back(std::move(comp));
  }
  return out;
}

}  // namespace featnorm

#endif
