#ifndef FEATNORM_NORMALIZE_HPP
#define FEATNORM_NORMALIZE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "featnorm/lexicon.hpp"
#include "featnorm/model.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

enum class RemovalReason {
  none,
  single_word,
  tautological,
  no_pronoun_start,
  non_ascii,
  question_mark,
  nonsensical,
};

inline const char* to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::single_word: return "single_word";
    case RemovalReason::tautological: return "tautological";
    case RemovalReason::no_pronoun_start: return "no_pronoun_start";
    case RemovalReason::non_ascii: return "non_ascii";
    case RemovalReason::question_mark: return "question_mark";
    case RemovalReason::nonsensical: return "nonsensical";
    default: return "none";
  }
}

// Outcome of cleaning one raw feature.
struct CleanResult {
  std::string text;  // empty when removed
  RemovalReason removed = RemovalReason::none;
  bool qualifier_stripped = false;
  bool truncated = false;

  bool kept() const { return removed == RemovalReason::none; }
};

// Per-rule impact counters for one normalization pass. Percentages are
// count / denominator; removal, qualifier and truncation rates are over raw
// split features, decomposition over cleaned features, synonym replacement
// over canonical feature instances.
struct NormalizationReport {
  long split_count = 0;
  long removed_nonsensical = 0;
  long removed_single_word = 0;
  long removed_tautological = 0;
  long removed_no_pronoun_start = 0;
  long removed_non_ascii = 0;
  long removed_question_mark = 0;
  long qualifier_stripped_count = 0;
  long truncated_count = 0;
  long decomposed_count = 0;
  long synonym_replaced_count = 0;

  long raw_features = 0;        // denominator: features produced by splitting
  long cleaned_features = 0;    // denominator: features surviving cleaning
  long canonical_instances = 0; // denominator: instances entering synonym collapse

  long removed_total() const {
    return removed_nonsensical + removed_single_word + removed_tautological +
           removed_no_pronoun_start + removed_non_ascii + removed_question_mark;
  }
};

// Splits a completion at commas into trimmed, lowercased raw features.
// Terminal sentence punctuation is dropped, but not question marks: those
// are a removal reason downstream.
inline std::vector<std::string> split_response(std::string_view completion) {
  std::vector<std::string> out;
  for (auto& piece : split(completion, ',')) {
    std::string s = to_lower(trim(piece));
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == ';' || s.back() == ':'))
      s.pop_back();
    s = trim(s);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

// optional determiner + X + copula + optional determiner + X, on content
// words after determiner stripping ("a rose is a rose").
inline bool is_tautology(const std::vector<std::string>& tokens, const ClosedClassLexicon& lex) {
  std::vector<std::string> content;
  content.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!lex.determiners.count(t)) content.push_back(t);
  }
  for (std::size_t i = 1; i + 1 < content.size(); ++i) {
    if (!lex.copulas.count(content[i])) continue;
    if (i != content.size() - 1 - i) return false;  // sides must have equal length
    for (std::size_t j = 0; j < i; ++j) {
      if (content[j] != content[i + 1 + j]) return false;
    }
    return true;
  }
  return false;
}

inline std::string fix_article(const std::string& det, const std::string& next_word) {
  if (det != "a" && det != "an") return det;
  if (next_word.empty()) return det;
  switch (next_word[0]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
    default: return "a";
  }
}

}  // namespace detail

// Applies the removal rules, then qualifier deletion and subordinate-clause
// truncation. Input must already be trimmed and lowercased (split_response
// output).
inline CleanResult clean_feature(const std::string& raw, const ClosedClassLexicon& lex) {
  CleanResult res;
  std::vector<std::string> tokens = split_whitespace(raw);
  if (tokens.size() <= 1) {
    res.removed = RemovalReason::single_word;
    return res;
  }
  if (detail::is_tautology(tokens, lex)) {
    res.removed = RemovalReason::tautological;
    return res;
  }
  if (!lex.pronouns.count(tokens[0])) {
    res.removed = RemovalReason::no_pronoun_start;
    return res;
  }
  if (!is_seven_bit(raw)) {
    res.removed = RemovalReason::non_ascii;
    return res;
  }
  if (raw.find('?') != std::string::npos) {
    res.removed = RemovalReason::question_mark;
    return res;
  }
  bool has_verb = false;
  for (const auto& t : tokens) {
    if (lex.verbs.count(t)) { has_verb = true; break; }
  }
  if (!has_verb) {
    res.removed = RemovalReason::nonsensical;
    return res;
  }

  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (lex.qualifier_adverbs.count(t)) {
      res.qualifier_stripped = true;
    } else {
      kept.push_back(t);
    }
  }
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (lex.subordinators.count(kept[i])) {
      kept.resize(i);
      res.truncated = true;
      break;
    }
  }
  if (kept.size() < 2) {
    // Stripping/truncation degenerated the feature below two tokens; it can
    // no longer satisfy the canonical invariants.
    res.removed = RemovalReason::single_word;
    res.qualifier_stripped = false;
    res.truncated = false;
    return res;
  }
  res.text = join(kept, " ");
  return res;
}

namespace detail {

// copula + determiner + adjective + noun at the end of the feature splits
// into copula+determiner+noun and copula+adjective.
inline std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>>
split_adjective_noun(const std::vector<std::string>& t, const ClosedClassLexicon& lex) {
  for (std::size_t c = 1; c + 3 < t.size(); ++c) {
    if (!lex.copulas.count(t[c])) continue;
    if (c + 4 != t.size()) continue;
    if (!lex.determiners.count(t[c + 1])) continue;
    if (!lex.adjectives.count(t[c + 2])) continue;
    if (!lex.nouns.count(t[c + 3])) continue;
    std::vector<std::string> with_noun(t.begin(), t.begin() + c + 1);
    with_noun.push_back(fix_article(t[c + 1], t[c + 3]));
    with_noun.push_back(t[c + 3]);
    std::vector<std::string> with_adj(t.begin(), t.begin() + c + 1);
    with_adj.push_back(t[c + 2]);
    return std::make_pair(std::move(with_noun), std::move(with_adj));
  }
  return std::nullopt;
}

// Matches a conjunct of the form [det]? [adj]* noun starting at `pos`;
// returns one past its noun, or 0 when it does not match.
inline std::size_t match_noun_conjunct(const std::vector<std::string>& t, std::size_t pos,
                                       const ClosedClassLexicon& lex) {
  if (pos < t.size() && lex.determiners.count(t[pos])) ++pos;
  while (pos < t.size() && lex.adjectives.count(t[pos])) ++pos;
  if (pos < t.size() && lex.nouns.count(t[pos])) return pos + 1;
  return 0;
}

// Coordinated adjectives or nouns around a coordinator split into one
// feature per conjunct with the shared prefix copied. The tail after the
// coordinator must itself be a chain of same-class conjuncts, otherwise no
// split happens.
inline std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>>
split_coordination(const std::vector<std::string>& t, const ClosedClassLexicon& lex) {
  for (std::size_t i = 2; i + 1 < t.size(); ++i) {
    if (!lex.coordinators.count(t[i])) continue;

    // adjective class: ... adj and adj ("and" adj)*
    if (lex.adjectives.count(t[i - 1])) {
      bool chain_ok = true;
      for (std::size_t j = i + 1; j < t.size(); j += 2) {
        if (!lex.adjectives.count(t[j]) ||
            (j + 1 < t.size() && !lex.coordinators.count(t[j + 1])) || j + 2 == t.size()) {
          chain_ok = false;
          break;
        }
      }
      if (!chain_ok) continue;
      std::vector<std::string> left(t.begin(), t.begin() + i);
      std::vector<std::string> right(t.begin(), t.begin() + i - 1);
      right.insert(right.end(), t.begin() + i + 1, t.end());
      return std::make_pair(std::move(left), std::move(right));
    }

    // noun class: ... [det]? [adj]* noun and conjunct ("and" conjunct)*
    if (lex.nouns.count(t[i - 1])) {
      std::size_t left_start = i - 1;
      while (left_start > 1 && lex.adjectives.count(t[left_start - 1])) --left_start;
      if (left_start > 1 && lex.determiners.count(t[left_start - 1])) --left_start;
      if (left_start < 1) continue;
      bool chain_ok = true;
      std::size_t pos = i + 1;
      while (true) {
        std::size_t end = match_noun_conjunct(t, pos, lex);
        if (end == 0) {
          chain_ok = false;
          break;
        }
        if (end == t.size()) break;
        if (!lex.coordinators.count(t[end]) || end + 1 == t.size()) {
          chain_ok = false;
          break;
        }
        pos = end + 1;
      }
      if (!chain_ok) continue;
      std::vector<std::string> left(t.begin(), t.begin() + i);
      std::vector<std::string> right(t.begin(), t.begin() + left_start);
      right.insert(right.end(), t.begin() + i + 1, t.end());
      return std::make_pair(std::move(left), std::move(right));
    }
  }
  return std::nullopt;
}

inline void decompose_tokens(const std::vector<std::string>& tokens,
                             const ClosedClassLexicon& lex,
                             std::vector<std::string>& out) {
  if (auto co = split_coordination(tokens, lex)) {
    decompose_tokens(co->first, lex, out);
    decompose_tokens(co->second, lex, out);
    return;
  }
  if (auto an = split_adjective_noun(tokens, lex)) {
    decompose_tokens(an->first, lex, out);
    decompose_tokens(an->second, lex, out);
    return;
  }
  out.push_back(join(tokens, " "));
}

}  // namespace detail

// Recursively extracts nested units of information; features matching no
// pattern pass through unchanged. Unknown words never split (wrong splits
// corrupt features, missed splits are only sparsity).
inline std::vector<std::string> decompose_feature(const std::string& cleaned,
                                                  const ClosedClassLexicon& lex) {
  std::vector<std::string> out;
  detail::decompose_tokens(split_whitespace(cleaned), lex, out);
  return out;
}

struct NormalizeOptions {
  // fall back to the singular form when a plural surface form has no synset
  bool plural_fold = false;
  // collapse synonyms within each concept instead of corpus-wide
  bool collapse_per_concept = false;
};

namespace detail {

inline const std::string* top_synset_folded(const SynsetLexicon& syn, const std::string& w,
                                            bool plural_fold) {
  if (const std::string* t = syn.top_synset(w)) return t;
  if (plural_fold && w.size() > 1 && w.back() == 's')
    return syn.top_synset(w.substr(0, w.size() - 1));
  return nullptr;
}

}  // namespace detail

// Rewrite plan mapping collapsed feature texts to their synonym-group
// winner. Candidate pairs are identical except for one content word whose
// top synset matches; the less frequent feature (ties: lexicographically
// larger) is rewritten to the more frequent one. Single pass, so rewrites
// never chain across groups.
inline std::map<std::string, std::string> build_synonym_rewrites(
    const std::map<std::string, long>& counts, const ClosedClassLexicon& cls,
    const SynsetLexicon& syn, bool plural_fold = false) {
  // bucket key: tokens with a/an folded and one content position wildcarded
  std::map<std::string, std::map<std::string, std::vector<std::string>>> groups;
  for (const auto& [feature, n] : counts) {
    (void)n;
    auto tokens = split_whitespace(feature);
    std::vector<std::string> folded = tokens;
    for (auto& t : folded) {
      if (t == "an") t = "a";
    }
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      if (cls.is_function_word(tokens[p])) continue;
      const std::string* top = detail::top_synset_folded(syn, tokens[p], plural_fold);
      if (!top) continue;
      std::string saved = folded[p];
      folded[p] = "\x01";
      groups[join(folded, " ")][*top].push_back(feature);
      folded[p] = saved;
    }
  }

  std::map<std::string, std::string> rewrites;
  std::set<std::string> winners;
  for (auto& [key, by_synset] : groups) {
    (void)key;
    for (auto& [synset, members] : by_synset) {
      (void)synset;
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      std::vector<std::string> alive;
      for (const auto& f : members) {
        if (!rewrites.count(f)) alive.push_back(f);
      }
      if (alive.size() < 2) continue;
      std::string winner = alive.front();
      for (const auto& f : alive) {
        const long best = counts.at(winner), cur = counts.at(f);
        if (cur > best || (cur == best && f < winner)) winner = f;
      }
      for (const auto& f : alive) {
        if (f != winner && !winners.count(f)) rewrites[f] = winner;
      }
      winners.insert(winner);
    }
  }
  return rewrites;
}

// Collapses synonymous features in a frequency-weighted multiset; returns
// the collapsed multiset and the number of rewritten instances.
inline std::pair<std::map<std::string, long>, long> collapse_synonyms(
    const std::map<std::string, long>& counts, const ClosedClassLexicon& cls,
    const SynsetLexicon& syn, bool plural_fold = false) {
  auto rewrites = build_synonym_rewrites(counts, cls, syn, plural_fold);
  std::map<std::string, long> out;
  long replaced = 0;
  for (const auto& [feature, n] : counts) {
    auto it = rewrites.find(feature);
    if (it == rewrites.end()) {
      out[feature] += n;
    } else {
      out[it->second] += n;
      replaced += n;
    }
  }
  return {std::move(out), replaced};
}

// One raw completion to normalize, identified by concept and run.
struct CorpusItem {
  std::string concept_id;
  int run_id = 0;
  std::string completion;
};

// Full pipeline: split, clean, decompose, corpus-wide synonym collapse,
// per-(concept, run) deduplication, production frequency = number of runs
// producing the feature. Output is independent of item order.
inline std::pair<FeatureNorm, NormalizationReport> normalize_corpus(
    std::vector<CorpusItem> corpus, const ClosedClassLexicon& cls, const SynsetLexicon& syn,
    const NormalizeOptions& opts = {}) {
  std::sort(corpus.begin(), corpus.end(), [](const CorpusItem& a, const CorpusItem& b) {
    if (a.concept_id != b.concept_id) return a.concept_id < b.concept_id;
    if (a.run_id != b.run_id) return a.run_id < b.run_id;
    return a.completion < b.completion;
  });

  NormalizationReport report;
  struct Instance {
    std::string concept_id;
    int run_id;
    std::string feature;
  };
  std::vector<Instance> instances;
  std::set<std::string> concept_ids;
  std::set<int> run_ids;

  for (const auto& item : corpus) {
    concept_ids.insert(item.concept_id);
    run_ids.insert(item.run_id);
    for (const auto& raw : split_response(item.completion)) {
      ++report.split_count;
      CleanResult cleaned = clean_feature(raw, cls);
      switch (cleaned.removed) {
        case RemovalReason::none: break;
        case RemovalReason::single_word: ++report.removed_single_word; continue;
        case RemovalReason::tautological: ++report.removed_tautological; continue;
        case RemovalReason::no_pronoun_start: ++report.removed_no_pronoun_start; continue;
        case RemovalReason::non_ascii: ++report.removed_non_ascii; continue;
        case RemovalReason::question_mark: ++report.removed_question_mark; continue;
        case RemovalReason::nonsensical: ++report.removed_nonsensical; continue;
      }
      if (cleaned.qualifier_stripped) ++report.qualifier_stripped_count;
      if (cleaned.truncated) ++report.truncated_count;
      ++report.cleaned_features;
      auto parts = decompose_feature(cleaned.text, cls);
      if (parts.size() > 1) ++report.decomposed_count;
      for (auto& p : parts) instances.push_back({item.concept_id, item.run_id, std::move(p)});
    }
  }
  report.raw_features = report.split_count;
  report.canonical_instances = static_cast<long>(instances.size());

  if (opts.collapse_per_concept) {
    std::map<std::string, std::map<std::string, long>> counts;
    for (const auto& inst : instances) ++counts[inst.concept_id][inst.feature];
    std::map<std::string, std::map<std::string, std::string>> rewrites;
    for (const auto& [concept_id, c] : counts)
      rewrites[concept_id] = build_synonym_rewrites(c, cls, syn, opts.plural_fold);
    for (auto& inst : instances) {
      const auto& r = rewrites[inst.concept_id];
      auto it = r.find(inst.feature);
      if (it != r.end()) {
        inst.feature = it->second;
        ++report.synonym_replaced_count;
      }
    }
  } else {
    std::map<std::string, long> counts;
    for (const auto& inst : instances) ++counts[inst.feature];
    auto rewrites = build_synonym_rewrites(counts, cls, syn, opts.plural_fold);
    for (auto& inst : instances) {
      auto it = rewrites.find(inst.feature);
      if (it != rewrites.end()) {
        inst.feature = it->second;
        ++report.synonym_replaced_count;
      }
    }
  }

  // per-(concept, run) dedup, then frequency = number of distinct runs
  std::set<std::tuple<std::string, int, std::string>> dedup;
  for (const auto& inst : instances) dedup.insert({inst.concept_id, inst.run_id, inst.feature});
  std::map<std::pair<std::string, std::string>, int> freq;
  for (const auto& [concept_id, run, feature] : dedup) {
    (void)run;
    ++freq[{concept_id, feature}];
  }

  std::vector<NormEntry> entries;
  entries.reserve(freq.size());
  for (const auto& [key, n] : freq) entries.push_back({key.first, key.second, n});
  FeatureNorm norm(std::move(entries), static_cast<int>(run_ids.size()), Provenance::generated,
                   std::vector<std::string>(concept_ids.begin(), concept_ids.end()));
  return {std::move(norm), report};
}

}  // namespace featnorm

#endif
