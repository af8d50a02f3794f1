#ifndef FEATNORM_VALIDATE_HPP
#define FEATNORM_VALIDATE_HPP

#include <string>
#include <vector>

#include "featnorm/lexicon.hpp"
#include "featnorm/model.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

// Invariant check over a whole norm. Structural rules apply to every norm;
// the canonical-feature surface rules (pronoun start, no commas, ...) only
// describe generated norms, since human norm files carry free-form phrases.
inline std::vector<ValidationIssue> validate_norm(
    const FeatureNorm& norm, const ClosedClassLexicon& lex = default_closed_class()) {
  std::vector<ValidationIssue> issues;
  const NormEntry* prev = nullptr;
  for (const auto& e : norm.entries()) {
    if (e.feature.empty()) {
      issues.push_back({e.concept_id, e.feature, "feature empty"});
      prev = &e;
      continue;
    }
    if (e.frequency < 1 || e.frequency > norm.source_count()) {
      issues.push_back({e.concept_id, e.feature,
                        "frequency " + std::to_string(e.frequency) + " outside [1, " +
                            std::to_string(norm.source_count()) + "]"});
    }
    if (prev && prev->concept_id == e.concept_id && prev->feature == e.feature) {
      issues.push_back({e.concept_id, e.feature, "duplicate (concept, feature) pair"});
    }
    if (!norm.has_concept(e.concept_id)) {
      issues.push_back({e.concept_id, e.feature, "concept_id not in concept list"});
    }
    if (norm.provenance() == Provenance::generated) {
      if (e.feature.find(',') != std::string::npos)
        issues.push_back({e.concept_id, e.feature, "feature contains comma"});
      if (e.feature.find('?') != std::string::npos)
        issues.push_back({e.concept_id, e.feature, "feature contains question mark"});
      if (!is_seven_bit(e.feature))
        issues.push_back({e.concept_id, e.feature, "feature not 7-bit clean"});
      auto tokens = split_whitespace(e.feature);
      if (tokens.size() < 2)
        issues.push_back({e.concept_id, e.feature, "feature has fewer than two tokens"});
      if (!tokens.empty() && !lex.pronouns.count(tokens[0]))
        issues.push_back({e.concept_id, e.feature, "feature does not start with a pronoun"});
    }
    prev = &e;
  }
  return issues;
}

}  // namespace featnorm

#endif
