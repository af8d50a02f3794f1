// featnorm: elicit semantic feature norms from a text-completion model,
// normalize them into canonical norms, and run the comparison analyses.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "featnorm/analysis.hpp"
#include "featnorm/elicitation.hpp"
#include "featnorm/evaluation.hpp"
#include "featnorm/http_backend.hpp"
#include "featnorm/io.hpp"
#include "featnorm/lexicon.hpp"
#include "featnorm/matrix.hpp"
#include "featnorm/model.hpp"
#include "featnorm/normalize.hpp"
#include "featnorm/validate.hpp"

namespace fs = std::filesystem;
using namespace featnorm;

namespace {

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// Loads a norm from the canonical format (with .meta sidecar) or a known
// external format, sniffing the header when no preset is forced.
FeatureNorm load_any_norm(const std::string& path, const std::string& preset,
                          std::vector<std::string>* warnings = nullptr) {
  const std::string content = read_file(path);
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty norm file: " + path);
  std::string forced = preset;
  if (forced.empty()) {
    if (lines[0] == "concept_id\tfeature\tfrequency" && fs::exists(path + ".meta")) {
      return load_norm(path);
    }
    auto has = [&](const char* name) {
      for (const auto& h : split(lines[0], detail::detect_delimiter(lines[0]))) {
        if (trim(h) == name) return true;
      }
      return false;
    };
    if (has("Prod_Freq")) {
      forced = "mcrae";
    } else if (has("pf")) {
      forced = "cslb";
    } else if (lines[0] == "concept_id\tfeature\tfrequency") {
      forced = "canonical";
    } else {
      throw ParseError("cannot identify norm format of " + path +
                       "; pass --preset {mcrae,cslb,canonical}");
    }
  } else if (forced == "canonical" && fs::exists(path + ".meta")) {
    return load_norm(path);
  }
  auto parsed = parse_norm_file(content, norm_preset(forced));
  if (warnings) *warnings = parsed.warnings;
  return parsed.norm;
}

ClosedClassLexicon load_closed_class(const std::string& path) {
  if (path.empty()) return default_closed_class();
  return parse_closed_class_text(read_file(path));
}

SynsetLexicon load_synsets(const std::string& path) {
  if (path.empty()) return bundled_synsets();
  return parse_synset_lexicon_text(read_file(path));
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::vector<std::string> ids;
  for (const auto& line : read_lines(read_file(path))) {
    std::string t = to_lower(trim(line));
    if (!t.empty() && t[0] != '#') ids.push_back(t);
  }
  return ids;
}

// Concepts of a norm that can carry a similarity row (at least one entry).
std::vector<std::string> nonempty_concepts(const FeatureNorm& norm) {
  std::vector<std::string> ids;
  auto empty = norm.empty_concepts();
  std::set<std::string> skip(empty.begin(), empty.end());
  for (const auto& id : norm.concept_ids()) {
    if (!skip.count(id)) ids.push_back(id);
  }
  return ids;
}

SimilarityMatrix norm_similarity(const FeatureNorm& norm, const std::vector<std::string>& ids) {
  return cosine_similarity_matrix(build_matrix(norm, ids));
}

std::string format_percent(double share) { return format_fixed(100.0 * share, 2) + "%"; }

// Either a concepts TSV (id/name/disambiguator/categories) or a two-column
// concept_id<TAB>category file.
CategoryScheme load_categories(const std::string& path) {
  auto content = read_file(path);
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty categories file");
  if (lines[0] == "concept_id\tcategory") {
    CategoryScheme scheme;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      auto fields = split(lines[i], '\t');
      if (fields.size() != 2) throw ParseError("expected concept_id<TAB>category", long(i + 1));
      scheme[to_lower(trim(fields[1]))].insert(to_lower(trim(fields[0])));
    }
    return scheme;
  }
  return category_scheme_from_concepts(parse_concepts(content));
}

int run_elicit(const std::string& concepts_path, const std::string& example_norm_path,
               const std::string& example_preset, int runs, const std::string& backend_name,
               const std::string& replay_store, const std::string& stub_completion,
               const std::string& out_dir, std::uint64_t seed, int examples_per_prompt,
               int features_per_example, const std::string& model, const std::string& endpoint,
               std::optional<double> temperature, std::optional<int> max_tokens,
               double rate_limit, int parallel, const std::string& question_format,
               const std::string& answer_prefix) {
  auto concepts = parse_concepts(read_file(concepts_path));
  auto example_norm = load_any_norm(example_norm_path, example_preset);
  auto pool = priming_pool_from_norm(example_norm, concepts,
                                     static_cast<std::size_t>(features_per_example));

  PromptTemplate tpl;
  if (!question_format.empty()) tpl.question_format = question_format;
  if (!answer_prefix.empty()) tpl.answer_prefix = answer_prefix;
  tpl.examples_per_prompt = examples_per_prompt;
  tpl.validate();

  ElicitOptions opts;
  opts.parallel_requests = parallel;
  opts.params.model = model;
  opts.params.temperature = temperature.value_or(0.0);
  opts.params.max_tokens = max_tokens.value_or(0);

  std::unique_ptr<CompletionBackend> inner;
  if (backend_name == "stub") {
    inner = stub_completion.empty() ? std::make_unique<StubBackend>()
                                    : std::make_unique<StubBackend>(stub_completion);
    if (model.empty()) opts.params.model = "stub";
  } else if (backend_name == "replay") {
    if (replay_store.empty()) throw ArgError("--backend replay needs --replay-store");
    auto replay = std::make_unique<ReplayBackend>();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(replay_store)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      for (const auto& r : parse_responses(read_file(f))) replay->add(r.prompt_hash, r.completion);
    }
    if (replay->size() == 0)
      throw ArgError("replay store " + replay_store + " holds no responses");
    inner = std::move(replay);
    if (model.empty()) opts.params.model = "replay";
  } else if (backend_name == "live") {
    // sampling parameters are deliberate choices; no hidden defaults
    if (model.empty() || !temperature.has_value() || !max_tokens.has_value() || endpoint.empty())
      throw ArgError("--backend live requires --model, --endpoint, --temperature, --max-tokens");
    HttpBackendConfig cfg;
    cfg.endpoint = endpoint;
    cfg.requests_per_minute = rate_limit;
    inner = std::make_unique<HttpBackend>(cfg);
  } else {
    throw ArgError("unknown backend: " + backend_name);
  }
  CachingBackend backend(*inner);

  std::size_t total = 0;
  auto sink = [&](const RunSpec& run, const std::vector<RawResponse>& responses) {
    write_file(fs::path(out_dir) / ("run_" + std::to_string(run.run_id) + ".jsonl"),
               serialize_responses(responses));
    total += responses.size();
  };
  elicit_norm(concepts, runs, pool, tpl, backend, seed, opts, sink);
  std::cout << "elicited " << total << " responses over " << runs << " runs into " << out_dir
            << "\n";
  return 0;
}

nlohmann::ordered_json report_json(const NormalizationReport& r) {
  auto pct = [](long count, long denom) {
    return denom > 0 ? 100.0 * double(count) / double(denom) : 0.0;
  };
  nlohmann::ordered_json j;
  j["split_count"] = r.split_count;
  j["removed_nonsensical"] = r.removed_nonsensical;
  j["removed_single_word"] = r.removed_single_word;
  j["removed_tautological"] = r.removed_tautological;
  j["removed_no_pronoun_start"] = r.removed_no_pronoun_start;
  j["removed_non_ascii"] = r.removed_non_ascii;
  j["removed_question_mark"] = r.removed_question_mark;
  j["qualifier_stripped_count"] = r.qualifier_stripped_count;
  j["truncated_count"] = r.truncated_count;
  j["decomposed_count"] = r.decomposed_count;
  j["synonym_replaced_count"] = r.synonym_replaced_count;
  j["denominators"] = {{"raw_features", r.raw_features},
                       {"cleaned_features", r.cleaned_features},
                       {"canonical_instances", r.canonical_instances}};
  j["percentages"] = {
      {"removed_nonsensical", pct(r.removed_nonsensical, r.raw_features)},
      {"removed_single_word", pct(r.removed_single_word, r.raw_features)},
      {"removed_tautological", pct(r.removed_tautological, r.raw_features)},
      {"removed_no_pronoun_start", pct(r.removed_no_pronoun_start, r.raw_features)},
      {"removed_non_ascii", pct(r.removed_non_ascii, r.raw_features)},
      {"removed_question_mark", pct(r.removed_question_mark, r.raw_features)},
      {"qualifier_stripped", pct(r.qualifier_stripped_count, r.raw_features)},
      {"truncated", pct(r.truncated_count, r.raw_features)},
      {"decomposed", pct(r.decomposed_count, r.cleaned_features)},
      {"synonym_replaced", pct(r.synonym_replaced_count, r.canonical_instances)},
  };
  return j;
}

int run_normalize(const std::vector<std::string>& corpus_paths, const std::string& out_dir,
                  const std::string& lexicon_path, const std::string& synsets_path,
                  bool plural_fold, bool per_concept) {
  std::vector<CorpusItem> corpus;
  for (const auto& path : corpus_paths) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    for (const auto& f : files) {
      for (const auto& r : parse_responses(read_file(f)))
        corpus.push_back({r.concept_id, r.run_id, r.completion});
    }
  }
  if (corpus.empty()) throw ArgError("no corpus responses found");

  auto cls = load_closed_class(lexicon_path);
  auto syn = load_synsets(synsets_path);
  NormalizeOptions opts;
  opts.plural_fold = plural_fold;
  opts.collapse_per_concept = per_concept;
  auto [norm, report] = normalize_corpus(corpus, cls, syn, opts);

  save_norm(norm, fs::path(out_dir) / "norm.tsv");
  write_file(fs::path(out_dir) / "report.json", report_json(report).dump(2) + "\n");
  auto stats = descriptive_stats(norm);
  std::cout << "normalized " << report.split_count << " raw features into "
            << stats.total_features << " entries (" << stats.n_unique_features << " unique) for "
            << stats.n_concepts << " concepts\n";
  return 0;
}

int run_filter(const std::string& norm_path, const std::string& preset, const std::string& k_arg,
               int k_max, const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  int k = 0;
  if (k_arg == "auto") {
    auto curve = unique_feature_curve(norm, k_max);
    std::string curve_tsv = "k\tn_unique\n";
    for (const auto& [kk, n] : curve)
      curve_tsv += std::to_string(kk) + "\t" + std::to_string(n) + "\n";
    write_file(fs::path(out_dir) / "unique_feature_curve.tsv", curve_tsv);
    k = elbow_point(curve);
  } else {
    k = static_cast<int>(detail::parse_int(k_arg, 0));
  }
  auto filtered = filter_infrequent(norm, {k});
  save_norm(filtered, fs::path(out_dir) / "filtered.tsv");
  std::cout << "k=" << k << (k_arg == "auto" ? " (elbow)" : "") << "; kept "
            << filtered.entries().size() << " of " << norm.entries().size() << " entries; "
            << filtered.empty_concepts().size() << " concepts left empty\n";
  return 0;
}

int run_stats(const std::string& norm_path, const std::string& preset,
              const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  auto s = descriptive_stats(norm);
  std::cout << "concepts=" << s.n_concepts << " total_features=" << s.total_features
            << " unique_features=" << s.n_unique_features
            << " features_per_concept=" << format_fixed(s.features_per_concept, 2)
            << " unique_share=" << format_percent(s.unique_share) << "\n";
  if (!out_dir.empty()) {
    std::string tsv =
        "n_concepts\ttotal_features\tn_unique_features\tfeatures_per_concept\tunique_share\n" +
        std::to_string(s.n_concepts) + "\t" + std::to_string(s.total_features) + "\t" +
        std::to_string(s.n_unique_features) + "\t" + format_double(s.features_per_concept) +
        "\t" + format_double(s.unique_share) + "\n";
    write_file(fs::path(out_dir) / "stats.tsv", tsv);
  }
  return 0;
}

int run_similarity(const std::string& norm_path, const std::string& preset,
                   const std::string& subset_path, const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  auto ids = subset_path.empty() ? nonempty_concepts(norm) : read_id_list(subset_path);
  auto s = norm_similarity(norm, ids);
  write_file(fs::path(out_dir) / "similarity.tsv", serialize_similarity(s));
  std::cout << "similarity matrix over " << s.size() << " concepts -> "
            << (fs::path(out_dir) / "similarity.tsv").string() << "\n";
  return 0;
}

int run_cluster(const std::string& norm_path, const std::string& preset,
                const std::string& subset_path, const std::string& linkage_name,
                const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  auto ids = subset_path.empty() ? nonempty_concepts(norm) : read_id_list(subset_path);
  auto s = norm_similarity(norm, ids);
  auto d = hierarchical_cluster(s, linkage_from_string(linkage_name));
  write_file(fs::path(out_dir) / "dendrogram.json", serialize_dendrogram(d));
  std::cout << d.merges.size() << " merges over " << ids.size() << " concepts (linkage "
            << linkage_name << ") -> " << (fs::path(out_dir) / "dendrogram.json").string()
            << "\n";
  return 0;
}

int run_category_score(const std::string& norm_path, const std::string& preset,
                       const std::string& categories_path, std::size_t bootstrap,
                       std::uint64_t seed, const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  auto scheme = load_categories(categories_path);
  auto ids = nonempty_concepts(norm);
  auto s = norm_similarity(norm, ids);
  auto score = within_minus_between(s, scheme, bootstrap, seed);

  std::string cat_tsv = "category\tmean\tci_low\tci_high\n";
  for (const auto& c : score.per_category) {
    cat_tsv += c.category + "\t" + format_double(c.mean) + "\t" + format_double(c.ci_low) +
               "\t" + format_double(c.ci_high) + "\n";
  }
  write_file(fs::path(out_dir) / "category_scores.tsv", cat_tsv);
  std::string con_tsv = "concept_id\tcategory\tscore\n";
  for (const auto& c : score.per_concept) {
    con_tsv += c.concept_id + "\t" + c.category + "\t" + format_double(c.score) + "\n";
  }
  write_file(fs::path(out_dir) / "concept_scores.tsv", con_tsv);
  std::cout << score.per_category.size() << " categories scored over " << ids.size()
            << " concepts -> " << (fs::path(out_dir) / "category_scores.tsv").string() << "\n";
  return 0;
}

int run_evaluate(const std::string& norm_path, const std::string& preset,
                 const std::vector<std::string>& benchmarks,
                 const std::vector<std::string>& benchmark_presets,
                 const std::string& reference_path, const std::string& concepts_path,
                 const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  std::vector<Concept> concepts;
  if (!concepts_path.empty()) concepts = parse_concepts(read_file(concepts_path));

  auto ids = nonempty_concepts(norm);
  auto s = norm_similarity(norm, ids);

  std::string tsv = "benchmark\tkind\tr\tn\n";
  std::vector<std::string> summaries;
  for (std::size_t i = 0; i < benchmarks.size(); ++i) {
    const std::string preset_name =
        i < benchmark_presets.size() ? benchmark_presets[i] : "generic";
    auto bench = parse_benchmark(read_file(benchmarks[i]), benchmark_preset(preset_name));
    auto res = pair_correlation(s, bench, concepts);
    const std::string kind =
        bench.kind == BenchmarkKind::similarity ? "similarity" : "relatedness";
    tsv += stem_of(benchmarks[i]) + "\t" + kind + "\t" + format_double(res.r) + "\t" +
           std::to_string(res.n_overlapping_pairs) + "\n";
    summaries.push_back(stem_of(benchmarks[i]) + ": r=" + format_fixed(res.r, 4) +
                        ", n=" + std::to_string(res.n_overlapping_pairs));
    if (!res.unresolved_words.empty()) {
      std::cerr << "note: " << res.unresolved_words.size() << " benchmark words unmatched in "
                << stem_of(benchmarks[i]) << "\n";
    }
  }
  if (!reference_path.empty()) {
    auto ref = parse_similarity(read_file(reference_path));
    std::vector<std::string> shared;
    std::set<std::string> ref_ids(ref.ids().begin(), ref.ids().end());
    for (const auto& id : ids) {
      if (ref_ids.count(id)) shared.push_back(id);
    }
    if (shared.size() < 3) throw ArgError("fewer than 3 concepts shared with the reference");
    auto res = matrix_correlation(norm_similarity(norm, shared), ref.subset(shared));
    tsv += stem_of(reference_path) + "\tmatrix\t" + format_double(res.r) + "\t" +
           std::to_string(shared.size()) + "\n";
    summaries.push_back(stem_of(reference_path) + ": r=" + format_fixed(res.r, 4) +
                        ", n=" + std::to_string(shared.size()) + " concepts (" +
                        std::to_string(res.n) + " pairs)");
  }
  if (!out_dir.empty()) write_file(fs::path(out_dir) / "evaluation.tsv", tsv);
  for (const auto& line : summaries) std::cout << line << "\n";
  if (summaries.empty()) std::cout << "nothing to evaluate; pass --benchmark or --reference\n";
  return 0;
}

int run_partition(const std::string& reference_path, const std::vector<std::string>& norm_paths,
                  const std::vector<std::string>& names_arg, const std::string& preset,
                  const std::string& out_dir) {
  if (norm_paths.size() < 2 || norm_paths.size() > 3)
    throw ArgError("partition needs 2 or 3 --norm files");
  auto ref = parse_similarity(read_file(reference_path));

  std::vector<FeatureNorm> norms;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < norm_paths.size(); ++i) {
    norms.push_back(load_any_norm(norm_paths[i], preset));
    names.push_back(i < names_arg.size() ? names_arg[i] : stem_of(norm_paths[i]));
  }

  std::set<std::string> shared_set(ref.ids().begin(), ref.ids().end());
  for (const auto& n : norms) {
    std::set<std::string> keep;
    for (const auto& id : nonempty_concepts(n)) {
      if (shared_set.count(id)) keep.insert(id);
    }
    shared_set = std::move(keep);
  }
  std::vector<std::string> shared(shared_set.begin(), shared_set.end());
  if (shared.size() < 3) throw ArgError("fewer than 3 concepts shared across all inputs");

  auto target = lower_triangle(ref.subset(shared));
  std::vector<std::vector<double>> predictors;
  for (const auto& n : norms) predictors.push_back(lower_triangle(norm_similarity(n, shared)));

  auto emit = [&](const std::vector<std::size_t>& pick) {
    std::vector<std::string> sub_names;
    std::vector<std::vector<double>> sub_preds;
    for (auto i : pick) {
      sub_names.push_back(names[i]);
      sub_preds.push_back(predictors[i]);
    }
    auto d = commonality_analysis(target, sub_names, sub_preds);
    std::string file = "partition_" + join(sub_names, "_") + ".json";
    write_file(fs::path(out_dir) / file, serialize_decomposition(d));
    std::cout << join(sub_names, "+") << ": R2=" << format_fixed(d.full_r2, 4) << " over "
              << shared.size() << " shared concepts -> " << file;
    if (!d.negative_components.empty())
      std::cout << " (warning: negative components " << join(d.negative_components, ", ") << ")";
    std::cout << "\n";
  };

  if (norms.size() == 2) {
    emit({0, 1});
  } else {
    // both pairwise decompositions and the full three-way one
    emit({0, 1});
    emit({0, 2});
    emit({1, 2});
    emit({0, 1, 2});
  }
  return 0;
}

int run_sample_labels(const std::string& norm_path, const std::string& preset,
                      const std::string& inside_path, std::size_t n, std::uint64_t seed,
                      const std::string& source, const std::string& out_dir) {
  auto norm = load_any_norm(norm_path, preset);
  auto inside_ids = read_id_list(inside_path);
  std::set<std::string> inside(inside_ids.begin(), inside_ids.end());
  std::set<std::string> outside;
  for (const auto& id : norm.concept_ids()) {
    if (!inside.count(id)) outside.insert(id);
  }
  const std::string src = source.empty() ? stem_of(norm_path) : source;
  auto sample = sample_for_labeling(norm, inside, outside, n, src, seed);
  write_file(fs::path(out_dir) / "label_sample.tsv", serialize_label_sample(sample));
  std::cout << "sampled " << sample.size() << " features (" << n << " per stratum) -> "
            << (fs::path(out_dir) / "label_sample.tsv").string() << "\n";
  return 0;
}

int run_label_dist(const std::string& sample_path, std::size_t bootstrap, std::uint64_t seed,
                   const std::string& out_dir) {
  auto sample = parse_label_sample(read_file(sample_path));
  std::map<std::string, LabelSample> by_source;
  for (const auto& r : sample) by_source[r.source].push_back(r);

  std::string tsv = "source\tlabel\tproportion\tci_low\tci_high\n";
  for (const auto& [source, records] : by_source) {
    auto dist = label_distribution(records, bootstrap, seed);
    for (const auto& p : dist) {
      tsv += source + "\t" + p.label + "\t" + format_double(p.proportion) + "\t" +
             format_double(p.ci_low) + "\t" + format_double(p.ci_high) + "\n";
    }
  }
  write_file(fs::path(out_dir) / "label_distribution.tsv", tsv);
  std::cout << by_source.size() << " source(s), " << sample.size() << " records -> "
            << (fs::path(out_dir) / "label_distribution.tsv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic feature norm toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; flags win over file values");

  auto* elicit = app.add_subcommand("elicit", "query a completion backend for raw features");
  std::string el_concepts, el_example_norm, el_example_preset, el_backend = "stub";
  std::string el_replay_store, el_stub_completion, el_out, el_model, el_endpoint;
  std::string el_question_format, el_answer_prefix;
  int el_runs = 30, el_examples_per_prompt = 3, el_features_per_example = 5, el_parallel = 1;
  std::uint64_t el_seed = 0;
  std::optional<double> el_temperature;
  std::optional<int> el_max_tokens;
  double el_rate_limit = 60.0;
  elicit->add_option("--concepts", el_concepts, "concept list TSV")
      ->required()
      ->check(CLI::ExistingFile);
  elicit->add_option("--example-norm", el_example_norm, "human norm for priming examples")
      ->required()
      ->check(CLI::ExistingFile);
  elicit->add_option("--example-preset", el_example_preset,
                     "column preset of the example norm (mcrae|cslb|canonical)");
  elicit->add_option("--runs", el_runs, "number of elicitation runs")
      ->check(CLI::PositiveNumber);
  elicit->add_option("--backend", el_backend, "completion backend")
      ->check(CLI::IsMember({"live", "replay", "stub"}));
  elicit->add_option("--replay-store", el_replay_store, "directory of recorded run_*.jsonl");
  elicit->add_option("--stub-completion", el_stub_completion, "fixed stub completion text");
  elicit->add_option("--out", el_out, "output directory")->required();
  elicit->add_option("--seed", el_seed, "root seed for example sampling");
  elicit->add_option("--examples-per-prompt", el_examples_per_prompt)
      ->check(CLI::PositiveNumber);
  elicit->add_option("--features-per-example", el_features_per_example)
      ->check(CLI::PositiveNumber);
  elicit->add_option("--model", el_model, "completion model name");
  elicit->add_option("--endpoint", el_endpoint, "completion API URL");
  elicit->add_option("--temperature", el_temperature, "sampling temperature");
  elicit->add_option("--max-tokens", el_max_tokens, "completion token budget");
  elicit->add_option("--rate-limit", el_rate_limit, "requests per minute for the live backend");
  elicit->add_option("--parallel", el_parallel, "concurrent requests within a run")
      ->check(CLI::PositiveNumber);
  elicit->add_option("--question-format", el_question_format,
                     "question template with one {} concept slot");
  elicit->add_option("--answer-prefix", el_answer_prefix, "answer prefix, default 'A:'");

  auto* normalize = app.add_subcommand("normalize", "raw corpus to canonical feature norm");
  std::vector<std::string> no_corpus;
  std::string no_out, no_lexicon, no_synsets;
  bool no_plural_fold = false, no_per_concept = false;
  normalize->add_option("--corpus", no_corpus, "corpus JSONL files or directories")
      ->required()
      ->check(CLI::ExistingPath);
  normalize->add_option("--out", no_out, "output directory")->required();
  normalize->add_option("--lexicon", no_lexicon, "closed-class lexicon file")
      ->check(CLI::ExistingFile);
  normalize->add_option("--synsets", no_synsets, "synset lexicon (TSV or WordNet index)")
      ->check(CLI::ExistingFile);
  normalize->add_flag("--plural-fold", no_plural_fold,
                      "fold plural surface forms in synonym lookup");
  normalize->add_flag("--per-concept-collapse", no_per_concept,
                      "collapse synonyms within each concept instead of corpus-wide");

  auto* filter = app.add_subcommand("filter", "drop infrequent features");
  std::string fi_norm, fi_preset, fi_k = "auto", fi_out;
  int fi_k_max = 20;
  filter->add_option("--norm", fi_norm, "norm TSV")->required()->check(CLI::ExistingFile);
  filter->add_option("--preset", fi_preset, "norm column preset");
  filter->add_option("--k", fi_k, "frequency cutoff, integer or 'auto'");
  filter->add_option("--k-max", fi_k_max, "curve extent for the elbow search")
      ->check(CLI::Range(3, 1000));
  filter->add_option("--out", fi_out, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "descriptive statistics of a norm");
  std::string st_norm, st_preset, st_out;
  stats->add_option("--norm", st_norm, "norm file")->required()->check(CLI::ExistingFile);
  stats->add_option("--preset", st_preset, "norm column preset");
  stats->add_option("--out", st_out, "optional output directory");

  auto* similarity = app.add_subcommand("similarity", "cosine similarity matrix");
  std::string si_norm, si_preset, si_subset, si_out;
  similarity->add_option("--norm", si_norm)->required()->check(CLI::ExistingFile);
  similarity->add_option("--preset", si_preset, "norm column preset");
  similarity->add_option("--subset", si_subset, "file of concept ids to restrict/order rows")
      ->check(CLI::ExistingFile);
  similarity->add_option("--out", si_out, "output directory")->required();

  auto* cluster = app.add_subcommand("cluster", "agglomerative clustering of concepts");
  std::string cl_norm, cl_preset, cl_subset, cl_linkage = "average", cl_out;
  cluster->add_option("--norm", cl_norm)->required()->check(CLI::ExistingFile);
  cluster->add_option("--preset", cl_preset, "norm column preset");
  cluster->add_option("--subset", cl_subset)->check(CLI::ExistingFile);
  cluster->add_option("--linkage", cl_linkage)
      ->check(CLI::IsMember({"single", "complete", "average"}));
  cluster->add_option("--out", cl_out, "output directory")->required();

  auto* catscore = app.add_subcommand("category-score", "within minus between category scores");
  std::string cs_norm, cs_preset, cs_categories, cs_out;
  std::size_t cs_bootstrap = 1000;
  std::uint64_t cs_seed = 0;
  catscore->add_option("--norm", cs_norm)->required()->check(CLI::ExistingFile);
  catscore->add_option("--preset", cs_preset, "norm column preset");
  catscore
      ->add_option("--categories", cs_categories, "concepts TSV or concept_id<TAB>category file")
      ->required()
      ->check(CLI::ExistingFile);
  catscore->add_option("--bootstrap", cs_bootstrap, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  catscore->add_option("--seed", cs_seed);
  catscore->add_option("--out", cs_out, "output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "benchmark and reference correlations");
  std::string ev_norm, ev_preset, ev_reference, ev_concepts, ev_out;
  std::vector<std::string> ev_benchmarks, ev_benchmark_presets;
  evaluate->add_option("--norm", ev_norm)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--preset", ev_preset, "norm column preset");
  evaluate->add_option("--benchmark", ev_benchmarks, "word-pair benchmark files")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--benchmark-preset", ev_benchmark_presets,
                       "per-benchmark preset (men|simlex|generic), matched by position");
  evaluate->add_option("--reference", ev_reference, "reference similarity TSV")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--concepts", ev_concepts, "concept list for word-name matching")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev_out, "optional output directory");

  auto* partition = app.add_subcommand("partition", "variance partitioning against a reference");
  std::string pa_reference, pa_preset, pa_out;
  std::vector<std::string> pa_norms, pa_names;
  partition->add_option("--reference", pa_reference, "reference similarity TSV")
      ->required()
      ->check(CLI::ExistingFile);
  partition->add_option("--norm", pa_norms, "2 or 3 predictor norms")
      ->required()
      ->check(CLI::ExistingFile);
  partition->add_option("--names", pa_names, "predictor names, matched by position");
  partition->add_option("--preset", pa_preset, "norm column preset");
  partition->add_option("--out", pa_out, "output directory")->required();

  auto* sample = app.add_subcommand("sample-labels", "draw features for manual labeling");
  std::string sl_norm, sl_preset, sl_inside, sl_source, sl_out;
  std::size_t sl_n = 500;
  std::uint64_t sl_seed = 0;
  sample->add_option("--norm", sl_norm)->required()->check(CLI::ExistingFile);
  sample->add_option("--preset", sl_preset, "norm column preset");
  sample->add_option("--inside", sl_inside, "file of concept ids forming the shared stratum")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("--n", sl_n, "features per stratum");
  sample->add_option("--seed", sl_seed);
  sample->add_option("--source", sl_source, "source tag recorded per row");
  sample->add_option("--out", sl_out, "output directory")->required();

  auto* labeldist = app.add_subcommand("label-dist", "label distribution with bootstrap CIs");
  std::string ld_sample, ld_out;
  std::size_t ld_bootstrap = 1000;
  std::uint64_t ld_seed = 0;
  labeldist->add_option("--sample", ld_sample, "labeled sample TSV")
      ->required()
      ->check(CLI::ExistingFile);
  labeldist->add_option("--bootstrap", ld_bootstrap)->check(CLI::PositiveNumber);
  labeldist->add_option("--seed", ld_seed);
  labeldist->add_option("--out", ld_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (elicit->parsed()) {
      return run_elicit(el_concepts, el_example_norm, el_example_preset, el_runs, el_backend,
                        el_replay_store, el_stub_completion, el_out, el_seed,
                        el_examples_per_prompt, el_features_per_example, el_model, el_endpoint,
                        el_temperature, el_max_tokens, el_rate_limit, el_parallel,
                        el_question_format, el_answer_prefix);
    }
    if (normalize->parsed()) {
      return run_normalize(no_corpus, no_out, no_lexicon, no_synsets, no_plural_fold,
                           no_per_concept);
    }
    if (filter->parsed()) return run_filter(fi_norm, fi_preset, fi_k, fi_k_max, fi_out);
    if (stats->parsed()) return run_stats(st_norm, st_preset, st_out);
    if (similarity->parsed()) return run_similarity(si_norm, si_preset, si_subset, si_out);
    if (cluster->parsed()) return run_cluster(cl_norm, cl_preset, cl_subset, cl_linkage, cl_out);
    if (catscore->parsed()) {
      return run_category_score(cs_norm, cs_preset, cs_categories, cs_bootstrap, cs_seed, cs_out);
    }
    if (evaluate->parsed()) {
      return run_evaluate(ev_norm, ev_preset, ev_benchmarks, ev_benchmark_presets, ev_reference,
                          ev_concepts, ev_out);
    }
    if (partition->parsed()) {
      return run_partition(pa_reference, pa_norms, pa_names, pa_preset, pa_out);
    }
    if (sample->parsed()) {
      return run_sample_labels(sl_norm, sl_preset, sl_inside, sl_n, sl_seed, sl_source, sl_out);
    }
    if (labeldist->parsed()) return run_label_dist(ld_sample, ld_bootstrap, ld_seed, ld_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
