#ifndef FEATNORM_IO_HPP
#define FEATNORM_IO_HPP

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "featnorm/analysis.hpp"
#include "featnorm/evaluation.hpp"
#include "featnorm/matrix.hpp"
#include "featnorm/model.hpp"
#include "featnorm/text.hpp"

namespace featnorm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

inline std::vector<std::string> read_lines(const std::string& content) {
  std::vector<std::string> lines = split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

namespace detail {

inline long parse_int(const std::string& s, long line_no) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0')
    throw ParseError("expected integer, got '" + s + "'", line_no);
  return v;
}

inline double parse_real(const std::string& s, long line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0' || !std::isfinite(v))
    throw ParseError("expected finite real, got '" + s + "'", line_no);
  return v;
}

inline char detect_delimiter(const std::string& line) {
  if (line.find('\t') != std::string::npos) return '\t';
  if (line.find(',') != std::string::npos) return ',';
  return ' ';
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
  if (delim == ' ') return split_whitespace(line);
  return split(line, delim);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical norm format: TSV `concept_id<TAB>feature<TAB>frequency` plus a
// `<file>.meta` sidecar of key=value lines (source_count, provenance, and
// empty_concepts for concepts the filter emptied).

inline std::string serialize_norm(const FeatureNorm& norm) {
  std::string out = "concept_id\tfeature\tfrequency\n";
  for (const auto& e : norm.entries()) {
    out += e.concept_id;
    out += '\t';
    out += e.feature;
    out += '\t';
    out += std::to_string(e.frequency);
    out += '\n';
  }
  return out;
}

inline std::string serialize_norm_meta(const FeatureNorm& norm) {
  std::string out;
  out += "source_count=" + std::to_string(norm.source_count()) + "\n";
  out += "provenance=" + to_string(norm.provenance()) + "\n";
  auto empty = norm.empty_concepts();
  if (!empty.empty()) out += "empty_concepts=" + join(empty, ";") + "\n";
  return out;
}

inline void save_norm(const FeatureNorm& norm, const std::filesystem::path& path) {
  write_file(path, serialize_norm(norm));
  write_file(path.string() + ".meta", serialize_norm_meta(norm));
}

inline std::map<std::string, std::string> parse_key_values(const std::string& content) {
  std::map<std::string, std::string> out;
  long line_no = 0;
  for (const auto& line : read_lines(content)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

inline FeatureNorm parse_norm_tsv(const std::string& tsv,
                                  const std::map<std::string, std::string>& meta) {
  auto lines = read_lines(tsv);
  if (lines.empty()) throw ParseError("empty norm file");
  if (lines[0] != "concept_id\tfeature\tfrequency")
    throw ParseError("bad norm header: " + lines[0], 1);
  std::vector<NormEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split(lines[i], '\t');
    if (fields.size() != 3) throw ParseError("expected 3 tab-separated fields", long(i + 1));
    entries.push_back(
        {fields[0], fields[1], static_cast<int>(detail::parse_int(fields[2], long(i + 1)))});
  }
  auto sc = meta.find("source_count");
  auto pv = meta.find("provenance");
  if (sc == meta.end()) throw ParseError("norm metadata missing source_count");
  if (pv == meta.end()) throw ParseError("norm metadata missing provenance");
  std::vector<std::string> concept_ids;
  for (const auto& e : entries) concept_ids.push_back(e.concept_id);
  auto ec = meta.find("empty_concepts");
  if (ec != meta.end()) {
    for (auto& id : split(ec->second, ';')) {
      if (!id.empty()) concept_ids.push_back(id);
    }
  }
  return FeatureNorm(std::move(entries), static_cast<int>(detail::parse_int(sc->second, 0)),
                     provenance_from_string(pv->second), std::move(concept_ids));
}

inline FeatureNorm load_norm(const std::filesystem::path& path) {
  const auto meta_path = path.string() + ".meta";
  if (!std::filesystem::exists(meta_path))
    throw IoError("missing norm metadata sidecar " + meta_path);
  return parse_norm_tsv(read_file(path), parse_key_values(read_file(meta_path)));
}

// ---------------------------------------------------------------------------
// External norm files (McRae, CSLB, ...): delimited text with a header and a
// user-supplied column mapping.

struct ColumnMapping {
  std::string concept_col;
  std::string feature_col;
  std::string frequency_col;
};

struct ParsedNorm {
  FeatureNorm norm;
  std::vector<std::string> warnings;
};

inline ParsedNorm parse_norm_file(const std::string& content, const ColumnMapping& mapping,
                                  char delimiter = '\0',
                                  std::optional<int> source_count = std::nullopt) {
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty norm file");
  const char delim = delimiter ? delimiter : detail::detect_delimiter(lines[0]);
  auto header = detail::split_fields(lines[0], delim);
  auto col_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw ParseError("mapped column '" + name + "' not found in header", 1);
  };
  const std::size_t ci = col_of(mapping.concept_col);
  const std::size_t fi = col_of(mapping.feature_col);
  const std::size_t qi = col_of(mapping.frequency_col);

  std::map<std::pair<std::string, std::string>, long> freq;
  std::vector<std::string> warnings;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = detail::split_fields(lines[i], delim);
    const std::size_t needed = std::max({ci, fi, qi}) + 1;
    if (fields.size() < needed) throw ParseError("row has too few columns", long(i + 1));
    std::string concept_id = to_lower(trim(fields[ci]));
    std::string feature = to_lower(trim(fields[fi]));
    long f = detail::parse_int(trim(fields[qi]), long(i + 1));
    auto key = std::make_pair(std::move(concept_id), std::move(feature));
    auto it = freq.find(key);
    if (it != freq.end()) {
      warnings.push_back("duplicate (" + key.first + ", " + key.second +
                         ") rows; frequencies summed");
      it->second += f;
    } else {
      freq.emplace(std::move(key), f);
    }
  }
  std::vector<NormEntry> entries;
  int max_freq = 1;
  for (const auto& [key, f] : freq) {
    entries.push_back({key.first, key.second, static_cast<int>(f)});
    max_freq = std::max(max_freq, static_cast<int>(f));
  }
  FeatureNorm norm(std::move(entries), source_count.value_or(max_freq), Provenance::human);
  return {std::move(norm), std::move(warnings)};
}

// ---------------------------------------------------------------------------
// Concept lists: TSV with header `id  name  [disambiguator]  [categories]`,
// categories semicolon-separated.

inline std::vector<Concept> parse_concepts(const std::string& content) {
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty concepts file");
  auto header = split(lines[0], '\t');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  if (!col.count("id") || !col.count("name"))
    throw ParseError("concepts file needs 'id' and 'name' columns", 1);

  std::vector<Concept> out;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = split(lines[i], '\t');
    auto get = [&](const char* name) -> std::string {
      auto it = col.find(name);
      return (it != col.end() && it->second < fields.size()) ? trim(fields[it->second]) : "";
    };
    Concept c;
    c.id = to_lower(get("id"));
    c.name = to_lower(get("name"));
    c.disambiguator = to_lower(get("disambiguator"));
    for (auto& cat : split(get("categories"), ';')) {
      std::string t = to_lower(trim(cat));
      if (!t.empty()) c.categories.push_back(t);
    }
    if (c.id.empty()) throw ParseError("empty concept id", long(i + 1));
    if (c.name.empty()) throw ParseError("empty concept name", long(i + 1));
    if (c.name.find(',') != std::string::npos)
      throw ParseError("concept name contains comma: " + c.name, long(i + 1));
    if (!seen.insert(c.id).second) throw ParseError("duplicate concept id: " + c.id, long(i + 1));
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Word-pair benchmarks (MEN, SimLex-999, ...).

struct BenchmarkMapping {
  std::string word_a = "c0";
  std::string word_b = "c1";
  std::string score = "c2";
  bool has_header = false;
  char delimiter = '\0';  // 0 = auto-detect
  BenchmarkKind kind = BenchmarkKind::relatedness;
};

inline PairBenchmark parse_benchmark(const std::string& content, const BenchmarkMapping& mapping) {
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty benchmark file");
  const char delim = mapping.delimiter ? mapping.delimiter : detail::detect_delimiter(lines[0]);

  std::vector<std::string> header;
  std::size_t first_row = 0;
  if (mapping.has_header) {
    header = detail::split_fields(lines[0], delim);
    first_row = 1;
  } else {
    const std::size_t width = detail::split_fields(lines[0], delim).size();
    for (std::size_t i = 0; i < width; ++i) header.push_back("c" + std::to_string(i));
  }
  auto col_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw ParseError("mapped column '" + name + "' not found in benchmark header", 1);
  };
  const std::size_t ai = col_of(mapping.word_a);
  const std::size_t bi = col_of(mapping.word_b);
  const std::size_t si = col_of(mapping.score);

  std::map<std::pair<std::string, std::string>, double> pairs;
  for (std::size_t i = first_row; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = detail::split_fields(lines[i], delim);
    if (fields.size() <= std::max({ai, bi, si}))
      throw ParseError("row has too few columns", long(i + 1));
    std::string a = to_lower(trim(fields[ai]));
    std::string b = to_lower(trim(fields[bi]));
    const double score = detail::parse_real(trim(fields[si]), long(i + 1));
    if (a > b) std::swap(a, b);
    auto key = std::make_pair(std::move(a), std::move(b));
    auto it = pairs.find(key);
    if (it != pairs.end()) {
      if (it->second != score)
        throw ParseError("duplicate pair (" + key.first + ", " + key.second +
                             ") with differing scores",
                         long(i + 1));
    } else {
      pairs.emplace(std::move(key), score);
    }
  }
  PairBenchmark bench;
  bench.kind = mapping.kind;
  for (const auto& [key, score] : pairs) bench.pairs.push_back({key.first, key.second, score});
  return bench;
}

// Named column-mapping presets for the supported external files.
inline BenchmarkMapping benchmark_preset(const std::string& name) {
  if (name == "men") {
    return {"c0", "c1", "c2", false, ' ', BenchmarkKind::relatedness};
  }
  if (name == "simlex") {
    return {"word1", "word2", "SimLex999", true, '\t', BenchmarkKind::similarity};
  }
  if (name == "generic") {
    return {};
  }
  throw ArgError("unknown benchmark preset: " + name);
}

inline ColumnMapping norm_preset(const std::string& name) {
  if (name == "mcrae") return {"Concept", "Feature", "Prod_Freq"};
  if (name == "cslb") return {"concept", "feature", "pf"};
  if (name == "canonical") return {"concept_id", "feature", "frequency"};
  throw ArgError("unknown norm preset: " + name);
}

// ---------------------------------------------------------------------------
// Similarity matrices: TSV with concept-id header row and column.

inline std::string serialize_similarity(const SimilarityMatrix& s) {
  std::string out = "concept_id";
  for (const auto& id : s.ids()) {
    out += '\t';
    out += id;
  }
  out += '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s.ids()[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      out += '\t';
      out += format_double(s.at(i, j));
    }
    out += '\n';
  }
  return out;
}

inline SimilarityMatrix parse_similarity(const std::string& content) {
  auto lines = read_lines(content);
  if (lines.size() < 2) throw ParseError("similarity file too short");
  auto header = split(lines[0], '\t');
  if (header.empty()) throw ParseError("empty similarity header", 1);
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const std::size_t n = ids.size();
  if (lines.size() != n + 1) throw ParseError("similarity row count does not match header");
  std::vector<double> vals(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto fields = split(lines[i + 1], '\t');
    if (fields.size() != n + 1) throw ParseError("bad similarity row width", long(i + 2));
    if (fields[0] != ids[i])
      throw ParseError("similarity row id '" + fields[0] + "' does not match header order",
                       long(i + 2));
    for (std::size_t j = 0; j < n; ++j)
      vals[i * n + j] = detail::parse_real(fields[j + 1], long(i + 2));
  }
  return SimilarityMatrix(std::move(ids), std::move(vals));
}

// ---------------------------------------------------------------------------
// Dendrogram and variance-decomposition JSON.

inline std::string serialize_dendrogram(const Dendrogram& d) {
  nlohmann::ordered_json j;
  j["linkage"] = to_string(d.linkage);
  j["leaves"] = d.leaf_ids;
  auto& merges = j["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : d.merges)
    merges.push_back({m.node_a, m.node_b, m.distance, m.size});
  return j.dump(2) + "\n";
}

inline Dendrogram parse_dendrogram(const std::string& content) {
  Dendrogram d;
  try {
    auto j = nlohmann::ordered_json::parse(content);
    d.linkage = linkage_from_string(j.at("linkage").get<std::string>());
    d.leaf_ids = j.at("leaves").get<std::vector<std::string>>();
    for (const auto& row : j.at("merges")) {
      if (row.size() != 4) throw ParseError("dendrogram merge row needs 4 entries");
      d.merges.push_back({row[0].get<std::size_t>(), row[1].get<std::size_t>(),
                          row[2].get<double>(), row[3].get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dendrogram json: ") + e.what());
  }
  return d;
}

inline std::string serialize_decomposition(const CommonalityDecomposition& d) {
  nlohmann::ordered_json j;
  j["predictors"] = d.predictors;
  j["full_r2"] = d.full_r2;
  auto& comp = j["components"] = nlohmann::ordered_json::object();
  for (const auto& c : d.components) comp[c.name] = c.value;
  auto& r2 = j["subset_r2"] = nlohmann::ordered_json::object();
  for (const auto& c : d.components) r2[c.name] = d.subset_r2.at(c.name);
  j["negative_components"] = d.negative_components;
  return j.dump(2) + "\n";
}

inline CommonalityDecomposition parse_decomposition(const std::string& content) {
  CommonalityDecomposition d;
  try {
    auto j = nlohmann::ordered_json::parse(content);
    d.predictors = j.at("predictors").get<std::vector<std::string>>();
    d.full_r2 = j.at("full_r2").get<double>();
    for (const auto& [name, value] : j.at("components").items()) {
      CommonalityComponent c;
      c.name = name;
      c.value = value.get<double>();
      d.components.push_back(std::move(c));
    }
    for (const auto& [name, value] : j.at("subset_r2").items())
      d.subset_r2[name] = value.get<double>();
    d.negative_components = j.at("negative_components").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad decomposition json: ") + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Label samples: TSV `concept_id<TAB>feature<TAB>source<TAB>label`, label
// empty until a human fills it in.

inline std::string serialize_label_sample(const LabelSample& sample) {
  std::string out = "concept_id\tfeature\tsource\tlabel\n";
  for (const auto& r : sample) {
    out += r.concept_id + "\t" + r.feature + "\t" + r.source + "\t" + r.label + "\n";
  }
  return out;
}

inline LabelSample parse_label_sample(const std::string& content) {
  auto lines = read_lines(content);
  if (lines.empty()) throw ParseError("empty label sample file");
  if (lines[0] != "concept_id\tfeature\tsource\tlabel")
    throw ParseError("bad label sample header", 1);
  LabelSample out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split(lines[i], '\t');
    if (fields.size() != 4) throw ParseError("expected 4 tab-separated fields", long(i + 1));
    std::string label = trim(fields[3]);
    if (!label.empty() && !is_valid_label(label))
      throw ParseError("unknown label '" + label + "'", long(i + 1));
    out.push_back({fields[0], fields[1], fields[2], label});
  }
  return out;
}

}  // namespace featnorm

#endif
