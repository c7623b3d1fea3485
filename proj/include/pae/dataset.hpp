#pragma once

// Manifest-driven corpus handling: manifest I/O, metadata and face filters,
// score binarization, delta filtering, the feature registry, and matrix
// assembly / CSV persistence.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "pae/error.hpp"
#include "pae/features/compositional.hpp"
#include "pae/features/fuzzy.hpp"
#include "pae/features/portrait.hpp"
#include "pae/features/quality.hpp"
#include "pae/format.hpp"
#include "pae/learn/matrix.hpp"

namespace pae {

// ----------------------------------------------------------------- manifest

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> annotation;
  double mean_score = 0.0;
  std::string challenge_title;
  std::vector<std::string> tags;
  std::optional<std::filesystem::path> semantic_vector;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<double> scores() const {
    std::vector<double> s;
    for (const auto& e : entries) s.push_back(e.mean_score);
    return s;
  }
};

inline constexpr std::array<const char*, 7> kManifestColumns{"id",        "image", "annotation", "mean_score",
                                                             "challenge_title", "tags", "semantic_vector"};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (c == ',' || c == '"' || c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

}  // namespace detail

inline void check_entry(const ManifestEntry& e) {
  if (!detail::valid_id(e.id)) fail_data("manifest id '" + e.id + "' is empty or contains a separator");
  if (!std::isfinite(e.mean_score) || e.mean_score < 1.0 || e.mean_score > 10.0)
    fail_data("manifest entry " + e.id + ": mean_score outside [1,10]");
  if (e.image.empty()) fail_data("manifest entry " + e.id + ": missing image path");
}

// Tab-separated, header line with the columns of kManifestColumns in order.
// Empty fields mean "absent"; tags are comma-separated; relative paths are
// resolved against the manifest's directory. Blank lines and lines starting
// with '#' are skipped.
inline Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::string line;
  if (!std::getline(in, line)) fail_data("manifest is empty");
  const auto header = detail::split(detail::trim(line), '\t');
  if (header.size() != kManifestColumns.size()) fail_data("manifest header must have 7 tab-separated columns");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (detail::trim(header[i]) != kManifestColumns[i])
      fail_data(std::string("manifest header column ") + std::to_string(i + 1) + " must be '" + kManifestColumns[i] + "'");

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  Manifest m;
  std::unordered_set<std::string> ids;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto f = detail::split(line, '\t');
    if (f.size() != kManifestColumns.size())
      fail_data("manifest line " + std::to_string(lineno) + ": expected 7 fields, got " + std::to_string(f.size()));
    for (auto& s : f) s = detail::trim(s);
    ManifestEntry e;
    e.id = f[0];
    e.image = f[1].empty() ? std::filesystem::path() : resolve(f[1]);
    if (!f[2].empty()) e.annotation = resolve(f[2]);
    try {
      e.mean_score = parse_double(f[3]);
    } catch (const Error&) {
      fail_data("manifest line " + std::to_string(lineno) + ": bad mean_score '" + f[3] + "'");
    }
    e.challenge_title = f[4];
    if (!f[5].empty())
      for (auto& t : detail::split(f[5], ','))
        if (!detail::trim(t).empty()) e.tags.push_back(detail::trim(t));
    if (!f[6].empty()) e.semantic_vector = resolve(f[6]);
    check_entry(e);
    if (!ids.insert(e.id).second) fail_data("manifest id '" + e.id + "' is duplicated");
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

// Paths are written relative to `base_dir` when they live underneath it.
inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail_data("cannot write " + path.string());
  const auto base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    const auto r = p.lexically_relative(base);
    return (r.empty() || *r.begin() == "..") ? p.string() : r.string();
  };
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) out << (i ? "\t" : "") << kManifestColumns[i];
  out << "\n";
  for (const auto& e : m.entries) {
    check_entry(e);
    std::string tags;
    for (std::size_t i = 0; i < e.tags.size(); ++i) tags += (i ? "," : "") + e.tags[i];
    out << e.id << "\t" << rel(e.image) << "\t" << (e.annotation ? rel(*e.annotation) : "") << "\t"
        << format_double(e.mean_score) << "\t" << e.challenge_title << "\t" << tags << "\t"
        << (e.semantic_vector ? rel(*e.semantic_vector) : "") << "\n";
  }
  if (!out) fail_data("failed writing " + path.string());
}

// ---------------------------------------------------------------- filtering

inline const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> k{"portrait", "portraiture", "portraits"};
  return k;
}

// Lower-cased alphanumeric words.
inline std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Whole-word, case-insensitive: every word of the keyword must appear as a
// contiguous run of words in the title or in one tag.
inline bool matches_keyword(const std::string& text, const std::string& keyword) {
  const auto t = words_of(text), k = words_of(keyword);
  if (k.empty() || t.size() < k.size()) return false;
  for (std::size_t i = 0; i + k.size() <= t.size(); ++i)
    if (std::equal(k.begin(), k.end(), t.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

inline Manifest filter_metadata(const Manifest& m, const std::vector<std::string>& keywords) {
  if (keywords.empty()) return m;
  Manifest out;
  for (const auto& e : m.entries) {
    bool keep = false;
    for (const auto& k : keywords) {
      keep = matches_keyword(e.challenge_title, k) ||
             std::any_of(e.tags.begin(), e.tags.end(), [&](const std::string& t) { return matches_keyword(t, k); });
      if (keep) break;
    }
    if (keep) out.entries.push_back(e);
  }
  return out;
}

struct FaceFilterResult {
  Manifest manifest;
  std::vector<FaceAnnotation> faces;  // largest face, aligned with manifest entries
  std::vector<std::string> diagnostics;
};

inline FaceFilterResult filter_faces(const Manifest& m) {
  FaceFilterResult r;
  for (const auto& e : m.entries) {
    if (!e.annotation) {
      r.diagnostics.push_back(e.id + ": no annotation");
      continue;
    }
    try {
      const auto faces = load_annotation(*e.annotation);
      if (faces.empty()) {
        r.diagnostics.push_back(e.id + ": annotation has no faces");
        continue;
      }
      r.faces.push_back(largest_face(faces));
      r.manifest.entries.push_back(e);
    } catch (const Error& err) {
      r.diagnostics.push_back(e.id + ": " + err.what());
    }
  }
  return r;
}

// ----------------------------------------------------------- binarization

struct Binarization {
  double threshold = 0.0;
  std::vector<int> labels;
};

// +1 iff score > threshold (strict). Default threshold: mean score.
inline Binarization binarize_scores(const std::vector<double>& scores, std::optional<double> threshold = {}) {
  if (scores.empty()) fail_data("cannot binarize an empty score list");
  Binarization b;
  if (threshold) {
    if (!std::isfinite(*threshold)) fail_config("threshold must be finite");
    b.threshold = *threshold;
  } else {
    double s = 0.0;
    for (double v : scores) s += v;
    b.threshold = s / static_cast<double>(scores.size());
  }
  for (double v : scores) b.labels.push_back(v > b.threshold ? 1 : -1);
  return b;
}

// Training indices whose score is at least delta away from the threshold.
inline std::vector<std::size_t> delta_filter(const std::vector<std::size_t>& train, const std::vector<double>& scores,
                                             double threshold, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) fail_config("delta must be finite and non-negative");
  std::vector<std::size_t> out;
  for (std::size_t i : train)
    if (!(std::abs(scores[i] - threshold) < delta)) out.push_back(i);
  return out;
}

// ----------------------------------------------------------------- registry

enum class Group { compositional = 0, semantics = 1, quality = 2, portrait = 3, fuzzy = 4 };

inline constexpr std::array<Group, 5> kAllGroups{Group::compositional, Group::semantics, Group::quality,
                                                 Group::portrait, Group::fuzzy};
inline constexpr std::size_t kSemanticsDim = 189;

inline const char* group_name(Group g) {
  switch (g) {
    case Group::compositional: return "compositional";
    case Group::semantics: return "semantics";
    case Group::quality: return "quality";
    case Group::portrait: return "portrait";
    case Group::fuzzy: return "fuzzy";
  }
  return "";
}

inline Group parse_group(const std::string& s) {
  for (Group g : kAllGroups)
    if (s == group_name(g)) return g;
  fail_config("unknown feature group '" + s + "'");
}

// Comma-separated list; "all" or empty enables every group.
inline std::vector<Group> parse_groups(const std::string& s) {
  if (detail::trim(s).empty() || detail::trim(s) == "all") return {kAllGroups.begin(), kAllGroups.end()};
  std::vector<Group> out;
  for (const auto& part : detail::split(s, ',')) {
    const Group g = parse_group(detail::trim(part));
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::string> semantics_names() {
  std::vector<std::string> n;
  char buf[32];
  for (std::size_t i = 0; i < kSemanticsDim; ++i) {
    std::snprintf(buf, sizeof buf, "object_bank_%03zu", i);
    n.emplace_back(buf);
  }
  return n;
}

inline std::vector<std::string> group_feature_names(Group g) {
  switch (g) {
    case Group::compositional: return compositional_names();
    case Group::semantics: return semantics_names();
    case Group::quality: return quality_names();
    case Group::portrait: return portrait_names();
    case Group::fuzzy: return fuzzy_names();
  }
  return {};
}

struct RegistryEntry {
  std::string name;  // "group.feature"
  Group group;
  std::size_t index;  // position within the group
};

struct FeatureRegistry {
  std::vector<RegistryEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& e : entries) n.push_back(e.name);
    return n;
  }
  std::vector<std::size_t> columns_of(Group g) const {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].group == g) c.push_back(i);
    return c;
  }
};

inline FeatureRegistry make_registry(const std::vector<Group>& groups = {kAllGroups.begin(), kAllGroups.end()}) {
  FeatureRegistry r;
  for (Group g : kAllGroups) {
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) continue;
    const auto names = group_feature_names(g);
    for (std::size_t i = 0; i < names.size(); ++i)
      r.entries.push_back({std::string(group_name(g)) + "." + names[i], g, i});
  }
  return r;
}

inline std::optional<Group> group_of_column(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  for (Group g : kAllGroups)
    if (name.compare(0, dot, group_name(g)) == 0) return g;
  return std::nullopt;
}

// ----------------------------------------------------------------- assembly

// Extracted blocks of one image; a missing block is zero-filled and flagged.
struct ExtractedRow {
  std::string id;
  double mean_score = 0.0;
  std::map<Group, std::vector<double>> blocks;
  std::vector<std::string> zero_filled;  // registry names zeroed inside present blocks (e.g. absent aux model)
};

struct AssembledMatrix {
  FeatureMatrix matrix;
  std::vector<bool> zero_filled;  // per column: any row had this column zero-filled
};

inline AssembledMatrix assemble_matrix(const std::vector<ExtractedRow>& rows, const FeatureRegistry& reg) {
  AssembledMatrix out;
  out.matrix = FeatureMatrix(rows.size(), reg.names());
  out.zero_filled.assign(reg.size(), false);
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < reg.size(); ++c) column[reg.entries[c].name] = c;
  std::vector<Group> groups;
  for (const auto& e : reg.entries)
    if (groups.empty() || groups.back() != e.group) groups.push_back(e.group);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const ExtractedRow& row = rows[r];
    out.matrix.ids[r] = row.id;
    out.matrix.scores.push_back(row.mean_score);
    for (Group g : groups) {
      const auto cols = reg.columns_of(g);
      const auto it = row.blocks.find(g);
      if (it == row.blocks.end()) {
        for (std::size_t c : cols) out.zero_filled[c] = true;
        continue;
      }
      if (it->second.size() != cols.size())
        fail_data(std::string("row ") + row.id + ": " + group_name(g) + " block has " +
                  std::to_string(it->second.size()) + " values, registry expects " + std::to_string(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) out.matrix.at(r, cols[k]) = it->second[k];
    }
    for (const auto& name : row.zero_filled) {
      const auto it = column.find(name);
      if (it == column.end()) fail_data("zero-fill flag for unknown column " + name);
      out.zero_filled[it->second] = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------- CSV

// Header: id,mean_score,<registry names>. Values use shortest round-trip text.
inline void save_matrix(const FeatureMatrix& m, std::ostream& out) {
  if (!m.has_scores() && m.rows() > 0) fail_data("matrix has no score column");
  out << "id,mean_score";
  for (const auto& n : m.registry) out << "," << n;
  out << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!detail::valid_id(m.ids[r])) fail_data("id '" + m.ids[r] + "' cannot be written to CSV");
    out << m.ids[r] << "," << format_double(m.scores[r]);
    for (double v : m.row(r)) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) fail_data("failed writing feature matrix");
}

inline void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_data("cannot write " + path.string());
  save_matrix(m, out);
}

// When `expected` is given the header must equal it exactly.
inline FeatureMatrix load_matrix(std::istream& in, const std::vector<std::string>* expected = nullptr) {
  std::string line;
  if (!std::getline(in, line)) fail_data("feature matrix file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto head = detail::split(line, ',');
  if (head.size() < 2 || head[0] != "id" || head[1] != "mean_score")
    fail_data("feature matrix header must start with id,mean_score");
  FeatureMatrix m;
  m.registry.assign(head.begin() + 2, head.end());
  if (expected && m.registry != *expected) fail_data("feature matrix header does not match the registry");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != head.size())
      fail_data("feature matrix line " + std::to_string(lineno) + ": expected " + std::to_string(head.size()) + " fields");
    m.ids.push_back(f[0]);
    m.scores.push_back(parse_double(f[1]));
    for (std::size_t c = 2; c < f.size(); ++c) m.values.push_back(parse_double(f[c]));
  }
  m.validate();
  return m;
}

inline FeatureMatrix load_matrix(const std::filesystem::path& path, const std::vector<std::string>* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open " + path.string());
  try {
    return load_matrix(in, expected);
  } catch (const Error& e) {
    fail_data(path.string() + ": " + e.what());
  }
}

// Object-Bank-style semantic vector: 189 numbers separated by whitespace or commas.
inline std::vector<double> load_semantic_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open semantic vector " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream toks(text);
  std::vector<double> v;
  std::string tok;
  while (toks >> tok) {
    v.push_back(parse_double(tok));
    if (!std::isfinite(v.back())) fail_data(path.string() + ": non-finite semantic value");
  }
  if (v.size() != kSemanticsDim)
    fail_data(path.string() + ": semantic vector has " + std::to_string(v.size()) + " values, expected 189");
  return v;
}

}  // namespace pae
