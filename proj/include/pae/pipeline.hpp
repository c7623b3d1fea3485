#pragma once

// Batch orchestration behind the command-line tool: feature extraction over a
// manifest (bounded worker threads, rows committed in manifest order), model
// training from a corpus, and the artifact files each step writes.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pae/codec.hpp"
#include "pae/dataset.hpp"
#include "pae/error.hpp"
#include "pae/features/aux_model.hpp"
#include "pae/features/compositional.hpp"
#include "pae/features/fuzzy.hpp"
#include "pae/features/lighting.hpp"
#include "pae/features/portrait.hpp"
#include "pae/features/quality.hpp"
#include "pae/learn/serialize.hpp"

namespace pae {

inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kFeaturesMetaFile = "features.meta.json";
inline constexpr const char* kSpectrumFile = "spectrum_reference.txt";
inline constexpr const char* kExtractLog = "extract.log";
inline constexpr const char* kLightingModelFile = "lighting_model.txt";

// Runs fn(0..n-1) on up to `workers` threads. The first exception by index is
// rethrown after all threads join, so failures do not depend on scheduling.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) fail_config("worker count must be at least 1");
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ------------------------------------------------------------ aux models

inline const std::vector<std::string>& aux_kinds() {
  static const std::vector<std::string> k{"emotion", "originality", "memorability", "splicing"};
  return k;
}

// Emotion and splicing are classifiers; originality and memorability regress.
inline AuxKind aux_kind_of(const std::string& kind) {
  if (kind == "emotion" || kind == "splicing") return AuxKind::classifier;
  if (kind == "originality" || kind == "memorability") return AuxKind::regressor;
  fail_config("unknown aux model kind '" + kind + "' (emotion, originality, memorability, splicing)");
}

inline std::string aux_file_name(const std::string& kind) { return "aux_" + kind + ".json"; }

struct ExtractModels {
  std::optional<LightingModel> lighting;
  std::map<std::string, AuxModel> aux;  // by kind

  const AuxModel* find(const std::string& kind) const {
    const auto it = aux.find(kind);
    return it == aux.end() ? nullptr : &it->second;
  }
};

inline ExtractModels load_extract_models(const std::optional<std::filesystem::path>& lighting,
                                         const std::map<std::string, std::filesystem::path>& aux) {
  ExtractModels m;
  if (lighting) m.lighting = load_lighting_model(*lighting);
  for (const auto& [kind, path] : aux) {
    const AuxKind expected = aux_kind_of(kind);
    AuxModel model = load_aux_model(path);
    if (model.kind != expected)
      fail_config("aux model for " + kind + " must be a " + to_string(expected) + ", got " + to_string(model.kind));
    for (const auto& name : model.registry)
      if (group_of_column(name) == Group::fuzzy) fail_config("aux model " + kind + " consumes fuzzy features");
    m.aux.emplace(kind, std::move(model));
  }
  return m;
}

// ------------------------------------------------------------ extraction

struct ExtractOptions {
  std::vector<Group> groups{kAllGroups.begin(), kAllGroups.end()};
  int workers = 1;
  std::optional<std::filesystem::path> semantic_dir;  // fallback <dir>/<id>.txt
  std::vector<std::string> keywords;                  // empty: no metadata filter
};

struct DroppedEntry {
  std::string id;
  std::string reason;
};

struct ExtractionResult {
  FeatureRegistry registry;
  AssembledMatrix assembled;
  std::vector<DroppedEntry> dropped;
  std::optional<SpectrumReference> spectrum;
  std::map<std::string, bool> missing;  // model or reference name -> absent
  std::vector<std::string> log;
};

namespace detail {

inline bool has_group(const std::vector<Group>& gs, Group g) { return std::find(gs.begin(), gs.end(), g) != gs.end(); }

inline void add_named(NamedFeatures& out, Group g, const std::vector<double>& values) {
  const auto names = group_feature_names(g);
  for (std::size_t i = 0; i < names.size(); ++i) out[std::string(group_name(g)) + "." + names[i]] = values[i];
}

inline std::optional<std::filesystem::path> semantic_path(const ManifestEntry& e, const ExtractOptions& opt) {
  if (e.semantic_vector) return e.semantic_vector;
  if (opt.semantic_dir) {
    const auto p = *opt.semantic_dir / (e.id + ".txt");
    if (std::filesystem::exists(p)) return p;
  }
  return std::nullopt;
}

}  // namespace detail

// One manifest entry to one row. Throws on any per-image failure.
inline ExtractedRow extract_row(const ManifestEntry& e, const FaceAnnotation* face, const ExtractModels& models,
                                const SpectrumReference* ref, const ExtractOptions& opt) {
  using detail::has_group;
  const RasterImage img = decode_image(e.image);
  ExtractedRow row;
  row.id = e.id;
  row.mean_score = e.mean_score;
  NamedFeatures named;
  auto put = [&](Group g, std::vector<double> v) {
    detail::add_named(named, g, v);
    row.blocks[g] = std::move(v);
  };
  if (has_group(opt.groups, Group::compositional)) {
    put(Group::compositional, compositional_block(img, models.lighting ? &*models.lighting : nullptr).to_vector());
    if (!models.lighting)
      for (int i = 0; i < 5; ++i) row.zero_filled.push_back("compositional.lighting_pattern_" + std::to_string(i));
  }
  if (has_group(opt.groups, Group::semantics)) {
    if (const auto p = detail::semantic_path(e, opt)) put(Group::semantics, load_semantic_vector(*p));
  }
  if (has_group(opt.groups, Group::quality)) {
    const AuxModel* splicing = models.find("splicing");
    put(Group::quality, quality_block(img, splicing).to_vector());
    if (!splicing) row.zero_filled.push_back("quality.splicing");
  }
  if (has_group(opt.groups, Group::portrait)) {
    if (!face) fail_data("no face annotation");
    put(Group::portrait, portrait_block(img, *face).to_vector());
  }
  if (has_group(opt.groups, Group::fuzzy)) {
    const FuzzyModels fm{models.find("emotion"), models.find("originality"), models.find("memorability")};
    const FuzzyBlock b = fuzzy_block(named, fm, img, ref);
    const auto names = fuzzy_names();
    for (std::size_t i = 0; i < 4; ++i)
      if (b.missing[i]) row.zero_filled.push_back("fuzzy." + names[i]);
    row.blocks[Group::fuzzy] = b.to_vector();
  }
  return row;
}

// Mean amplitude spectrum over the entries that decode, added in manifest
// order (chunked so memory stays bounded and the sum is worker-independent).
inline std::optional<SpectrumReference> corpus_spectrum(const Manifest& m, int workers) {
  SpectrumAccumulator acc;
  const std::size_t chunk = static_cast<std::size_t>(std::max(1, workers)) * 8;
  for (std::size_t start = 0; start < m.size(); start += chunk) {
    const std::size_t n = std::min(chunk, m.size() - start);
    std::vector<std::optional<Plane>> spectra(n);
    parallel_for(n, workers, [&](std::size_t i) {
      try {
        spectra[i] = image_spectrum(decode_image(m.entries[start + i].image));
      } catch (const Error&) {
      }
    });
    for (const auto& s : spectra)
      if (s) acc.add(*s);
  }
  if (acc.count() == 0) return std::nullopt;
  return acc.finish();
}

inline ExtractionResult extract_features(const Manifest& input, const ExtractModels& models, const ExtractOptions& opt) {
  if (opt.groups.empty()) fail_config("no feature groups enabled");
  ExtractionResult r;
  r.registry = make_registry(opt.groups);
  auto drop = [&](const std::string& id, const std::string& reason) {
    r.dropped.push_back({id, reason});
    r.log.push_back("dropped " + id + ": " + reason);
  };

  Manifest m = input;
  if (!opt.keywords.empty()) {
    Manifest kept = filter_metadata(m, opt.keywords);
    std::unordered_set<std::string> ids;
    for (const auto& e : kept.entries) ids.insert(e.id);
    for (const auto& e : m.entries)
      if (!ids.count(e.id)) drop(e.id, "no keyword match");
    m = std::move(kept);
  }
  std::vector<FaceAnnotation> faces;
  if (detail::has_group(opt.groups, Group::portrait)) {
    FaceFilterResult f = filter_faces(m);
    std::unordered_set<std::string> ids;
    for (const auto& e : f.manifest.entries) ids.insert(e.id);
    std::size_t d = 0;
    for (const auto& e : m.entries)
      if (!ids.count(e.id)) {
        const std::string& msg = f.diagnostics.at(d++);
        drop(e.id, msg.substr(msg.find(": ") + 2));
      }
    m = std::move(f.manifest);
    faces = std::move(f.faces);
  }

  const bool fuzzy = detail::has_group(opt.groups, Group::fuzzy);
  if (fuzzy) r.spectrum = corpus_spectrum(m, opt.workers);
  if (detail::has_group(opt.groups, Group::compositional)) r.missing["lighting"] = !models.lighting;
  if (detail::has_group(opt.groups, Group::quality)) r.missing["splicing"] = !models.find("splicing");
  if (fuzzy) {
    for (const char* k : {"emotion", "originality", "memorability"}) r.missing[k] = !models.find(k);
    r.missing["spectrum_reference"] = !r.spectrum;
  }

  std::vector<std::optional<ExtractedRow>> rows(m.size());
  std::vector<std::string> errors(m.size());
  const SpectrumReference* ref = r.spectrum ? &*r.spectrum : nullptr;
  parallel_for(m.size(), opt.workers, [&](std::size_t i) {
    try {
      rows[i] = extract_row(m.entries[i], faces.empty() ? nullptr : &faces[i], models, ref, opt);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) throw;
      errors[i] = e.what();
    } catch (const std::exception& e) {
      errors[i] = std::string("extraction failed: ") + e.what();
    }
  });

  std::vector<ExtractedRow> kept;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (rows[i]) kept.push_back(std::move(*rows[i]));
    else drop(m.entries[i].id, errors[i]);
  }
  r.assembled = assemble_matrix(kept, r.registry);
  return r;
}

inline Json extraction_meta(const ExtractionResult& r) {
  Json groups = Json::array();
  Group last{};
  for (std::size_t i = 0; i < r.registry.size(); ++i)
    if (i == 0 || r.registry.entries[i].group != last) {
      last = r.registry.entries[i].group;
      groups.push_back(group_name(last));
    }
  Json zero = Json::array();
  for (std::size_t c = 0; c < r.registry.size(); ++c)
    if (r.assembled.zero_filled[c]) zero.push_back(r.registry.entries[c].name);
  Json dropped = Json::array();
  for (const auto& d : r.dropped) dropped.push_back({{"id", d.id}, {"reason", d.reason}});
  Json missing = Json::object();
  for (const auto& [k, v] : r.missing) missing[k] = v;
  return {{"format", "pae-features-meta"},
          {"schema_version", 1},
          {"groups", groups},
          {"columns", r.registry.size()},
          {"rows", r.assembled.matrix.rows()},
          {"zero_filled", zero},
          {"missing_models", missing},
          {"spectrum_reference_count", r.spectrum ? r.spectrum->count : 0},
          {"dropped", dropped}};
}

// Writes features.csv, features.meta.json, extract.log and (with the fuzzy
// group) spectrum_reference.txt. Errors when no row survives.
inline void write_extraction(const ExtractionResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_matrix(r.assembled.matrix, dir / kFeaturesFile);
  {
    std::ofstream out(dir / kFeaturesMetaFile, std::ios::binary);
    if (!out) fail_data("cannot write " + (dir / kFeaturesMetaFile).string());
    out << extraction_meta(r).dump(2) << "\n";
  }
  {
    std::ofstream out(dir / kExtractLog, std::ios::binary);
    for (const auto& line : r.log) out << line << "\n";
    out << "rows " << r.assembled.matrix.rows() << " dropped " << r.dropped.size() << "\n";
  }
  if (r.spectrum) save_spectrum_reference(*r.spectrum, dir / kSpectrumFile);
}

// ------------------------------------------------------------ training

// Decodes every manifest image in order; failures are skipped and logged.
inline std::vector<RasterImage> load_corpus(const Manifest& m, int workers, std::vector<std::string>* log = nullptr) {
  std::vector<std::optional<RasterImage>> imgs(m.size());
  std::vector<std::string> errors(m.size());
  parallel_for(m.size(), workers, [&](std::size_t i) {
    try {
      imgs[i] = decode_image(m.entries[i].image);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<RasterImage> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (imgs[i]) out.push_back(std::move(*imgs[i]));
    else if (log) log->push_back("skipped " + m.entries[i].id + ": " + errors[i]);
  }
  return out;
}

inline LightingModel train_lighting_from_manifest(const Manifest& m, std::uint64_t seed, int workers,
                                                  std::vector<std::string>* log = nullptr) {
  if (m.size() == 0) fail_data("lighting training corpus is empty");
  std::vector<std::vector<double>> vectors(m.size());
  std::vector<std::string> errors(m.size());
  parallel_for(m.size(), workers, [&](std::size_t i) {
    try {
      vectors[i] = illuminance_vector(decode_image(m.entries[i].image));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::vector<double>> ok;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!vectors[i].empty()) ok.push_back(std::move(vectors[i]));
    else if (log) log->push_back("skipped " + m.entries[i].id + ": " + errors[i]);
  }
  if (ok.size() < kLightingPatterns) fail_data("lighting training needs at least 5 decodable images");
  return train_lighting_model(ok, seed);
}

// Labels by id from a two-column TSV with header "id<TAB>label".
inline std::vector<double> load_labels(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open labels " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail_data("labels file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id\tlabel") fail_data("labels header must be 'id<TAB>label'");
  std::map<std::string, double> by_id;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 2) fail_data("labels line " + std::to_string(lineno) + ": expected 2 fields");
    if (!by_id.emplace(f[0], parse_double(f[1])).second) fail_data("duplicate label for " + f[0]);
  }
  std::vector<double> out;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) fail_data("no label for " + id);
    out.push_back(it->second);
  }
  return out;
}

// Columns of the given groups, in matrix order.
inline FeatureMatrix columns_of_groups(const FeatureMatrix& m, const std::vector<Group>& groups) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const auto g = group_of_column(m.registry[c]);
    if (g && detail::has_group(groups, *g)) cols.push_back(c);
  }
  if (cols.empty()) fail_config("matrix has no columns in the selected groups");
  return m.select_columns(cols);
}

}  // namespace pae
