// Command-line front end: extract, train-lighting, train-aux, analyze,
// classify, report. Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pae/analysis.hpp"
#include "pae/dataset.hpp"
#include "pae/error.hpp"
#include "pae/format.hpp"
#include "pae/pipeline.hpp"
#include "pae/report.hpp"

namespace fs = std::filesystem;
using namespace pae;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail_config("output directory " + dir.string() + " is not writable");
  const fs::path probe = dir / ".pae_write_probe";
  {
    std::ofstream out(probe);
    if (!out) fail_config("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

std::vector<Group> groups_or_all(const std::string& spec) {
  if (spec.empty()) return {kAllGroups.begin(), kAllGroups.end()};
  return parse_groups(spec);
}

FeatureMatrix load_for_groups(const fs::path& path, const std::string& groups) {
  FeatureMatrix m = load_matrix(path);
  if (groups.empty()) return m;
  return columns_of_groups(m, parse_groups(groups));
}

std::map<std::string, fs::path> parse_aux_flags(const std::vector<std::string>& flags) {
  std::map<std::string, fs::path> out;
  for (const auto& f : flags) {
    const auto eq = f.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == f.size())
      fail_config("--aux-model expects <kind>=<path>, got '" + f + "'");
    const std::string kind = f.substr(0, eq);
    aux_kind_of(kind);
    if (!out.emplace(kind, f.substr(eq + 1)).second) fail_config("--aux-model " + kind + " given twice");
  }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : detail::split(s, ',')) {
    try {
      out.push_back(parse_double(tok));
    } catch (const Error&) {
      fail_config("bad grid value '" + tok + "'");
    }
  }
  return out;
}

void print_log(const std::vector<std::string>& log) {
  for (const auto& line : log) std::cerr << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portrait aesthetics feature extraction and analysis"};
  app.require_subcommand(1);

  // extract
  fs::path manifest, out, matrix, labels;
  int workers = 1;
  std::string groups, keywords, kind, c_grid;
  std::optional<fs::path> lighting, semantic_dir;
  std::vector<std::string> aux_flags;
  std::optional<std::uint64_t> seed;
  double delta = 0.0;
  std::optional<double> threshold;
  int lambda_steps = 100;
  double lambda_min_ratio = 1e-3;

  auto* extract = app.add_subcommand("extract", "Extract the feature matrix for a manifest");
  extract->add_option("--manifest", manifest, "Manifest TSV")->required();
  extract->add_option("--out", out, "Output directory")->required();
  extract->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  extract->add_option("--groups", groups, "Comma-separated groups or 'all'");
  extract->add_option("--lighting-model", lighting, "Lighting model file");
  extract->add_option("--aux-model", aux_flags, "<kind>=<path>, kind in emotion|originality|memorability|splicing");
  extract->add_option("--semantic-vectors", semantic_dir, "Directory of <id>.txt semantic vectors");
  extract->add_option("--keywords", keywords, "Title/tag keyword filter, comma-separated or 'default'");

  auto* train_lighting = app.add_subcommand("train-lighting", "Learn the lighting-pattern centroids");
  train_lighting->add_option("--manifest", manifest, "Manifest TSV")->required();
  train_lighting->add_option("--out", out, "Output directory")->required();
  train_lighting->add_option("--seed", seed, "Random seed")->required();
  train_lighting->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* train_aux_cmd = app.add_subcommand("train-aux", "Train an auxiliary model");
  train_aux_cmd->add_option("--kind", kind, "emotion|originality|memorability|splicing")->required();
  train_aux_cmd->add_option("--out", out, "Output directory")->required();
  train_aux_cmd->add_option("--seed", seed, "Random seed")->required();
  train_aux_cmd->add_option("--matrix", matrix, "Feature matrix CSV (not for splicing)");
  train_aux_cmd->add_option("--labels", labels, "id<TAB>label file; default is the mean_score column");
  train_aux_cmd->add_option("--groups", groups, "Input groups (default compositional)");
  train_aux_cmd->add_option("--manifest", manifest, "Image manifest (splicing only)");
  train_aux_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* analyze_cmd = app.add_subcommand("analyze", "LASSO and Spearman analysis of a feature matrix");
  analyze_cmd->add_option("--matrix", matrix, "Feature matrix CSV")->required();
  analyze_cmd->add_option("--out", out, "Output directory")->required();
  analyze_cmd->add_option("--seed", seed, "Random seed")->required();
  analyze_cmd->add_option("--groups", groups, "Restrict to these groups");
  analyze_cmd->add_option("--lambda-steps", lambda_steps, "Lambda grid size")->check(CLI::Range(2, 10000));
  analyze_cmd->add_option("--lambda-min-ratio", lambda_min_ratio, "lambda_min / lambda_max")
      ->check(CLI::Range(1e-12, 0.999999));

  auto* classify_cmd = app.add_subcommand("classify", "5-fold SVM classification of binarized scores");
  classify_cmd->add_option("--matrix", matrix, "Feature matrix CSV")->required();
  classify_cmd->add_option("--out", out, "Output directory")->required();
  classify_cmd->add_option("--seed", seed, "Random seed")->required();
  classify_cmd->add_option("--groups", groups, "Restrict to these groups");
  classify_cmd->add_option("--delta", delta, "Drop training samples within delta of the threshold");
  classify_cmd->add_option("--threshold", threshold, "Binarization threshold (default: mean score)");
  classify_cmd->add_option("--c-grid", c_grid, "Comma-separated C values");

  auto* report_cmd = app.add_subcommand("report", "Render report.md from analysis/classification outputs");
  report_cmd->add_option("--out", out, "Directory holding the outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (extract->parsed()) {
      prepare_out(out);
      ExtractOptions opt;
      opt.groups = groups_or_all(groups);
      opt.workers = workers;
      opt.semantic_dir = semantic_dir;
      if (keywords == "default") opt.keywords = default_keywords();
      else if (!keywords.empty()) opt.keywords = detail::split(keywords, ',');
      const ExtractModels models = load_extract_models(lighting, parse_aux_flags(aux_flags));
      const Manifest m = load_manifest(manifest);
      const ExtractionResult r = extract_features(m, models, opt);
      write_extraction(r, out);
      print_log(r.log);
      std::cerr << "extracted " << r.assembled.matrix.rows() << " rows, dropped " << r.dropped.size() << "\n";
      if (r.assembled.matrix.rows() == 0) {
        std::cerr << "error: no rows extracted\n";
        return kExitData;
      }
    } else if (train_lighting->parsed()) {
      prepare_out(out);
      std::vector<std::string> log;
      const LightingModel model = train_lighting_from_manifest(load_manifest(manifest), *seed, workers, &log);
      print_log(log);
      save_lighting_model(model, out / kLightingModelFile);
    } else if (train_aux_cmd->parsed()) {
      const AuxKind ak = aux_kind_of(kind);
      prepare_out(out);
      AuxModel model;
      if (kind == "splicing") {
        if (manifest.empty()) fail_config("train-aux --kind splicing needs --manifest");
        std::vector<std::string> log;
        const auto images = load_corpus(load_manifest(manifest), workers, &log);
        print_log(log);
        model = train_splicing_model(images, *seed);
      } else {
        if (matrix.empty()) fail_config("train-aux --kind " + kind + " needs --matrix");
        const std::vector<Group> gs = groups.empty() ? std::vector<Group>{Group::compositional} : parse_groups(groups);
        if (std::find(gs.begin(), gs.end(), Group::fuzzy) != gs.end())
          fail_config("aux models cannot consume fuzzy features");
        const FeatureMatrix x = columns_of_groups(load_matrix(matrix), gs);
        const std::vector<double> y = labels.empty() ? x.scores : load_labels(labels, x.ids);
        model = train_aux(x, y, ak, *seed);
      }
      save_aux_model(model, out / aux_file_name(kind));
    } else if (analyze_cmd->parsed()) {
      prepare_out(out);
      LassoOptions opt;
      opt.grid_size = lambda_steps;
      opt.min_ratio = lambda_min_ratio;
      write_analysis(analyze(load_for_groups(matrix, groups), *seed, opt), out);
    } else if (classify_cmd->parsed()) {
      prepare_out(out);
      if (!std::isfinite(delta) || delta < 0.0) fail_config("--delta must be a finite value >= 0");
      if (threshold && !std::isfinite(*threshold)) fail_config("--threshold must be finite");
      ClassifyOptions opt;
      opt.seed = *seed;
      opt.delta = delta;
      opt.threshold = threshold;
      if (!c_grid.empty()) opt.c_grid = parse_grid(c_grid);
      const ClassificationResult r = classify(load_for_groups(matrix, groups), opt);
      write_classification(r, out);
      std::cout << "mean accuracy " << format_double(r.accuracy.mean) << " std " << format_double(r.accuracy.std)
                << "\n";
    } else if (report_cmd->parsed()) {
      if (!fs::is_directory(out)) fail_config(out.string() + " is not a directory");
      render_report(out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
