#pragma once

// Analysis and classification artifacts as TSV files, and a markdown report
// rendered from whichever of them exist in a directory. No timestamps, so
// identical inputs give identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pae/analysis.hpp"
#include "pae/error.hpp"
#include "pae/format.hpp"
#include "pae/learn/serialize.hpp"

namespace pae {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail_data("cannot write " + p.string());
  return out;
}

inline std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

using TsvTable = std::vector<std::vector<std::string>>;

// Header row included.
inline TsvTable read_tsv(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail_data("cannot open " + p.string());
  TsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    t.push_back(split(line, '\t'));
  }
  if (t.empty()) fail_data(p.string() + " is empty");
  for (const auto& row : t)
    if (row.size() != t.front().size()) fail_data(p.string() + ": ragged table");
  return t;
}

}  // namespace detail

inline constexpr const char* kGroupFile = "group_correlation.tsv";
inline constexpr const char* kEntryFile = "lasso_entry.tsv";
inline constexpr const char* kFeatureRhoFile = "feature_rho.tsv";
inline constexpr const char* kCurveFile = "correlation_curve.tsv";
inline constexpr const char* kPathFile = "lasso_path.txt";
inline constexpr const char* kClassFoldFile = "classification_folds.tsv";
inline constexpr const char* kClassSummaryFile = "classification_summary.tsv";
inline constexpr const char* kReportFile = "report.md";

inline void write_analysis(const AnalysisResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / kGroupFile);
    out << "group\tfeatures\tmean_rho\tstd_rho\tmean_mse\tstd_mse";
    for (std::size_t f = 0; f < r.groups.front().fold_rho.size(); ++f) out << "\trho_fold" << f + 1;
    out << "\n";
    for (const auto& g : r.groups) {
      out << g.group << "\t" << g.features << "\t" << format_double(g.rho.mean) << "\t" << format_double(g.rho.std)
          << "\t" << format_double(g.mse.mean) << "\t" << format_double(g.mse.std);
      for (double v : g.fold_rho) out << "\t" << format_double(v);
      out << "\n";
    }
  }
  {
    auto out = detail::open_out(dir / kEntryFile);
    out << "rank\tfeature\tentry_step\tentry_lambda\tcoef_at_entry\tcoef_final\n";
    for (const auto& e : r.entries)
      out << e.rank << "\t" << e.feature << "\t" << e.entry_step << "\t" << format_double(e.entry_lambda) << "\t"
          << format_double(e.coef_at_entry) << "\t" << format_double(e.coef_final) << "\n";
  }
  {
    auto out = detail::open_out(dir / kFeatureRhoFile);
    out << "feature\trho\tdegenerate\n";
    for (const auto& f : r.feature_rho) out << f.feature << "\t" << format_double(f.rho) << "\t" << f.degenerate << "\n";
  }
  {
    auto out = detail::open_out(dir / kCurveFile);
    out << "features\tmean_rho\tstd_rho\n";
    for (const auto& c : r.curve)
      out << c.features << "\t" << format_double(c.rho.mean) << "\t" << format_double(c.rho.std) << "\n";
  }
  auto out = detail::open_out(dir / kPathFile);
  save_lasso_path(r.full_path, out);
}

inline void write_classification(const ClassificationResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / kClassFoldFile);
    out << "fold\ttrain_size\ttest_size\tC\taccuracy\ttp\tfp\ttn\tfn\n";
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      const auto& c = r.folds[f];
      out << f + 1 << "\t" << c.train_size << "\t" << c.test_size << "\t" << format_double(c.C) << "\t"
          << format_double(c.accuracy) << "\t" << c.confusion.tp << "\t" << c.confusion.fp << "\t" << c.confusion.tn
          << "\t" << c.confusion.fn << "\n";
    }
  }
  auto out = detail::open_out(dir / kClassSummaryFile);
  out << "key\tvalue\n"
      << "threshold\t" << format_double(r.threshold) << "\n"
      << "delta\t" << format_double(r.delta) << "\n"
      << "positives\t" << r.positives << "\n"
      << "negatives\t" << r.negatives << "\n"
      << "mean_accuracy\t" << format_double(r.accuracy.mean) << "\n"
      << "std_accuracy\t" << format_double(r.accuracy.std) << "\n";
}

// Markdown summary plus x/y plot-data files. Errors when the directory holds
// no analysis or classification output.
inline std::string render_report(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const bool has_analysis = fs::exists(dir / kGroupFile);
  const bool has_class = fs::exists(dir / kClassSummaryFile);
  if (!has_analysis && !has_class) fail_data("no analysis or classification results in " + dir.string());
  auto num = [](const std::string& s) { return parse_double(s); };

  std::ostringstream md;
  md << "# Portrait aesthetics report\n";
  if (has_analysis) {
    const auto groups = detail::read_tsv(dir / kGroupFile);
    md << "\n## Held-out Spearman correlation by feature group\n\n"
       << "| group | features | mean rho | std rho | mean MSE |\n|---|---:|---:|---:|---:|\n";
    auto plot = detail::open_out(dir / "plot_group_rho.dat");
    plot << "# x=group_index y=mean_rho\n";
    for (std::size_t i = 1; i < groups.size(); ++i) {
      const auto& g = groups[i];
      md << "| " << g[0] << " | " << g[1] << " | " << detail::fixed(num(g[2])) << " | " << detail::fixed(num(g[3]))
         << " | " << detail::fixed(num(g[4])) << " |\n";
      plot << i << " " << g[2] << "\n";
    }
    if (fs::exists(dir / kEntryFile)) {
      const auto entries = detail::read_tsv(dir / kEntryFile);
      md << "\n## LASSO entry order (top 20)\n\n| rank | feature | entry step | coefficient at entry |\n"
         << "|---:|---|---:|---:|\n";
      for (std::size_t i = 1; i < entries.size() && i <= 20; ++i)
        md << "| " << entries[i][0] << " | " << entries[i][1] << " | " << entries[i][2] << " | "
           << detail::fixed(num(entries[i][4])) << " |\n";
    }
    if (fs::exists(dir / kFeatureRhoFile)) {
      auto rho = detail::read_tsv(dir / kFeatureRhoFile);
      std::vector<std::pair<double, std::string>> ranked;
      for (std::size_t i = 1; i < rho.size(); ++i) ranked.emplace_back(num(rho[i][1]), rho[i][0]);
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return std::abs(a.first) > std::abs(b.first); });
      md << "\n## Strongest single-feature correlations\n\n| feature | rho |\n|---|---:|\n";
      for (std::size_t i = 0; i < ranked.size() && i < 15; ++i)
        md << "| " << ranked[i].second << " | " << detail::fixed(ranked[i].first) << " |\n";
    }
    if (fs::exists(dir / kCurveFile)) {
      const auto curve = detail::read_tsv(dir / kCurveFile);
      auto plot = detail::open_out(dir / "plot_correlation_curve.dat");
      plot << "# x=features y=mean_rho\n";
      for (std::size_t i = 1; i < curve.size(); ++i) plot << curve[i][0] << " " << curve[i][1] << "\n";
      md << "\nCorrelation versus number of active features: `plot_correlation_curve.dat` (" << curve.size() - 1
         << " points).\n";
    }
  }
  if (has_class) {
    const auto summary = detail::read_tsv(dir / kClassSummaryFile);
    md << "\n## Classification\n\n| key | value |\n|---|---:|\n";
    for (std::size_t i = 1; i < summary.size(); ++i) md << "| " << summary[i][0] << " | " << summary[i][1] << " |\n";
    if (fs::exists(dir / kClassFoldFile)) {
      const auto folds = detail::read_tsv(dir / kClassFoldFile);
      auto plot = detail::open_out(dir / "plot_fold_accuracy.dat");
      plot << "# x=fold y=accuracy\n";
      md << "\n| fold | train | test | C | accuracy | TP | FP | TN | FN |\n|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
      for (std::size_t i = 1; i < folds.size(); ++i) {
        const auto& f = folds[i];
        md << "| " << f[0] << " | " << f[1] << " | " << f[2] << " | " << f[3] << " | " << detail::fixed(num(f[4]))
           << " | " << f[5] << " | " << f[6] << " | " << f[7] << " | " << f[8] << " |\n";
        plot << f[0] << " " << f[4] << "\n";
      }
    }
  }
  const std::string text = md.str();
  auto out = detail::open_out(dir / kReportFile);
  out << text;
  return text;
}

}  // namespace pae
