#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidity/domain.hpp"
#include "fluidity/engine.hpp"
#include "fluidity/stats.hpp"

namespace fluidity {

struct SweepGrid {
  std::vector<double> semantic_values;
  std::vector<double> compat_values;
  std::vector<double> label_values;

  /// Non-empty, ascending lists of valid cut-offs; throws std::invalid_argument otherwise.
  void validate() const;
  std::vector<Thresholds> points() const;
};

/// {"semantic": [...], "compat": [...], "label": [...]}. A missing list
/// holds that cut-off at its default.
SweepGrid sweep_grid_from_json(const nlohmann::json& j);
/// Semantic threshold at 0.25, 0.5 and 0.75; the other two at their defaults.
SweepGrid default_sweep_grid();

struct SweepRow {
  Thresholds thresholds;
  std::size_t chains = 0;
  double mean_chain_length = 0.0;
  double fraction_unbroken = 0.0;
  double fraction_broken_at_1 = 0.0;
};

/// Chain lengths obtained by re-applying `thresholds` to stored metrics.
/// Throws std::runtime_error for a record without stored metrics.
std::vector<int> reapply_thresholds(const std::vector<ChainRecord>& records, const Thresholds& thresholds);

/// One row per grid point, in grid order (semantic outermost, label innermost).
std::vector<SweepRow> sweep_thresholds(const std::vector<ChainRecord>& records, const SweepGrid& grid,
                                       Execution execution = Execution::parallel);
std::vector<SweepRow> sweep_thresholds(const std::filesystem::path& run_dir, const SweepGrid& grid,
                                       Execution execution = Execution::parallel);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct BoxSummary {
  Combo combo;
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quantile of a sorted sample by linear interpolation between closest ranks.
double quantile_linear(std::span<const double> sorted, double q);
BoxSummary box_summary(const Combo& combo, std::span<const int> lengths);

/// Reads the combination and complete chain lengths of a run directory.
LengthSample load_length_sample(const std::filesystem::path& run_dir);

struct ReportBundle {
  std::vector<std::filesystem::path> files;
  std::vector<FluidityEntry> scale;
  std::vector<ComparisonRow> comparisons;
};

/// Writes, for every combination, histogram_<generator>__<captioner>.csv and
/// .svg, plus box_summary.csv, fluidity_scale.csv, comparisons.csv,
/// stats.csv and fluidity_scale.svg.
ReportBundle emit_report(const std::vector<LengthSample>& runs, const std::vector<LengthSample>& controls, double alpha,
                         const std::filesystem::path& out_dir);
ReportBundle emit_report(const std::vector<std::filesystem::path>& run_dirs,
                         const std::vector<std::filesystem::path>& control_dirs, double alpha,
                         const std::filesystem::path& out_dir);

std::string histogram_csv(const LengthDistribution& dist);
std::string box_summary_csv(const std::vector<BoxSummary>& rows);
std::string fluidity_scale_csv(const std::vector<FluidityEntry>& scale);
std::string comparisons_csv(const std::vector<ComparisonRow>& rows);
std::string stats_csv(const std::vector<LengthSample>& samples);

/// File-name-safe form of a combination: "<generator>__<captioner>".
std::string combo_slug(const Combo& combo);

// Hand-written SVG, 800x600 viewBox.
std::string histogram_svg(const LengthDistribution& dist);
std::string fluidity_scale_svg(const std::vector<FluidityEntry>& scale);

/// Formats with the given number of decimals ("%.<d>f").
std::string fixed(double value, int decimals = 6);

}  // namespace fluidity
