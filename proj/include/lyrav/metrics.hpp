#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lyrav/genre.hpp"
#include "lyrav/pairs.hpp"

namespace lyrav {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts count_confusion(const std::vector<int>& truth, const std::vector<int>& predicted);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

// Binary metrics over labels {0, 1}. The headline recall/precision are the
// positive-class values. Macro and weighted F1 average over the classes
// observed in truth or predictions, so a single-class evaluation scores the
// one class it actually contains. Any 0/0 ratio is 0.
struct MetricsCore {
  ConfusionCounts counts;
  double accuracy = 0;
  double f1_micro = 0;
  double f1_weighted = 0;
  double f1_macro = 0;
  double recall = 0;
  double precision = 0;
  ClassMetrics positive;
  ClassMetrics negative;
  std::size_t support = 0;
};

MetricsCore compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted);

struct ThresholdSearch {
  double threshold = 0;
  double macro_f1 = 0;
};

// -1.00 .. 1.00 in steps of 0.01.
std::vector<double> default_threshold_grid();

// Picks the grid threshold maximizing macro F1 of (similarity >= threshold);
// ties break toward the smallest threshold.
ThresholdSearch sweep_threshold(const std::vector<double>& similarities,
                                const std::vector<int>& truth,
                                const std::vector<double>& grid = default_threshold_grid());

struct MetricsRow {
  std::optional<GenreTag> genre;  // nullopt = Overall
  PairMode mode = PairMode::kPerGenre;
  MetricsCore core;
};

using Report = std::vector<MetricsRow>;

// One row per (genre, mode) with nonzero support; a cross-genre pair counts
// toward both of its genres. Overall rows per mode count each pair once.
Report group_report(const std::vector<Pair>& pairs, const std::vector<int>& predictions);

// format: "markdown" (column maxima bolded) or "csv".
std::string render_report(const Report& report, const std::string& format);

// Reads back the CSV emitted by render_report.
Report parse_report_csv(std::string_view doc);

}  // namespace lyrav
