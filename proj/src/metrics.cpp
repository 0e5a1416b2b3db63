#include "lyrav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "lyrav/csv.hpp"
#include "lyrav/errors.hpp"

namespace lyrav {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

ConfusionCounts count_confusion(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.empty()) throw ValidationError("metrics: empty label sequence");
  if (truth.size() != predicted.size()) throw ValidationError("metrics: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) throw ValidationError("metrics: labels must be 0 or 1");
    if (predicted[i] != 0 && predicted[i] != 1)
      throw ValidationError("metrics: predictions must be 0 or 1");
    if (truth[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn) += 1;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

MetricsCore compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted) {
  MetricsCore m;
  m.counts = count_confusion(truth, predicted);
  const auto& c = m.counts;
  m.support = c.total();
  m.accuracy = ratio(c.tp + c.tn, m.support);
  m.f1_micro = m.accuracy;

  m.positive.support = c.tp + c.fn;
  m.positive.precision = ratio(c.tp, c.tp + c.fp);
  m.positive.recall = ratio(c.tp, c.tp + c.fn);
  m.positive.f1 = (m.positive.precision + m.positive.recall) == 0
                      ? 0.0
                      : 2 * m.positive.precision * m.positive.recall /
                            (m.positive.precision + m.positive.recall);
  m.negative.support = c.tn + c.fp;
  m.negative.precision = ratio(c.tn, c.tn + c.fn);
  m.negative.recall = ratio(c.tn, c.tn + c.fp);
  m.negative.f1 = (m.negative.precision + m.negative.recall) == 0
                      ? 0.0
                      : 2 * m.negative.precision * m.negative.recall /
                            (m.negative.precision + m.negative.recall);

  // Classes observed in truth or predictions take part in the averages.
  const bool has_pos = (c.tp + c.fn + c.fp) > 0;
  const bool has_neg = (c.tn + c.fp + c.fn) > 0;
  double macro_sum = 0;
  int macro_n = 0;
  double weighted_sum = 0;
  if (has_pos) {
    macro_sum += m.positive.f1;
    ++macro_n;
    weighted_sum += static_cast<double>(m.positive.support) * m.positive.f1;
  }
  if (has_neg) {
    macro_sum += m.negative.f1;
    ++macro_n;
    weighted_sum += static_cast<double>(m.negative.support) * m.negative.f1;
  }
  m.f1_macro = macro_n == 0 ? 0.0 : macro_sum / macro_n;
  m.f1_weighted = weighted_sum / static_cast<double>(m.support);

  m.recall = m.positive.recall;
  m.precision = m.positive.precision;
  return m;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  grid.reserve(201);
  for (int i = 0; i <= 200; ++i) grid.push_back(static_cast<double>(i - 100) / 100.0);
  return grid;
}

ThresholdSearch sweep_threshold(const std::vector<double>& similarities,
                                const std::vector<int>& truth,
                                const std::vector<double>& grid) {
  if (similarities.empty() || similarities.size() != truth.size())
    throw ValidationError("sweep_threshold: empty or misaligned inputs");
  if (grid.empty()) throw ValidationError("sweep_threshold: empty grid");
  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());

  ThresholdSearch best{sorted_grid.front(), -1.0};
  std::vector<int> preds(similarities.size());
  for (double t : sorted_grid) {
    for (std::size_t i = 0; i < similarities.size(); ++i)
      preds[i] = similarities[i] >= t ? 1 : 0;
    const double f1 = compute_metrics(truth, preds).f1_macro;
    if (f1 > best.macro_f1) best = {t, f1};
  }
  return best;
}

Report group_report(const std::vector<Pair>& pairs, const std::vector<int>& predictions) {
  if (pairs.size() != predictions.size())
    throw ValidationError("group_report: pairs and predictions misaligned");

  struct Bucket {
    std::vector<int> truth;
    std::vector<int> pred;
  };
  std::map<std::pair<int, PairMode>, Bucket> genre_buckets;
  std::map<PairMode, Bucket> overall;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& p = pairs[i];
    for (GenreTag g : p.genres) {
      auto& b = genre_buckets[{static_cast<int>(g), p.mode}];
      b.truth.push_back(p.label);
      b.pred.push_back(predictions[i]);
    }
    auto& o = overall[p.mode];
    o.truth.push_back(p.label);
    o.pred.push_back(predictions[i]);
  }

  Report report;
  for (GenreTag g : all_genres()) {
    for (PairMode mode : {PairMode::kPerGenre, PairMode::kCrossGenre}) {
      auto it = genre_buckets.find({static_cast<int>(g), mode});
      if (it == genre_buckets.end() || it->second.truth.empty()) continue;
      report.push_back({g, mode, compute_metrics(it->second.truth, it->second.pred)});
    }
  }
  for (PairMode mode : {PairMode::kPerGenre, PairMode::kCrossGenre}) {
    auto it = overall.find(mode);
    if (it == overall.end() || it->second.truth.empty()) continue;
    report.push_back({std::nullopt, mode, compute_metrics(it->second.truth, it->second.pred)});
  }
  return report;
}

namespace {

std::string row_genre_name(const MetricsRow& row) {
  return row.genre ? std::string(genre_english_name(*row.genre)) : std::string("Overall");
}

constexpr int kMetricColumns = 6;

double metric_value(const MetricsRow& row, int col) {
  switch (col) {
    case 0: return row.core.accuracy;
    case 1: return row.core.f1_micro;
    case 2: return row.core.f1_weighted;
    case 3: return row.core.f1_macro;
    case 4: return row.core.recall;
    default: return row.core.precision;
  }
}

}  // namespace

std::string render_report(const Report& report, const std::string& format) {
  if (report.empty()) throw ValidationError("render_report: empty report");
  if (format == "csv") {
    std::string out =
        "genre,mode,accuracy,f1_micro,f1_weighted,f1_macro,recall,precision,support\n";
    for (const auto& row : report) {
      out += csv::join_row({row_genre_name(row), std::string(mode_name(row.mode)),
                            fmt4(row.core.accuracy), fmt4(row.core.f1_micro),
                            fmt4(row.core.f1_weighted), fmt4(row.core.f1_macro),
                            fmt4(row.core.recall), fmt4(row.core.precision),
                            std::to_string(row.core.support)});
      out.push_back('\n');
    }
    return out;
  }
  if (format != "markdown") throw ValidationError("render_report: unknown format: " + format);

  // Bold marks every cell achieving its column maximum.
  double col_max[kMetricColumns];
  for (int c = 0; c < kMetricColumns; ++c) {
    col_max[c] = metric_value(report.front(), c);
    for (const auto& row : report) col_max[c] = std::max(col_max[c], metric_value(row, c));
  }
  std::string out =
      "| Genre | Mode | Accuracy | F1 Micro | F1 Weighted | F1 Macro | Recall | Precision |\n"
      "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : report) {
    out += "| " + row_genre_name(row) + " | " + std::string(mode_name(row.mode));
    for (int c = 0; c < kMetricColumns; ++c) {
      const double v = metric_value(row, c);
      const std::string cell = fmt4(v);
      out += " | ";
      out += v == col_max[c] ? "**" + cell + "**" : cell;
    }
    out += " |\n";
  }
  return out;
}

Report parse_report_csv(std::string_view doc) {
  auto rows = csv::parse(doc);
  if (rows.empty()) throw ValidationError("report csv: empty document");
  Report report;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 9)
      throw ValidationError("report csv: row " + std::to_string(i + 1) + ": expected 9 fields");
    MetricsRow row;
    if (r[0] != "Overall") {
      auto tag = parse_genre_name(r[0]);
      if (!tag) throw ValidationError("report csv: row " + std::to_string(i + 1) +
                                      ": unknown genre: " + r[0]);
      row.genre = *tag;
    }
    row.mode = parse_mode(r[1]);
    try {
      row.core.accuracy = std::stod(r[2]);
      row.core.f1_micro = std::stod(r[3]);
      row.core.f1_weighted = std::stod(r[4]);
      row.core.f1_macro = std::stod(r[5]);
      row.core.recall = std::stod(r[6]);
      row.core.precision = std::stod(r[7]);
      row.core.support = static_cast<std::size_t>(std::stoul(r[8]));
    } catch (const std::exception&) {
      throw ValidationError("report csv: row " + std::to_string(i + 1) + ": bad numeric field");
    }
    report.push_back(std::move(row));
  }
  return report;
}

}  // namespace lyrav
