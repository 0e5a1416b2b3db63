#include "lyrav/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "lyrav/errors.hpp"

namespace lyrav {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 60;
constexpr int kMarginBottom = 40;
constexpr int kMarginTop = 30;
constexpr int kMarginRight = 20;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string svg_header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\">" +
         title + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" stroke=\"black\"/>\n";
}

std::string rect(double x, double y, double w, double h, const std::string& fill) {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
         num(h) + "\" fill=\"" + fill + "\" stroke=\"black\"/>\n";
}

std::string label(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + s +
         "</text>\n";
}

}  // namespace

std::string length_box_svg(const std::vector<long>& lengths) {
  if (lengths.empty()) throw ValidationError("plot: empty corpus");
  const LengthStats s = length_stats_of_lengths(lengths);
  const double lo = std::min<double>(s.min, s.lower_bound) - 5;
  const double hi = std::max<double>(s.max, s.upper_bound) + 5;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto y_of = [&](double v) {
    return kMarginTop + plot_h * (1.0 - (v - lo) / (hi - lo));
  };
  const double cx = kWidth / 2.0;
  const double half = 80;

  std::string svg = svg_header("Song length distribution");
  // whiskers clipped to the Tukey fences
  double whisker_lo = s.max, whisker_hi = s.min;
  for (long v : lengths) {
    const auto d = static_cast<double>(v);
    if (d >= s.lower_bound && d < whisker_lo) whisker_lo = d;
    if (d <= s.upper_bound && d > whisker_hi) whisker_hi = d;
  }
  svg += line(cx, y_of(whisker_lo), cx, y_of(s.q1));
  svg += line(cx, y_of(s.q3), cx, y_of(whisker_hi));
  svg += line(cx - half / 2, y_of(whisker_lo), cx + half / 2, y_of(whisker_lo));
  svg += line(cx - half / 2, y_of(whisker_hi), cx + half / 2, y_of(whisker_hi));
  svg += rect(cx - half, y_of(s.q3), 2 * half, y_of(s.q1) - y_of(s.q3), "#cfe2f3");
  svg += line(cx - half, y_of(s.median), cx + half, y_of(s.median));
  for (long v : lengths) {
    const auto d = static_cast<double>(v);
    if (d < s.lower_bound || d > s.upper_bound)
      svg += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(y_of(d)) +
             "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
  }
  svg += label(kMarginLeft - 10, y_of(s.q1) + 4, "Q1 " + num(s.q1), "end");
  svg += label(kMarginLeft - 10, y_of(s.q3) + 4, "Q3 " + num(s.q3), "end");
  svg += label(cx + half + 8, y_of(s.median) + 4, "median " + num(s.median), "start");
  svg += label(cx, kHeight - 10, "lines per song");
  svg += "</svg>\n";
  return svg;
}

std::string length_hist_svg(const std::vector<long>& lengths) {
  if (lengths.empty()) throw ValidationError("plot: empty corpus");
  const long min_v = *std::min_element(lengths.begin(), lengths.end());
  const long max_v = *std::max_element(lengths.begin(), lengths.end());
  const long span = std::max<long>(1, max_v - min_v);
  const int bins = std::min<long>(20, span);
  const double bin_w = static_cast<double>(span) / bins;
  std::vector<int> counts(bins, 0);
  for (long v : lengths) {
    int b = static_cast<int>((v - min_v) / bin_w);
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  const int peak = *std::max_element(counts.begin(), counts.end());
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;

  std::string svg = svg_header("Song length histogram");
  for (int b = 0; b < bins; ++b) {
    const double h = plot_h * counts[b] / peak;
    const double x = kMarginLeft + plot_w * b / bins;
    svg += rect(x, kMarginTop + plot_h - h, plot_w / bins - 2, h, "#cfe2f3");
  }
  svg += line(kMarginLeft, kMarginTop + plot_h, kWidth - kMarginRight, kMarginTop + plot_h);
  svg += label(kMarginLeft, kHeight - 10, std::to_string(min_v), "start");
  svg += label(kWidth - kMarginRight, kHeight - 10, std::to_string(max_v), "end");
  svg += label(kWidth / 2.0, kHeight - 10, "lines per song");
  svg += "</svg>\n";
  return svg;
}

std::string authors_per_genre_svg(const std::vector<Song>& songs) {
  if (songs.empty()) throw ValidationError("plot: empty corpus");
  std::map<GenreTag, std::set<std::string>> authors;
  for (const auto& s : songs)
    for (GenreTag g : s.genres) authors[g].insert(s.lyricists.begin(), s.lyricists.end());
  std::size_t peak = 1;
  for (GenreTag g : all_genres()) peak = std::max(peak, authors[g].size());

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const double bar_w = plot_w / kGenreCount;

  std::string svg = svg_header("Unique lyricists per genre");
  int i = 0;
  for (GenreTag g : all_genres()) {
    const auto n = authors[g].size();
    const double h = plot_h * static_cast<double>(n) / static_cast<double>(peak);
    const double x = kMarginLeft + bar_w * i;
    svg += rect(x + 6, kMarginTop + plot_h - h, bar_w - 12, h, "#cfe2f3");
    svg += label(x + bar_w / 2, kMarginTop + plot_h - h - 5, std::to_string(n));
    std::string short_name(genre_english_name(g));
    const auto amp = short_name.find(" & ");
    if (amp != std::string::npos) short_name = short_name.substr(0, amp);
    svg += label(x + bar_w / 2, kHeight - 10, short_name);
    ++i;
  }
  svg += line(kMarginLeft, kMarginTop + plot_h, kWidth - kMarginRight, kMarginTop + plot_h);
  svg += "</svg>\n";
  return svg;
}

}  // namespace lyrav
