#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lyrav/genre.hpp"

namespace lyrav {

enum class Split { kUnassigned = 0, kTrain, kTest1, kTest2 };

std::string_view split_name(Split s);
Split parse_split(std::string_view s);

// A lyric record as collected, before any cleaning.
struct RawSong {
  std::string id;  // optional; assigned during cleaning when empty
  std::string title;
  std::vector<std::string> lyricists;
  std::string raw_lyrics;
  std::string source;
};

// A cleaned lyric work.
struct Song {
  std::string id;
  std::string title;
  std::vector<std::string> lyricists;
  std::vector<std::string> lines;
  std::vector<GenreTag> genres;  // at most 5, no duplicates; empty until labeled
  Split split = Split::kUnassigned;

  std::size_t length() const { return lines.size(); }
  bool has_genre(GenreTag g) const;
  std::string text() const;  // lines joined with '\n'

  bool operator==(const Song&) const = default;
};

struct CleanConfig {
  bool remove_parentheses = true;      // （...） and (...) spans
  std::size_t speaker_label_max_chars = 6;
};

// Normalizes raw lyric text into nonempty lines: strips timestamp tokens,
// bracketed/parenthesized spans, speaker labels and anything before them,
// then trims and drops empty lines.
std::vector<std::string> clean_lyrics(std::string_view raw, const CleanConfig& cfg = {});

// Line count of a cleaned lyric.
std::size_t compute_length(const std::vector<std::string>& lines);

// Builds a Song from a raw record; `fallback_id` is used when the record
// carries none. Throws ValidationError when the record violates its
// invariants or cleaning leaves no lines.
Song clean_song(const RawSong& raw, std::string_view fallback_id, const CleanConfig& cfg = {});

struct LengthStats {
  double median = 0;
  double mean = 0;
  long max = 0;
  long min = 0;
  double q1 = 0;
  double q3 = 0;
  double lower_bound = 0;
  double upper_bound = 0;
  std::size_t outlier_count = 0;
};

enum class QuantileMethod {
  kLinearInterpolation,  // interpolate at position (n-1)*p of the sorted sample
  kNearestRank,          // smallest value covering at least p of the sample
};

double quantile(std::vector<double> values, double p,
                QuantileMethod method = QuantileMethod::kLinearInterpolation);

// Linear-interpolation quantile at position (n-1)*p of the sorted sample.
double interpolated_quantile(std::vector<double> values, double p);

// Median/mean/min/max plus Tukey fences (q1 - 1.5*IQR, q3 + 1.5*IQR).
// Throws ValidationError("empty corpus") on an empty collection.
LengthStats length_stats(const std::vector<Song>& songs,
                         QuantileMethod method = QuantileMethod::kLinearInterpolation);
LengthStats length_stats_of_lengths(const std::vector<long>& lengths,
                                    QuantileMethod method = QuantileMethod::kLinearInterpolation);

// Partitions songs into (kept, removed) by inclusive length bounds.
std::pair<std::vector<Song>, std::vector<Song>> filter_outliers(const std::vector<Song>& songs,
                                                                double lower_bound,
                                                                double upper_bound);
std::pair<std::vector<Song>, std::vector<Song>> filter_outliers(const std::vector<Song>& songs,
                                                                const LengthStats& stats);

// Corpus JSONL: one object per line with keys id, title, lyricists, lines,
// length, genres (English tag names), split. Errors carry line numbers.
std::vector<Song> load_corpus(const std::string& path);
void save_corpus(const std::vector<Song>& songs, const std::string& path);
std::vector<Song> parse_corpus(std::string_view jsonl, std::string_view origin = "corpus");
std::string serialize_corpus(const std::vector<Song>& songs);

// Raw JSONL: objects with title, lyricists, raw_lyrics and optional id/source.
std::vector<RawSong> load_raw_songs(const std::string& path);

}  // namespace lyrav
