#include "lyrav/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <unordered_set>

#include <json.hpp>

#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kUnassigned: return "unassigned";
    case Split::kTrain: return "train";
    case Split::kTest1: return "test1";
    case Split::kTest2: return "test2";
  }
  return "unassigned";
}

Split parse_split(std::string_view s) {
  if (s == "unassigned") return Split::kUnassigned;
  if (s == "train") return Split::kTrain;
  if (s == "test1") return Split::kTest1;
  if (s == "test2") return Split::kTest2;
  throw ValidationError("unknown split: " + std::string(s));
}

bool Song::has_genre(GenreTag g) const {
  return std::find(genres.begin(), genres.end(), g) != genres.end();
}

std::string Song::text() const { return text::join_lines(lines); }

namespace {

// [mm:ss], [mm:ss.xx] and (mm:ss) style play-position markers.
const std::regex& timestamp_pattern() {
  static const std::regex re(R"((\[\d{1,3}:\d{2}(?:\.\d{1,3})?\])|(\(\d{1,3}:\d{2}(?:\.\d{1,3})?\)))");
  return re;
}

bool is_opener(char32_t c, const CleanConfig& cfg) {
  if (c == U'[' || c == U'【') return true;
  if ((c == U'(' || c == U'（') && cfg.remove_parentheses) return true;
  return false;
}

bool is_closer(char32_t c, const CleanConfig& cfg) {
  if (c == U']' || c == U'】') return true;
  if ((c == U')' || c == U'）') && cfg.remove_parentheses) return true;
  return false;
}

char32_t closer_for(char32_t open) {
  switch (open) {
    case U'[': return U']';
    case U'(': return U')';
    case U'（': return U'）';
    case U'【': return U'】';
  }
  return 0;
}

std::u32string drop_bracket_spans(const std::u32string& line, const CleanConfig& cfg) {
  std::u32string out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    char32_t c = line[i];
    if (is_opener(c, cfg)) {
      std::size_t close = line.find(closer_for(c), i + 1);
      if (close != std::u32string::npos) i = close;
      // unmatched opener: dropped on its own
    } else if (!is_closer(c, cfg)) {
      out.push_back(c);
    }
  }
  return out;
}

// A speaker label is a run of at most `max_chars` non-punctuation characters
// from the line start up to the first colon. The label and everything before
// it (including the colon) are dropped.
std::u32string drop_speaker_label(const std::u32string& line, const CleanConfig& cfg) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    char32_t c = line[i];
    if (c == U':' || c == U'：') {
      if (i <= cfg.speaker_label_max_chars) return line.substr(i + 1);
      return line;
    }
    if (text::is_punct(c)) return line;
    if (i >= cfg.speaker_label_max_chars) return line;
  }
  return line;
}

}  // namespace

std::vector<std::string> clean_lyrics(std::string_view raw, const CleanConfig& cfg) {
  std::vector<std::string> out;
  for (const std::string& line : text::split_lines(raw)) {
    std::string no_ts = std::regex_replace(line, timestamp_pattern(), "");
    std::u32string u = text::decode_utf8(no_ts);
    u = drop_bracket_spans(u, cfg);
    // trim before the label check so indentation does not hide a label
    std::size_t b = 0;
    std::size_t e = u.size();
    while (b < e && text::is_space(u[b])) ++b;
    while (e > b && text::is_space(u[e - 1])) --e;
    u = u.substr(b, e - b);
    u = drop_speaker_label(u, cfg);
    std::string cleaned = text::trim(text::encode_utf8(u));
    if (!cleaned.empty()) out.push_back(std::move(cleaned));
  }
  return out;
}

std::size_t compute_length(const std::vector<std::string>& lines) { return lines.size(); }

Song clean_song(const RawSong& raw, std::string_view fallback_id, const CleanConfig& cfg) {
  Song song;
  song.id = raw.id.empty() ? std::string(fallback_id) : raw.id;
  song.title = text::trim(raw.title);
  if (song.title.empty()) throw ValidationError("song " + song.id + ": empty title");
  for (const auto& name : raw.lyricists) {
    std::string n = text::trim(name);
    if (n.empty()) throw ValidationError("song " + song.id + ": empty lyricist name");
    song.lyricists.push_back(std::move(n));
  }
  if (song.lyricists.empty()) throw ValidationError("song " + song.id + ": no lyricists");
  song.lines = clean_lyrics(raw.raw_lyrics, cfg);
  if (song.lines.empty())
    throw ValidationError("song " + song.id + ": no lyric lines after cleaning");
  return song;
}

double interpolated_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("empty corpus");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double quantile(std::vector<double> values, double p, QuantileMethod method) {
  if (method == QuantileMethod::kLinearInterpolation)
    return interpolated_quantile(std::move(values), p);
  if (values.empty()) throw ValidationError("empty corpus");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

LengthStats length_stats_of_lengths(const std::vector<long>& lengths, QuantileMethod method) {
  if (lengths.empty()) throw ValidationError("empty corpus");
  std::vector<double> v(lengths.begin(), lengths.end());
  LengthStats s;
  s.median = quantile(v, 0.5, method);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.min = *std::min_element(lengths.begin(), lengths.end());
  s.max = *std::max_element(lengths.begin(), lengths.end());
  s.q1 = quantile(v, 0.25, method);
  s.q3 = quantile(v, 0.75, method);
  const double iqr = s.q3 - s.q1;
  s.lower_bound = s.q1 - 1.5 * iqr;
  s.upper_bound = s.q3 + 1.5 * iqr;
  s.outlier_count = static_cast<std::size_t>(std::count_if(
      lengths.begin(), lengths.end(), [&](long L) {
        return static_cast<double>(L) < s.lower_bound || static_cast<double>(L) > s.upper_bound;
      }));
  return s;
}

LengthStats length_stats(const std::vector<Song>& songs, QuantileMethod method) {
  std::vector<long> lengths;
  lengths.reserve(songs.size());
  for (const auto& s : songs) lengths.push_back(static_cast<long>(s.length()));
  return length_stats_of_lengths(lengths, method);
}

std::pair<std::vector<Song>, std::vector<Song>> filter_outliers(const std::vector<Song>& songs,
                                                                double lower_bound,
                                                                double upper_bound) {
  std::vector<Song> kept;
  std::vector<Song> removed;
  for (const auto& s : songs) {
    const auto len = static_cast<double>(s.length());
    if (len >= lower_bound && len <= upper_bound) kept.push_back(s);
    else removed.push_back(s);
  }
  return {std::move(kept), std::move(removed)};
}

std::pair<std::vector<Song>, std::vector<Song>> filter_outliers(const std::vector<Song>& songs,
                                                                const LengthStats& stats) {
  return filter_outliers(songs, stats.lower_bound, stats.upper_bound);
}

namespace {

[[noreturn]] void record_error(std::string_view origin, std::size_t line_no, const std::string& what) {
  throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": " + what);
}

const ordered_json& require_field(const ordered_json& obj, const char* key,
                                  std::string_view origin, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) record_error(origin, line_no, "missing field \"" + std::string(key) + "\"");
  return *it;
}

std::string require_string(const ordered_json& obj, const char* key, std::string_view origin,
                           std::size_t line_no) {
  const auto& v = require_field(obj, key, origin, line_no);
  if (!v.is_string()) record_error(origin, line_no, "field \"" + std::string(key) + "\" must be a string");
  return v.get<std::string>();
}

std::vector<std::string> require_string_array(const ordered_json& obj, const char* key,
                                              std::string_view origin, std::size_t line_no) {
  const auto& v = require_field(obj, key, origin, line_no);
  if (!v.is_array()) record_error(origin, line_no, "field \"" + std::string(key) + "\" must be an array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      record_error(origin, line_no, "field \"" + std::string(key) + "\" must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<Song> parse_corpus(std::string_view jsonl, std::string_view origin) {
  std::vector<Song> songs;
  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) record_error(origin, line_no, "not a JSON object");

    Song song;
    song.id = require_string(obj, "id", origin, line_no);
    if (song.id.empty()) record_error(origin, line_no, "field \"id\" must be nonempty");
    if (!seen_ids.insert(song.id).second) record_error(origin, line_no, "duplicate id: " + song.id);
    song.title = require_string(obj, "title", origin, line_no);
    if (text::trim(song.title).empty()) record_error(origin, line_no, "field \"title\" must be nonempty");
    song.lyricists = require_string_array(obj, "lyricists", origin, line_no);
    if (song.lyricists.empty()) record_error(origin, line_no, "field \"lyricists\" must be nonempty");
    for (const auto& n : song.lyricists)
      if (text::trim(n).empty()) record_error(origin, line_no, "field \"lyricists\" holds an empty name");
    song.lines = require_string_array(obj, "lines", origin, line_no);
    if (song.lines.empty()) record_error(origin, line_no, "field \"lines\" must be nonempty");
    const auto& len = require_field(obj, "length", origin, line_no);
    if (!len.is_number_integer())
      record_error(origin, line_no, "field \"length\" must be an integer");
    if (len.get<std::size_t>() != song.lines.size())
      record_error(origin, line_no, "field \"length\" disagrees with lines");
    for (const auto& name : require_string_array(obj, "genres", origin, line_no)) {
      auto tag = parse_genre_name(name);
      if (!tag) record_error(origin, line_no, "field \"genres\": unknown genre: " + name);
      if (song.has_genre(*tag)) record_error(origin, line_no, "field \"genres\": duplicate tag: " + name);
      song.genres.push_back(*tag);
    }
    if (song.genres.size() > kGenreCount)
      record_error(origin, line_no, "field \"genres\" holds more than 5 tags");
    try {
      song.split = parse_split(require_string(obj, "split", origin, line_no));
    } catch (const ValidationError& e) {
      record_error(origin, line_no, e.what());
    }
    songs.push_back(std::move(song));
  }
  return songs;
}

std::string serialize_corpus(const std::vector<Song>& songs) {
  std::string out;
  for (const auto& s : songs) {
    ordered_json obj;
    obj["id"] = s.id;
    obj["title"] = s.title;
    obj["lyricists"] = s.lyricists;
    obj["lines"] = s.lines;
    obj["length"] = s.lines.size();
    ordered_json genres = ordered_json::array();
    for (GenreTag g : s.genres) genres.push_back(std::string(genre_english_name(g)));
    obj["genres"] = std::move(genres);
    obj["split"] = std::string(split_name(s.split));
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Song> load_corpus(const std::string& path) {
  return parse_corpus(io::read_file(path), path);
}

void save_corpus(const std::vector<Song>& songs, const std::string& path) {
  io::write_file(path, serialize_corpus(songs));
}

std::vector<RawSong> load_raw_songs(const std::string& path) {
  std::vector<RawSong> out;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(io::read_file(path))) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) record_error(path, line_no, "not a JSON object");
    RawSong raw;
    raw.title = require_string(obj, "title", path, line_no);
    raw.lyricists = require_string_array(obj, "lyricists", path, line_no);
    if (raw.lyricists.empty()) record_error(path, line_no, "field \"lyricists\" must be nonempty");
    raw.raw_lyrics = require_string(obj, "raw_lyrics", path, line_no);
    if (obj.contains("id")) raw.id = require_string(obj, "id", path, line_no);
    if (obj.contains("source")) raw.source = require_string(obj, "source", path, line_no);
    out.push_back(std::move(raw));
  }
  return out;
}

}  // namespace lyrav
