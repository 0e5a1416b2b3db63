#include "lyrav/genre_labeling.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "lyrav/csv.hpp"
#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

std::string_view language_name(PromptLanguage lang) {
  return lang == PromptLanguage::kZh ? "zh" : "en";
}

PromptLanguage parse_language(std::string_view s) {
  if (s == "zh") return PromptLanguage::kZh;
  if (s == "en") return PromptLanguage::kEn;
  throw ValidationError("unknown prompt language: " + std::string(s));
}

namespace {

constexpr std::string_view kGenrePromptZh =
    R"(给定以下的流派概念：
1. 爱与浪漫：浪漫、心碎、渴望、想念某人
2. 生活与反思：成长、遗憾、个人教训、沉思
3. 社会与现实：城市斗争、不平等、阶级、政治色彩
4. 风景与旅程：大自然、旅行、风景、漫游、孤独
5. 民俗与传统：传说、文化图标、地区故事、历史主题

请对以下歌词进行分类：
{lyrics}

如果模型认为多个流派几乎同样有可能是这首歌词的流派，可以生成多个流派。
但大多数情况下，应该只提供一个流派。输出应该遵循以下格式：

流派： [流派1]

其中，流派1是流派标签（例如，爱与浪漫，生活与反思）。
如果多个流派几乎同样有可能，则应将它们列在方括号内，并用逗号分隔，例如：
流派： [爱与浪漫, 生活与反思]。
但请注意，大多数情况下应该只有一个流派列在方括号内。
)";

constexpr std::string_view kGenrePromptEn =
    R"(Given the following genre concepts:
1. Love & Romance: Romance, heartbreak, longing, missing someone
2. Life & Reflection: Growth, regret, personal lessons, contemplation
3. Society & Reality: Urban struggles, inequality, class, political tone
4. Landscape & Journey: Nature, travel, scenery, wandering, solitude
5. Folklore & Tradition: Legends, cultural icons, regional storytelling, historical motifs
Please classify the genre of the following lyrics:
{lyrics}
If the model thinks multiple genres are equally likely to be the genre of these lyrics, it can generate multiple genres. However, in most cases, only one genre should be provided. The output should follow the format:
Genres: [Genre1]
Where Genre1 is the genre label (e.g., Love & Romance, Life & Reflection). If multiple genres are equally likely, they should be listed inside the square brackets and separated by commas, e.g., Genres: [Love & Romance, Life & Reflection]. But again, most of the time, there should only be one genre listed inside the brackets.
)";

std::string replace_placeholder(std::string_view tmpl, std::string_view placeholder,
                                std::string_view value) {
  const std::size_t pos = tmpl.find(placeholder);
  if (pos == std::string_view::npos)
    throw ValidationError("prompt template lacks placeholder " + std::string(placeholder));
  std::string out(tmpl);
  out.replace(pos, placeholder.size(), value);
  return out;
}

}  // namespace

std::string_view genre_prompt_template(PromptLanguage lang) {
  return lang == PromptLanguage::kZh ? kGenrePromptZh : kGenrePromptEn;
}

std::string build_genre_prompt(std::string_view lyrics, PromptLanguage lang) {
  if (text::trim(lyrics).empty()) throw ValidationError("build_genre_prompt: empty lyrics");
  return replace_placeholder(genre_prompt_template(lang), "{lyrics}", lyrics);
}

std::vector<GenreTag> parse_genre_response(std::string_view raw) {
  const std::string stripped = text::strip_think_blocks(raw);
  std::string genre_line;
  bool found = false;
  for (const std::string& line : text::split_lines(stripped)) {
    const std::string t = text::trim(line);
    if (t.rfind("流派：", 0) == 0 || t.rfind("流派:", 0) == 0 || t.rfind("Genres:", 0) == 0) {
      genre_line = t;
      found = true;
    }
  }
  if (!found) throw ParseError("missing genre line");

  const std::size_t open = genre_line.find('[');
  const std::size_t close = open == std::string::npos ? std::string::npos
                                                      : genre_line.find(']', open + 1);
  if (open == std::string::npos || close == std::string::npos)
    throw ParseError("empty genre list");
  const std::string inner = genre_line.substr(open + 1, close - open - 1);

  // Split on ASCII and fullwidth commas.
  std::vector<std::string> names;
  std::u32string u = text::decode_utf8(inner);
  std::u32string piece;
  const auto flush = [&] {
    const std::string name = text::trim(text::encode_utf8(piece));
    if (!name.empty()) names.push_back(name);
    piece.clear();
  };
  for (char32_t c : u) {
    if (c == U',' || c == U'，') flush();
    else piece.push_back(c);
  }
  flush();
  if (names.empty()) throw ParseError("empty genre list");

  std::vector<GenreTag> tags;
  for (const auto& name : names) {
    auto tag = parse_genre_name(name);
    if (!tag) throw ParseError("unknown genre: " + name);
    if (std::find(tags.begin(), tags.end(), *tag) == tags.end()) tags.push_back(*tag);
  }
  return tags;
}

std::string_view review_status_name(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kUnreviewed: return "unreviewed";
    case ReviewStatus::kConfirmed: return "confirmed";
    case ReviewStatus::kCorrected: return "corrected";
  }
  return "unreviewed";
}

ReviewStatus parse_review_status(std::string_view s) {
  if (s == "unreviewed") return ReviewStatus::kUnreviewed;
  if (s == "confirmed") return ReviewStatus::kConfirmed;
  if (s == "corrected") return ReviewStatus::kCorrected;
  throw ValidationError("unknown review status: " + std::string(s));
}

LabelResult label_corpus(std::vector<Song>& songs, Gateway& gateway, PromptLanguage language,
                         std::optional<std::size_t> sample_limit) {
  const std::size_t count =
      sample_limit ? std::min(*sample_limit, songs.size()) : songs.size();
  std::vector<std::string> prompts;
  prompts.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    prompts.push_back(build_genre_prompt(songs[i].text(), language));

  const std::vector<BatchItem> responses = gateway.complete_batch(prompts);
  LabelResult result;
  for (std::size_t i = 0; i < count; ++i) {
    Song& song = songs[i];
    const BatchItem& item = responses[i];
    if (!item.ok) {
      result.errors.push_back({song.id, item.error});
      continue;
    }
    try {
      GenreAssignment a;
      a.song_id = song.id;
      a.raw_response = item.value;
      a.prompt_language = language;
      a.tags = parse_genre_response(item.value);
      song.genres = a.tags;
      result.assignments.push_back(std::move(a));
    } catch (const ParseError& e) {
      result.errors.push_back({song.id, e.what()});
    }
  }
  return result;
}

void export_review_sheet(const std::vector<GenreAssignment>& assignments,
                         const std::vector<Song>& songs, const std::string& path) {
  std::unordered_map<std::string, const Song*> by_id;
  for (const auto& s : songs) by_id[s.id] = &s;
  std::string out = "song_id,title,assigned_tags,verdict\n";
  for (const auto& a : assignments) {
    auto it = by_id.find(a.song_id);
    if (it == by_id.end()) throw ValidationError("review export: unknown song id: " + a.song_id);
    out += csv::join_row({a.song_id, it->second->title, format_genre_list(a.tags, "|"), "confirm"});
    out.push_back('\n');
  }
  io::write_file(path, out);
}

namespace {

std::vector<GenreTag> parse_tag_list(std::string_view list, char sep, const std::string& where) {
  std::vector<GenreTag> tags;
  std::string token;
  const auto flush = [&] {
    const std::string name = text::trim(token);
    token.clear();
    if (name.empty()) return;
    auto tag = parse_genre_name(name);
    if (!tag) throw ValidationError(where + ": unknown genre: " + name);
    if (std::find(tags.begin(), tags.end(), *tag) == tags.end()) tags.push_back(*tag);
  };
  for (char c : list) {
    if (c == sep) flush();
    else token.push_back(c);
  }
  flush();
  return tags;
}

}  // namespace

std::vector<GenreAssignment> apply_review(std::vector<GenreAssignment> assignments,
                                          const std::string& path) {
  const auto rows = csv::parse(io::read_file(path));
  if (rows.empty()) throw ValidationError(path + ": empty review sheet");
  // A song may carry several assignments (one per prompt language); a
  // verdict covers all of them.
  std::unordered_map<std::string, std::vector<GenreAssignment*>> by_id;
  for (auto& a : assignments) by_id[a.song_id].push_back(&a);

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = path + ": row " + std::to_string(i + 1);
    const auto& row = rows[i];
    if (row.size() != 4) throw ValidationError(where + ": expected 4 columns");
    const std::string& song_id = row[0];
    auto it = by_id.find(song_id);
    if (it == by_id.end()) throw ValidationError(where + ": unknown song id: " + song_id);
    const std::string verdict = text::trim(row[3]);
    if (verdict == "confirm") {
      for (GenreAssignment* a : it->second) {
        a->verified = ReviewStatus::kConfirmed;
        a->corrected_tags.clear();
      }
    } else if (verdict.rfind("correct:", 0) == 0) {
      auto tags = parse_tag_list(std::string_view(verdict).substr(8), '|', where);
      if (tags.empty()) throw ValidationError(where + ": correction lists no genres");
      for (GenreAssignment* a : it->second) {
        a->verified = ReviewStatus::kCorrected;
        a->corrected_tags = tags;
      }
    } else {
      throw ValidationError(where + ": bad verdict: " + verdict);
    }
  }
  return assignments;
}

void apply_assignments(const std::vector<GenreAssignment>& assignments,
                       std::vector<Song>& songs) {
  std::unordered_map<std::string, Song*> by_id;
  for (auto& s : songs) by_id[s.id] = &s;
  for (const auto& a : assignments) {
    auto it = by_id.find(a.song_id);
    if (it == by_id.end()) throw ValidationError("apply: unknown song id: " + a.song_id);
    it->second->genres = a.effective_tags();
  }
}

std::string serialize_assignments(const std::vector<GenreAssignment>& assignments) {
  std::string out;
  for (const auto& a : assignments) {
    ordered_json obj;
    obj["song_id"] = a.song_id;
    ordered_json tags = ordered_json::array();
    for (GenreTag g : a.tags) tags.push_back(std::string(genre_english_name(g)));
    obj["tags"] = std::move(tags);
    obj["raw_response"] = a.raw_response;
    obj["prompt_language"] = std::string(language_name(a.prompt_language));
    obj["verified"] = std::string(review_status_name(a.verified));
    ordered_json corrected = ordered_json::array();
    for (GenreTag g : a.corrected_tags) corrected.push_back(std::string(genre_english_name(g)));
    obj["corrected_tags"] = std::move(corrected);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<GenreAssignment> parse_assignments(std::string_view jsonl, std::string_view origin) {
  std::vector<GenreAssignment> out;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ValidationError(where + ": not a JSON object");
    GenreAssignment a;
    try {
      a.song_id = obj.at("song_id").get<std::string>();
      for (const auto& name : obj.at("tags")) {
        auto tag = parse_genre_name(name.get<std::string>());
        if (!tag) throw ValidationError(where + ": unknown genre: " + name.get<std::string>());
        a.tags.push_back(*tag);
      }
      a.raw_response = obj.at("raw_response").get<std::string>();
      a.prompt_language = parse_language(obj.at("prompt_language").get<std::string>());
      a.verified = parse_review_status(obj.at("verified").get<std::string>());
      for (const auto& name : obj.at("corrected_tags")) {
        auto tag = parse_genre_name(name.get<std::string>());
        if (!tag) throw ValidationError(where + ": unknown genre: " + name.get<std::string>());
        a.corrected_tags.push_back(*tag);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (a.tags.empty()) throw ValidationError(where + ": assignment lists no tags");
    if (a.verified == ReviewStatus::kCorrected && a.corrected_tags.empty())
      throw ValidationError(where + ": corrected assignment lists no corrected tags");
    out.push_back(std::move(a));
  }
  return out;
}

void save_assignments(const std::vector<GenreAssignment>& assignments, const std::string& path) {
  io::write_file(path, serialize_assignments(assignments));
}

std::vector<GenreAssignment> load_assignments(const std::string& path) {
  return parse_assignments(io::read_file(path), path);
}

}  // namespace lyrav
