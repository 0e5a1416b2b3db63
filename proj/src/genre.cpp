#include "lyrav/genre.hpp"

#include "lyrav/errors.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

namespace {

struct GenreNames {
  std::string_view english;
  std::string_view chinese;
  std::string_view chinese_variant;  // empty when there is no known variant
};

// Chinese name variants: the 民俗与传统 spelling appears alongside
// 民间与传统 in the upstream material; both map to the same tag.
constexpr std::array<GenreNames, kGenreCount> kNames = {{
    {"Folklore & Tradition", "民间与传统", "民俗与传统"},
    {"Love & Romance", "爱与浪漫", ""},
    {"Life & Reflection", "生活与反思", ""},
    {"Society & Reality", "社会与现实", ""},
    {"Landscape & Journey", "风景与旅程", ""},
}};

}  // namespace

std::string_view genre_english_name(GenreTag tag) {
  return kNames[static_cast<std::size_t>(tag)].english;
}

std::string_view genre_chinese_name(GenreTag tag) {
  return kNames[static_cast<std::size_t>(tag)].chinese;
}

std::optional<GenreTag> parse_genre_name(std::string_view name) {
  std::string t = text::trim(name);
  for (std::size_t i = 0; i < kGenreCount; ++i) {
    const auto& n = kNames[i];
    if (t == n.english || t == n.chinese || (!n.chinese_variant.empty() && t == n.chinese_variant)) {
      return static_cast<GenreTag>(i);
    }
  }
  return std::nullopt;
}

std::string_view genre_name(GenreTag tag, std::string_view language) {
  if (language == "zh") return genre_chinese_name(tag);
  if (language == "en") return genre_english_name(tag);
  throw ValidationError("unknown prompt language: " + std::string(language));
}

std::string format_genre_list(const std::vector<GenreTag>& tags, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) out += sep;
    out += genre_english_name(tags[i]);
  }
  return out;
}

}  // namespace lyrav
