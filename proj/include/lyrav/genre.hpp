#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lyrav {

// The five theme genres, in report row order.
enum class GenreTag {
  kFolkloreTradition = 0,
  kLoveRomance,
  kLifeReflection,
  kSocietyReality,
  kLandscapeJourney,
};

inline constexpr std::size_t kGenreCount = 5;

constexpr std::array<GenreTag, kGenreCount> all_genres() {
  return {GenreTag::kFolkloreTradition, GenreTag::kLoveRomance, GenreTag::kLifeReflection,
          GenreTag::kSocietyReality, GenreTag::kLandscapeJourney};
}

// Canonical English name, e.g. "Folklore & Tradition". Used in all file formats.
std::string_view genre_english_name(GenreTag tag);

// Canonical Chinese name, e.g. "民间与传统".
std::string_view genre_chinese_name(GenreTag tag);

// Accepts the English name, the canonical Chinese name, or a known Chinese
// spelling variant (民俗与传统 for 民间与传统). Input is trimmed first.
std::optional<GenreTag> parse_genre_name(std::string_view name);

// Renders a tag in a prompt language: zh -> Chinese name, en -> English name.
std::string_view genre_name(GenreTag tag, std::string_view language);

std::string format_genre_list(const std::vector<GenreTag>& tags, std::string_view sep = ", ");

}  // namespace lyrav
